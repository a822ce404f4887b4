"""
Storage operations for fields, JSON documents and trajectory directories
"""

import io
import json
import logging
import math
import os
import struct
import tempfile
import threading
from typing import Any, Dict, List, Optional

import numpy as np

from .errors import StorageError
from .models import ConservedDiagnostics, Field2D, Grid2D

logger = logging.getLogger(__name__)

FIELD_MAGIC = b"DSP1"
_HEADER = struct.Struct("<4sqqdd")
CSV_FLOAT_FORMAT = "%.17g"


def _atomic_write_bytes(file_path: str, payload: bytes):
    dir_name = os.path.dirname(os.path.abspath(file_path))
    try:
        os.makedirs(dir_name, exist_ok=True)
        with tempfile.NamedTemporaryFile(mode='wb', dir=dir_name, suffix='.tmp', delete=False) as f:
            f.write(payload)
            tmp_path = f.name
        os.replace(tmp_path, file_path)
    except OSError as e:
        raise StorageError(f"Cannot write {file_path}: {e}")


def _canonical(value: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    close = " " * (indent * level)
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return format(value, ".17g") if math.isfinite(value) else "null"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_canonical(v, indent, level + 1)}"
                 for k, v in sorted(value.items(), key=lambda kv: str(kv[0]))]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        if len(value) == 0:
            return "[]"
        items = [f"{pad}{_canonical(v, indent, level + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + "\n" + close + "]"
    raise StorageError(f"Cannot serialize value of type {type(value).__name__}")


def canonical_json(data: Any, indent: int = 2) -> str:
    """Deterministic JSON: sorted keys, floats with 17 significant digits"""
    return _canonical(data, indent, 0) + "\n"


def write_json(file_path: str, data: Any):
    _atomic_write_bytes(file_path, canonical_json(data).encode("utf-8"))


def read_json(file_path: str) -> Any:
    try:
        with open(file_path, "r") as f:
            return json.load(f)
    except FileNotFoundError:
        raise StorageError(f"File not found: {file_path}")
    except (OSError, json.JSONDecodeError) as e:
        raise StorageError(f"Cannot read JSON from {file_path}: {e}")


def encode_field(field: Field2D) -> bytes:
    grid = field.grid
    header = _HEADER.pack(FIELD_MAGIC, grid.nx, grid.ny, grid.length_x, grid.length_y)
    return header + np.ascontiguousarray(field.values, dtype="<f8").tobytes(order="C")


def decode_field(payload: bytes, source: str = "<bytes>") -> Field2D:
    if len(payload) < _HEADER.size:
        raise StorageError(f"{source}: truncated header")
    magic, nx, ny, length_x, length_y = _HEADER.unpack_from(payload)
    if magic != FIELD_MAGIC:
        raise StorageError(f"{source}: bad magic {magic!r}, expected {FIELD_MAGIC!r}")
    expected = _HEADER.size + 8 * nx * ny
    if nx <= 0 or ny <= 0 or len(payload) != expected:
        raise StorageError(f"{source}: expected {expected} bytes for {nx}x{ny}, got {len(payload)}")
    values = np.frombuffer(payload, dtype="<f8", offset=_HEADER.size).reshape(nx, ny)
    try:
        return Field2D(Grid2D(int(nx), int(ny), float(length_x), float(length_y)),
                       values.astype(np.float64))
    except Exception as e:
        raise StorageError(f"{source}: invalid field contents: {e}")


def write_field(file_path: str, field: Field2D):
    """Write the DSP1 little-endian binary layout"""
    _atomic_write_bytes(file_path, encode_field(field))
    logger.debug(f"[STORAGE] Wrote field {field.grid.nx}x{field.grid.ny} to {file_path}")


def read_field(file_path: str) -> Field2D:
    try:
        with open(file_path, "rb") as f:
            payload = f.read()
    except OSError as e:
        raise StorageError(f"Cannot read field {file_path}: {e}")
    return decode_field(payload, file_path)


def write_field_csv(file_path: str, field: Field2D):
    """CSV with columns x,y,u, x-major like the binary layout"""
    x, y = field.grid.mesh()
    table = np.column_stack([x.ravel(), y.ravel(), field.values.ravel()])
    write_table_csv(file_path, ["x", "y", "u"], table)


def write_table_csv(file_path: str, columns: List[str], table: np.ndarray):
    buffer = io.StringIO()
    np.savetxt(buffer, np.atleast_2d(table), delimiter=",", fmt=CSV_FLOAT_FORMAT,
               header=",".join(columns), comments="")
    _atomic_write_bytes(file_path, buffer.getvalue().encode("utf-8"))


class TrajectoryWriter:
    """Writes numbered snapshots and the diagnostics series of one run"""

    SNAPSHOT_PATTERN = "snapshot_{index:05d}.bin"

    def __init__(self, directory: str):
        self.directory = directory
        self._lock = threading.RLock()
        self.snapshots: List[str] = []
        self.diagnostics: List[ConservedDiagnostics] = []
        try:
            os.makedirs(directory, exist_ok=True)
        except OSError as e:
            raise StorageError(f"Cannot create run directory {directory}: {e}")

    def add_snapshot(self, time: float, field: Field2D) -> str:
        with self._lock:
            name = self.SNAPSHOT_PATTERN.format(index=len(self.snapshots))
            write_field(os.path.join(self.directory, name), field)
            self.snapshots.append(name)
            self.diagnostics.append(ConservedDiagnostics.from_field(time, field))
            return name

    def write_diagnostics_csv(self, name: str = "diagnostics.csv") -> str:
        with self._lock:
            table = np.array([[d.time, d.mass, d.l2] for d in self.diagnostics])
            write_table_csv(os.path.join(self.directory, name), ["time", "mass", "l2"], table)
            return name


def load_snapshots(directory: str, run: Optional[Dict[str, Any]] = None) -> List[Field2D]:
    """Read back every snapshot listed in a run document"""
    run = run or read_json(os.path.join(directory, "run.json"))
    names = run.get("outputs", {}).get("snapshots", [])
    return [read_field(os.path.join(directory, name)) for name in names]
