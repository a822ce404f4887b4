"""
Unit tests for field and JSON storage
"""

import json
import math
import os

import numpy as np
import pytest

from modules.shallow_water.errors import StorageError
from modules.shallow_water.models import Field2D, Grid2D
from modules.shallow_water.storage import (
    FIELD_MAGIC, TrajectoryWriter, canonical_json, decode_field, encode_field, load_snapshots,
    read_field, read_json, write_field, write_field_csv, write_json
)


class TestCanonicalJson:
    """Test deterministic JSON output"""

    @pytest.mark.unit
    def test_sorted_keys(self):
        """Test key order does not depend on insertion order"""
        assert canonical_json({"b": 1, "a": 2}) == canonical_json({"a": 2, "b": 1})
        assert canonical_json({"b": 1, "a": 2}).index('"a"') < canonical_json({"b": 1, "a": 2}).index('"b"')

    @pytest.mark.unit
    def test_float_precision(self):
        """Test floats keep 17 significant digits and parse back exactly"""
        value = 0.1 + 0.2
        text = canonical_json({"x": value, "y": np.float64(1.5), "n": np.int64(3)})
        parsed = json.loads(text)
        assert parsed["x"] == value
        assert parsed["y"] == 1.5
        assert parsed["n"] == 3

    @pytest.mark.unit
    def test_special_values(self):
        """Test non-finite floats, booleans and empty containers"""
        parsed = json.loads(canonical_json({"nan": math.nan, "flag": True, "empty": [], "none": None}))
        assert parsed == {"nan": None, "flag": True, "empty": [], "none": None}

    @pytest.mark.unit
    def test_unserializable(self):
        """Test unknown types raise a storage error"""
        with pytest.raises(StorageError):
            canonical_json({"bad": object()})


class TestJsonFiles:
    """Test JSON file helpers"""

    @pytest.mark.unit
    def test_write_and_read(self, tmp_path):
        """Test a document survives a write and read"""
        path = str(tmp_path / "nested" / "doc.json")
        write_json(path, {"a": [1, 2.5, "x"]})
        assert read_json(path) == {"a": [1, 2.5, "x"]}

    @pytest.mark.unit
    def test_missing_file(self, tmp_path):
        """Test reading a missing file"""
        with pytest.raises(StorageError):
            read_json(str(tmp_path / "missing.json"))

    @pytest.mark.unit
    def test_invalid_json(self, tmp_path):
        """Test reading malformed JSON"""
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(StorageError) as exc_info:
            read_json(str(path))
        assert exc_info.value.exit_code == 4


class TestFieldFiles:
    """Test the DSP1 binary field format"""

    @pytest.mark.unit
    def test_bit_exact(self, tmp_path, plane_field):
        """Test a field is reproduced bit for bit"""
        path = str(tmp_path / "u.bin")
        write_field(path, plane_field)
        loaded = read_field(path)
        assert loaded.grid == plane_field.grid
        assert np.array_equal(loaded.values, plane_field.values)

    @pytest.mark.unit
    def test_layout(self, plane_field):
        """Test the header and x-major little-endian payload"""
        payload = encode_field(plane_field)
        assert payload[:4] == FIELD_MAGIC
        assert len(payload) == 4 + 8 + 8 + 8 + 8 + 8 * 64 * 64
        first = np.frombuffer(payload, dtype="<f8", offset=36, count=2)
        assert first[0] == plane_field.values[0, 0]
        assert first[1] == plane_field.values[0, 1]

    @pytest.mark.unit
    def test_bad_magic(self, plane_field):
        """Test a wrong magic is rejected"""
        payload = b"XXXX" + encode_field(plane_field)[4:]
        with pytest.raises(StorageError):
            decode_field(payload)

    @pytest.mark.unit
    def test_truncated(self, plane_field):
        """Test truncated headers and payloads are rejected"""
        payload = encode_field(plane_field)
        with pytest.raises(StorageError):
            decode_field(payload[:10])
        with pytest.raises(StorageError):
            decode_field(payload[:-8])

    @pytest.mark.unit
    def test_missing_field(self, tmp_path):
        """Test reading a missing field file"""
        with pytest.raises(StorageError):
            read_field(str(tmp_path / "none.bin"))

    @pytest.mark.unit
    def test_csv(self, tmp_path):
        """Test the x,y,u CSV layout"""
        grid = Grid2D(8, 8, 1.0, 2.0)
        field = Field2D.from_function(grid, lambda x, y: x + 10 * y)
        path = str(tmp_path / "u.csv")
        write_field_csv(path, field)
        with open(path) as f:
            lines = f.read().splitlines()
        assert lines[0] == "x,y,u"
        assert len(lines) == 65
        x, y, u = (float(v) for v in lines[2].split(","))
        assert (x, y) == (0.0, 0.25)
        assert u == pytest.approx(2.5)


class TestTrajectoryWriter:
    """Test run directories"""

    @pytest.mark.unit
    def test_snapshots_and_diagnostics(self, tmp_path, plane_field):
        """Test numbered snapshots, diagnostics and reloading"""
        directory = str(tmp_path / "run")
        writer = TrajectoryWriter(directory)
        first = writer.add_snapshot(0.0, plane_field)
        second = writer.add_snapshot(0.5, plane_field.like(2 * plane_field.values))
        assert (first, second) == ("snapshot_00000.bin", "snapshot_00001.bin")
        assert writer.write_diagnostics_csv() == "diagnostics.csv"
        assert writer.diagnostics[1].l2 == pytest.approx(4 * writer.diagnostics[0].l2)

        loaded = load_snapshots(directory, {"outputs": {"snapshots": writer.snapshots}})
        assert len(loaded) == 2
        assert np.array_equal(loaded[1].values, 2 * plane_field.values)
        assert os.path.exists(os.path.join(directory, "diagnostics.csv"))
