import logging
import os
import platform
from datetime import datetime, timezone

from modules.shallow_water import __version__
from modules.shallow_water.errors import StorageError
from modules.shallow_water.storage import read_json, write_json

MANIFEST_FORMAT_VERSION = 1
MANIFEST_NAME = "run.json"


def create_manifest(command, parameters, outputs=None):
    """Build the run manifest written into every output directory.

    Layout:
        {
            "version": 1,
            "tool": "dispersia",
            "tool_version": "<package version>",
            "command": "<cli command>",
            "parameters": {...the full resolved parameter set...},
            "outputs": {...relative output paths...},
            "exported_at": "<ISO-8601 UTC>",
            "wall_time": null until the run finishes
        }

    Args:
        command (str): CLI command (or library entry) that produced the outputs
        parameters (dict): Every parameter the outputs depend on
        outputs (dict | None): Output names relative to the directory

    Returns:
        dict: The manifest
    """
    return {
        "version": MANIFEST_FORMAT_VERSION,
        "tool": "dispersia",
        "tool_version": __version__,
        "python": platform.python_version(),
        "command": command,
        "parameters": parameters,
        "outputs": outputs or {},
        "exported_at": datetime.now(timezone.utc).isoformat(),
        "wall_time": None,
    }


def manifest_path(directory):
    return os.path.join(directory, MANIFEST_NAME)


def write_manifest(directory, manifest):
    """Write (or rewrite) the single manifest of an output directory"""
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as e:
        raise StorageError(f"Cannot create output directory {directory}: {e}")
    path = manifest_path(directory)
    write_json(path, manifest)
    logging.debug(f"[MANIFEST] Wrote {path}")
    return path


def finalize_manifest(directory, manifest, outputs=None, wall_time=None, **extra):
    """Record outputs and wall time once the run is done, then rewrite the file"""
    if outputs:
        manifest["outputs"].update(outputs)
    manifest["wall_time"] = wall_time
    manifest.update(extra)
    return write_manifest(directory, manifest)


def validate_manifest(data):
    """Return a list of problems with a loaded manifest (empty when valid)"""
    errors = []
    if not isinstance(data, dict):
        return ["manifest is not a JSON object"]
    version = data.get("version")
    if version != MANIFEST_FORMAT_VERSION:
        errors.append(f"unsupported manifest version: {version!r}")
    if not data.get("command"):
        errors.append("manifest has no command")
    if not isinstance(data.get("parameters"), dict):
        errors.append("manifest parameters are not an object")
    if not isinstance(data.get("outputs"), dict):
        errors.append("manifest outputs are not an object")
    return errors


def load_manifest(directory):
    """Read and validate the manifest of an output directory"""
    data = read_json(manifest_path(directory))
    errors = validate_manifest(data)
    if errors:
        raise StorageError(f"Invalid manifest in {directory}: {', '.join(errors)}", {"errors": errors})
    return data
