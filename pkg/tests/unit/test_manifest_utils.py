"""
Unit tests for run manifests
"""

import pytest

from manifest_utils import (
    MANIFEST_FORMAT_VERSION, create_manifest, finalize_manifest, load_manifest, manifest_path,
    validate_manifest, write_manifest
)
from modules.shallow_water import __version__
from modules.shallow_water.errors import StorageError
from modules.shallow_water.storage import read_json


class TestManifest:
    """Test manifest creation and validation"""

    @pytest.mark.unit
    def test_create(self):
        """Test the manifest layout"""
        manifest = create_manifest("table", {"alpha": 0.15})
        assert manifest["version"] == MANIFEST_FORMAT_VERSION
        assert manifest["tool"] == "dispersia"
        assert manifest["tool_version"] == __version__
        assert manifest["outputs"] == {}
        assert manifest["wall_time"] is None
        assert validate_manifest(manifest) == []

    @pytest.mark.unit
    def test_write_finalize_load(self, output_dir):
        """Test the manifest is rewritten with outputs and wall time"""
        manifest = create_manifest("solution", {"k": 1.0})
        path = write_manifest(output_dir, manifest)
        assert path == manifest_path(output_dir)
        assert read_json(path)["wall_time"] is None

        finalize_manifest(output_dir, manifest, outputs={"profile": "profile.csv"}, wall_time=0.5,
                          note="done")
        loaded = load_manifest(output_dir)
        assert loaded["outputs"] == {"profile": "profile.csv"}
        assert loaded["wall_time"] == 0.5
        assert loaded["note"] == "done"

    @pytest.mark.unit
    def test_validate_problems(self):
        """Test every structural problem is listed"""
        errors = validate_manifest({"version": 7, "parameters": [], "outputs": None})
        assert len(errors) == 4
        assert validate_manifest([]) == ["manifest is not a JSON object"]

    @pytest.mark.unit
    def test_load_invalid(self, output_dir):
        """Test loading a manifest with a wrong version"""
        manifest = create_manifest("export", {})
        manifest["version"] = 99
        write_manifest(output_dir, manifest)
        with pytest.raises(StorageError) as exc_info:
            load_manifest(output_dir)
        assert exc_info.value.exit_code == 4

    @pytest.mark.unit
    def test_load_missing(self, tmp_path):
        """Test loading from a directory without a manifest"""
        with pytest.raises(StorageError):
            load_manifest(str(tmp_path))
