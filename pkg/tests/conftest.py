"""
Pytest configuration and shared fixtures
"""

import json
import os

import pytest

# Import wave family and field fixtures
try:
    from .fixtures.wave_fields import (
        rng, table_params, bottom_params, soliton_family, cnoidal_family,
        superposition_family, kp_soliton_family, square_grid, plane_field,
        ramp_bottom, two_segment_bottom
    )
except ImportError:
    # Fallback if wave_fields fixtures are not available
    pass


@pytest.fixture
def temp_config_file(tmp_path):
    """Temporary configuration file with a couple of overrides"""
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"params": {"alpha": 0.2}, "log_level": "WARNING"}))
    return str(path)


@pytest.fixture
def output_dir(tmp_path):
    """Empty output directory for CLI runs"""
    path = tmp_path / "out"
    return str(path)


@pytest.fixture(autouse=True)
def isolated_config(monkeypatch, tmp_path):
    """Point the default config file at an empty temp location"""
    import config
    monkeypatch.setattr(config, "CONFIG_FILE", os.path.join(str(tmp_path), "missing", "config.json"))
