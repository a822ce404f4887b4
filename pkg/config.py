import copy
import json
import os
import tempfile

from modules.shallow_water.errors import ConfigError

CONFIG_FILE = os.environ.get("DISPERSIA_CONFIG", "data/config.json")
DEFAULTS = {
    "params": {"alpha": 0.15, "beta": 0.1, "gamma": 0.05, "delta": 0.0, "tau": 0.0},
    "wave": {"k": 1.0, "l": 0.5, "m_cnoidal": 0.999, "m_superposition": 0.85989},
    "grid": {"nx": 128, "ny": 64, "length_x": 40.0, "length_y": 64.0},
    "evolution": {"dt": 0.004, "t_end": 1.0, "snapshot_every": 10, "dealias": True},
    "residual": {"plane_threshold": 1e-10, "xi_samples": 2048},
    "table": {"tolerance": 2e-4},
    "compat": {"epsilons": [0.1, 0.05, 0.025, 0.0125], "workers": None},
    "log_level": "INFO",
}


def _merge(base, override):
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(path=None):
    path = path or CONFIG_FILE
    if os.path.exists(path):
        try:
            with open(path, "r") as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Cannot read config file {path}: {e}")
        if not isinstance(data, dict):
            raise ConfigError(f"Config file {path} must hold a JSON object")
        return _merge(DEFAULTS, data)
    return copy.deepcopy(DEFAULTS)


def save_config(data, path=None):
    path = path or CONFIG_FILE
    dir_name = os.path.dirname(os.path.abspath(path))
    os.makedirs(dir_name, exist_ok=True)
    with tempfile.NamedTemporaryFile(mode="w", dir=dir_name, suffix=".tmp", delete=False) as f:
        json.dump(data, f, indent=4, sort_keys=True)
        tmp_path = f.name
    os.replace(tmp_path, path)
