#!/usr/bin/env python3
"""
Run settings for jetreduce: jet order, numeric tolerances and self-test
sizes, read from jetreduce_config.json with JETREDUCE_* overrides from the
environment or a .env file. Command-line flags are applied on top by the
orchestrator.
"""

import os
import json
import copy
from typing import Dict, Any, Optional
from dotenv import load_dotenv

CONFIG_FILE = os.path.join(os.path.dirname(os.path.abspath(__file__)), "jetreduce_config.json")

DEFAULT_CONFIG: Dict[str, Any] = {
    "jet_order": None,
    "numeric": {
        "tolerance": 1e-6,
        "step": 1e-3,
        "richardson_band": [3.2, 4.8],
    },
    "selftest": {
        "seed": 0,
        "forms": 200,
        "characteristics": 20,
    },
    "output": {
        "format": "text",
    },
}

# environment variable -> (section, key, type)
ENV_OVERRIDES = {
    "JETREDUCE_JET_ORDER": (None, "jet_order", int),
    "JETREDUCE_TOLERANCE": ("numeric", "tolerance", float),
    "JETREDUCE_STEP": ("numeric", "step", float),
    "JETREDUCE_SEED": ("selftest", "seed", int),
    "JETREDUCE_FORMAT": ("output", "format", str),
}


def _merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _merge(base[key], value)
        else:
            base[key] = value
    return base


def load_config(config_file: Optional[str] = None) -> Dict[str, Any]:
    """Defaults, then the JSON file, then JETREDUCE_* variables"""
    load_dotenv()

    config = copy.deepcopy(DEFAULT_CONFIG)
    path = config_file or CONFIG_FILE
    try:
        with open(path, 'r') as f:
            _merge(config, json.load(f))
    except FileNotFoundError:
        if config_file:
            print(f"Config file {config_file} not found. Using default settings.")

    for env_name, (section, key, cast) in ENV_OVERRIDES.items():
        raw = os.getenv(env_name)
        if raw is None or raw == "":
            continue
        try:
            value = cast(raw)
        except ValueError:
            print(f"❌ Ignoring {env_name}={raw!r}: expected {cast.__name__}")
            continue
        target = config if section is None else config[section]
        target[key] = value

    return config


def write_default_config(config_file: str = CONFIG_FILE) -> None:
    """Write the built-in defaults to a config file"""
    with open(config_file, 'w') as f:
        json.dump(DEFAULT_CONFIG, f, indent=2)
    print(f"Created default config file: {config_file}")


if __name__ == "__main__":
    config = load_config()
    print("⚙️ jetreduce settings")
    print(f"Jet order override: {config['jet_order'] or 'per document'}")
    print(f"Tolerance: {config['numeric']['tolerance']}")
    print(f"Self-test seed: {config['selftest']['seed']}")
