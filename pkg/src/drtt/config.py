"""Pipeline configuration: TOML files, flag/env overrides, defaults.

A config file is a TOML document whose sections and keys mirror the CLI
flags one to one. Unknown sections or keys are rejected. A manifest JSON
written by a previous run can be passed wherever a config file is expected;
its embedded resolved config is used, which reproduces the run.
"""

from __future__ import annotations

import copy
import hashlib
import json
import os
import sys
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised only on 3.10
    import tomli as tomllib


class ConfigError(ValueError):
    """Invalid configuration; the CLI maps this to exit code 1."""


# thresholds (beta, gamma) per language pair; c and k are pair-independent
LANG_PAIR_DEFAULTS: dict[tuple[str, str], tuple[float, float]] = {
    ("zh", "en"): (0.01, 0.5),
    ("en", "de"): (0.5, 0.5),
    ("en", "fr"): (0.5, 0.5),
}
FALLBACK_BETA_GAMMA = (0.5, 0.5)

BACKEND_ROLES = ("fwd", "bwd", "mmlm", "tmlm", "victim")
ENV_PREFIX = "DRTT_BACKEND_"

DEFAULT_CONFIG: dict = {
    "langs": {"src": "src", "tgt": "tgt"},
    "paths": {
        "src": "",
        "tgt": "",
        "tsv": "",
        "out_dir": "out",
        "embeddings": "",
        "lexicon_fwd": "",
        "lexicon_rev": "",
        "alignments": "",
        "candidates": "",
        "hyp": "",
        "ref": "",
        "hyp_a": "",
        "hyp_b": "",
    },
    "backends": {"fwd": "", "bwd": "", "mmlm": "", "tmlm": "", "victim": ""},
    "generate": {
        "beta": None,
        "gamma": None,
        "c": 0.2,
        "k": 1,
        "max_len": 4,
        "strategy": "shortest",
        "search": "global",
        "budget_unit": "segments",
        "seed": 0,
    },
    "align": {
        "iterations": 5,
        "tension": 4.0,
        "p_null": 0.08,
        "heuristic": "grow_diag_final_and",
    },
    "noise": {
        "kinds": ["deletion", "swap", "insertion"],
        "ratios": [0.1, 0.2, 0.3],
        "seed": 0,
    },
    "eval": {
        "gammas": [-10.0, -1.0, 0.0, 0.5, 1.0],
        "n_resamples": 1000,
        "seed": 0,
    },
    "run": {"workers": 0, "seed": 0},  # workers 0 means one per logical core
}


def criterion_defaults(src_lang: str, tgt_lang: str) -> tuple[float, float]:
    """(beta, gamma) defaults for a language pair."""
    return LANG_PAIR_DEFAULTS.get((src_lang, tgt_lang), FALLBACK_BETA_GAMMA)


def load_config_file(path: str | Path) -> dict:
    """Read a TOML config, or the embedded config of a manifest JSON."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    if path.suffix == ".json":
        obj = json.loads(path.read_text(encoding="utf-8"))
        if isinstance(obj, dict) and "config" in obj and "command" in obj:
            obj = obj["config"]
        if not isinstance(obj, dict):
            raise ConfigError(f"{path}: JSON config must be an object")
        return obj
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _check_type(section: str, key: str, value, default):
    if default is None or value is None:
        return value
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"config key {section}.{key} must be a boolean")
    elif isinstance(default, float):
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"config key {section}.{key} must be a number")
        value = float(value)
    elif isinstance(default, int):
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"config key {section}.{key} must be an integer")
    elif isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"config key {section}.{key} must be a string")
    elif isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"config key {section}.{key} must be a list")
    return value


def resolve(file_cfg: dict | None = None, overrides: dict | None = None) -> dict:
    """Merge defaults, a config file, environment, and flag overrides.

    ``overrides`` maps (section, key) to values; None values are ignored so
    unset flags never shadow the file. Unknown sections or keys raise.
    The returned dict always carries concrete beta/gamma, resolved from the
    language pair when unset.
    """
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if file_cfg:
        for section, body in file_cfg.items():
            if section not in cfg:
                raise ConfigError(f"unknown config section '{section}'")
            if not isinstance(body, dict):
                raise ConfigError(f"config section '{section}' must be a table")
            for key, value in body.items():
                if key not in cfg[section]:
                    raise ConfigError(f"unknown config key '{section}.{key}'")
                cfg[section][key] = _check_type(section, key, value, DEFAULT_CONFIG[section][key])
    for role in BACKEND_ROLES:
        env_value = os.environ.get(ENV_PREFIX + role.upper())
        if env_value:
            cfg["backends"][role] = env_value
    if overrides:
        for (section, key), value in overrides.items():
            if value is None:
                continue
            if section not in cfg or key not in cfg[section]:
                raise ConfigError(f"unknown config key '{section}.{key}'")
            cfg[section][key] = value
    beta, gamma = criterion_defaults(cfg["langs"]["src"], cfg["langs"]["tgt"])
    if cfg["generate"]["beta"] is None:
        cfg["generate"]["beta"] = beta
    if cfg["generate"]["gamma"] is None:
        cfg["generate"]["gamma"] = gamma
    return cfg


def effective_workers(cfg: dict) -> int:
    workers = cfg["run"]["workers"]
    if workers <= 0:
        return max(1, os.cpu_count() or 1)
    return workers


def config_hash(cfg: dict) -> str:
    canonical = json.dumps(cfg, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def write_manifest(out_dir: str | Path, command: str, cfg: dict, outputs: list[str]) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "config": cfg,
        "config_hash": config_hash(cfg),
        "seed": cfg["run"]["seed"],
        "outputs": outputs,
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    return path
