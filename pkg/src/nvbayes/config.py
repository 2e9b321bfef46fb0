"""Parameter-set files.

A config is a JSON object with the rate keys ``L, r, r35, r45, r51, r52, r12``
(MHz), ``lambda`` (counts per ns per unit excited population), ``dt`` and
``readout_time`` (ns). An optional ``spin`` object holds Rabi-model settings:
``omega_mhz``, ``detuning_mhz`` (cyclic MHz), ``t2_star`` and ``t1`` (ns).
"""
from __future__ import annotations

import hashlib
import json
from importlib import resources
from pathlib import Path

from .dynamics import RateParameters, mhz
from .errors import ConfigError

REQUIRED_KEYS = ("L", "r", "r35", "r45", "r51", "r52", "r12", "lambda", "dt", "readout_time")
RATE_KEYS = ("r", "r35", "r45", "r51", "r52", "r12")


def load_config(path="default", overrides=None) -> dict:
    """Read a config file; ``"default"`` selects the shipped parameter set.

    ``overrides`` (a dict, ``None`` values ignored) wins over file values.
    """
    try:
        if path in (None, "default"):
            text = resources.files("nvbayes").joinpath("data/default.json").read_text()
        else:
            text = Path(path).read_text()
        cfg = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    cfg = {k: v for k, v in cfg.items() if not k.startswith("_")}
    if path not in (None, "default"):
        # user files may omit keys; fall back to the shipped values
        base = load_config("default")
        base.update(cfg)
        cfg = base
    for key, value in (overrides or {}).items():
        if value is not None:
            cfg[key] = value
    missing = [k for k in REQUIRED_KEYS if k not in cfg]
    if missing:
        raise ConfigError(f"config is missing keys: {', '.join(missing)}")
    try:
        for key in REQUIRED_KEYS:
            cfg[key] = float(cfg[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"non-numeric config value: {exc}") from exc
    return cfg


def rate_parameters(cfg: dict) -> RateParameters:
    """Build :class:`RateParameters` in 1/ns from a config in MHz."""
    return RateParameters(
        L=cfg["L"],
        lam=cfg["lambda"],
        **{k: mhz(cfg[k]) for k in RATE_KEYS},
    )


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]
