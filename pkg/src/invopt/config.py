"""Tolerance and runtime settings.

Settings are plain dictionaries passed explicitly; there is no global
state.  ``load`` reads an ``invopt.toml`` file whose tables map onto the
dotted keys, e.g. ``[lp] tol = 1e-9`` becomes ``lp.tol``.
"""

from pathlib import Path

import tomli

DEFAULTS = {
    "lp.tol": 1e-9,
    "milp.node_cap": 100_000,
    "fw.tol": 1e-8,
    "fw.max_iter": 20_000,
    "activity.tol": 1e-7,
    "bigm.default": 1e4,
    "bigm.retries": 3,
    "cuts.max": 1000,
    "threads": 1,
    "seed": 0,
}


def _flatten(table, prefix=""):
    out = {}
    for key, value in table.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(_flatten(value, name + "."))
        else:
            out[name] = value
    return out


def load(path):
    """Read a TOML settings file into a flat dictionary of dotted keys."""
    with open(Path(path), "rb") as fh:
        raw = _flatten(tomli.load(fh))
    unknown = sorted(set(raw) - set(DEFAULTS))
    if unknown:
        raise KeyError(f"unknown settings: {', '.join(unknown)}")
    return raw


def resolve(config=None, **overrides):
    """Merge defaults, a settings mapping and explicit overrides (in that order)."""
    out = dict(DEFAULTS)
    if config:
        out.update(config)
    out.update({k.replace("_", "."): v for k, v in overrides.items() if v is not None})
    return out


def get(config, key):
    if config and key in config:
        return config[key]
    return DEFAULTS[key]
