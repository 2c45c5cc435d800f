"""Loewner chains, Becker extensions and Beltrami diagnostics."""

import json

from ._core import (
    BeltramiField,
    Chain,
    ClosedFormMap,
    LoewnerError,
    __version__,
    beltrami_field,
    classify_becker,
    evolve,
    parse_config,
    schwarzian,
    schwarzian_norm,
    serialize_config,
)
from ._core import run as _run


def run(config):
    """Run a subcommand from a dict of config keys; returns (exit_code, envelope dict)."""
    code, text = _run({k: str(v) for k, v in config.items()})
    return code, json.loads(text)


__all__ = [
    "BeltramiField",
    "Chain",
    "ClosedFormMap",
    "LoewnerError",
    "__version__",
    "beltrami_field",
    "classify_becker",
    "evolve",
    "parse_config",
    "run",
    "schwarzian",
    "schwarzian_norm",
    "serialize_config",
]
