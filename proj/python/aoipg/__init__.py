"""Policy-gradient agents for age-of-information under random delays.

Configurations are the same JSON documents the ``aoi-pg`` CLI reads; pass a
dict, a JSON string, or a path.
"""

import json
import os

from ._aoipg import (
    AbortError,
    ConfigError,
    derive_seed,
    eta_from_rho,
    lognormal_lag1_correlation,
    rho_label,
    sample_gilbert_elliot,
    sample_lognormal,
)
from . import _aoipg

__all__ = [
    "AbortError",
    "ConfigError",
    "derive_seed",
    "eta_from_rho",
    "lognormal_lag1_correlation",
    "oracle_discard",
    "oracle_wait",
    "resolve_config",
    "rho_label",
    "run",
    "run_checks",
    "sample_gilbert_elliot",
    "sample_lognormal",
]


def _as_json(config):
    if isinstance(config, dict):
        return json.dumps(config)
    if isinstance(config, os.PathLike) or (isinstance(config, str) and not config.lstrip().startswith("{")):
        try:
            with open(config, encoding="utf-8") as f:
                return f.read()
        except OSError as e:
            raise ConfigError(f"config: cannot read {config}: {e.strerror}") from None
    return config


def resolve_config(config):
    """Every effective parameter, defaults included."""
    return json.loads(_aoipg.resolve_config(_as_json(config)))


def run(config, seed=None, jobs=1):
    """Replicated learning run; returns final betas, the mean curve and the mean policy."""
    return _aoipg.run(_as_json(config), seed, jobs)


def oracle_wait(config):
    """Optimal per-state waits on a Gilbert-Elliot channel."""
    return _aoipg.oracle_wait(_as_json(config))


def oracle_discard(config, attempts=10_000_000):
    """Optimal constant discard threshold on a Gilbert-Elliot channel."""
    return _aoipg.oracle_discard(_as_json(config), attempts)


def run_checks(seed=1):
    """Fast invariant suite, one dict per check."""
    return _aoipg.run_checks(seed)
