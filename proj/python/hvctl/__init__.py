"""Regularized controls for the stochastic thermostat heat equation.

Configuration is passed as the flat ``key = value`` text used by the CLI,
optionally with a dict of overrides, e.g. ``run_ensemble(overrides={"paths": 20})``.
"""

from ._hvctl import (
    SCHEMA_VERSION,
    SWEEP_HEADER,
    ConfigError,
    IoError,
    canonical_config,
    clarke_dirderiv,
    clarke_interval,
    config_hash,
    config_keys,
    gramian,
    ito_isometry,
    resolvent,
    run_ensemble,
    selftest,
    solve_path,
    sweep_csv,
    version,
)

__version__ = version()

__all__ = [
    "SCHEMA_VERSION",
    "SWEEP_HEADER",
    "ConfigError",
    "IoError",
    "canonical_config",
    "clarke_dirderiv",
    "clarke_interval",
    "config_hash",
    "config_keys",
    "gramian",
    "ito_isometry",
    "resolvent",
    "run_ensemble",
    "selftest",
    "solve_path",
    "sweep_csv",
    "version",
]
