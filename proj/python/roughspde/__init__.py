"""Multiplier schemes, rough paths and convergence studies for SPDEs on the circle."""

from ._core import (
    ConfigError,
    DegenerateStudyError,
    QuadratureError,
    besov_norm,
    builtin_scheme_names,
    compute_lambda,
    fit_rate,
    holder_seminorm,
    run_study,
    shuffle,
    transform,
    validate_scheme,
)

__all__ = [
    "ConfigError",
    "DegenerateStudyError",
    "QuadratureError",
    "besov_norm",
    "builtin_scheme_names",
    "compute_lambda",
    "fit_rate",
    "holder_seminorm",
    "run_study",
    "shuffle",
    "transform",
    "validate_scheme",
]
