"""Distributed coordinate dual averaging simulator."""

from ._core import (
    ConfigError,
    DomainError,
    NumericalError,
    bounds,
    canonical_config,
    check_config,
    full_graph,
    mixing_matrix,
    prox_project,
    quantize_delta,
    random_graph,
    ring_graph,
    run,
    sigma2,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "NumericalError",
    "bounds",
    "canonical_config",
    "check_config",
    "full_graph",
    "mixing_matrix",
    "prox_project",
    "quantize_delta",
    "random_graph",
    "ring_graph",
    "run",
    "sigma2",
]
