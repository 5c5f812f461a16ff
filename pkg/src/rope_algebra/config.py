"""Numerical tolerances and defaults used across the package."""

from dataclasses import dataclass

DEFAULT_SEED = 0
DEFAULT_BASE = 10000.0


@dataclass(frozen=True)
class Tolerances:
    skew: float = 1e-12
    orthogonality: float = 1e-10
    determinant: float = 1e-8
    commutator: float = 1e-12
    rank_rel: float = 1e-12
    relativity: float = 1e-9
    reversibility: float = 1e-6
    fast_dense: float = 1e-10
    lstsq_residual: float = 1e-6
    max_condition: float = 1e12


DEFAULT_TOLERANCES = Tolerances()
