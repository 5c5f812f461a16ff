"""Numerical checks of the RoPE constraint system on a generator set.

Each ``check_*`` function returns one :class:`CheckResult`; ``validate_all``
bundles them into a :class:`ValidationReport` whose verdict is the AND of
all entries. A check passes iff ``residual <= threshold``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass

import numpy as np

from .config import DEFAULT_SEED, DEFAULT_TOLERANCES, Tolerances
from .errors import ResourceError, DomainError
from .generators import GeneratorSet, rope_matrix_dense
from .linalg import commutator, numerical_rank, structure_residuals

MAX_GRID_POINTS = 10_000


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    threshold: float
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckResult, ...]
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        object.__setattr__(self, "checks", tuple(sorted(self.checks, key=lambda c: c.name)))

    @property
    def verdict(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "seed": self.seed, "checks": [asdict(c) for c in self.checks]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _result(name, residual, threshold, detail) -> CheckResult:
    residual = float(residual)
    return CheckResult(name, residual, float(threshold), bool(residual <= threshold), detail)


def check_skew(gen: GeneratorSet, tol: float = DEFAULT_TOLERANCES.skew) -> CheckResult:
    residuals = [structure_residuals(b).skew_residual for b in gen.basis]
    worst = int(np.argmax(residuals))
    return _result("skew", residuals[worst], tol, f"max |B+B^T| over generators, worst axis {worst}")


def check_commutativity(gen: GeneratorSet, tol: float = DEFAULT_TOLERANCES.commutator) -> CheckResult:
    worst, pair = 0.0, None
    for i, k in itertools.combinations(range(gen.n_axes), 2):
        r = float(np.max(np.abs(commutator(gen.basis[i], gen.basis[k]))))
        if r > worst or pair is None:
            worst, pair = r, (i, k)
    detail = "single generator" if pair is None else f"max |[B_i,B_k]|, worst pair {pair}"
    return _result("commutativity", worst, tol, detail)


def generator_rank(gen: GeneratorSet, rel: float = DEFAULT_TOLERANCES.rank_rel) -> int:
    stack = np.stack([b.ravel() for b in gen.basis])
    return numerical_rank(stack, rel)


def check_independence(gen: GeneratorSet, rel: float = DEFAULT_TOLERANCES.rank_rel) -> CheckResult:
    rank = generator_rank(gen, rel)
    return _result("independence", gen.n_axes - rank, 0.0, f"rank {rank} of {gen.n_axes} generators")


def check_relativity(
    gen: GeneratorSet,
    n_samples: int = 200,
    range_: float = 50.0,
    tol: float = DEFAULT_TOLERANCES.relativity,
    seed: int = DEFAULT_SEED,
) -> CheckResult:
    """Max Frobenius norm of ``R(x1)^T R(x2) - R(x2 - x1)`` over random pairs."""
    if n_samples < 1:
        raise DomainError("n_samples must be at least 1")
    rng = np.random.default_rng(seed)
    x1 = rng.uniform(-range_, range_, size=(n_samples, gen.n_axes))
    x2 = rng.uniform(-range_, range_, size=(n_samples, gen.n_axes))
    worst = 0.0
    for a, b in zip(x1, x2):
        lhs = rope_matrix_dense(gen, a).T @ rope_matrix_dense(gen, b)
        worst = max(worst, float(np.linalg.norm(lhs - rope_matrix_dense(gen, b - a))))
    return _result("relativity", worst, tol, f"{n_samples} pairs in [-{range_:g}, {range_:g}]^{gen.n_axes}")


def period_grid(gen: GeneratorSet, grid_per_axis: int) -> np.ndarray:
    """Regular grid covering one fundamental period ``[-P/2, P/2)`` per axis."""
    if grid_per_axis < 2:
        raise DomainError("grid_per_axis must be at least 2")
    n_points = grid_per_axis**gen.n_axes
    if n_points > MAX_GRID_POINTS:
        raise ResourceError(f"grid of {n_points} points exceeds cap {MAX_GRID_POINTS}")
    period = gen.schedule.period
    axis = -period / 2 + period * np.arange(grid_per_axis) / grid_per_axis
    mesh = np.meshgrid(*([axis] * gen.n_axes), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def min_pairwise_distance(gen: GeneratorSet, positions) -> tuple[float, tuple[int, int]]:
    """Smallest Frobenius distance between rotations at distinct positions."""
    positions = np.asarray(positions, dtype=float)
    rots = np.stack([rope_matrix_dense(gen, x).ravel() for x in positions])
    best, pair = np.inf, (-1, -1)
    for i in range(len(rots) - 1):
        dist = np.linalg.norm(rots[i + 1 :] - rots[i], axis=1)
        j = int(np.argmin(dist))
        if dist[j] < best:
            best, pair = float(dist[j]), (i, i + 1 + j)
    return best, pair


def check_reversibility(
    gen: GeneratorSet,
    grid_per_axis: int = 8,
    tol: float = DEFAULT_TOLERANCES.reversibility,
    positions=None,
) -> CheckResult:
    """Grid falsification test for injectivity of ``x -> R(x)``.

    The residual is the negated minimum pairwise distance, so the check
    passes when every pair of distinct grid positions is further apart than
    ``tol``. ``positions`` replaces the period grid when given.
    """
    pts = period_grid(gen, grid_per_axis) if positions is None else np.asarray(positions, dtype=float)
    if len(pts) > MAX_GRID_POINTS:
        raise ResourceError(f"{len(pts)} positions exceed cap {MAX_GRID_POINTS}")
    dist, (i, j) = min_pairwise_distance(gen, pts)
    rank = generator_rank(gen)
    detail = (
        f"min distance {dist:.3e} over {len(pts)} positions, closest {pts[i].tolist()} vs {pts[j].tolist()}; "
        f"independence {'holds' if rank == gen.n_axes else 'fails'} (rank {rank}/{gen.n_axes})"
    )
    return _result("reversibility", -dist, -tol, detail)


def _skew_basis(d: int) -> np.ndarray:
    rows, cols = np.triu_indices(d, k=1)
    basis = np.zeros((rows.size, d, d))
    idx = np.arange(rows.size)
    basis[idx, cols, rows] = 1.0
    basis[idx, rows, cols] = -1.0
    return basis


def centralizer_dimension(gen: GeneratorSet, rel: float = DEFAULT_TOLERANCES.rank_rel) -> int:
    """Dimension of ``{X in so(d) : [X, B_i] = 0 for all i}``.

    Null space of the stacked commutator map, found from the singular values
    of its matrix in the ``E_ab`` basis of so(d).
    """
    d = gen.d
    basis = _skew_basis(d)
    all_skew = all(structure_residuals(b).skew_residual <= DEFAULT_TOLERANCES.skew for b in gen.basis)
    rows, cols = np.triu_indices(d, k=1)
    blocks = []
    for b in gen.basis:
        brackets = basis @ b - b @ basis
        # brackets of two skew matrices are skew: the upper triangle carries everything
        blocks.append(brackets[:, rows, cols] if all_skew else brackets.reshape(len(basis), -1))
    op = np.concatenate(blocks, axis=1)
    scale = max(float(np.linalg.norm(b)) for b in gen.basis)
    return len(basis) - numerical_rank(op, rel, scale)


def check_masa(gen: GeneratorSet) -> CheckResult:
    """Rank bound ``N <= floor(d/2)`` plus a report of the centralizer dimension."""
    rank_bound = gen.d // 2
    nu = centralizer_dimension(gen)
    detail = (
        f"N={gen.n_axes}, floor(d/2)={rank_bound}, centralizer dim={nu}; "
        f"centralizer is toral-sized: {nu == rank_bound}; full MASA basis: {nu == gen.n_axes}"
    )
    return _result("masa", max(0, gen.n_axes - rank_bound), 0.0, detail)


def validate_all(
    gen: GeneratorSet,
    seed: int = DEFAULT_SEED,
    n_samples: int = 200,
    range_: float = 50.0,
    grid_per_axis: int = 8,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> ValidationReport:
    grid = grid_per_axis
    while grid > 2 and grid**gen.n_axes > MAX_GRID_POINTS:
        grid -= 1
    checks = [
        check_skew(gen, tolerances.skew),
        check_commutativity(gen, tolerances.commutator),
        check_independence(gen, tolerances.rank_rel),
        check_relativity(gen, n_samples, range_, tolerances.relativity, seed),
        check_reversibility(gen, grid, tolerances.reversibility),
        check_masa(gen),
    ]
    return ValidationReport(tuple(checks), seed)
