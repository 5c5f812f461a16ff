"""RoPE generator sets and position-dependent rotation matrices.

A :class:`GeneratorSet` holds N skew-symmetric generators ``B_1..B_N`` of
so(d) together with an optional orthogonal basis change ``q``. When the set
is block-structured, i.e. ``q^T B_i q`` is a direct sum of scaled 2x2
rotation generators for every i, the per-block coefficients are kept in a
block plan and rotations can be assembled without a dense exponential.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .config import DEFAULT_BASE, DEFAULT_TOLERANCES
from .errors import DimensionError, DomainError, OrthogonalityError, StateError
from .linalg import J, block_diag, mat_exp_dense, structure_residuals

DEGENERATE = "degenerate"



@dataclass(frozen=True)
class FrequencySchedule:
    """Per-block rotation frequencies (radians per position unit)."""

    values: tuple[float, ...]
    base: float = DEFAULT_BASE

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise DomainError("frequency schedule is empty")
        if not all(math.isfinite(v) and v > 0 for v in vals):
            raise DomainError(f"frequencies must be finite and positive, got {vals}")
        if not (math.isfinite(self.base) and self.base > 0):
            raise DomainError("base must be positive")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "base", float(self.base))

    @classmethod
    def from_base(cls, k: int, base: float = DEFAULT_BASE, scale: float = 1.0) -> "FrequencySchedule":
        """Geometric schedule ``scale * base**(-2(k-1)/(2K))`` for k = 1..K."""
        if k < 1:
            raise DomainError("blocks_per_axis must be positive")
        if not base > 0:
            raise DomainError("base must be positive")
        return cls(tuple(scale * base ** (-2.0 * i / (2.0 * k)) for i in range(k)), base)

    @classmethod
    def constant(cls, theta: float, k: int = 1) -> "FrequencySchedule":
        return cls((theta,) * k)

    def __len__(self):
        return len(self.values)

    @property
    def period(self) -> float:
        """Fundamental period ``2*pi / max(values)``."""
        return 2.0 * math.pi / max(self.values)


@dataclass(frozen=True, eq=False)
class GeneratorSet:
    """N generators of so(d) plus basis change and frequency metadata.

    The constructor checks shapes only. Whether the generators actually
    satisfy the RoPE constraints is the job of :mod:`rope_algebra.validate`,
    so corrupted or degenerate sets can still be represented and tested.
    """

    basis: tuple[np.ndarray, ...]
    schedule: FrequencySchedule
    blocks_per_axis: int = 1
    q: np.ndarray | None = None
    block_plan: Mapping[int, tuple[tuple[int, float], ...]] | None = None
    flags: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        basis = tuple(np.array(b, dtype=float) for b in self.basis)
        if not basis:
            raise DomainError("generator set needs at least one generator")
        d = basis[0].shape[0]
        for b in basis:
            if b.ndim != 2 or b.shape != (d, d):
                raise DimensionError("generators must be square and share one dimension")
            if not np.all(np.isfinite(b)):
                raise DomainError("generator has non-finite entries")
        if d < 2 or d % 2:
            raise DomainError(f"matrix dimension must be even and positive, got {d}")
        if self.blocks_per_axis < 1:
            raise DomainError("blocks_per_axis must be positive")
        q = None
        if self.q is not None:
            q = np.array(self.q, dtype=float)
            if q.shape != (d, d):
                raise DimensionError(f"basis change has shape {q.shape}, expected {(d, d)}")
        plan = None
        if self.block_plan is not None:
            plan = {}
            for axis, entries in self.block_plan.items():
                if not 0 <= axis < len(basis):
                    raise DimensionError(f"block plan names axis {axis} of {len(basis)}")
                for blk, _ in entries:
                    if not 0 <= blk < d // 2:
                        raise DimensionError(f"block index {blk} out of range for d={d}")
                plan[int(axis)] = tuple((int(b), float(f)) for b, f in entries)
        for b in basis:
            b.setflags(write=False)
        if q is not None:
            q.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "block_plan", plan)
        object.__setattr__(self, "flags", frozenset(self.flags))

    @property
    def d(self) -> int:
        return self.basis[0].shape[0]

    @property
    def n_axes(self) -> int:
        return len(self.basis)

    @property
    def n_blocks(self) -> int:
        return self.d // 2

    @property
    def degenerate(self) -> bool:
        return DEGENERATE in self.flags

    def basis_change(self) -> np.ndarray:
        return np.eye(self.d) if self.q is None else np.asarray(self.q)

    def coefficient_matrix(self) -> np.ndarray:
        """``lam[i, j]``: coefficient of axis i on 2x2 block j (N x d/2)."""
        if self.block_plan is None:
            raise StateError("generator set has no block plan")
        lam = np.zeros((self.n_axes, self.n_blocks))
        for axis, entries in self.block_plan.items():
            for blk, freq in entries:
                lam[axis, blk] += freq
        return lam

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "n_axes": self.n_axes,
            "blocks_per_axis": self.blocks_per_axis,
            "base": self.schedule.base,
            "frequencies": list(self.schedule.values),
            "basis": [b.ravel().tolist() for b in self.basis],
            "q": None if self.q is None else self.q.ravel().tolist(),
            "flags": sorted(self.flags),
        }

    def to_json(self, **extra) -> str:
        payload = self.to_dict()
        payload.update(extra)
        return json.dumps(payload, indent=2)

    @classmethod
    def from_dict(cls, data: Mapping) -> "GeneratorSet":
        d = int(data["d"])
        n_axes = int(data["n_axes"])
        basis = [np.asarray(b, dtype=float).reshape(d, d) for b in data["basis"]]
        if len(basis) != n_axes:
            raise DimensionError(f"n_axes={n_axes} but {len(basis)} generators supplied")
        q = data.get("q")
        q = None if q is None else np.asarray(q, dtype=float).reshape(d, d)
        schedule = FrequencySchedule(tuple(data["frequencies"]), float(data.get("base", DEFAULT_BASE)))
        gen = cls(
            basis=tuple(basis),
            schedule=schedule,
            blocks_per_axis=int(data.get("blocks_per_axis", 1)),
            q=q,
            flags=frozenset(data.get("flags") or ()),
        )
        plan = derive_block_plan(gen)
        if plan is None:
            return gen
        return cls(gen.basis, gen.schedule, gen.blocks_per_axis, gen.q, plan, gen.flags)

    @classmethod
    def from_json(cls, text: str) -> "GeneratorSet":
        return cls.from_dict(json.loads(text))


def derive_block_plan(gen: GeneratorSet, tol: float = 1e-10) -> dict | None:
    """Recover the block plan from the dense generators, or None if not block-structured."""
    q = gen.basis_change()
    plan: dict[int, list[tuple[int, float]]] = {}
    for axis, b in enumerate(gen.basis):
        core = q.T @ b @ q
        entries = []
        rebuilt = np.zeros_like(core)
        for j in range(gen.n_blocks):
            lam = 0.5 * (core[2 * j + 1, 2 * j] - core[2 * j, 2 * j + 1])
            rebuilt[2 * j : 2 * j + 2, 2 * j : 2 * j + 2] = lam * J
            if lam != 0.0:
                entries.append((j, float(lam)))
        scale = max(1.0, float(np.max(np.abs(core))))
        if np.max(np.abs(core - rebuilt)) > tol * scale:
            return None
        plan[axis] = entries
    return {k: tuple(v) for k, v in plan.items()}


def toral_basis(n_axes: int, blocks_per_axis: int, schedule: FrequencySchedule) -> GeneratorSet:
    """Standard ND RoPE basis from the maximal toral subalgebra of so(2NK).

    Axis i owns the contiguous blocks ``i*K .. (i+1)*K - 1``; block ``i*K + k``
    of ``B_i`` is ``theta_k * J``.
    """
    if n_axes < 1 or blocks_per_axis < 1:
        raise DomainError("n_axes and blocks_per_axis must be positive")
    if len(schedule) != blocks_per_axis:
        raise DimensionError(f"schedule has {len(schedule)} frequencies, expected {blocks_per_axis}")
    n_blocks = n_axes * blocks_per_axis
    zero = np.zeros((2, 2))
    basis = []
    plan = {}
    for axis in range(n_axes):
        blocks = [zero] * n_blocks
        entries = []
        for k, theta in enumerate(schedule.values):
            idx = axis * blocks_per_axis + k
            blocks[idx] = theta * J
            entries.append((idx, theta))
        basis.append(block_diag(blocks))
        plan[axis] = tuple(entries)
    return GeneratorSet(tuple(basis), schedule, blocks_per_axis, None, plan)


def standard_1d(schedule: FrequencySchedule) -> GeneratorSet:
    return toral_basis(1, len(schedule), schedule)


def standard_2d(schedule: FrequencySchedule) -> GeneratorSet:
    return toral_basis(2, len(schedule), schedule)


def mixed_2d(theta1: float, theta2: float) -> GeneratorSet:
    """Mixed-frequency 2D set: both axes share the generator ``theta1 J (+) theta2 J``.

    The rotation then depends only on ``x1 + x2``. Relativity holds but the
    two generators are linearly dependent, so the set is flagged degenerate.
    """
    for t in (theta1, theta2):
        if not (math.isfinite(t) and t > 0):
            raise DomainError("mixed_2d frequencies must be positive")
    b = block_diag([theta1 * J, theta2 * J])
    entries = ((0, float(theta1)), (1, float(theta2)))
    schedule = FrequencySchedule((theta1, theta2))
    return GeneratorSet((b, b.copy()), schedule, 1, None, {0: entries, 1: entries}, frozenset({DEGENERATE}))


def embed_in_larger(gen: GeneratorSet, d_target: int) -> GeneratorSet:
    """Zero-pad every generator into the top-left corner of so(d_target)."""
    if d_target % 2 or d_target <= gen.d:
        raise DomainError(f"d_target must be even and larger than {gen.d}, got {d_target}")
    pad = d_target - gen.d
    basis = tuple(np.pad(b, ((0, pad), (0, pad))) for b in gen.basis)
    q = None
    if gen.q is not None:
        q = block_diag([gen.q, np.eye(pad)])
    return GeneratorSet(basis, gen.schedule, gen.blocks_per_axis, q, gen.block_plan, gen.flags)


def conjugate(gen: GeneratorSet, q, tol: float = DEFAULT_TOLERANCES.orthogonality) -> GeneratorSet:
    """Change basis: ``B_i -> q B_i q^T``; the stored basis change becomes ``q @ gen.q``."""
    q = np.asarray(q, dtype=float)
    if q.shape != (gen.d, gen.d):
        raise DimensionError(f"basis change has shape {q.shape}, expected {(gen.d, gen.d)}")
    orth = structure_residuals(q).orth_residual
    if not orth <= tol:
        raise OrthogonalityError(f"basis change is not orthogonal (residual {orth:.3e})", orth)
    basis = tuple(q @ b @ q.T for b in gen.basis)
    new_q = q if gen.q is None else q @ gen.q
    return GeneratorSet(basis, gen.schedule, gen.blocks_per_axis, new_q, gen.block_plan, gen.flags)


def _position(gen: GeneratorSet, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (gen.n_axes,):
        raise DimensionError(f"position has {x.size} coordinates, generator set has {gen.n_axes} axes")
    if not np.all(np.isfinite(x)):
        raise DomainError("position has non-finite coordinates")
    return x


def generator_sum(gen: GeneratorSet, x) -> np.ndarray:
    """``sum_i x_i B_i``."""
    x = _position(gen, x)
    return np.tensordot(x, np.stack(gen.basis), axes=1)


def rope_matrix_dense(gen: GeneratorSet, x) -> np.ndarray:
    """``exp(sum_i x_i B_i)`` through the dense exponential."""
    return mat_exp_dense(generator_sum(gen, x))


def rope_matrix_fast(gen: GeneratorSet, x) -> np.ndarray:
    """Blockwise rotation: ``q (+)_j rot(sum_i x_i lam_ij) q^T``."""
    if gen.block_plan is None:
        raise StateError("fast path needs a block plan")
    x = _position(gen, x)
    angles = x @ gen.coefficient_matrix()
    c, s = np.cos(angles), np.sin(angles)
    out = np.zeros((gen.d, gen.d))
    even = np.arange(0, gen.d, 2)
    odd = even + 1
    out[even, even] = c
    out[odd, odd] = c
    out[even, odd] = -s
    out[odd, even] = s
    if gen.q is None:
        return out
    return gen.q @ out @ gen.q.T
