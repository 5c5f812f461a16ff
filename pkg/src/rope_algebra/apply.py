"""Applying RoPE rotations to query/key batches and scoring them."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES
from .errors import DimensionError, DomainError, InconsistencyError
from .generators import GeneratorSet, rope_matrix_dense, rope_matrix_fast


@dataclass(frozen=True, eq=False)
class TokenBatch:
    """``positions`` is (count, N); ``vectors`` is (count, d)."""

    positions: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        vec = np.array(self.vectors, dtype=float)
        if pos.ndim == 1:
            pos = pos[:, None]
        if vec.ndim != 2 or pos.ndim != 2 or len(pos) != len(vec):
            raise DimensionError(f"positions {pos.shape} and vectors {vec.shape} disagree")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vec))):
            raise DomainError("batch has non-finite entries")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "vectors", vec)

    @property
    def count(self) -> int:
        return len(self.vectors)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @classmethod
    def random(cls, gen: GeneratorSet, count: int, rng: np.random.Generator, range_: float = 50.0) -> "TokenBatch":
        return cls(
            rng.uniform(-range_, range_, size=(count, gen.n_axes)),
            rng.standard_normal((count, gen.d)),
        )

    def to_dict(self) -> dict:
        return {"positions": self.positions.tolist(), "vectors": self.vectors.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data) -> "TokenBatch":
        return cls(data["positions"], data["vectors"])

    @classmethod
    def from_json(cls, text: str) -> "TokenBatch":
        return cls.from_dict(json.loads(text))


def _check_batch(gen: GeneratorSet, batch: TokenBatch) -> None:
    if batch.dim != gen.d or batch.positions.shape[1] != gen.n_axes:
        raise DimensionError(
            f"batch has d={batch.dim}, N={batch.positions.shape[1]}; generator set has d={gen.d}, N={gen.n_axes}"
        )


def rotate_batch(gen: GeneratorSet, batch: TokenBatch) -> TokenBatch:
    """Rotate each vector by ``R(x_t)``; positions are carried over."""
    _check_batch(gen, batch)
    rotated = np.stack([rope_matrix_fast(gen, x) @ v for x, v in zip(batch.positions, batch.vectors)])
    return TokenBatch(batch.positions, rotated)


def attention_scores(q_batch: TokenBatch, k_batch: TokenBatch) -> np.ndarray:
    """Raw dot-product logits ``q_s . k_t`` (no scaling, no softmax)."""
    if q_batch.dim != k_batch.dim:
        raise DimensionError(f"query dim {q_batch.dim} != key dim {k_batch.dim}")
    return q_batch.vectors @ k_batch.vectors.T


def relative_scores_oracle(gen: GeneratorSet, raw_q: TokenBatch, raw_k: TokenBatch) -> np.ndarray:
    """``q_s^T R(x_t - x_s) k_t`` evaluated on unrotated vectors via the dense path."""
    _check_batch(gen, raw_q)
    _check_batch(gen, raw_k)
    out = np.empty((raw_q.count, raw_k.count))
    for s, (xs, qs) in enumerate(zip(raw_q.positions, raw_q.vectors)):
        for t, (xt, kt) in enumerate(zip(raw_k.positions, raw_k.vectors)):
            out[s, t] = qs @ rope_matrix_dense(gen, xt - xs) @ kt
    return out


def block_angles(gen: GeneratorSet, r_rel) -> tuple[np.ndarray, float]:
    """Per-block angles of ``q^T r_rel q`` and how far it is from block-rotation form."""
    r = np.asarray(r_rel, dtype=float)
    if r.shape != (gen.d, gen.d):
        raise DimensionError(f"rotation has shape {r.shape}, expected {(gen.d, gen.d)}")
    q = gen.basis_change()
    core = q.T @ r @ q
    even = np.arange(0, gen.d, 2)
    odd = even + 1
    angles = np.arctan2(core[odd, even], core[even, even])
    angles[angles <= -np.pi] = np.pi
    rebuilt = np.zeros_like(core)
    c, s = np.cos(angles), np.sin(angles)
    rebuilt[even, even] = c
    rebuilt[odd, odd] = c
    rebuilt[even, odd] = -s
    rebuilt[odd, even] = s
    return angles, float(np.max(np.abs(core - rebuilt)))


def recover_displacement(gen: GeneratorSet, r_rel, tol: float = DEFAULT_TOLERANCES.lstsq_residual) -> np.ndarray:
    """Invert ``dx -> R(dx)`` inside the fundamental period.

    Block angles are read with ``atan2`` (range (-pi, pi]) and the
    frequency system ``angles = lam^T dx`` is solved by least squares.
    Raises :class:`InconsistencyError` if the system is rank deficient or the
    fit leaves a residual above ``tol``.
    """
    lam = gen.coefficient_matrix()
    angles, off_block = block_angles(gen, r_rel)
    if off_block > tol:
        raise InconsistencyError(f"matrix is not a block rotation in this basis (residual {off_block:.3e})")
    system = lam.T
    dx, _, rank, _ = np.linalg.lstsq(system, angles, rcond=None)
    if rank < gen.n_axes:
        raise InconsistencyError(
            f"frequency matrix has rank {rank} < {gen.n_axes} axes; displacement is not unique"
        )
    fit = float(np.max(np.abs(system @ dx - angles))) if angles.size else 0.0
    if fit > tol:
        raise InconsistencyError(f"least-squares residual {fit:.3e} exceeds {tol:g}")
    return dx
