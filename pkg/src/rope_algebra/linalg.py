"""Dense small-matrix primitives.

Everything here works on plain ``numpy`` float arrays. The matrix exponential
is written out by hand (scaling and squaring around a Taylor polynomial) so it
can serve as the reference path that the block-structured fast paths in
:mod:`rope_algebra.generators` are checked against.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionError, DomainError

# canonical 2x2 rotation generator
J = np.array([[0.0, -1.0], [1.0, 0.0]])

TAYLOR_ORDER = 13
SCALED_NORM_BOUND = 0.5


def as_square(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a finite float square matrix or raise."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries")
    return arr


def _squaring_count(a: np.ndarray) -> int:
    norm1 = np.abs(a).sum(axis=0).max() if a.size else 0.0
    if norm1 <= SCALED_NORM_BOUND:
        return 0
    return int(math.ceil(math.log2(norm1 / SCALED_NORM_BOUND)))


def mat_exp_dense(a) -> np.ndarray:
    """Matrix exponential by scaling and squaring.

    The input is scaled by ``2**-s`` until its 1-norm is at most 0.5, the
    degree-13 Taylor polynomial is evaluated in Horner form, and the result
    is squared ``s`` times.
    """
    a = as_square(a, "exponent")
    s = _squaring_count(a)
    m = a / 2.0**s
    eye = np.eye(a.shape[0])
    x = eye.copy()
    for k in range(TAYLOR_ORDER, 0, -1):
        x = eye + (m @ x) / k
    for _ in range(s):
        x = x @ x
    return x


def exp_frechet(a, e) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(exp(a), L)`` where L is the derivative of exp at ``a`` along ``e``.

    L is the exact derivative of the same scaling-and-squaring scheme used by
    :func:`mat_exp_dense` (same ``s``, same Taylor degree).
    """
    a = as_square(a, "exponent")
    e = as_square(e, "direction")
    if a.shape != e.shape:
        raise DimensionError("exponent and direction shapes differ")
    s = _squaring_count(a)
    scale = 2.0**s
    m, dm = a / scale, e / scale
    eye = np.eye(a.shape[0])
    x = eye.copy()
    dx = np.zeros_like(a)
    for k in range(TAYLOR_ORDER, 0, -1):
        dx = (dm @ x + m @ dx) / k
        x = eye + (m @ x) / k
    for _ in range(s):
        dx = x @ dx + dx @ x
        x = x @ x
    return x, dx


def rot2_block(angle: float) -> np.ndarray:
    """2x2 rotation ``[[cos a, -sin a], [sin a, cos a]]``."""
    angle = float(angle)
    if not math.isfinite(angle):
        raise DomainError("angle must be finite")
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def commutator(a, b) -> np.ndarray:
    """Lie bracket ``ab - ba``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape != b.shape:
        raise DimensionError(f"commutator needs equal square shapes, got {a.shape} and {b.shape}")
    return a @ b - b @ a


class StructureResiduals(NamedTuple):
    skew_residual: float
    orth_residual: float
    det_residual: float


def structure_residuals(a) -> StructureResiduals:
    """Distances of ``a`` from so(d) (max-abs) and from SO(d) (Frobenius, |det - 1|)."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"matrix must be square, got shape {a.shape}")
    eye = np.eye(a.shape[0])
    skew = float(np.max(np.abs(a + a.T))) if a.size else 0.0
    orth = float(np.linalg.norm(a.T @ a - eye))
    det = float(abs(np.linalg.det(a) - 1.0))
    return StructureResiduals(skew, orth, det)


def block_diag(blocks: Sequence) -> np.ndarray:
    """Direct sum of square blocks along the diagonal."""
    blocks = [as_square(b, "block") for b in blocks]
    if not blocks:
        raise DomainError("block_diag needs at least one block")
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n))
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i : i + k, i : i + k] = b
        i += k
    return out


def skew_from_upper(params, dim: int) -> np.ndarray:
    """Skew matrix whose strict upper triangle (row-major) is ``params``."""
    params = np.asarray(params, dtype=float)
    rows, cols = np.triu_indices(dim, k=1)
    if params.shape != rows.shape:
        raise DimensionError(f"expected {rows.size} parameters for dim {dim}, got {params.size}")
    a = np.zeros((dim, dim))
    a[rows, cols] = params
    a[cols, rows] = -params
    return a


def skew_unit(dim: int, i: int, j: int) -> np.ndarray:
    """The so(d) basis element ``E_ji - E_ij`` (rotation generator of plane i, j)."""
    e = np.zeros((dim, dim))
    e[j, i] = 1.0
    e[i, j] = -1.0
    return e


def numerical_rank(mat, rel: float = 1e-12, scale: float = 0.0) -> int:
    """Rank from singular values with cutoff ``max(sigma_max, scale) * max(shape) * rel``.

    ``scale`` gives a floor for operators whose entries are pure rounding noise.
    """
    mat = np.asarray(mat, dtype=float)
    if mat.size == 0:
        return 0
    sv = np.linalg.svd(mat, compute_uv=False)
    ref = max(float(sv[0]), scale)
    if ref == 0.0:
        return 0
    return int(np.sum(sv > ref * max(mat.shape) * rel))
