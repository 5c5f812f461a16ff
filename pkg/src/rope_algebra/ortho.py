"""Orthogonal basis-change parameterizations: Cayley, exponential, Givens.

Cayley and exponential parameters are the strict upper triangle of a skew
matrix ``A`` (row-major). Givens parameters are one angle per plane in a
fixed plan; the product is ``G_r ... G_2 G_1``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES
from .errors import DimensionError, DomainError, NumericalWarning
from .linalg import exp_frechet, mat_exp_dense, skew_from_upper

Kind = Literal["cayley", "exp", "givens"]
KINDS = ("cayley", "exp", "givens")


def default_givens_plan(d: int) -> list[tuple[int, int]]:
    """Every plane ``(i, j)``, ``i < j``, in row-major order."""
    if d < 2:
        raise DomainError("givens plan needs d >= 2")
    return [(i, j) for i in range(d) for j in range(i + 1, d)]


@dataclass(frozen=True, eq=False)
class OrthoParam:
    kind: Kind
    dim: int
    params: np.ndarray
    plan: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown parameterization {self.kind!r}")
        if self.dim < 2:
            raise DomainError("dim must be at least 2")
        params = np.array(self.params, dtype=float).ravel()
        if not np.all(np.isfinite(params)):
            raise DomainError("parameters must be finite")
        plan = None
        if self.kind == "givens":
            plan = tuple((int(i), int(j)) for i, j in (self.plan if self.plan is not None else default_givens_plan(self.dim)))
            if not plan:
                raise DomainError("givens plan is empty")
            for i, j in plan:
                if not 0 <= i < j < self.dim:
                    raise DomainError(f"invalid givens plane ({i}, {j}) for dim {self.dim}")
            expected = len(plan)
        else:
            if self.plan is not None:
                raise DomainError(f"{self.kind} parameterization takes no plan")
            expected = self.dim * (self.dim - 1) // 2
        if params.size != expected:
            raise DimensionError(f"{self.kind} needs {expected} parameters, got {params.size}")
        params.setflags(write=False)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "plan", plan)

    def __len__(self):
        return self.params.size

    def with_params(self, params) -> "OrthoParam":
        return OrthoParam(self.kind, self.dim, params, self.plan)

    @classmethod
    def zeros(cls, kind: Kind, dim: int, plan=None) -> "OrthoParam":
        n = len(plan if plan is not None else default_givens_plan(dim)) if kind == "givens" else dim * (dim - 1) // 2
        return cls(kind, dim, np.zeros(n), plan)

    @classmethod
    def random(cls, kind: Kind, dim: int, rng: np.random.Generator, scale: float = 0.5, plan=None) -> "OrthoParam":
        """Parameters drawn uniformly from ``[-scale, scale]``."""
        p = cls.zeros(kind, dim, plan)
        return p.with_params(rng.uniform(-scale, scale, size=len(p)))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "params": self.params.tolist(),
            "plan": None if self.plan is None else [list(p) for p in self.plan],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data) -> "OrthoParam":
        plan = data.get("plan")
        return cls(data["kind"], int(data["dim"]), data["params"], None if plan is None else [tuple(p) for p in plan])

    @classmethod
    def from_json(cls, text: str) -> "OrthoParam":
        return cls.from_dict(json.loads(text))


def _cayley_factors(a: np.ndarray):
    eye = np.eye(a.shape[0])
    plus = eye + a
    cond = np.linalg.cond(plus)
    if cond > DEFAULT_TOLERANCES.max_condition:
        warnings.warn(f"I + A is ill-conditioned (cond {cond:.2e})", NumericalWarning, stacklevel=3)
    inv = np.linalg.solve(plus, eye)
    return eye - a, inv


def _givens_apply(q: np.ndarray, i: int, j: int, angle: float) -> None:
    """Left-multiply ``q`` in place by the rotation of plane (i, j)."""
    c, s = np.cos(angle), np.sin(angle)
    ri, rj = q[i].copy(), q[j].copy()
    q[i] = c * ri - s * rj
    q[j] = s * ri + c * rj


def givens_product(dim: int, plan: Sequence[tuple[int, int]], angles) -> np.ndarray:
    q = np.eye(dim)
    for (i, j), angle in zip(plan, angles):
        _givens_apply(q, i, j, angle)
    return q


def build_orthogonal(p: OrthoParam) -> np.ndarray:
    if p.kind == "givens":
        return givens_product(p.dim, p.plan, p.params)
    a = skew_from_upper(p.params, p.dim)
    if p.kind == "exp":
        return mat_exp_dense(a)
    minus, inv = _cayley_factors(a)
    # (I - A) and (I + A)^-1 commute, either order is the same matrix
    return minus @ inv


def _unit_direction(p: OrthoParam, index: int) -> np.ndarray:
    unit = np.zeros(len(p))
    unit[index] = 1.0
    return skew_from_upper(unit, p.dim)


def directional_derivative(p: OrthoParam, index: int) -> np.ndarray:
    """Analytic derivative of ``build_orthogonal(p)`` with respect to ``params[index]``."""
    if not 0 <= index < len(p):
        raise DomainError(f"index {index} out of range for {len(p)} parameters")
    if p.kind == "givens":
        q = np.eye(p.dim)
        for k, ((i, j), angle) in enumerate(zip(p.plan, p.params)):
            if k == index:
                c, s = np.cos(angle), np.sin(angle)
                ri, rj = q[i].copy(), q[j].copy()
                q[:] = 0.0
                q[i] = -s * ri - c * rj
                q[j] = c * ri - s * rj
            else:
                _givens_apply(q, i, j, angle)
        return q
    a = skew_from_upper(p.params, p.dim)
    da = _unit_direction(p, index)
    if p.kind == "exp":
        return exp_frechet(a, da)[1]
    minus, inv = _cayley_factors(a)
    return -da @ inv - minus @ inv @ da @ inv


def fd_directional_derivative(p: OrthoParam, index: int, eps: float = 1e-6) -> np.ndarray:
    """Central finite difference of ``build_orthogonal`` along ``params[index]``."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    if not 0 <= index < len(p):
        raise DomainError(f"index {index} out of range for {len(p)} parameters")
    step = np.zeros(len(p))
    step[index] = eps
    hi = build_orthogonal(p.with_params(p.params + step))
    lo = build_orthogonal(p.with_params(p.params - step))
    return (hi - lo) / (2.0 * eps)
