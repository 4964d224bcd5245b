"""Sensitivity of ``u(t) = prox_{i_K + g}(r0 + t r1)`` at ``t = 0``.

With ``v(t) = r(t) - grad g(u(t))`` the A1 limit and ``u = proj_K(v)``,
the right derivative is ``u'(0) = prox_{i_C + psi}(r1)`` where ``C`` is the
critical cone of ``K`` at ``v(0)`` and ``psi(z) = <D^2 g(u(0)) z, z> / 2``.
``K`` is restricted to boxes, where the critical cone is computed one
coordinate at a time.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .catalog import CatalogSpec, build
from .core import (
    AlgoConfig,
    Box,
    ConvexFunction,
    DimensionMismatch,
    HessianMissing,
    InvalidSpec,
    MaxIterExceeded,
    Point,
    check_dim,
)
from .fprox import FproxProblem, a1_solve

FD_STEP = 1e-4
FD_TOL = 1e-3


class ConeStatus(enum.Enum):
    FREE = "free"
    NONNEG = "nonneg"
    NONPOS = "nonpos"
    ZERO = "zero"


_STATUS_BOUNDS = {
    ConeStatus.FREE: (-np.inf, np.inf),
    ConeStatus.NONNEG: (0.0, np.inf),
    ConeStatus.NONPOS: (-np.inf, 0.0),
    ConeStatus.ZERO: (0.0, 0.0),
}


@dataclass(frozen=True)
class ConeSpec:
    """Closed convex cone given coordinatewise by :class:`ConeStatus` values."""

    statuses: tuple

    @property
    def dim(self) -> int:
        return len(self.statuses)

    def as_box(self) -> Box:
        lo, hi = zip(*(_STATUS_BOUNDS[s] for s in self.statuses))
        return Box(np.array(lo), np.array(hi))

    def contains(self, w, tol: float = 0.0) -> bool:
        return self.as_box().contains(w, tol)

    def project(self, w) -> Point:
        return self.as_box().clip(w)

    def indicator(self) -> ConvexFunction:
        box = self.as_box()
        return build(CatalogSpec("indicator_box", {"lo": list(box.lo), "hi": list(box.hi)}))

    def __str__(self) -> str:
        return "(" + ", ".join(s.value for s in self.statuses) + ")"


def critical_cone(K: Box, v, tol: float = 1e-9) -> ConeSpec:
    """Critical cone of the box ``K`` at ``v``.

    Coordinates whose projection is interior are free; at an active bound
    the tangent direction is a halfline, and it collapses to ``{0}`` when
    ``v`` lies strictly outside (the normal component must be orthogonal).
    ``tol`` decides when ``v_i`` counts as sitting on a bound.
    """
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    check_dim(v, K.dim, "v")
    proj = K.clip(v)
    out = []
    for vi, pi, lo, hi in zip(v, proj, K.lo, K.hi):
        at_lo = pi - lo <= tol
        at_hi = hi - pi <= tol
        if at_lo and at_hi:
            out.append(ConeStatus.ZERO)
        elif not (at_lo or at_hi):
            out.append(ConeStatus.FREE)
        elif abs(vi - pi) > tol:
            out.append(ConeStatus.ZERO)
        else:
            out.append(ConeStatus.NONNEG if at_lo else ConeStatus.NONPOS)
    return ConeSpec(tuple(out))


@dataclass(frozen=True)
class ViProblem:
    """Box constraint ``K``, smooth ``g`` and the affine path ``r(t) = r0 + t r1``."""

    K: Box
    g: ConvexFunction
    r0: Point
    r1: Point

    def __post_init__(self):
        if self.g.hessian_apply is None:
            raise HessianMissing(f"{self.g.name} has no Hessian")
        for name in ("r0", "r1"):
            v = np.atleast_1d(np.asarray(getattr(self, name), dtype=np.float64))
            check_dim(v, self.g.dim, name)
            object.__setattr__(self, name, v)
        if self.K.dim != self.g.dim:
            raise DimensionMismatch("K and g live in different dimensions")

    @property
    def dim(self) -> int:
        return self.g.dim

    def constraint(self) -> ConvexFunction:
        return build(CatalogSpec("indicator_box", {"lo": list(self.K.lo), "hi": list(self.K.hi)}))

    def r(self, t: float) -> Point:
        return self.r0 + t * self.r1


def _solve(p: FproxProblem, x, cfg: AlgoConfig):
    res = a1_solve(p, x, cfg)
    if not res.converged:
        raise MaxIterExceeded(f"A1 stalled at residual {res.residual:.3e}", res)
    return res


def trajectory(p: ViProblem, t: float, cfg: Optional[AlgoConfig] = None) -> tuple:
    """``(u(t), v(t))``: the prox of the sum and the A1 limit behind it."""
    if t < 0:
        raise InvalidSpec("the path parameter must be nonnegative")
    res = _solve(FproxProblem(p.constraint(), p.g), p.r(t), cfg or AlgoConfig())
    return res.prox_value, res.y_star


def hessian_matrix(g: ConvexFunction, at: Point) -> np.ndarray:
    if g.hessian_apply is None:
        raise HessianMissing(f"{g.name} has no Hessian")
    eye = np.eye(g.dim)
    H = np.column_stack([g.hessian_apply(at, e) for e in eye])
    return 0.5 * (H + H.T)


def quadratic_form(H: np.ndarray) -> ConvexFunction:
    """``z -> <H z, z> / 2`` for a symmetric positive semidefinite ``H``."""
    H = np.asarray(H, dtype=np.float64)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or not np.allclose(H, H.T):
        raise InvalidSpec("H must be a symmetric square matrix")
    eigs = np.linalg.eigvalsh(H)
    if eigs[0] < -1e-12 * max(1.0, abs(eigs[-1])):
        raise InvalidSpec("H is not positive semidefinite")
    dim = H.shape[0]
    eye = np.eye(dim)
    return ConvexFunction(
        name="hessian_quadratic",
        dim=dim,
        value=lambda z: 0.5 * np.einsum("...i,ij,...j->...", z, H, z),
        prox=lambda x, step: np.linalg.solve(eye + step * H, x),
        domain_box=Box.full(dim),
        gradient=lambda z: H @ z,
        hessian_apply=lambda base, d: H @ d,
        prox_range_box=Box.full(dim),
        lipschitz_gradient=float(max(eigs[-1], 0.0)),
    )


@dataclass(frozen=True)
class DerivativeDetails:
    u0: Point
    v0: Point
    cone: ConeSpec
    hessian: np.ndarray
    v_prime: Point
    u_prime: Point


def derivative_at_zero(p: ViProblem, cfg: Optional[AlgoConfig] = None, *, full_output: bool = False):
    """``u'(0) = prox_{i_C + psi}(r1)`` computed with A1.

    ``C = critical_cone(K, v(0))`` and ``psi`` is the quadratic form of the
    Hessian of ``g`` at ``u(0)``. With ``full_output`` the intermediate
    objects, including ``v'(0)`` (the A1 limit of the derivative problem),
    are returned in a :class:`DerivativeDetails`.
    """
    cfg = cfg or AlgoConfig()
    u0, v0 = trajectory(p, 0.0, cfg)
    cone = critical_cone(p.K, v0)
    H = hessian_matrix(p.g, u0)
    pair = FproxProblem(cone.indicator(), quadratic_form(H))
    res = _solve(pair, p.r1, cfg)
    if not full_output:
        return res.prox_value
    return res.prox_value, DerivativeDetails(u0, v0, cone, H, res.y_star, res.prox_value)


@dataclass(frozen=True)
class FdReport:
    derivative: Point
    finite_difference: Point
    error: float
    h: float
    agrees: bool
    message: str


def fd_check(
    p: ViProblem,
    h: float = FD_STEP,
    tol: float = FD_TOL,
    cfg: Optional[AlgoConfig] = None,
) -> FdReport:
    """Compare ``derivative_at_zero`` with the forward difference ``(u(h) - u(0)) / h``.

    Disagreement is the empirical sign that ``u`` is not differentiable at 0.
    """
    cfg = cfg or AlgoConfig(tol=1e-13)
    d = derivative_at_zero(p, cfg)
    u0, _ = trajectory(p, 0.0, cfg)
    uh, _ = trajectory(p, h, cfg)
    fd = (uh - u0) / h
    err = float(np.linalg.norm(fd - d))
    agrees = err <= tol
    msg = "ok" if agrees else "differentiability assumption likely violated: u may not be differentiable at t=0"
    return FdReport(d, fd, err, h, agrees, msg)
