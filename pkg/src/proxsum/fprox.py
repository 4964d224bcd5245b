"""The f-proximal operator of g and the fixed-point algorithm computing it.

For ``f, g`` convex, ``prox^f_g = (I + dg o prox_f)^{-1}`` is set-valued in
general. Its elements at ``x`` are exactly the fixed points of

    T(x, y) = y - prox_f(y) + prox_g(x + prox_f(y) - y),

and whenever ``d(f + g) = df + dg`` every element ``y`` satisfies
``prox_f(y) = prox_{f+g}(x)``. Iterating ``T(x, .)`` therefore evaluates the
prox of a sum from the two individual proxes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, NamedTuple, Optional

import numpy as np

from .core import (
    AdditivityUnverified,
    AlgoConfig,
    ConvexFunction,
    DimensionMismatch,
    InclusionCheckFailed,
    InvalidSpec,
    IterationResult,
    MaxIterExceeded,
    Point,
    check_dim,
    fixed_point,
)


@dataclass(frozen=True)
class FproxProblem:
    """The pair ``(f, g)``.

    ``additivity_declared`` overrides the box-based additivity test: ``True``
    asserts the additivity condition, ``False`` denies it.
    """

    f: ConvexFunction
    g: ConvexFunction
    additivity_declared: Optional[bool] = None

    def __post_init__(self):
        if self.f.dim != self.g.dim:
            raise DimensionMismatch(f"dim f = {self.f.dim} but dim g = {self.g.dim}")
        if self.f.domain_box.intersect(self.g.domain_box) is None:
            raise InvalidSpec("dom f and dom g do not intersect")

    @property
    def dim(self) -> int:
        return self.f.dim


def _as_point(v, dim: int, what: str) -> Point:
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    check_dim(v, dim, what)
    return v


def tbar_apply(p: FproxProblem, x, y) -> Point:
    """Generalized Douglas-Rachford map ``T(x, y)``."""
    x = _as_point(x, p.dim, "x")
    y = _as_point(y, p.dim, "y")
    pf = p.f.prox(y, 1.0)
    return y - pf + p.g.prox(x + pf - y, 1.0)


def dr_classical(p: FproxProblem, y) -> Point:
    """``DR(y) = y - prox_f(y) + prox_g(2 prox_f(y) - y)``, i.e. ``T(prox_f(y), y)``."""
    y = _as_point(y, p.dim, "y")
    pf = p.f.prox(y, 1.0)
    return y - pf + p.g.prox(2.0 * pf - y, 1.0)


def tbar_via_conjugates(p: FproxProblem, x, y) -> Point:
    """``T(x, .)`` written as ``L_x o prox_{g*} o L_x o prox_{f*}`` with ``L_x(y) = x - y``."""
    x = _as_point(x, p.dim, "x")
    y = _as_point(y, p.dim, "y")
    prox_f_star = y - p.f.prox(y, 1.0)
    w = x - prox_f_star
    prox_g_star = w - p.g.prox(w, 1.0)
    return x - prox_g_star


class AdditivityCheck(NamedTuple):
    holds: bool
    rule: str

    def __bool__(self) -> bool:
        return self.holds


def check_additivity(p: FproxProblem) -> AdditivityCheck:
    """Sufficient test for ``d(f + g) = df + dg`` on box domains.

    Uses the qualification ``dom f  meets  int dom g`` (or the symmetric one);
    a full domain is the special case the certificate names separately.
    """
    if p.additivity_declared is not None:
        state = "true" if p.additivity_declared else "false"
        return AdditivityCheck(bool(p.additivity_declared), f"declared {state} by caller")
    df, dg = p.f.domain_box, p.g.domain_box
    if dg.is_full():
        return AdditivityCheck(True, f"dom {p.g.name} is the whole space")
    if df.is_full():
        return AdditivityCheck(True, f"dom {p.f.name} is the whole space")
    if df.meets_interior_of(dg):
        return AdditivityCheck(True, "dom f meets int dom g")
    if dg.meets_interior_of(df):
        return AdditivityCheck(True, "dom g meets int dom f")
    return AdditivityCheck(
        False, "no qualification holds: neither domain meets the interior of the other"
    )


def _require_additivity(p: FproxProblem, force: bool) -> tuple:
    check = check_additivity(p)
    if check.holds:
        return ()
    if not force:
        raise AdditivityUnverified(f"cannot certify additivity for ({p.f.name}, {p.g.name}): {check.rule}")
    return ("unverified",)


def a1_solve(
    p: FproxProblem,
    x,
    cfg: Optional[AlgoConfig] = None,
    *,
    force: bool = False,
    callback: Optional[Callable[[int, Point], None]] = None,
) -> IterationResult:
    """Iterate ``y <- T(x, y)`` from ``cfg.y0``.

    On convergence ``y_star`` is an element of ``prox^f_g(x)`` and
    ``prox_value = prox_f(y_star)`` equals ``prox_{f+g}(x)``.

    Parameters
    ----------
    force : bool
        Run even when :func:`check_additivity` cannot certify the pair; the
        result then carries the ``"unverified"`` flag.
    callback : callable, optional
        Called as ``callback(k, y_k)`` for ``k = 0, 1, ...``.

    Raises
    ------
    AdditivityUnverified
        When additivity is not certified and ``force`` is false.

    Running out of iterations is not an exception here; the result comes
    back with ``converged=False``.
    """
    cfg = cfg or AlgoConfig()
    flags = _require_additivity(p, force)
    x = _as_point(x, p.dim, "x")
    f_prox, g_prox = p.f.prox, p.g.prox

    def step(y):
        pf = f_prox(y, 1.0)
        return y - pf + g_prox(x + pf - y, 1.0)

    y, res, k, ok, trace = fixed_point(step, cfg.start(p.dim), cfg, callback)
    return IterationResult(
        y_star=y,
        prox_value=p.f.prox(y, 1.0),
        residual=res,
        iterations=k,
        converged=ok,
        trace=trace,
        flags=flags,
    )


def a1_iterates(p: FproxProblem, x, y0) -> Iterator[Point]:
    """Endless stream ``y_0, y_1, ...`` of the A1 iteration."""
    x = _as_point(x, p.dim, "x")
    y = _as_point(y0, p.dim, "y0")
    while True:
        yield y
        pf = p.f.prox(y, 1.0)
        y = y - pf + p.g.prox(x + pf - y, 1.0)


def dual_fb_iterates(p: FproxProblem, x, v0) -> Iterator[Point]:
    """Dual forward-backward stream ``v_{k+1} = prox_{g*}(v_k + prox_f(x - v_k))``.

    Started at ``v0 = x - y0`` it reproduces ``x - y_k`` of :func:`a1_iterates`.
    """
    x = _as_point(x, p.dim, "x")
    v = _as_point(v0, p.dim, "v0")
    while True:
        yield v
        w = v + p.f.prox(x - v, 1.0)
        v = w - p.g.prox(w, 1.0)


def inclusion_holds(p: FproxProblem, x: float, y: float, tol: float = 1e-8) -> bool:
    """1-D test of ``x - y in dg(prox_f(y))``.

    The graph of ``dg`` is fattened by ``tol`` in both directions: the slope
    set is taken over ``[prox_f(y) - tol, prox_f(y) + tol]`` (monotonicity
    makes that an interval) and inflated by ``tol``.
    """
    if p.g.subdiff1d is None:
        raise InvalidSpec(f"{p.g.name} has no 1-D subdifferential")
    pf = float(p.f.prox(np.array([y], dtype=np.float64), 1.0)[0])
    parts = [p.g.subdiff1d(t) for t in (pf - tol, pf, pf + tol)]
    parts = [s for s in parts if not s.empty]
    if not parts:
        return False
    lo = min(s.lo for s in parts)
    hi = max(s.hi for s in parts)
    return lo - tol <= x - y <= hi + tol


def fprox_eval(
    p: FproxProblem,
    x,
    cfg: Optional[AlgoConfig] = None,
    *,
    force: bool = False,
    inclusion_tol: float = 1e-8,
) -> Point:
    """One element of ``prox^f_g(x)``: the limit of :func:`a1_solve`.

    In dimension one the defining inclusion is re-checked on the answer.
    """
    result = a1_solve(p, x, cfg, force=force)
    if not result.converged:
        raise MaxIterExceeded(
            f"A1 did not converge in {result.iterations} iterations "
            f"(residual {result.residual:.3e})",
            result,
        )
    y = result.y_star
    if p.dim == 1 and p.g.subdiff1d is not None:
        xs = float(np.asarray(x, dtype=np.float64).reshape(-1)[0])
        if not inclusion_holds(p, xs, float(y[0]), inclusion_tol):
            raise InclusionCheckFailed(f"limit y={y[0]!r} violates x - y in dg(prox_f(y)) at x={xs!r}")
    return y


def fixed_point_residual(p: FproxProblem, x, y) -> float:
    return float(np.linalg.norm(np.asarray(y, dtype=np.float64) - tbar_apply(p, x, y)))


__all__ = [
    "AdditivityCheck",
    "FproxProblem",
    "a1_iterates",
    "a1_solve",
    "check_additivity",
    "dr_classical",
    "dual_fb_iterates",
    "fixed_point_residual",
    "fprox_eval",
    "inclusion_holds",
    "tbar_apply",
    "tbar_via_conjugates",
]
