"""Closed-form convex functions and proximity calculus built on them.

Every kind is described by a :class:`CatalogSpec` whose JSON form is
``{"kind": ..., <parameters>}``; :func:`build` turns a spec into a
:class:`~proxsum.core.ConvexFunction`.

=====================  ==========================================  ==============
kind                   value                                       parameters
=====================  ==========================================  ==============
indicator_box          0 on [lo, hi], +inf elsewhere               lo, hi
indicator_point        0 at ``at``, +inf elsewhere                 at
indicator_halfline     0 on {side * (z - at) >= 0}, per coordinate side, at, dim
abs                    |z| (dim 1)
l1                     sum |z_i|                                   dim
quadratic              gamma/2 |z - center|^2                      gamma, center, dim
linear                 <slope, z>                                  slope
zero                   0                                           dim
neg_sqrt_on_halfline   -sqrt(z) on z >= 0 (dim 1)
=====================  ==========================================  ==============
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

import numpy as np

from .core import (
    Box,
    ConvexFunction,
    InfiniteValue,
    InvalidSpec,
    Point,
    SubdifferentialInterval,
    make_point,
    prox_eval,
)
from .oracle import minimize_1d

KINDS = (
    "indicator_box",
    "indicator_point",
    "indicator_halfline",
    "abs",
    "l1",
    "quadratic",
    "linear",
    "zero",
    "neg_sqrt_on_halfline",
)


@dataclass(frozen=True)
class CatalogSpec:
    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "CatalogSpec":
        if not isinstance(obj, Mapping) or "kind" not in obj:
            raise InvalidSpec(f"catalog entry needs a 'kind': {obj!r}")
        params = {k: v for k, v in obj.items() if k != "kind"}
        return cls(str(obj["kind"]), params)

    def to_json(self) -> dict:
        return {"kind": self.kind, **self.params}


def _bounds(values, fill: float) -> np.ndarray:
    """Parse a list of bounds; ``None`` and the strings 'inf'/'-inf' are allowed."""
    if values is None:
        raise InvalidSpec("missing bound list")
    out = []
    for v in np.atleast_1d(np.asarray(values, dtype=object)):
        out.append(fill if v is None else float(v))
    arr = np.array(out, dtype=np.float64)
    if np.any(np.isnan(arr)):
        raise InvalidSpec("NaN bound")
    return arr


def _vector(values, name: str) -> Point:
    try:
        return make_point(values)
    except Exception as exc:
        raise InvalidSpec(f"bad '{name}': {values!r}") from exc


def _box_subdiff(lo: float, hi: float):
    def subdiff(x: float) -> SubdifferentialInterval:
        if x < lo or x > hi:
            return SubdifferentialInterval.empty_set()
        left = -math.inf if x == lo else 0.0
        right = math.inf if x == hi else 0.0
        return SubdifferentialInterval(left, right)

    return subdiff


def _indicator(name: str, box: Box) -> ConvexFunction:
    lo, hi = box.lo, box.hi

    def value(z):
        z = np.asarray(z, dtype=np.float64)
        inside = np.all((z >= lo) & (z <= hi), axis=-1)
        return np.where(inside, 0.0, np.inf)

    return ConvexFunction(
        name=name,
        dim=box.dim,
        value=value,
        prox=lambda x, step: np.clip(x, lo, hi),
        domain_box=box,
        subdiff1d=_box_subdiff(lo[0], hi[0]) if box.dim == 1 else None,
        prox_range_box=box,
    )


def _soft(x: Point, t: float) -> Point:
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def _l1(name: str, dim: int) -> ConvexFunction:
    def subdiff(x: float) -> SubdifferentialInterval:
        if x > 0:
            return SubdifferentialInterval.point(1.0)
        if x < 0:
            return SubdifferentialInterval.point(-1.0)
        return SubdifferentialInterval(-1.0, 1.0)

    return ConvexFunction(
        name=name,
        dim=dim,
        value=lambda z: np.sum(np.abs(z), axis=-1),
        prox=_soft,
        domain_box=Box.full(dim),
        subdiff1d=subdiff if dim == 1 else None,
        prox_range_box=Box.full(dim),
    )


def _quadratic(gamma: float, center: Point) -> ConvexFunction:
    dim = center.shape[0]

    def value(z):
        return 0.5 * gamma * np.sum((np.asarray(z) - center) ** 2, axis=-1)

    def grad(z):
        return gamma * (np.asarray(z, dtype=np.float64) - center)

    subdiff = None
    if dim == 1:
        def subdiff(x: float) -> SubdifferentialInterval:
            return SubdifferentialInterval.point(gamma * (x - center[0]))

    return ConvexFunction(
        name=f"quadratic(gamma={gamma:g})",
        dim=dim,
        value=value,
        prox=lambda x, step: (x + step * gamma * center) / (1.0 + step * gamma),
        domain_box=Box.full(dim),
        subdiff1d=subdiff,
        gradient=grad,
        hessian_apply=lambda base, d: gamma * np.asarray(d, dtype=np.float64),
        prox_range_box=Box.full(dim),
        lipschitz_gradient=gamma,
    )


def _linear(slope: Point) -> ConvexFunction:
    dim = slope.shape[0]
    subdiff = None
    if dim == 1:
        def subdiff(x: float) -> SubdifferentialInterval:
            return SubdifferentialInterval.point(slope[0])

    return ConvexFunction(
        name="linear",
        dim=dim,
        value=lambda z: np.asarray(z, dtype=np.float64) @ slope,
        prox=lambda x, step: x - step * slope,
        domain_box=Box.full(dim),
        subdiff1d=subdiff,
        gradient=lambda z: np.array(slope),
        hessian_apply=lambda base, d: np.zeros(dim),
        prox_range_box=Box.full(dim),
        lipschitz_gradient=0.0,
    )


def _neg_sqrt() -> ConvexFunction:
    domain = Box([0.0], [math.inf])

    def value(z):
        z = np.asarray(z, dtype=np.float64)[..., 0]
        with np.errstate(invalid="ignore"):
            return np.where(z >= 0, -np.sqrt(np.maximum(z, 0.0)), np.inf)

    def prox(x, step):
        # No closed form on purpose: minimize step*h(z) + (z - x)^2 / 2 directly.
        x0 = float(x[0])
        hi = max(x0, 0.0) + 10.0 * (1.0 + abs(x0)) + step
        h = lambda t: step * value(np.asarray(t)[..., None])
        # sqrt(b) - sqrt(a) without cancellation
        h_diff = lambda a, b: step * (b - a) / (math.sqrt(a) + math.sqrt(b)) if a + b > 0 else 0.0
        return np.array([minimize_1d(h, x0, 0.0, hi, h_diff=h_diff)])

    def subdiff(x: float) -> SubdifferentialInterval:
        if x > 0:
            return SubdifferentialInterval.point(-0.5 / math.sqrt(x))
        return SubdifferentialInterval.empty_set()

    return ConvexFunction(
        name="neg_sqrt_on_halfline",
        dim=1,
        value=value,
        prox=prox,
        domain_box=domain,
        subdiff1d=subdiff,
        prox_range_box=domain,
    )


def _dim(params, default: int = 1) -> int:
    dim = int(params.get("dim", default))
    if dim < 1:
        raise InvalidSpec("dim must be positive")
    return dim


def build(spec: CatalogSpec) -> ConvexFunction:
    """Instantiate the catalog entry described by ``spec``."""
    kind, params = spec.kind, spec.params
    if kind == "indicator_box":
        lo = _bounds(params.get("lo"), -math.inf)
        hi = _bounds(params.get("hi"), math.inf)
        if lo.shape != hi.shape or np.any(lo > hi):
            raise InvalidSpec(f"invalid box lo={lo} hi={hi}")
        return _indicator("indicator_box", Box(lo, hi))
    if kind == "indicator_point":
        at = _vector(params.get("at"), "at")
        return _indicator("indicator_point", Box(at, at))
    if kind == "indicator_halfline":
        side = params.get("side", "nonneg")
        if side not in ("nonneg", "nonpos"):
            raise InvalidSpec(f"side must be 'nonneg' or 'nonpos', got {side!r}")
        dim = _dim(params)
        at = np.broadcast_to(np.asarray(params.get("at", 0.0), dtype=np.float64), (dim,))
        if not np.all(np.isfinite(at)):
            raise InvalidSpec("halfline anchor must be finite")
        inf = np.full(dim, math.inf)
        box = Box(at, inf) if side == "nonneg" else Box(-inf, at)
        return _indicator(f"indicator_halfline({side})", box)
    if kind == "abs":
        if _dim(params) != 1:
            raise InvalidSpec("abs is one-dimensional; use l1")
        return _l1("abs", 1)
    if kind == "l1":
        return _l1("l1", _dim(params))
    if kind == "quadratic":
        gamma = float(params.get("gamma", 1.0))
        if not (math.isfinite(gamma) and gamma >= 0):
            raise InvalidSpec(f"gamma must be finite and >= 0, got {gamma}")
        if "center" in params:
            center = _vector(params["center"], "center")
        else:
            center = np.zeros(_dim(params))
        return _quadratic(gamma, center)
    if kind == "linear":
        return _linear(_vector(params.get("slope"), "slope"))
    if kind == "zero":
        dim = _dim(params)
        return ConvexFunction(
            name="zero",
            dim=dim,
            value=lambda z: np.zeros(np.shape(z)[:-1]),
            prox=lambda x, step: np.array(x, dtype=np.float64),
            domain_box=Box.full(dim),
            subdiff1d=(lambda x: SubdifferentialInterval.point(0.0)) if dim == 1 else None,
            gradient=lambda z: np.zeros(dim),
            hessian_apply=lambda base, d: np.zeros(dim),
            prox_range_box=Box.full(dim),
            lipschitz_gradient=0.0,
        )
    if kind == "neg_sqrt_on_halfline":
        return _neg_sqrt()
    raise InvalidSpec(f"unknown catalog kind {kind!r}")


def build_json(obj: Mapping[str, Any]) -> ConvexFunction:
    return build(CatalogSpec.from_json(obj))


def conjugate_spec(spec: CatalogSpec) -> Optional[CatalogSpec]:
    """Catalog description of the Fenchel conjugate, when it is in the catalog."""
    kind, params = spec.kind, spec.params
    if kind == "abs":
        return CatalogSpec("indicator_box", {"lo": [-1.0], "hi": [1.0]})
    if kind == "l1":
        dim = _dim(params)
        return CatalogSpec("indicator_box", {"lo": [-1.0] * dim, "hi": [1.0] * dim})
    if kind == "indicator_box":
        lo = _bounds(params.get("lo"), -math.inf)
        hi = _bounds(params.get("hi"), math.inf)
        if np.all(lo == -1.0) and np.all(hi == 1.0):
            return CatalogSpec("abs", {}) if lo.size == 1 else CatalogSpec("l1", {"dim": lo.size})
        return None
    if kind == "zero":
        return CatalogSpec("indicator_point", {"at": [0.0] * _dim(params)})
    if kind == "indicator_point":
        return CatalogSpec("linear", {"slope": list(params["at"])})
    if kind == "linear":
        return CatalogSpec("indicator_point", {"at": list(params["slope"])})
    if kind == "quadratic":
        gamma = float(params.get("gamma", 1.0))
        center = np.asarray(params.get("center", [0.0] * _dim(params)), dtype=np.float64)
        if np.any(center != 0):
            return None
        if gamma == 0:
            return CatalogSpec("indicator_point", {"at": [0.0] * center.size})
        return CatalogSpec("quadratic", {"gamma": 1.0 / gamma, "dim": center.size})
    if kind == "indicator_halfline":
        at = np.asarray(params.get("at", 0.0), dtype=np.float64)
        if np.any(at != 0):
            return None
        other = "nonpos" if params.get("side", "nonneg") == "nonneg" else "nonneg"
        return CatalogSpec("indicator_halfline", {"side": other, "dim": _dim(params)})
    return None


def conjugate_prox(g: ConvexFunction, x: Point) -> Point:
    """``prox_{g*}(x)`` through the Moreau decomposition."""
    x = np.asarray(x, dtype=np.float64)
    return x - prox_eval(g, x, 1.0)


def moreau_envelope(g: ConvexFunction, x: Point) -> float:
    """``min_z g(z) + |z - x|^2 / 2``, attained at ``prox_g(x)``."""
    x = np.asarray(x, dtype=np.float64)
    p = prox_eval(g, x, 1.0)
    gp = float(g.value(p))
    if not math.isfinite(gp):
        raise InfiniteValue(f"{g.name} is +inf at its own prox {p}")
    return gp + 0.5 * float(np.sum((x - p) ** 2))


def conjugate_envelope(g: ConvexFunction, x: Point) -> float:
    """Envelope of ``g*`` without ever evaluating ``g*`` by a sup.

    With ``p = prox_g(x)`` and ``q = prox_{g*}(x)`` we have ``q in dg(p)``, so
    Fenchel-Young holds with equality: ``g*(q) = <q, p> - g(p)``.
    """
    x = np.asarray(x, dtype=np.float64)
    p = prox_eval(g, x, 1.0)
    q = conjugate_prox(g, x)
    gp = float(g.value(p))
    if not math.isfinite(gp):
        raise InfiniteValue(f"{g.name} is +inf at its own prox {p}")
    g_star_q = float(q @ p) - gp
    return g_star_q + 0.5 * float(np.sum((x - q) ** 2))
