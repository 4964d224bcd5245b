"""Brute-force ground truth.

Nothing here uses a closed-form prox of the function being checked:
``oracle_prox`` minimizes ``h(z) + |z - x|^2 / 2`` directly (coarse grid,
then ternary refinement), and ``fprox_set_oracle`` scans a grid of ``y``
for the inclusion ``x - y in dg(prox_f(y))``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import (
    Box,
    ConvexFunction,
    InternalError,
    InvalidSpec,
    MissingSubdifferential,
    Point,
    SubdifferentialInterval,
    UnboundedSearch,
    grid_points,
    make_point,
)
from .fprox import FproxProblem

GRID_STEP = 1e-2
TERNARY_ITERATIONS = 60
SWEEPS = 200


@dataclass(frozen=True)
class OracleReport:
    """Metadata returned next to an ``oracle_prox`` answer."""

    grid_step: float
    window: Box
    sweeps: int


@dataclass(frozen=True)
class OracleInterval(SubdifferentialInterval):
    """Set-oracle answer; remembers the grid it was read off."""

    grid_step: float = 0.0
    inflation: float = 0.0
    truncated: bool = False


def minimize_1d(
    h: Callable,
    anchor: float,
    lo: float,
    hi: float,
    step: float = GRID_STEP,
    h_diff: Optional[Callable[[float, float], float]] = None,
) -> float:
    """Minimize ``h(t) + (t - anchor)^2 / 2`` over the bounded interval ``[lo, hi]``.

    ``h`` must accept numpy arrays. The grid stage locates the basin, the
    ternary stage shrinks a two-cell bracket around the best grid node.
    Ternary comparisons use ``h(m1) - h(m2) + (m1 - m2) ((m1 + m2) / 2 - anchor)``
    so the quadratic part never loses digits to cancellation. Rounding in
    ``h(m1) - h(m2)`` still limits the answer to about ``sqrt(eps)``; pass
    ``h_diff(a, b) = h(a) - h(b)`` in a cancellation-free form to do better.
    """
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise UnboundedSearch(f"search interval [{lo}, {hi}] is unbounded")
    if lo == hi:
        if not math.isfinite(float(np.asarray(h(np.array([lo])))[0])):
            raise UnboundedSearch("objective is +inf on the only feasible point")
        return float(lo)
    grid = grid_points(lo, hi, step)
    with np.errstate(invalid="ignore", over="ignore"):
        vals = np.asarray(h(grid), dtype=np.float64) + 0.5 * (grid - anchor) ** 2
    vals = np.where(np.isnan(vals), np.inf, vals)
    if not np.any(np.isfinite(vals)):
        raise UnboundedSearch(f"no finite objective value on the grid over [{lo}, {hi}]")
    k = int(np.argmin(vals))
    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, grid.size - 1)]
    for _ in range(TERNARY_ITERATIONS):
        m1 = a + (b - a) / 3.0
        m2 = b - (b - a) / 3.0
        if h_diff is None:
            h1, h2 = np.asarray(h(np.array([m1, m2])), dtype=np.float64)
            dh = h1 - h2
        else:
            dh = h_diff(m1, m2)
        if dh + (m1 - m2) * (0.5 * (m1 + m2) - anchor) < 0:
            b = m2
        else:
            a = m1
    return 0.5 * (a + b)


def _search_window(x: Point, domain: Box) -> Box:
    radius = 10.0 * (1.0 + float(np.linalg.norm(x)))
    centre = domain.clip(x)
    window = Box(centre - radius, centre + radius).intersect(domain)
    if window is None:
        raise InternalError("search window misses the domain it was centred on")
    return window


def oracle_prox(
    value: Callable,
    x,
    domain: Optional[Box] = None,
    *,
    step: float = GRID_STEP,
    sweeps: int = SWEEPS,
    full_output: bool = False,
):
    """Minimize ``value(z) + |z - x|^2 / 2`` by direct search.

    Parameters
    ----------
    value : callable
        Vectorized objective ``h``; takes arrays of shape ``(..., dim)``.
    x : array_like
        Anchor point, ``dim <= 3``.
    domain : Box, optional
        Box containing ``dom h``. The search runs over its intersection with
        a cube of half-width ``10 (1 + |x|)`` centred at the projection of
        ``x`` onto the box.
    full_output : bool
        Also return an :class:`OracleReport`.

    Notes
    -----
    For ``dim > 1`` the routine runs coordinate sweeps of the 1-D search,
    which is exact only for separable ``h``.
    """
    x = make_point(x)
    dim = x.shape[0]
    if dim > 3:
        raise InvalidSpec("oracle_prox supports dim <= 3")
    if domain is None:
        domain = Box.full(dim)
    window = _search_window(x, domain)

    z = np.array(window.clip(x))
    used = 0
    for sweep in range(sweeps):
        z_prev = z.copy()
        for i in range(dim):
            def h(t, i=i):
                t = np.asarray(t, dtype=np.float64)
                pts = np.broadcast_to(z, t.shape + (dim,)).copy()
                pts[..., i] = t
                return value(pts) + 0.5 * np.sum(np.delete(pts - x, i, axis=-1) ** 2, axis=-1)

            z[i] = minimize_1d(h, x[i], window.lo[i], window.hi[i], step)
        used = sweep + 1
        if dim == 1 or np.max(np.abs(z - z_prev)) <= 1e-14 * (1.0 + np.max(np.abs(z))):
            break

    interior = (z > window.lo + step) | (window.lo == domain.lo)
    interior &= (z < window.hi - step) | (window.hi == domain.hi)
    if not np.all(interior):
        raise UnboundedSearch("minimizer sits on the search-window boundary")
    if full_output:
        return z, OracleReport(step, window, used)
    return z


def oracle_prox_sum(f: ConvexFunction, g: ConvexFunction, x, **kwargs):
    """``oracle_prox`` applied to ``f + g`` over ``dom f`` and ``dom g``."""
    domain = f.domain_box.intersect(g.domain_box)
    if domain is None:
        raise InvalidSpec("dom f and dom g do not meet")

    def value(z):
        with np.errstate(invalid="ignore"):
            return f.value(z) + g.value(z)

    return oracle_prox(value, x, domain, **kwargs)


DEFAULT_GRID = (-5.0, 5.0, 1e-3)


def _subdiff_table(p: FproxProblem, ys: np.ndarray) -> tuple:
    """Endpoints of dg(prox_f(y)) over a grid of y; NaN marks the empty set."""
    if p.f.dim != 1:
        raise InvalidSpec("the set oracle is one-dimensional")
    if p.g.subdiff1d is None:
        raise MissingSubdifferential(f"{p.g.name} has no 1-D subdifferential")
    lo = np.full(ys.shape, np.nan)
    hi = np.full(ys.shape, np.nan)
    for k, y in enumerate(ys):
        pf = float(p.f.prox(np.array([y]), 1.0)[0])
        s = p.g.subdiff1d(pf)
        if not s.empty:
            lo[k] = s.lo
            hi[k] = s.hi
    return lo, hi


def _read_interval(x: float, ys, lo, hi, step: float, inflation: float) -> OracleInterval:
    gap = x - ys
    with np.errstate(invalid="ignore"):
        ok = (lo - inflation <= gap) & (gap <= hi + inflation)
    idx = np.flatnonzero(ok)
    if idx.size == 0:
        return OracleInterval(empty=True, grid_step=step, inflation=inflation)
    if idx[-1] - idx[0] + 1 != idx.size:
        raise InternalError(f"qualifying grid points are not contiguous at x={x}")
    truncated = bool(idx[0] == 0 or idx[-1] == ys.size - 1)
    return OracleInterval(
        float(ys[idx[0]]), float(ys[idx[-1]]),
        grid_step=step, inflation=inflation, truncated=truncated,
    )


def fprox_set_oracle(
    p: FproxProblem,
    x: float,
    grid: tuple = DEFAULT_GRID,
    inflation: float = 1e-9,
) -> OracleInterval:
    """The set ``{y on grid : x - y in dg(prox_f(y))}`` as an interval.

    Each subdifferential interval is inflated by ``inflation`` on both
    ends. The answer is exact up to the grid step; ``truncated`` is set
    when the set touches the end of the grid.
    """
    ys = grid_points(*grid)
    lo, hi = _subdiff_table(p, ys)
    return _read_interval(float(x), ys, lo, hi, grid[2], inflation)


@dataclass(frozen=True)
class FigureRow:
    x: float
    set_lo: float
    set_hi: float
    prox_g: float


def figure_data(
    p: FproxProblem,
    xs: tuple = (-3.0, 3.0, 0.01),
    grid: tuple = DEFAULT_GRID,
    inflation: float = 1e-9,
) -> list:
    """Rows ``(x, set_lo, set_hi, prox_g(x))`` tracing the graph of the f-prox.

    Empty sets are written as NaN endpoints.
    """
    ys = grid_points(*grid)
    lo, hi = _subdiff_table(p, ys)
    rows = []
    for x in grid_points(*xs):
        s = _read_interval(float(x), ys, lo, hi, grid[2], inflation)
        pg = float(p.g.prox(np.array([x]), 1.0)[0])
        if s.empty:
            rows.append(FigureRow(float(x), math.nan, math.nan, pg))
        else:
            rows.append(FigureRow(float(x), s.lo, s.hi, pg))
    return rows


def write_figure_csv(rows, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["x", "set_lo", "set_hi", "prox_g"])
    for r in rows:
        writer.writerow([f"{v + 0.0:.17g}" for v in (r.x, r.set_lo, r.set_hi, r.prox_g)])
