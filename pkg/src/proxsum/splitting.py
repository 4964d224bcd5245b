"""Douglas-Rachford and forward-backward iterations."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import (
    AlgoConfig,
    ConvexFunction,
    DimensionMismatch,
    InvalidSpec,
    IterationResult,
    Point,
    check_dim,
    fixed_point,
)
from .fprox import FproxProblem, dr_classical


class ContractionWarning(UserWarning):
    """The forward-backward map may fail to be nonexpansive."""


@dataclass(frozen=True)
class SmoothPairProblem:
    """``f`` convex, ``g`` convex and differentiable on the whole space."""

    f: ConvexFunction
    g: ConvexFunction

    def __post_init__(self):
        if self.g.gradient is None:
            raise InvalidSpec(f"{self.g.name} has no gradient")
        if self.f.dim != self.g.dim:
            raise DimensionMismatch(f"dim f = {self.f.dim} but dim g = {self.g.dim}")

    @property
    def dim(self) -> int:
        return self.f.dim


def _point(v, dim: int, what: str) -> Point:
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    check_dim(v, dim, what)
    return v


def dr_minimize(
    p: FproxProblem,
    cfg: Optional[AlgoConfig] = None,
    callback: Optional[Callable[[int, Point], None]] = None,
) -> IterationResult:
    """Classical Douglas-Rachford iteration for ``min f + g``.

    ``prox_value`` of a converged run is ``prox_f(y*)``, a minimizer of
    ``f + g``. An empty solution set shows up as non-convergence.
    """
    cfg = cfg or AlgoConfig()
    y, res, k, ok, trace = fixed_point(lambda y: dr_classical(p, y), cfg.start(p.dim), cfg, callback)
    return IterationResult(y, p.f.prox(y, 1.0), res, k, ok, trace)


def fbbar_apply(p: SmoothPairProblem, x, y) -> Point:
    """``prox_f(x - grad g(y))``; its fixed point in ``y`` is ``prox_{f+g}(x)``."""
    x = _point(x, p.dim, "x")
    y = _point(y, p.dim, "y")
    return p.f.prox(x - p.g.gradient(y), 1.0)


def _warn_if_expansive(p: SmoothPairProblem, limit: float) -> None:
    lip = p.g.lipschitz_gradient
    if lip is not None and lip > limit:
        warnings.warn(
            f"grad {p.g.name} is {lip:g}-Lipschitz; the unit-step forward-backward "
            "map is not nonexpansive and may diverge",
            ContractionWarning,
            stacklevel=3,
        )


def a2_solve(
    p: SmoothPairProblem,
    x,
    cfg: Optional[AlgoConfig] = None,
    callback: Optional[Callable[[int, Point], None]] = None,
) -> IterationResult:
    """Picard iteration of ``y <- prox_f(x - grad g(y))``.

    A converged ``y_star`` is ``prox_{f+g}(x)``, but no convergence theory
    backs the iteration, so every result is flagged ``"heuristic"``. With a
    ``1``-Lipschitz gradient the map is only nonexpansive and can cycle.
    """
    cfg = cfg or AlgoConfig()
    _warn_if_expansive(p, 1.0)
    x = _point(x, p.dim, "x")
    f_prox, grad = p.f.prox, p.g.gradient
    y, res, k, ok, trace = fixed_point(lambda y: f_prox(x - grad(y), 1.0), cfg.start(p.dim), cfg, callback)
    return IterationResult(y, y, res, k, ok, trace, flags=("heuristic",))


def fb_classical(
    p: SmoothPairProblem,
    cfg: Optional[AlgoConfig] = None,
    callback: Optional[Callable[[int, Point], None]] = None,
) -> IterationResult:
    """Unit-step forward-backward ``y <- prox_f(y - grad g(y))`` for ``min f + g``."""
    cfg = cfg or AlgoConfig()
    # y - grad g(y) stays nonexpansive up to a 2-Lipschitz gradient
    _warn_if_expansive(p, 2.0)
    f_prox, grad = p.f.prox, p.g.gradient
    y, res, k, ok, trace = fixed_point(lambda y: f_prox(y - grad(y), 1.0), cfg.start(p.dim), cfg, callback)
    return IterationResult(y, y, res, k, ok, trace)
