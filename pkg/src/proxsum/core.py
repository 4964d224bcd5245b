"""Shared types: points, convex functions, boxes, solver configuration.

Points are plain one-dimensional ``float64`` numpy arrays. ``make_point``
is the validating constructor; everything downstream assumes its output.

A :class:`ConvexFunction` is a bundle of callables. ``value`` is vectorized
over leading axes: it accepts an array of shape ``(..., dim)`` and returns
an array of shape ``(...)`` with ``+inf`` outside the domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.typing import NDArray

Point = NDArray[np.float64]


class ProxError(Exception):
    """Base class for every error raised by this package."""


class NonFiniteEntry(ProxError, ValueError):
    pass


class DimensionMismatch(ProxError, ValueError):
    pass


class NonPositiveStep(ProxError, ValueError):
    pass


class InvalidSpec(ProxError, ValueError):
    pass


class InfiniteValue(ProxError, ArithmeticError):
    pass


class UnboundedSearch(ProxError, RuntimeError):
    pass


class MissingSubdifferential(ProxError, ValueError):
    pass


class InternalError(ProxError, AssertionError):
    pass


class AdditivityUnverified(ProxError):
    pass


class HessianMissing(ProxError, ValueError):
    pass


class PoleAtMinusOne(ProxError, ZeroDivisionError):
    pass


class InclusionCheckFailed(ProxError):
    pass


class MaxIterExceeded(ProxError):
    """Raised where a converged point is mandatory; carries the partial result."""

    def __init__(self, message: str, result: "IterationResult"):
        super().__init__(message)
        self.result = result


def make_point(coords) -> Point:
    """Validate ``coords`` and return a read-only 1-D float array."""
    arr = np.array(coords, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise DimensionMismatch("a point needs at least one coordinate")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteEntry(f"non-finite coordinate in {coords!r}")
    arr.flags.writeable = False
    return arr


def check_dim(x: Point, dim: int, what: str = "point") -> None:
    if x.ndim != 1 or x.shape[0] != dim:
        raise DimensionMismatch(f"{what} has shape {x.shape}, expected ({dim},)")


@dataclass(frozen=True)
class Box:
    """Product of closed intervals ``[lo_i, hi_i]``; infinite bounds allowed."""

    lo: NDArray[np.float64]
    hi: NDArray[np.float64]

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=np.float64).reshape(-1)
        hi = np.asarray(self.hi, dtype=np.float64).reshape(-1)
        if lo.shape != hi.shape:
            raise InvalidSpec("box bounds have different lengths")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise InvalidSpec("box bounds must not be NaN")
        if np.any(lo > hi):
            raise InvalidSpec(f"empty box: lo={lo}, hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def full(cls, dim: int) -> "Box":
        return cls(np.full(dim, -np.inf), np.full(dim, np.inf))

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    def is_full(self) -> bool:
        return bool(np.all(np.isneginf(self.lo)) and np.all(np.isposinf(self.hi)))

    def has_interior(self) -> bool:
        return bool(np.all(self.lo < self.hi))

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=np.float64)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def clip(self, x) -> Point:
        return np.clip(np.asarray(x, dtype=np.float64), self.lo, self.hi)

    def intersect(self, other: "Box") -> Optional["Box"]:
        lo = np.maximum(self.lo, other.lo)
        hi = np.minimum(self.hi, other.hi)
        if np.any(lo > hi):
            return None
        return Box(lo, hi)

    def meets_interior_of(self, other: "Box") -> bool:
        """True when ``self`` intersects the (open) interior of ``other``."""
        if not other.has_interior():
            return False
        return bool(np.all(self.lo < other.hi) and np.all(other.lo < self.hi))


@dataclass(frozen=True)
class SubdifferentialInterval:
    """A closed interval ``[lo, hi]`` (possibly unbounded) or the empty set."""

    lo: Optional[float] = None
    hi: Optional[float] = None
    empty: bool = False

    def __post_init__(self):
        if self.empty:
            if self.lo is not None or self.hi is not None:
                raise InternalError("empty interval must leave lo/hi unset")
            return
        if self.lo is None or self.hi is None:
            raise InternalError("non-empty interval needs both endpoints")
        if math.isnan(self.lo) or math.isnan(self.hi) or self.lo > self.hi:
            raise InternalError(f"invalid interval [{self.lo}, {self.hi}]")

    @classmethod
    def empty_set(cls) -> "SubdifferentialInterval":
        return cls(empty=True)

    @classmethod
    def point(cls, v: float) -> "SubdifferentialInterval":
        return cls(float(v), float(v))

    def contains(self, v: float, tol: float = 0.0) -> bool:
        if self.empty:
            return False
        return self.lo - tol <= v <= self.hi + tol

    def min_norm(self) -> float:
        """Element of smallest absolute value."""
        if self.empty:
            raise ValueError("empty interval has no elements")
        return min(max(0.0, self.lo), self.hi)

    def __str__(self) -> str:
        if self.empty:
            return "{}"
        return f"[{self.lo:.17g}, {self.hi:.17g}]"


@dataclass(frozen=True)
class ConvexFunction:
    """An element of Gamma_0(R^dim) described by its capabilities.

    ``prox(x, step)`` returns argmin_z value(z) + |z - x|^2 / (2 step).
    Optional members are ``None`` when the capability is absent.
    ``lipschitz_gradient`` is the Lipschitz constant of ``gradient`` when
    known; the forward-backward routines use it for a sanity warning.
    """

    name: str
    dim: int
    value: Callable[[NDArray], NDArray]
    prox: Callable[[Point, float], Point]
    domain_box: Box
    subdiff1d: Optional[Callable[[float], SubdifferentialInterval]] = None
    gradient: Optional[Callable[[Point], Point]] = None
    hessian_apply: Optional[Callable[[Point, Point], Point]] = None
    prox_range_box: Optional[Box] = None
    lipschitz_gradient: Optional[float] = None

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidSpec("dim must be positive")
        if self.domain_box.dim != self.dim:
            raise InvalidSpec("domain box dimension does not match dim")
        if self.hessian_apply is not None and self.gradient is None:
            raise InvalidSpec("a Hessian requires a gradient")

    def __call__(self, x) -> float:
        return float(self.value(np.asarray(x, dtype=np.float64)))


def prox_eval(f: ConvexFunction, x: Point, step: float = 1.0) -> Point:
    """Evaluate ``prox_{step f}(x)`` after checking the inputs."""
    x = np.asarray(x, dtype=np.float64)
    check_dim(x, f.dim)
    if not step > 0:
        raise NonPositiveStep(f"prox step must be positive, got {step}")
    return np.asarray(f.prox(x, float(step)), dtype=np.float64)


@dataclass(frozen=True)
class AlgoConfig:
    tol: float = 1e-10
    max_iter: int = 100_000
    y0: Optional[Sequence[float]] = None

    def __post_init__(self):
        if not self.tol > 0:
            raise InvalidSpec("tol must be positive")
        if int(self.max_iter) < 1:
            raise InvalidSpec("max_iter must be at least 1")

    def start(self, dim: int) -> Point:
        if self.y0 is None:
            return np.zeros(dim)
        y0 = np.array(make_point(self.y0))
        check_dim(y0, dim, "y0")
        return y0


@dataclass
class IterationResult:
    """Outcome of a fixed-point run.

    ``residual`` is the scale-free step ``|y_{k+1} - y_k| / (1 + |y_k|)``
    of the last iteration; ``trace`` records it at every iteration.
    """

    y_star: Point
    prox_value: Point
    residual: float
    iterations: int
    converged: bool
    trace: list = field(default_factory=list)
    flags: tuple = ()


def fixed_point(
    op: Callable[[Point], Point],
    y0: Point,
    cfg: AlgoConfig,
    callback: Optional[Callable[[int, Point], None]] = None,
) -> tuple:
    """Picard iteration ``y <- op(y)`` with the relative stopping rule.

    Returns ``(y, residual, iterations, converged, trace)``.
    """
    y = np.asarray(y0, dtype=np.float64)
    trace = []
    residual = math.inf
    if callback is not None:
        callback(0, y)
    for k in range(1, int(cfg.max_iter) + 1):
        y_next = op(y)
        if not np.all(np.isfinite(y_next)):
            raise NonFiniteEntry(f"iterate became non-finite at iteration {k}")
        residual = float(np.linalg.norm(y_next - y)) / (1.0 + float(np.linalg.norm(y)))
        trace.append((k, residual))
        y = y_next
        if callback is not None:
            callback(k, y)
        if residual <= cfg.tol:
            return y, residual, k, True, trace
    return y, residual, int(cfg.max_iter), False, trace


def grid_points(lo: float, hi: float, step: float) -> NDArray[np.float64]:
    """Uniform grid on ``[lo, hi]`` with spacing at most ``step``, both ends included."""
    if not step > 0:
        raise InvalidSpec("grid step must be positive")
    if hi < lo:
        raise InvalidSpec("grid upper bound below lower bound")
    n = max(int(math.ceil((hi - lo) / step - 1e-9)), 0)
    if n == 0:
        return np.array([lo], dtype=np.float64)
    return np.linspace(lo, hi, n + 1)

