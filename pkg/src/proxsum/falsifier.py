"""No closed formula for prox_{f+g} in the operator algebra of I, prox and prox^{-1}.

A candidate formula is ``sum_i lambda_i prod_j P(mu_ij)`` where
``P(a, b, c, d, e) = a I + b prox_f + c prox_g + d prox_f^{-1} + e prox_g^{-1}``
and ``prod`` is composition. On ``f = g = (gamma / 2) x^2`` every operator is
linear, so the candidate reduces to a rational function of ``gamma`` that
would have to equal ``1 / (1 + 2 gamma)``. Clearing denominators gives a
polynomial identity; at ``gamma = -1/2`` its right-hand side vanishes while
the left-hand side is ``2^{-n}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import least_squares

from .core import InvalidSpec, PoleAtMinusOne

CERTIFICATE_GAMMA = -0.5
PROBE_GAMMAS = (0.0, 0.5, 1.0, 2.0, 3.0)


@dataclass(frozen=True)
class FormulaCandidate:
    lam: np.ndarray  # (m,)
    mu: np.ndarray  # (m, n, 5) rows (a, b, c, d, e)

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=np.float64).reshape(-1)
        mu = np.asarray(self.mu, dtype=np.float64)
        if mu.ndim != 3 or mu.shape[2] != 5:
            raise InvalidSpec(f"mu must have shape (m, n, 5), got {mu.shape}")
        if mu.shape[0] != lam.shape[0] or lam.shape[0] < 1 or mu.shape[1] < 1:
            raise InvalidSpec("lambda and mu disagree on m, or m/n is zero")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)

    @property
    def m(self) -> int:
        return self.mu.shape[0]

    @property
    def n(self) -> int:
        return self.mu.shape[1]

    @classmethod
    def from_json(cls, obj: Mapping) -> "FormulaCandidate":
        try:
            return cls(obj["lambda"], obj["mu"])
        except KeyError as exc:
            raise InvalidSpec(f"candidate needs 'lambda' and 'mu': missing {exc}") from exc

    @classmethod
    def zeros(cls, m: int, n: int) -> "FormulaCandidate":
        return cls(np.zeros(m), np.zeros((m, n, 5)))


def _numerator(mu: np.ndarray, gamma: float) -> np.ndarray:
    a, b, c, d, e = np.moveaxis(np.asarray(mu, dtype=np.float64), -1, 0)
    t = 1.0 + gamma
    return (b + c) + a * t + (d + e) * t * t


def elementary_slope(mu: Sequence[float], gamma: float) -> float:
    """Slope of ``P(mu)`` on the quadratic family ``f = g = (gamma / 2) x^2``."""
    if gamma == -1.0:
        raise PoleAtMinusOne("prox of the quadratic family is undefined at gamma = -1")
    mu = np.asarray(mu, dtype=np.float64)
    if mu.shape != (5,):
        raise InvalidSpec("mu must be a 5-tuple (a, b, c, d, e)")
    return float(_numerator(mu, gamma) / (1.0 + gamma))


def elementary_operator(mu: Sequence[float], gamma: float):
    """``P(mu)`` assembled from the actual operators on the quadratic family.

    Cross-check for :func:`elementary_slope`: both proxes are ``x / (1 + gamma)``
    and both inverses ``(1 + gamma) x``.
    """
    a, b, c, d, e = (float(v) for v in mu)
    prox = lambda x: x / (1.0 + gamma)
    prox_inv = lambda x: (1.0 + gamma) * x
    return lambda x: a * x + b * prox(x) + c * prox(x) + d * prox_inv(x) + e * prox_inv(x)


def candidate_residual(c: FormulaCandidate, gamma: float) -> float:
    """``(1 + gamma)^n - (1 + 2 gamma) sum_i lambda_i prod_j num_ij(gamma)``."""
    products = np.prod(_numerator(c.mu, gamma), axis=1)
    return float((1.0 + gamma) ** c.n - (1.0 + 2.0 * gamma) * float(c.lam @ products))


def candidate_slope(c: FormulaCandidate, gamma: float) -> float:
    """Slope of the whole candidate formula on the quadratic family."""
    if gamma == -1.0:
        raise PoleAtMinusOne("prox of the quadratic family is undefined at gamma = -1")
    slopes = _numerator(c.mu, gamma) / (1.0 + gamma)
    return float(c.lam @ np.prod(slopes, axis=1))


@dataclass(frozen=True)
class Certificate:
    n: int
    gamma: float
    gap: float
    probe_residuals: dict
    max_probe_residual: float

    def summary(self) -> str:
        return f"gap {self.gap:.17g} at gamma={self.gamma:g}"


def contradiction_certificate(c: FormulaCandidate) -> Certificate:
    """Residual at ``gamma = -1/2`` (always ``2^{-n}``) plus residuals on a few nonnegative gammas."""
    gap = candidate_residual(c, CERTIFICATE_GAMMA)
    probes = {g: candidate_residual(c, g) for g in PROBE_GAMMAS}
    return Certificate(
        n=c.n,
        gamma=CERTIFICATE_GAMMA,
        gap=gap,
        probe_residuals=probes,
        max_probe_residual=max(abs(v) for v in probes.values()),
    )


def random_candidate(rng: np.random.Generator, max_m: int = 4, max_n: int = 4, scale: float = 3.0):
    m = int(rng.integers(1, max_m + 1))
    n = int(rng.integers(1, max_n + 1))
    return FormulaCandidate(rng.uniform(-scale, scale, m), rng.uniform(-scale, scale, (m, n, 5)))


def fit_gammas(num: int = 20) -> np.ndarray:
    return np.linspace(0.0, 3.0, num)


def linear_span_bound(n: int, gammas: np.ndarray) -> float:
    """Lower bound on the max misfit of any candidate with ``n`` factors.

    Each candidate slope lies in the span of ``(1 + gamma)^k``, ``|k| <= n``;
    the RMS residual of the least-squares fit over that span bounds the
    max residual of every candidate from below.
    """
    t = 1.0 + np.asarray(gammas, dtype=np.float64)
    target = 1.0 / (1.0 + 2.0 * np.asarray(gammas))
    A = np.stack([t ** k for k in range(-n, n + 1)], axis=1)
    coef, *_ = np.linalg.lstsq(A, target, rcond=None)
    r = A @ coef - target
    return float(np.sqrt(np.mean(r ** 2)))


def fit_candidate(m: int, n: int, gammas: np.ndarray, rng: np.random.Generator, restarts: int = 8):
    """Nonlinear least-squares fit of a candidate's slope to ``1 / (1 + 2 gamma)``.

    Returns ``(candidate, max_abs_residual)`` for the best restart.
    """
    gammas = np.asarray(gammas, dtype=np.float64)
    target = 1.0 / (1.0 + 2.0 * gammas)

    def unpack(theta):
        return FormulaCandidate(theta[:m], theta[m:].reshape(m, n, 5))

    def residuals(theta):
        c = unpack(theta)
        return np.array([candidate_slope(c, g) for g in gammas]) - target

    best = None
    for _ in range(restarts):
        theta0 = rng.uniform(-1.0, 1.0, m + 5 * m * n)
        sol = least_squares(residuals, theta0, method="trf", max_nfev=2000)
        err = float(np.max(np.abs(sol.fun)))
        if best is None or err < best[1]:
            best = (unpack(sol.x), err)
    if best is None or not math.isfinite(best[1]):
        raise RuntimeError("least-squares fit failed")
    return best
