"""Proximal calculus for sums of two convex functions.

``prox_{f+g}`` is evaluated as ``prox_f`` of a fixed point of the
generalized Douglas-Rachford map, using only ``prox_f`` and ``prox_g``.
"""

from .catalog import CatalogSpec, build, build_json, conjugate_envelope, conjugate_prox, moreau_envelope
from .core import (
    AlgoConfig,
    Box,
    ConvexFunction,
    IterationResult,
    Point,
    SubdifferentialInterval,
    make_point,
    prox_eval,
)
from .fprox import (
    FproxProblem,
    a1_solve,
    check_additivity,
    dr_classical,
    fprox_eval,
    tbar_apply,
)
from .oracle import figure_data, fprox_set_oracle, oracle_prox, oracle_prox_sum
from .splitting import SmoothPairProblem, a2_solve, dr_minimize, fb_classical, fbbar_apply

__all__ = [
    "CatalogSpec",
    "build",
    "build_json",
    "conjugate_envelope",
    "conjugate_prox",
    "moreau_envelope",
    "AlgoConfig",
    "Box",
    "ConvexFunction",
    "IterationResult",
    "Point",
    "SubdifferentialInterval",
    "make_point",
    "prox_eval",
    "FproxProblem",
    "a1_solve",
    "check_additivity",
    "dr_classical",
    "fprox_eval",
    "tbar_apply",
    "figure_data",
    "fprox_set_oracle",
    "oracle_prox",
    "oracle_prox_sum",
    "SmoothPairProblem",
    "a2_solve",
    "dr_minimize",
    "fb_classical",
    "fbbar_apply",
]

__version__ = "0.1.0"
