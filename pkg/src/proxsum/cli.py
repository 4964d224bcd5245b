"""Command-line driver.

Problem files are JSON::

    {"space": {"dim": 1},
     "f": {"kind": "quadratic", "gamma": 1.0},
     "g": {"kind": "quadratic", "gamma": 1.0},
     "x": [3.0],
     "algorithm": {"name": "A1", "tol": 1e-10, "max_iter": 100000,
                   "y0": [0.0], "force": false}}

Exit codes: 0 success, 1 bad input, 2 additivity not certified (rerun with
``--force``), 3 iteration limit reached, 4 a requested check failed
(``--assert-monotone`` or the sensitivity finite-difference check).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .catalog import CatalogSpec, build
from .core import (
    AdditivityUnverified,
    AlgoConfig,
    Box,
    DimensionMismatch,
    InvalidSpec,
    IterationResult,
    MaxIterExceeded,
    ProxError,
    make_point,
)
from .falsifier import FormulaCandidate, contradiction_certificate
from .fprox import FproxProblem, a1_solve, check_additivity
from .oracle import figure_data, fprox_set_oracle, oracle_prox_sum, write_figure_csv
from .sensitivity import FD_STEP, FD_TOL, ViProblem, derivative_at_zero, fd_check, trajectory
from .splitting import SmoothPairProblem, a2_solve, dr_minimize, fb_classical

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_ADDITIVITY = 2
EXIT_MAX_ITER = 3
EXIT_CHECK = 4

ALGORITHMS = ("A1", "A2", "DR", "FB")
# kinds whose dimension may be taken from space.dim
_DIM_KINDS = {"indicator_halfline", "l1", "quadratic", "zero"}


class InputError(Exception):
    """The input file is unreadable or inconsistent."""


@dataclass(frozen=True)
class ProblemFile:
    dim: int
    f: CatalogSpec
    g: CatalogSpec
    x: np.ndarray
    algorithm: str
    cfg: AlgoConfig
    force: bool

    @classmethod
    def from_json(cls, obj) -> "ProblemFile":
        try:
            dim = int(obj["space"]["dim"])
            algo = dict(obj.get("algorithm", {}))
            name = str(algo.get("name", "A1")).upper()
            if name not in ALGORITHMS:
                raise InputError(f"unknown algorithm {name!r}; expected one of {ALGORITHMS}")
            cfg = AlgoConfig(
                tol=float(algo.get("tol", 1e-10)),
                max_iter=int(algo.get("max_iter", 100_000)),
                y0=algo.get("y0"),
            )
            x = make_point(obj["x"]) if "x" in obj else np.zeros(dim)
            f = _spec(obj["f"], dim)
            g = _spec(obj["g"], dim)
        except KeyError as exc:
            raise InputError(f"missing field {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise InputError(str(exc)) from exc
        if dim < 1 or x.shape[0] != dim:
            raise InputError(f"x has {x.shape[0]} coordinates but space.dim = {dim}")
        return cls(dim, f, g, x, name, cfg, bool(algo.get("force", False)))

    def functions(self):
        f, g = build(self.f), build(self.g)
        if f.dim != self.dim or g.dim != self.dim:
            raise InputError(f"dim f = {f.dim}, dim g = {g.dim}, space.dim = {self.dim}")
        self.cfg.start(self.dim)
        return f, g


def _spec(obj, dim: int) -> CatalogSpec:
    spec = CatalogSpec.from_json(obj)
    if spec.kind in _DIM_KINDS and "dim" not in spec.params and "center" not in spec.params:
        spec = CatalogSpec(spec.kind, {**spec.params, "dim": dim})
    return spec


def _load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _fmt(v) -> str:
    """Ten significant digits; scalars for dim 1, lists otherwise."""
    arr = np.atleast_1d(np.asarray(v, dtype=np.float64))
    vals = [float(f"{a:.10g}") + 0.0 for a in arr]  # + 0.0 drops the sign of zero
    return repr(vals[0]) if len(vals) == 1 else repr(vals)


def _write_trace(result: IterationResult, path: Optional[str]) -> None:
    if path is None:
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter", "residual"])
        for k, r in result.trace:
            w.writerow([k, f"{r:.17g}"])


def _monotone(result: IterationResult) -> bool:
    rs = [r for _, r in result.trace]
    return all(b <= a * (1 + 1e-12) for a, b in zip(rs, rs[1:]))


def _report(result: IterationResult, args, out) -> int:
    print(f"prox={_fmt(result.prox_value)}", file=out)
    print(f"y_star={_fmt(result.y_star)}", file=out)
    print(f"residual={result.residual:.3e}", file=out)
    print(f"iterations={result.iterations}", file=out)
    if result.flags:
        print(f"flags={','.join(result.flags)}", file=out)
    _write_trace(result, _trace_path(args))
    if not result.converged:
        print(f"error: no convergence within {result.iterations} iterations", file=sys.stderr)
        return EXIT_MAX_ITER
    if getattr(args, "assert_monotone", False) and not _monotone(result):
        print("error: residual trace is not monotone", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def _trace_path(args) -> Optional[str]:
    if args.no_trace:
        return None
    if args.trace:
        return args.trace
    return f"{Path(args.problem).stem}.trace.csv"


def cmd_prox_sum(args, out) -> int:
    prob = ProblemFile.from_json(_load(args.problem))
    f, g = prob.functions()
    p = FproxProblem(f, g)
    result = a1_solve(p, prob.x, prob.cfg, force=args.force or prob.force)
    return _report(result, args, out)


def cmd_dr(args, out) -> int:
    prob = ProblemFile.from_json(_load(args.problem))
    f, g = prob.functions()
    return _report(dr_minimize(FproxProblem(f, g), prob.cfg), args, out)


def cmd_fb(args, out) -> int:
    prob = ProblemFile.from_json(_load(args.problem))
    f, g = prob.functions()
    p = SmoothPairProblem(f, g)
    if prob.algorithm == "FB":
        result = fb_classical(p, prob.cfg)
    else:
        result = a2_solve(p, prob.x, prob.cfg)
    return _report(result, args, out)


def cmd_oracle(args, out) -> int:
    prob = ProblemFile.from_json(_load(args.problem))
    f, g = prob.functions()
    p = FproxProblem(f, g)
    check = check_additivity(p)
    print(f"additivity={'yes' if check.holds else 'no'} ({check.rule})", file=out)
    print(f"oracle_prox={_fmt(oracle_prox_sum(f, g, prob.x))}", file=out)
    if prob.dim == 1 and g.subdiff1d is not None:
        s = fprox_set_oracle(p, float(prob.x[0]))
        print(f"fprox_set={s}", file=out)
    return EXIT_OK


def cmd_figure(args, out) -> int:
    prob = ProblemFile.from_json(_load(args.problem))
    f, g = prob.functions()
    rows = figure_data(FproxProblem(f, g), xs=tuple(args.xs))
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            write_figure_csv(rows, fh)
        print(f"wrote {len(rows)} rows to {args.out}", file=out)
    else:
        write_figure_csv(rows, out)
    return EXIT_OK


def _vi_from_json(obj):
    try:
        K = Box([-math.inf if v is None else v for v in obj["K"]["lo"]],
                [math.inf if v is None else v for v in obj["K"]["hi"]])
        g = build(_spec(obj["g"], K.dim))
        algo = obj.get("algorithm", {})
        cfg = AlgoConfig(tol=float(algo.get("tol", 1e-13)), max_iter=int(algo.get("max_iter", 100_000)))
        return ViProblem(K, g, make_point(obj["r0"]), make_point(obj["r1"])), cfg, float(obj.get("fd_step", FD_STEP))
    except KeyError as exc:
        raise InputError(f"missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from exc


def cmd_sensitivity(args, out) -> int:
    p, cfg, h = _vi_from_json(_load(args.problem))
    u0, v0 = trajectory(p, 0.0, cfg)
    d, details = derivative_at_zero(p, cfg, full_output=True)
    rep = fd_check(p, h, FD_TOL, cfg)
    print(f"u0={_fmt(u0)}", file=out)
    print(f"v0={_fmt(v0)}", file=out)
    print(f"cone={details.cone}", file=out)
    print(f"u_prime={_fmt(d)}", file=out)
    print(f"fd={_fmt(rep.finite_difference)} (h={h:g})", file=out)
    print(f"fd_error={rep.error:.3e} {rep.message}", file=out)
    return EXIT_OK if rep.agrees else EXIT_CHECK


def cmd_falsify(args, out) -> int:
    try:
        c = FormulaCandidate.from_json(_load(args.problem))
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    cert = contradiction_certificate(c)
    print(cert.summary(), file=out)
    print(f"max residual on gamma in {sorted(cert.probe_residuals)}: {cert.max_probe_residual:.6g}", file=out)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # argparse's own exit code 2 would collide with EXIT_ADDITIVITY
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="proxsum", description="Prox of a sum of two convex functions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def iterative(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("problem")
        sp.add_argument("--trace", help="trace CSV path (default: <problem>.trace.csv)")
        sp.add_argument("--no-trace", action="store_true", help="do not write a trace")
        sp.add_argument("--assert-monotone", action="store_true",
                        help="fail with exit 4 unless residuals never increase")
        sp.add_argument("--force", action="store_true", help="run even if additivity is not certified")
        sp.set_defaults(func=fn)

    iterative("prox-sum", cmd_prox_sum, "prox_{f+g}(x) by the f-prox fixed-point iteration")
    iterative("dr", cmd_dr, "minimize f + g by Douglas-Rachford")
    iterative("fb", cmd_fb, "A2 (default) or classical forward-backward (algorithm.name = FB)")

    sp = sub.add_parser("oracle", help="brute-force prox of the sum and the 1-D f-prox set")
    sp.add_argument("problem")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("figure", help="CSV of the f-prox graph over a grid of x")
    sp.add_argument("problem")
    sp.add_argument("--out", help="output CSV (default: stdout)")
    sp.add_argument("--xs", nargs=3, type=float, default=(-3.0, 3.0, 0.01), metavar=("LO", "HI", "STEP"))
    sp.set_defaults(func=cmd_figure)

    sp = sub.add_parser("sensitivity", help="derivative of u(t) at t = 0 with a finite-difference check")
    sp.add_argument("problem")
    sp.set_defaults(func=cmd_sensitivity)

    sp = sub.add_parser("falsify", help="certificate against a closed-formula candidate")
    sp.add_argument("problem")
    sp.set_defaults(func=cmd_falsify)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except AdditivityUnverified as exc:
        print(f"error: {exc} (use --force to run anyway)", file=sys.stderr)
        return EXIT_ADDITIVITY
    except MaxIterExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MAX_ITER
    except (InputError, InvalidSpec, DimensionMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ProxError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
