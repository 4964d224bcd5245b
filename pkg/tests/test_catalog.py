import json
import math

import numpy as np
import pytest

from conftest import CATALOG_1D, CATALOG_ND, CLOSED_FORM_1D, fn, spec_id
from proxsum import CatalogSpec, build, conjugate_envelope, conjugate_prox, moreau_envelope, prox_eval
from proxsum.catalog import KINDS, build_json, conjugate_spec
from proxsum.core import DimensionMismatch, InfiniteValue, InvalidSpec
from proxsum.oracle import oracle_prox

CONJUGATE_PAIRS = [
    s for s in [s for s, _ in CLOSED_FORM_1D] + CATALOG_ND if conjugate_spec(s) is not None
]


class TestBuild:
    def test_box_projection(self):
        f = fn({"kind": "indicator_box", "lo": [-1], "hi": [1]})
        assert f.prox(np.array([2.0]), 1.0)[0] == 1.0

    def test_abs_subdiff_at_kink(self):
        s = fn({"kind": "abs"}).subdiff1d(0.0)
        assert (s.lo, s.hi) == (-1.0, 1.0)

    @pytest.mark.parametrize("x", [-3.0, 0.0, 1.0, 7.5])
    def test_quadratic_halves(self, x):
        f = fn({"kind": "quadratic", "gamma": 1.0})
        assert f.prox(np.array([x]), 1.0)[0] == x / 2

    def test_every_kind_builds(self):
        for kind in KINDS:
            assert build(CatalogSpec(kind)).dim >= 1 if kind not in (
                "indicator_box", "indicator_point", "linear") else True

    @pytest.mark.parametrize(
        "obj",
        [
            {"kind": "nope"},
            {"kind": "indicator_box", "lo": [1], "hi": [0]},
            {"kind": "indicator_box", "lo": [0, 0], "hi": [1]},
            {"kind": "quadratic", "gamma": -1.0},
            {"kind": "indicator_halfline", "side": "up"},
            {"kind": "abs", "dim": 2},
            {"kind": "l1", "dim": 0},
            {"kind": "linear", "slope": [math.nan]},
            {"kind": "indicator_point"},
            {"lo": [0]},
        ],
    )
    def test_invalid_specs(self, obj):
        with pytest.raises(InvalidSpec):
            build_json(obj)

    def test_json_round_trip(self):
        obj = {"kind": "indicator_box", "lo": [-1], "hi": [1]}
        spec = CatalogSpec.from_json(json.loads(json.dumps(obj)))
        assert spec.to_json() == obj

    def test_unbounded_box_from_json_null(self):
        f = fn({"kind": "indicator_box", "lo": [None], "hi": [0.0]})
        assert f.domain_box.lo[0] == -math.inf
        assert f.prox(np.array([-40.0]), 1.0)[0] == -40.0

    def test_smooth_kinds_have_derivatives(self):
        for obj in ({"kind": "quadratic"}, {"kind": "linear", "slope": [1.0]}, {"kind": "zero"}):
            f = fn(obj)
            assert f.gradient is not None and f.hessian_apply is not None
        for obj in ({"kind": "abs"}, {"kind": "indicator_point", "at": [0]}):
            assert fn(obj).gradient is None

    def test_prox_range_boxes(self):
        box = fn({"kind": "indicator_box", "lo": [-1], "hi": [2]}).prox_range_box
        assert (box.lo[0], box.hi[0]) == (-1.0, 2.0)
        assert fn({"kind": "abs"}).prox_range_box.is_full()
        half = fn({"kind": "neg_sqrt_on_halfline"}).prox_range_box
        assert (half.lo[0], half.hi[0]) == (0.0, math.inf)

    def test_l1_separable(self):
        f = fn({"kind": "l1", "dim": 3})
        np.testing.assert_array_equal(f.prox(np.array([2.0, -0.5, -3.0]), 1.0), [1.0, 0.0, -2.0])

    def test_quadratic_center(self):
        f = fn({"kind": "quadratic", "gamma": 1.0, "center": [2.0]})
        # (x - 2)^2 / 2: prox at 4 is 3
        assert f.prox(np.array([4.0]), 1.0)[0] == 3.0
        assert f.gradient(np.array([5.0]))[0] == 3.0

    def test_neg_sqrt_values(self):
        f = fn({"kind": "neg_sqrt_on_halfline"})
        assert f(np.array([4.0])) == -2.0
        assert f(np.array([-1e-9])) == math.inf
        assert f.subdiff1d(0.0).empty and f.subdiff1d(-1.0).empty
        assert f.subdiff1d(1.0).lo == -0.5

    def test_neg_sqrt_prox_stationarity(self):
        f = fn({"kind": "neg_sqrt_on_halfline"})
        for x in (-2.0, 0.0, 0.5, 3.0):
            z = f.prox(np.array([x]), 1.0)[0]
            # z - 1/(2 sqrt z) = x
            assert z > 0
            assert abs(z - 0.5 / math.sqrt(z) - x) <= 1e-6


class TestConjugateProx:
    def test_abs(self):
        assert conjugate_prox(fn({"kind": "abs"}), np.array([2.0]))[0] == 1.0

    def test_zero(self):
        assert conjugate_prox(fn({"kind": "zero"}), np.array([5.0]))[0] == 0.0

    def test_quadratic(self):
        assert conjugate_prox(fn({"kind": "quadratic", "gamma": 1.0}), np.array([3.0]))[0] == 1.5

    def test_abs_against_oracle(self):
        # oracle on the closed-form conjugate, the indicator of [-1, 1]
        star = fn({"kind": "indicator_box", "lo": [-1], "hi": [1]})
        ref = oracle_prox(star.value, [2.0], star.domain_box)
        assert abs(ref[0] - 1.0) <= 1e-8

    def test_quadratic_against_oracle(self):
        ref = oracle_prox(lambda z: 0.5 * z[..., 0] ** 2, [3.0])
        assert abs(ref[0] - 1.5) <= 1e-8

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            conjugate_prox(fn({"kind": "abs"}), np.array([1.0, 2.0]))


class TestMoreauEnvelope:
    def test_box(self):
        assert moreau_envelope(fn({"kind": "indicator_box", "lo": [-1], "hi": [1]}), np.array([2.0])) == 0.5

    def test_zero(self):
        assert moreau_envelope(fn({"kind": "zero"}), np.array([7.0])) == 0.0

    def test_abs(self):
        assert moreau_envelope(fn({"kind": "abs"}), np.array([2.0])) == 1.5

    def test_abs_against_grid(self):
        zs = np.linspace(-5, 5, 100001)
        assert abs(np.min(np.abs(zs) + 0.5 * (zs - 2.0) ** 2) - 1.5) <= 1e-8

    def test_broken_prox_is_reported(self):
        from dataclasses import replace

        f = fn({"kind": "indicator_box", "lo": [-1], "hi": [1]})
        broken = replace(f, prox=lambda x, step: x)
        with pytest.raises(InfiniteValue):
            moreau_envelope(broken, np.array([3.0]))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            moreau_envelope(fn({"kind": "abs"}), np.array([1.0, 2.0]))


@pytest.mark.parametrize("spec", CONJUGATE_PAIRS, ids=spec_id)
def test_conjugate_prox_matches_catalog_conjugate(spec, rng):
    g = build(spec)
    star = build(conjugate_spec(spec))
    for _ in range(1000):
        x = rng.normal(0, 3, g.dim)
        np.testing.assert_allclose(conjugate_prox(g, x), star.prox(x, 1.0), rtol=0, atol=1e-10)


@pytest.mark.parametrize("spec", [s for s in CONJUGATE_PAIRS if build(s).dim == 1], ids=spec_id)
def test_conjugate_prox_matches_oracle_of_conjugate(spec, rng):
    g = build(spec)
    star = build(conjugate_spec(spec))
    for x in rng.normal(0, 3, 40):
        ref = oracle_prox(star.value, [x], star.domain_box)
        assert abs(conjugate_prox(g, np.array([x]))[0] - ref[0]) <= 1e-6


@pytest.mark.parametrize("spec", [s for s, _ in CATALOG_1D] + CATALOG_ND, ids=spec_id)
def test_moreau_decompositions(spec, rng):
    g = build(spec)
    n = 1000 if spec.kind != "neg_sqrt_on_halfline" else 200
    for _ in range(n):
        x = rng.normal(0, 3, g.dim)
        np.testing.assert_allclose(prox_eval(g, x) + conjugate_prox(g, x), x, rtol=0, atol=1e-10)
        total = moreau_envelope(g, x) + conjugate_envelope(g, x)
        assert abs(total - 0.5 * x @ x) <= 1e-10 * (1 + x @ x)


@pytest.mark.parametrize("spec", CONJUGATE_PAIRS, ids=spec_id)
def test_conjugate_envelope_matches_catalog_conjugate(spec, rng):
    g = build(spec)
    star = build(conjugate_spec(spec))
    for _ in range(200):
        x = rng.normal(0, 3, g.dim)
        assert conjugate_envelope(g, x) == pytest.approx(moreau_envelope(star, x), abs=1e-10)


@pytest.mark.parametrize("spec", [s for s, _ in CATALOG_1D] + CATALOG_ND, ids=spec_id)
def test_envelope_gradient(spec, rng):
    # grad of M_{g*} is prox_g
    g = build(spec)
    h = 1e-6
    for _ in range(30):
        x = rng.normal(0, 3, g.dim)
        grad = np.empty(g.dim)
        for i in range(g.dim):
            e = np.zeros(g.dim)
            e[i] = h
            grad[i] = (conjugate_envelope(g, x + e) - conjugate_envelope(g, x - e)) / (2 * h)
        np.testing.assert_allclose(grad, prox_eval(g, x), rtol=0, atol=1e-5)


@pytest.mark.parametrize("spec,_", CATALOG_1D, ids=[spec_id(s) for s, _ in CATALOG_1D])
def test_subdifferential_consistency(spec, _, rng):
    g = build(spec)
    tol = 1e-8
    lo = max(g.domain_box.lo[0], -3.0)
    hi = min(g.domain_box.hi[0], 3.0)
    xs = np.concatenate([rng.uniform(lo, hi, 60), [lo, hi, 0.0]])
    for x in xs:
        s = g.subdiff1d(x)
        if s.empty:
            continue
        inside = [max(s.lo, -10.0), min(s.hi, 10.0), 0.5 * (max(s.lo, -10.0) + min(s.hi, 10.0))]
        for y in inside:
            assert abs(prox_eval(g, np.array([x + y]))[0] - x) <= tol, (x, y)
        for y in (s.hi + 0.1, s.lo - 0.1):
            if math.isfinite(y):
                assert abs(prox_eval(g, np.array([x + y]))[0] - x) > tol, (x, y)


def test_conjugate_spec_table():
    assert conjugate_spec(CatalogSpec("abs")).kind == "indicator_box"
    assert conjugate_spec(CatalogSpec("indicator_box", {"lo": [-1], "hi": [1]})).kind == "abs"
    assert conjugate_spec(CatalogSpec("quadratic", {"gamma": 4.0})).params["gamma"] == 0.25
    assert conjugate_spec(CatalogSpec("quadratic", {"gamma": 1.0, "center": [1.0]})) is None
    assert conjugate_spec(CatalogSpec("neg_sqrt_on_halfline")) is None
