import numpy as np
import pytest

from proxsum import CatalogSpec, build

# (spec, known minimizer or None)
CATALOG_1D = [
    (CatalogSpec("indicator_box", {"lo": [-1.0], "hi": [1.0]}), 0.0),
    (CatalogSpec("indicator_box", {"lo": [0.5], "hi": [2.0]}), 1.0),
    (CatalogSpec("indicator_point", {"at": [0.0]}), 0.0),
    (CatalogSpec("indicator_point", {"at": [0.7]}), 0.7),
    (CatalogSpec("indicator_halfline", {"side": "nonneg"}), 0.0),
    (CatalogSpec("indicator_halfline", {"side": "nonpos", "at": 1.5}), 1.5),
    (CatalogSpec("abs"), 0.0),
    (CatalogSpec("l1", {"dim": 1}), 0.0),
    (CatalogSpec("quadratic", {"gamma": 1.0}), 0.0),
    (CatalogSpec("quadratic", {"gamma": 2.5, "center": [0.3]}), 0.3),
    (CatalogSpec("quadratic", {"gamma": 0.0}), 4.0),
    (CatalogSpec("linear", {"slope": [0.5]}), None),
    (CatalogSpec("zero"), -2.0),
    (CatalogSpec("neg_sqrt_on_halfline"), None),
]

CLOSED_FORM_1D = [(s, m) for s, m in CATALOG_1D if s.kind != "neg_sqrt_on_halfline"]

CATALOG_ND = [
    CatalogSpec("indicator_box", {"lo": [-1.0, 0.0], "hi": [1.0, 2.0]}),
    CatalogSpec("indicator_point", {"at": [0.5, -0.5, 1.0]}),
    CatalogSpec("indicator_halfline", {"side": "nonneg", "dim": 2}),
    CatalogSpec("l1", {"dim": 3}),
    CatalogSpec("quadratic", {"gamma": 0.5, "center": [1.0, -1.0]}),
    CatalogSpec("linear", {"slope": [1.0, -2.0, 0.5]}),
    CatalogSpec("zero", {"dim": 2}),
]


def spec_id(spec):
    extra = ",".join(f"{k}={v}" for k, v in spec.params.items())
    return f"{spec.kind}({extra})"


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def fn(obj):
    return build(CatalogSpec.from_json(obj))


# (number, title, passed, detail) rows filled in by test_acceptance.py
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:2d}. {title}: {detail}")
