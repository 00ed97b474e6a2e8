import json

import numpy as np
import pytest

from bragg.comb import VanHoveSpec, make_comb, with_weights
from bragg.cps import dual_candidates, generate_model_comb, indicator, preset, tent
from bragg.errors import ScenarioError
from bragg.exactnum import QuadValue
from bragg.verify import (
    L1Params,
    VerifyReport,
    apply_rule,
    interleaved_integers,
    lattice_comb,
    middle_third,
    run_suite,
    verify_ordering,
    verify_P1,
    verify_sandwich,
    verify_T1,
    verify_theorem_L1,
)

SPEC = VanHoveSpec()
WINDOW = SPEC.largest


def fib_model(weight=None):
    s = preset("fibonacci")
    return s, generate_model_comb(s, weight or indicator(*s.window), WINDOW)


def test_report_verdict_is_conjunction():
    r = VerifyReport("L4", "x")
    assert r.passed
    r.add("a", True, 0.0)
    r.add("b", False, 1.0)
    assert not r.passed
    d = r.as_dict()
    assert d["pass"] is False and d["runtime_ms"] is None
    assert set(d) == {"theorem", "scenario", "seed", "checks", "pass", "runtime_ms"}
    assert set(d["checks"][0]) == {"name", "pass", "witness", "tol"}


def test_ordering_examples():
    ints = lattice_comb(1, WINDOW)
    assert verify_ordering(lattice_comb(2, WINDOW), ints, 1.0, SPEC).passed
    same = verify_ordering(ints, ints, 1.0, SPEC)
    assert same.passed and all(c.witness == 0.0 for c in same.checks)
    _, fib = fib_model()
    thin = apply_rule(fib, "thinning", np.random.default_rng(42), 0.3)
    assert verify_ordering(thin, fib, 1.0, SPEC, seed=42).passed


def test_ordering_precondition():
    ints = lattice_comb(1, WINDOW)
    with pytest.raises(ScenarioError):
        verify_ordering(ints, lattice_comb(2, WINDOW), 1.0, SPEC)


def test_sandwich_examples():
    ints = lattice_comb(1, WINDOW)
    assert verify_sandwich(ints, ints, 1.0, SPEC).passed
    rng = np.random.default_rng(42)
    signs = with_weights(ints, np.where(rng.random(len(ints)) < 0.5, -1.0, 1.0).tolist())
    assert verify_sandwich(signs, ints, 1.0, SPEC, seed=42).passed
    heavy = with_weights(ints, [2.0] + [1.0] * (len(ints) - 1))
    with pytest.raises(ScenarioError):
        verify_sandwich(heavy, ints, 1.0, SPEC)


@pytest.mark.parametrize("rule", ["identity", "half_window", "bernoulli"])
def test_l1_fibonacci(rule):
    s = preset("fibonacci")
    r = verify_theorem_L1(s, tent(0.6180339887498949), rule, L1Params())
    assert r.passed, r.as_dict()
    assert [c.name for c in r.checks] == ["nonnegative", "dominated", "gram_psd", "support_in_difference_set"]


def test_l1_identity_reproduces_model():
    s = preset("zroot2")
    r = verify_theorem_L1(s, tent(1.0), "identity", L1Params())
    assert r.check("dominated").witness == 0.0


def test_l1_unknown_rule():
    with pytest.raises(ScenarioError):
        verify_theorem_L1(preset("zroot2"), tent(1.0), "bogus", L1Params())


def test_t1_middle_third():
    s, fib = fib_model()
    prime = middle_third(fib, s.window)
    r = verify_T1(s, indicator(*s.window), prime, 1.0)
    assert r.passed, r.as_dict()
    assert r.check("heavy_points_force_peaks").passed


def test_t1_single_point_has_no_peaks():
    s, fib = fib_model()
    single = make_comb([QuadValue(0, 0, 1, 5)], [1.0], fib.window, 5, "single")
    r = verify_T1(s, indicator(*s.window), single, 1.0)
    assert r.check("bragg_empty_or_dense").passed
    assert r.check("bragg_empty_or_dense").witness is None


def test_t1_identity_matches_full_gap():
    s, fib = fib_model()
    r = verify_T1(s, indicator(*s.window), fib, 1.0)
    gap = r.check("bragg_empty_or_dense")
    assert gap.passed and gap.witness * 2 == gap.tol


def test_t1_and_l1_agree_on_shared_check():
    s = preset("fibonacci")
    h = tent(0.6180339887498949)
    omega = generate_model_comb(s, h, WINDOW)
    a = verify_T1(s, h, omega, 0.5).check("support_in_difference_set")
    b = verify_theorem_L1(s, h, "identity").check("support_in_difference_set")
    assert a.passed == b.passed


def test_p1_examples():
    ints = lattice_comb(1, WINDOW)
    evens = lattice_comb(2, WINDOW)
    cands = [k / 2 for k in range(21)]
    r = verify_P1(evens, ints, SPEC, (0.0, 10.0), cands)
    mass_p, mass = r.check("bragg_mass").witness
    assert r.passed and mass_p > mass
    same = verify_P1(ints, ints, SPEC, (0.0, 10.0), cands)
    assert same.check("bragg_mass").witness[0] == same.check("bragg_mass").witness[1]
    with pytest.raises(ScenarioError):
        verify_P1(ints, evens, SPEC, (0.0, 10.0), cands)


def test_p1_interleaved():
    s, fib = fib_model()
    prime = interleaved_integers(fib)
    cands = [k for k in dual_candidates(s, 8) if 0 <= float(k) <= 10]
    assert verify_P1(fib, prime, SPEC, (0.0, 10.0), cands).passed


def test_suite_reproducible():
    a = [r.as_dict() for r in run_suite("L4", "fibonacci", 7)]
    b = [r.as_dict() for r in run_suite("L4", "fibonacci", 7, threads=4)]
    assert json.dumps(a) == json.dumps(b)
    assert a[0]["seed"] == 7
