import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bragg.autocorr import (
    autocorrelation,
    convergence_series,
    convolve_finite,
    covering_set,
    covers,
    order_check,
)
from bragg.comb import PointSet, VanHoveSpec, difference_set, empty_comb, make_comb, restrict, with_weights
from bragg.cps import generate_model_comb, indicator, preset, tent
from bragg.errors import DomainError
from bragg.exactnum import QuadValue

SPEC = VanHoveSpec()


def lattice(step, lo=-400, hi=400, weight=1.0):
    ks = range(-(-lo // step) if lo % step else lo // step, hi // step + 1)
    pts = [k * step for k in ks if lo <= k * step <= hi]
    return make_comb(pts, [weight] * len(pts), (lo, hi))


def test_integers_closed_form():
    c = lattice(1)
    for n in SPEC.sizes:
        a = autocorrelation(c, SPEC, n, 5)
        for z in range(-5, 6):
            assert a.value_at(QuadValue(z)) == pytest.approx((2 * n + 1 - abs(z)) / (2 * n), abs=1e-15)


def test_empty_comb():
    a = autocorrelation(empty_comb((-400, 400)), SPEC, 50, 3)
    assert len(a) == 0


def test_radius_must_be_positive():
    with pytest.raises(DomainError):
        autocorrelation(lattice(1), SPEC, 50, 0)


def test_symmetry_complex_weights():
    pts = list(range(-20, 21))
    rng = np.random.default_rng(1)
    ws = (rng.normal(size=len(pts)) + 1j * rng.normal(size=len(pts))).tolist()
    c = make_comb(pts, ws, (-20, 20))
    a = autocorrelation(c, VanHoveSpec(1.0, (5, 10, 20)), 20, 6)
    for z, v in zip(a.coords, a.values):
        assert a.value_at(-z) == np.conj(v)
    v0 = a.value_at(QuadValue(0))
    assert v0.imag == 0 and v0.real >= 0


def test_support_inside_difference_set():
    c = generate_model_comb(preset("fibonacci"), tent(0.6), (-400, 400))
    a = autocorrelation(c, SPEC, 200, 8)
    d = difference_set(restrict(c, SPEC.interval(200)), 8)
    assert all(z in d for z in a.coords)


def test_convergence_integers():
    s = convergence_series(lattice(1), SPEC, 3)
    # gamma_n(z) = 1 + (1 - |z|)/(2n); the largest change is at |z| = 3
    assert s.cauchy == pytest.approx((3 - 1) / 800, abs=1e-15)
    assert s.cauchy <= 0.01


def test_convergence_fibonacci_decreasing():
    c = generate_model_comb(preset("fibonacci"), tent(0.6), (-400, 400))
    stats = []
    for sizes in ((50, 100), (100, 200), (200, 400)):
        stats.append(convergence_series(c, VanHoveSpec(1.0, sizes), 10).cauchy)
    assert stats[2] <= 1.1 * stats[1] and stats[1] <= 1.1 * stats[0]


def test_single_point_vanishes():
    c = make_comb([0], [2.0], (-400, 400))
    s = convergence_series(c, SPEC, 1)
    assert s.series(QuadValue(0)) == [4.0 / (2 * n) for n in SPEC.sizes]


def test_convolve_identity_and_empty():
    a = autocorrelation(lattice(1), SPEC, 50, 3)
    same = convolve_finite(a, PointSet((QuadValue(0),), (0, 0)))
    assert same.coords == a.coords and np.array_equal(same.values, a.values)
    assert len(convolve_finite(a, PointSet((), (0, 0)))) == 0


def test_convolved_even_lattice_dominates():
    even = autocorrelation(lattice(2), SPEC, 400, 12)
    full = autocorrelation(lattice(1), SPEC, 400, 12)
    conv = convolve_finite(even, PointSet((QuadValue(0), QuadValue(1)), (0, 1)))
    for z in range(-10, 11):
        assert full.value_at(QuadValue(z)) <= conv.value_at(QuadValue(z)) + 1e-9


def test_covering_parity():
    ints = lattice(1, -10, 10).support()
    evens = lattice(2, -10, 10).support()
    F = covering_set(ints, evens)
    assert [int(f.p) for f in F.coords] == [0, 1]
    assert [int(f.p) for f in covering_set(ints, ints).coords] == [0]


def test_covering_fibonacci_window_stable():
    s = preset("fibonacci")
    h = indicator(*s.window)
    sizes = []
    for hi in (200, 400):
        c = generate_model_comb(s, h, (-hi, hi))
        x = c.x
        long_left = [c.coords[i] for i in range(len(x) - 1) if x[i + 1] - x[i] > 1.5]
        gamma = PointSet(tuple(long_left), c.window, m=5)
        F = covering_set(c.support(), gamma)
        assert covers(c.support(), gamma, F)
        sizes.append(len(F))
    assert sizes[0] == sizes[1]


def test_order_check_examples():
    even = autocorrelation(lattice(2), SPEC, 400, 6)
    full = autocorrelation(lattice(1), SPEC, 400, 6)
    assert order_check(even, full, 1.0).passed
    v = order_check(full, full, 1.0)
    assert v.passed and v.max_violation == 0.0
    bad = order_check(full, even, 1.0)
    assert not bad.passed
    zero = QuadValue(0)
    assert full.value_at(zero) > even.value_at(zero)


def test_order_check_mismatch():
    with pytest.raises(DomainError):
        order_check(autocorrelation(lattice(1), SPEC, 50, 3), autocorrelation(lattice(1), SPEC, 100, 3), 1.0)


@given(st.integers(0, 2**32 - 1), st.floats(0.0, 1.0))
def test_ordering_property(seed, p):
    rng = np.random.default_rng(seed)
    c = lattice(1, -100, 100)
    w = rng.random(len(c)) * (rng.random(len(c)) >= p)
    sub = with_weights(c, w.tolist())
    spec = VanHoveSpec(1.0, (25, 50, 100))
    for n in spec.sizes:
        assert order_check(autocorrelation(sub, spec, n, 5), autocorrelation(c, spec, n, 5), 1.0).passed


@given(st.integers(0, 2**32 - 1))
def test_sandwich_property(seed):
    rng = np.random.default_rng(seed)
    c = lattice(1, -60, 60)
    w = rng.uniform(-1, 1, len(c))
    sub = with_weights(c, w.tolist())
    spec = VanHoveSpec(1.0, (30, 60))
    a1 = autocorrelation(sub, spec, 60, 4)
    a2 = autocorrelation(c, spec, 60, 4)
    assert order_check(a1, a2, 1.0).passed
    assert order_check(a1.scaled(-1.0), a2, 1.0).passed
