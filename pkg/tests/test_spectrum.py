import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bragg.autocorr import autocorrelation
from bragg.comb import VanHoveSpec, make_comb, restrict, with_weights
from bragg.cps import dual_candidates, dual_window, generate_model_comb, indicator, preset, tent
from bragg.errors import DomainError, EmptySpectrumError
from bragg.exactnum import QuadValue, to_float
from bragg.spectrum import (
    SpectrumEntry,
    SpectrumEstimate,
    bragg_scan,
    classify_peak,
    decompose,
    fb_coefficient,
    gram_psd,
    intensity_profile,
    refine_peak,
    sap_resum,
)

SPEC = VanHoveSpec()


def integers(lo=-400, hi=400):
    return make_comb(range(lo, hi + 1), [1.0] * (hi - lo + 1), (lo, hi))


def test_fb_coefficient_lattice():
    c = integers()
    assert fb_coefficient(c, 0, SPEC, 400) == pytest.approx(801 / 800, abs=1e-14)
    assert fb_coefficient(c, 1, SPEC, 400) == pytest.approx(801 / 800, abs=1e-12)
    assert abs(fb_coefficient(c, 0.5, SPEC, 400)) == pytest.approx(1 / 800, abs=1e-12)


def test_profile_integer_and_irrational():
    c = integers()
    prof = intensity_profile(c, 3, SPEC)
    assert all(abs(v - 1) <= 3 / n for v, n in zip(prof, SPEC.sizes))
    k = math.sqrt(2) / 4
    prof = intensity_profile(c, k, SPEC)
    for v, n in zip(prof, SPEC.sizes):
        # geometric sum over 2n+1 consecutive integers
        ref = (math.sin(math.pi * k * (2 * n + 1)) / math.sin(math.pi * k) / (2 * n)) ** 2
        assert v == pytest.approx(ref, abs=1e-12)
        assert v <= 1 / (math.sin(math.pi * k) * 2 * n) ** 2


def test_zero_comb_profile():
    c = make_comb([], [], (-400, 400))
    assert intensity_profile(c, 0.3, SPEC) == [0.0] * 4


@pytest.mark.parametrize("profile,label", [
    ([0.98, 0.99, 1.00], "bragg"),
    ([0.4, 0.2, 0.1], "continuous"),
    ([0.1, 0.5, 0.2], "undecided"),
])
def test_classify_examples(profile, label):
    got, inf = classify_peak(profile, 1e-3, 0.05)
    assert got == label
    if label == "bragg":
        assert inf == 1.0


def test_classify_needs_three():
    with pytest.raises(DomainError):
        classify_peak([1.0, 1.0], 1e-3)


def test_lattice_scan():
    c = integers()
    se = bragg_scan(c, [Fraction(p, 4) for p in range(-40, 41)], SPEC)
    peaks = se.bragg()
    assert [e.k_float for e in peaks] == [float(k) for k in range(-10, 11)]
    assert all(0.98 <= e.i_inf <= 1.02 for e in peaks)
    assert {e.label for e in se.entries if e.label != "bragg"} == {"continuous"}
    assert se.max_gap == 1.0


def test_zero_weights_scan():
    c = with_weights(integers(), [0.0] * 801)
    se = bragg_scan(c, [0.0, 0.5, 1.0], SPEC)
    assert all(e.label == "continuous" for e in se.entries)


def test_fibonacci_tent_zero_peak():
    s = preset("fibonacci")
    c = generate_model_comb(s, tent(0.6), (-400, 400))
    ks = [k for k in dual_candidates(s, 8) if 0 <= to_float(k) <= 10]
    se = bragg_scan(c, ks, SPEC)
    assert se.bragg()
    patch = restrict(c, SPEC.interval(400))
    mean_w = float(np.mean(patch.w))
    density = len(patch) / 800
    zero = se.entries[0]
    assert zero.k_float == 0.0
    assert zero.i_inf == pytest.approx((mean_w * density) ** 2, rel=0.02)


def test_refine_lattice():
    assert refine_peak(integers(), 0.99, 0.05, SPEC) == pytest.approx(1.0, abs=1e-6)


def test_refine_flat_returns_start():
    c = make_comb([], [], (-400, 400))
    assert refine_peak(c, 0.37, 0.05, SPEC) == 0.37


def test_refine_fibonacci():
    s = preset("fibonacci")
    c = generate_model_comb(s, indicator(*s.window), (-400, 400))
    # strongest peak in (1, 3); weak peaks are pulled by neighbouring side lobes
    target = max((k for k in dual_candidates(s, 3) if 1.0 < to_float(k) < 3.0),
                 key=lambda k: intensity_profile(c, k, SPEC)[-1])
    assert target == QuadValue(5, 2, 5, 5)
    got = refine_peak(c, to_float(target) + 3e-4, 1e-3, SPEC)
    assert got == pytest.approx(to_float(target), abs=1e-6)


def _single_peak(intensity):
    e = SpectrumEntry(0.0, 0.0, (intensity,) * 3, "bragg", intensity)
    return SpectrumEstimate((e,), VanHoveSpec(1.0, (1, 2, 3)), "test", 0.0, 0.05, (0.0, 0.0))


def test_sap_resum_examples():
    assert sap_resum(_single_peak(0.25), QuadValue(7)) == 0.25
    se = bragg_scan(integers(), [Fraction(p, 4) for p in range(-40, 41)], SPEC)
    assert sap_resum(se, QuadValue(0)).real == pytest.approx(21 * 1.0025015625, rel=1e-12)
    z = QuadValue(1, 1, 3, 2)
    assert sap_resum(se, -z) == pytest.approx(np.conj(sap_resum(se, z)), abs=1e-12)


def test_sap_resum_empty():
    se = bragg_scan(make_comb([], [], (-400, 400)), [0.0, 0.5], SPEC)
    with pytest.raises(EmptySpectrumError):
        sap_resum(se, QuadValue(0))


def test_decompose_lattice():
    c = integers()
    se = bragg_scan(c, [QuadValue(k) for k in range(0, 11)], SPEC, freq_window=(0.0, 10.0))
    a = autocorrelation(c, SPEC, 400, 20)
    d = decompose(a, se)
    assert d.residual() <= 0.05 * a.value_at(QuadValue(0))


def test_decompose_fibonacci():
    s = preset("fibonacci")
    c = generate_model_comb(s, tent(0.6), (-400, 400))
    se = bragg_scan(c, dual_window(s, 10, 40, kmin=0), SPEC, freq_window=(0.0, 10.0), meta={"internal_max": 40})
    a = autocorrelation(c, SPEC, 400, 20)
    d = decompose(a, se)
    assert d.residual() <= 0.05 * a.value_at(QuadValue(0))
    assert np.all(d.gamma_s.values >= -1e-9)


def test_gram_examples():
    c = integers()
    a = autocorrelation(c, SPEC, 400, 10)
    pts = [QuadValue(k) for k in range(10)]
    assert gram_psd(a, pts).passed
    table = {QuadValue(0): 0.0, QuadValue(1): 1.0, QuadValue(-1): 1.0}
    r = gram_psd(table, [QuadValue(0), QuadValue(1)])
    assert not r.passed and r.min_eigenvalue == pytest.approx(-1.0)
    assert gram_psd({}, pts).passed


def test_gram_reports_missing():
    r = gram_psd({QuadValue(0): 1.0}, [QuadValue(0), QuadValue(5)])
    assert r.missing == 2


@given(st.floats(0.01, 5.0), st.integers(0, 2**32 - 1))
def test_intensity_even_for_real_combs(k, seed):
    rng = np.random.default_rng(seed)
    c = with_weights(integers(-60, 60), rng.random(121).tolist())
    spec = VanHoveSpec(1.0, (15, 30, 60))
    a = intensity_profile(c, k, spec)
    b = intensity_profile(c, -k, spec)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-15)
    assert min(a) >= 0


@given(st.lists(st.floats(0, 2), min_size=3, max_size=5), st.floats(0, 1), st.floats(0, 1))
def test_raising_threshold_never_creates_bragg(profile, e1, e2):
    lo, hi = sorted((e1, e2))
    if classify_peak(profile, hi)[0] == "bragg":
        assert classify_peak(profile, lo)[0] == "bragg"


@given(st.integers(0, 2**32 - 1))
def test_resummation_positive_for_sub_combs(seed):
    # the tapered resummation is a positive functional: PSD and dominated
    rng = np.random.default_rng(seed)
    spec = VanHoveSpec(1.0, (25, 50, 100))
    c = integers(-100, 100)
    sub = with_weights(c, (rng.random(201) < 0.5).astype(float).tolist())
    ks = [QuadValue(k) for k in range(0, 5)]
    se_c = bragg_scan(c, ks, spec, freq_window=(0.0, 4.0))
    se_s = bragg_scan(sub, ks, spec, freq_window=(0.0, 4.0))
    pts = [QuadValue(z) for z in range(-5, 6)]
    ds = decompose(autocorrelation(sub, spec, 100, 10), se_s, points=pts, require_peaks=False)
    dc = decompose(autocorrelation(c, spec, 100, 10), se_c, points=pts, require_peaks=False)
    assert np.all(ds.gamma_s.values <= dc.gamma_s.values + 1e-12)
    assert gram_psd(ds.gamma_s, [QuadValue(z) for z in range(6)]).passed
