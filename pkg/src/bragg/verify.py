"""Reproducible pass/fail experiments for the ordering, domination and
Bragg-peak statements about positive definite discrete measures.

Every operation returns a :class:`VerifyReport`.  Randomized scenarios draw from
``numpy.random.default_rng(seed)`` created fresh per scenario, so reports do not
depend on the order in which scenarios run.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .autocorr import autocorrelation, covering_set, covers, order_check
from .comb import (
    Interval,
    VanHoveSpec,
    WeightedComb,
    compare_combs,
    convolve_comb_finite,
    difference_set,
    make_comb,
    max_gap,
    restrict,
    subcomb,
    threshold_subset,
    with_weights,
)
from .cps import (
    CPScheme,
    WeightFn,
    dual_candidates,
    dual_window,
    generate_model_comb,
    indicator,
    preset,
    tent,
)
from .errors import ScenarioError, UndefinedStatisticError
from .exactnum import QuadValue, star, to_float
from .spectrum import bragg_scan, decompose, gram_psd, gram_sample

ORDER_TOL = 1e-9
L1_TOL = 1e-6
P1_FRACTION = 0.95
THEOREMS = ("L1", "L4", "T1", "P1", "sandwich")


@dataclass
class Check:
    name: str
    passed: bool
    witness: object
    tol: float | None = None

    def as_dict(self) -> dict:
        return {"name": self.name, "pass": bool(self.passed), "witness": _plain(self.witness), "tol": self.tol}


@dataclass
class VerifyReport:
    theorem: str
    scenario: str
    seed: int | None = None
    checks: list[Check] = field(default_factory=list)
    runtime_ms: float | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, witness=None, tol: float | None = None) -> Check:
        c = Check(name, bool(passed), witness, tol)
        self.checks.append(c)
        return c

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self, timing: bool = False) -> dict:
        return {
            "theorem": self.theorem,
            "scenario": self.scenario,
            "seed": self.seed,
            "checks": [c.as_dict() for c in self.checks],
            "pass": self.passed,
            "runtime_ms": round(self.runtime_ms, 3) if timing and self.runtime_ms is not None else None,
        }


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, (list, tuple)):
        return [_plain(t) for t in v]
    return v


class _Timer:
    def __init__(self, report: VerifyReport):
        self.report = report

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self.report

    def __exit__(self, *exc):
        self.report.runtime_ms = (time.perf_counter() - self.t0) * 1000.0
        return False


# -- ordering and sandwich --------------------------------------------------------

def verify_ordering(omega_prime: WeightedComb, omega: WeightedComb, C: float, spec: VanHoveSpec,
                    radius: float = 10.0, scenario: str = "", seed: int | None = None) -> VerifyReport:
    """``0 <= w' <= C w`` implies ``gamma'_n <= C^2 gamma_n`` at every size."""
    if compare_combs(omega_prime, omega, C) != "below":
        raise ScenarioError("ordering needs 0 <= omega' <= C omega")
    rep = VerifyReport("L4", scenario or "ordering", seed)
    with _Timer(rep):
        for n in spec.sizes:
            v = order_check(autocorrelation(omega_prime, spec, n, radius),
                            autocorrelation(omega, spec, n, radius), C * C)
            rep.add(f"order_n{n}", v.passed, v.max_violation, ORDER_TOL)
    return rep


def verify_sandwich(omega_prime: WeightedComb, omega: WeightedComb, C: float, spec: VanHoveSpec,
                    radius: float = 10.0, scenario: str = "", seed: int | None = None) -> VerifyReport:
    """``|w'| <= C w`` implies ``-C^2 gamma_n <= gamma'_n <= C^2 gamma_n``."""
    if compare_combs(omega_prime, omega, C) not in ("below", "sandwich"):
        raise ScenarioError("sandwich needs |omega'| <= C omega")
    if omega_prime.is_complex:
        raise ScenarioError("sandwich needs real weights")
    rep = VerifyReport("sandwich", scenario or "sandwich", seed)
    with _Timer(rep):
        for n in spec.sizes:
            a1 = autocorrelation(omega_prime, spec, n, radius)
            a2 = autocorrelation(omega, spec, n, radius)
            up = order_check(a1, a2, C * C)
            lo = order_check(a1.scaled(-1.0), a2, C * C)
            rep.add(f"upper_n{n}", up.passed, up.max_violation, ORDER_TOL)
            rep.add(f"lower_n{n}", lo.passed, lo.max_violation, ORDER_TOL)
    return rep


# -- domination of the strongly almost periodic part ---------------------------------

@dataclass(frozen=True)
class L1Params:
    spec: VanHoveSpec = VanHoveSpec()
    radius: float = 20.0
    kmax: float = 10.0
    internal_max: float = 40.0
    C: float = 1.0
    seed: int = 42
    probability: float = 0.5
    gram_points: int = 40
    tol: float = L1_TOL
    gram_tolerance: float = 1e-8


SUBCOMB_RULES = ("identity", "half_window", "bernoulli", "thinning")


def apply_rule(omega: WeightedComb, rule: str, rng: np.random.Generator | None = None,
               probability: float = 0.5, weight: WeightFn | None = None) -> WeightedComb:
    """Sub-comb selection rules.

    ``half_window`` keeps points whose internal coordinate lies in the left half
    of the weight support; ``bernoulli`` keeps each point with ``probability``;
    ``thinning`` removes each point with ``probability``.
    """
    if rule == "identity":
        return omega
    if rule == "half_window":
        lo, hi = weight.support if weight is not None else (-1.0, 1.0)
        mid = (lo + hi) / 2
        if omega.m == 0:
            mask = [True] * len(omega)
        else:
            mask = [to_float(star(x)) <= mid for x in omega.coords]
        return subcomb(omega, mask, omega.generator_tag + ":half")
    if rule in ("bernoulli", "thinning"):
        if rng is None:
            raise ScenarioError(f"rule {rule!r} needs a seeded generator")
        u = rng.random(len(omega))
        mask = u < probability if rule == "bernoulli" else u >= probability
        return subcomb(omega, mask.tolist(), f"{omega.generator_tag}:{rule}")
    raise ScenarioError(f"unknown sub-comb rule {rule!r}")


def _scan_window(s: CPScheme, kmax: float, internal_max: float):
    return dual_window(s, kmax, internal_max, kmin=0.0)


def verify_theorem_L1(scheme: CPScheme, weight: WeightFn, subcomb_rule: str,
                      params: L1Params = L1Params()) -> VerifyReport:
    """A sub-comb of a model comb has a positive definite, dominated
    strongly almost periodic autocorrelation part.

    Both ``gamma'_S`` and the model comb's ``gamma_S`` come from the same
    tapered resummation over the dual window ``0 <= k <= kmax``,
    ``|k*| <= internal_max``.
    """
    spec = params.spec
    seeded = subcomb_rule in ("bernoulli", "thinning")
    rep = VerifyReport("L1", f"{scheme.name}/{weight.kind}/{subcomb_rule}", params.seed if seeded else None)
    with _Timer(rep):
        omega = generate_model_comb(scheme, weight, spec.largest)
        rng = np.random.default_rng(params.seed) if seeded else None
        prime = apply_rule(omega, subcomb_rule, rng, params.probability, weight)
        if compare_combs(prime, omega, params.C) != "below":
            raise ScenarioError("sub-comb rule violated 0 <= omega' <= C omega")
        n = spec.sizes[-1]
        cands = _scan_window(scheme, params.kmax, params.internal_max)
        meta = {"internal_max": params.internal_max}
        window = (0.0, float(params.kmax))
        se_full = bragg_scan(omega, cands, spec, freq_window=window, meta=meta)
        se_prime = bragg_scan(prime, cands, spec, freq_window=window, meta=meta)
        patch = restrict(omega, spec.interval(n))
        diffs = difference_set(patch, params.radius / 2)
        pts = list(diffs.coords)
        a_full = autocorrelation(omega, spec, n, params.radius)
        a_prime = autocorrelation(prime, spec, n, params.radius)
        d_full = decompose(a_full, se_full, points=pts, require_peaks=False)
        d_prime = decompose(a_prime, se_prime, points=pts, require_peaks=False)
        gs = np.real(d_prime.gamma_s.values)
        ref = np.real(d_full.gamma_s.values)
        rep.add("nonnegative", float(gs.min()) >= -params.tol, float(gs.min()), params.tol)
        excess = float(np.max(gs - params.C ** 2 * ref))
        rep.add("dominated", excess <= params.tol, excess, params.tol)
        sample = gram_sample(patch.coords, params.radius / 2, params.gram_points)
        g = gram_psd(d_prime.gamma_s, sample, params.gram_tolerance)
        rep.add("gram_psd", g.passed and g.missing == 0, g.min_eigenvalue, params.gram_tolerance)
        _support_check(rep, [d_prime.gamma_s], diffs)
    return rep


def _support_check(rep: VerifyReport, tables, diffs) -> None:
    outside = sum(1 for t in tables for z in t.coords if z not in diffs)
    rep.add("support_in_difference_set", outside == 0, outside, 0.0)


# -- relative density of Bragg peaks ----------------------------------------------

@dataclass(frozen=True)
class T1Params:
    spec: VanHoveSpec = VanHoveSpec()
    coeff_bound: int = 8
    radius: float = 20.0
    gap_factor: float = 2.0
    seed: int | None = None


def middle_third(omega: WeightedComb, window: Interval, tag: str = "middle") -> WeightedComb:
    """Unit weights on the points whose internal coordinate lies in the middle
    third of ``window`` (all points for a rational comb)."""
    lo, hi = window
    a, b = lo + (hi - lo) / 3, hi - (hi - lo) / 3
    pts = [x for x in omega.coords if omega.m == 0 or a <= to_float(star(x)) <= b]
    return make_comb(pts, [1.0] * len(pts), omega.window, omega.m, f"{omega.generator_tag}:{tag}")


def _candidates(scheme: CPScheme, coeff_bound: int, window: Interval) -> list[QuadValue]:
    lo, hi = window
    if scheme.degenerate:
        return [QuadValue(k) for k in range(math.ceil(lo), math.floor(hi) + 1)]
    return [k for k in dual_candidates(scheme, coeff_bound) if lo <= to_float(k) <= hi]


def verify_T1(scheme: CPScheme, weight: WeightFn, omega_prime: WeightedComb, C1: float,
              freq_window: Interval = (0.0, 10.0), params: T1Params = T1Params(),
              scenario: str = "") -> VerifyReport:
    """Bragg peaks of ``omega'`` are relatively dense when its heavy points
    ``Gamma = {w' >= C1}`` are; ``Lambda`` is covered by ``Gamma + F``."""
    spec = params.spec
    rep = VerifyReport("T1", scenario or f"{scheme.name}/{omega_prime.generator_tag}", params.seed)
    with _Timer(rep):
        omega = generate_model_comb(scheme, weight, spec.largest)
        ratios = [omega_prime.weight_at(x, 0.0) / w for x, w in zip(omega.coords, omega.weights)]
        if any(omega.weight_at(x, 0.0) == 0 for x in omega_prime.coords):
            raise ScenarioError("omega' is not supported in Lambda")
        C = max(ratios, default=0.0)
        if compare_combs(omega_prime, omega, C) != "below":
            raise ScenarioError("T1 needs 0 <= omega' <= C omega")
        cands = _candidates(scheme, params.coeff_bound, freq_window)
        se_full = bragg_scan(omega, cands, spec, freq_window=freq_window)
        se = bragg_scan(omega_prime, cands, spec, freq_window=freq_window)
        gap_full = se_full.max_gap
        bound = params.gap_factor * gap_full if gap_full is not None else math.inf
        peaks = se.bragg()
        gap = se.max_gap if se.max_gap is not None else (math.inf if peaks else None)
        rep.add("bragg_empty_or_dense", not peaks or gap <= bound, gap, bound)
        gamma = threshold_subset(omega_prime, C1)
        try:
            heavy_gap = max_gap(gamma)
        except UndefinedStatisticError:
            heavy_gap = None
        if heavy_gap is not None and math.isfinite(heavy_gap):
            rep.add("heavy_points_force_peaks", bool(peaks) and gap <= bound, len(peaks), bound)
        n = spec.sizes[-1]
        a = autocorrelation(omega_prime, spec, n, params.radius)
        diffs = difference_set(restrict(omega, spec.interval(n)), params.radius)
        if peaks:
            d = decompose(a, se)
            _support_check(rep, [d.gamma_s, d.gamma_0], diffs)
        else:
            _support_check(rep, [a], diffs)
        if len(gamma):
            F = covering_set(omega, gamma)
            rep.add("covering", covers(omega, gamma, F), len(F), 0.0)
            C2 = max(omega.weights)
            conv = convolve_comb_finite(omega_prime, F)
            inner = restrict(omega, conv.window)
            chain = compare_combs(inner, with_weights(conv, [w * C2 / C1 for w in conv.weights]), 1.0)
            rep.add("comparison_chain", chain == "below", chain, 0.0)
    return rep


# -- Bragg mass monotonicity -----------------------------------------------------------

def verify_P1(omega: WeightedComb, omega_prime: WeightedComb, spec: VanHoveSpec,
              freq_window: Interval, candidates: Sequence, scenario: str = "",
              fraction: float = P1_FRACTION) -> VerifyReport:
    """A comb dominating one with Bragg peaks keeps at least ``fraction`` of
    the Bragg mass over ``freq_window``."""
    if compare_combs(omega, omega_prime, 1.0) != "below":
        raise ScenarioError("P1 needs 0 <= omega <= omega'")
    rep = VerifyReport("P1", scenario or f"{omega.generator_tag}<={omega_prime.generator_tag}")
    with _Timer(rep):
        se = bragg_scan(omega, candidates, spec, freq_window=freq_window)
        se_p = bragg_scan(omega_prime, candidates, spec, freq_window=freq_window)
        mass = se.bragg_mass()
        mass_p = se_p.bragg_mass()
        rep.add("omega_has_peaks", mass > 0, len(se.bragg()), 0.0)
        rep.add("bragg_mass", mass_p >= fraction * mass, [mass_p, mass], fraction)
    return rep


# -- scenario suites -------------------------------------------------------------------

def interleaved_integers(omega: WeightedComb, shift: Fraction = Fraction(1, 3)) -> WeightedComb:
    """``omega`` plus unit masses on ``Z + shift`` inside its window."""
    lo, hi = omega.window
    pts = [QuadValue.coerce(Fraction(k) + shift, 0) for k in range(math.floor(lo) - 1, math.ceil(hi) + 1)]
    pts = [p for p in pts if lo <= to_float(p) <= hi]
    coords = list(omega.coords) + pts
    weights = list(omega.weights) + [1.0] * len(pts)
    return make_comb(coords, weights, omega.window, omega.m, omega.generator_tag + "+Z")


def lattice_comb(step: int, window: Interval, tag: str = "") -> WeightedComb:
    lo, hi = window
    ks = range(math.ceil(lo / step), math.floor(hi / step) + 1)
    return make_comb([QuadValue(k * step) for k in ks], [1.0] * len(ks), window, 0, tag or f"{step}Z")


def default_weight(scheme: CPScheme) -> WeightFn:
    if scheme.degenerate:
        return tent(1.0)
    return tent(min(-scheme.window[0], scheme.window[1]))


def _scenarios(theorem: str, scheme: CPScheme, seed: int, spec: VanHoveSpec) -> list[Callable[[], VerifyReport]]:
    w_tent = default_weight(scheme)
    w_ind = indicator(*scheme.window) if not scheme.degenerate else indicator(-0.5, 0.5)
    window = spec.largest

    def model(w):
        return generate_model_comb(scheme, w, window)

    out: list[Callable[[], VerifyReport]] = []
    if theorem == "L4":
        def thin():
            omega = model(w_tent)
            prime = apply_rule(omega, "thinning", np.random.default_rng(seed), 0.3)
            return verify_ordering(prime, omega, 1.0, spec, scenario=f"{scheme.name}/thinning30", seed=seed)

        def lattice():
            ints = lattice_comb(1, window)
            return verify_ordering(lattice_comb(2, window), ints, 1.0, spec, scenario="2Z<=Z")

        out += [thin, lattice]
    elif theorem == "sandwich":
        def signs():
            omega = model(w_ind)
            rng = np.random.default_rng(seed)
            ws = np.where(rng.random(len(omega)) < 0.5, -1.0, 1.0) * np.asarray(omega.weights)
            prime = with_weights(omega, ws.tolist(), omega.generator_tag + ":signs")
            return verify_sandwich(prime, omega, 1.0, spec, scenario=f"{scheme.name}/signs", seed=seed)

        def identity():
            omega = model(w_ind)
            return verify_sandwich(omega, omega, 1.0, spec, scenario=f"{scheme.name}/identity")

        out += [signs, identity]
    elif theorem == "L1":
        params = L1Params(spec=spec, seed=seed)
        for rule in ("identity", "half_window", "bernoulli"):
            out.append(lambda rule=rule: verify_theorem_L1(scheme, w_tent, rule, params))
    elif theorem == "T1":
        def heavy():
            omega = model(w_ind)
            prime = middle_third(omega, w_ind.support)
            return verify_T1(scheme, w_ind, prime, 1.0, params=T1Params(spec=spec),
                             scenario=f"{scheme.name}/middle_third")

        def identity():
            omega = model(w_ind)
            return verify_T1(scheme, w_ind, omega, 1.0, params=T1Params(spec=spec),
                             scenario=f"{scheme.name}/identity")

        out += [heavy, identity]
    elif theorem == "P1":
        freq = (0.0, 10.0)

        def interleave():
            omega = model(w_ind)
            prime = interleaved_integers(omega)
            cands = _candidates(scheme, 8, freq)
            return verify_P1(omega, prime, spec, freq, cands, scenario=f"{scheme.name}/interleaved")

        def lattice():
            cands = [Fraction(p, 2) for p in range(0, 21)]
            return verify_P1(lattice_comb(2, window), lattice_comb(1, window), spec, freq, cands,
                             scenario="2Z<=Z")

        out += [interleave, lattice]
    else:
        raise ScenarioError(f"unknown theorem {theorem!r}")
    return out


def run_suite(theorem: str, preset_name: str = "zroot2", seed: int = 42,
              spec: VanHoveSpec = VanHoveSpec(), scheme: CPScheme | None = None,
              threads: int = 1) -> list[VerifyReport]:
    """Reports for one theorem (or ``'all'``) in declared order.

    Scenarios are independent, so with ``threads > 1`` they run on a thread
    pool; results are still returned in declared order.
    """
    scheme = scheme or preset(preset_name)
    names = THEOREMS if theorem == "all" else (theorem,)
    jobs = [job for name in names for job in _scenarios(name, scheme, seed, spec)]
    if threads <= 1 or len(jobs) <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: job(), jobs))


__all__ = [
    "Check",
    "VerifyReport",
    "L1Params",
    "T1Params",
    "SUBCOMB_RULES",
    "THEOREMS",
    "apply_rule",
    "verify_ordering",
    "verify_sandwich",
    "verify_theorem_L1",
    "verify_T1",
    "verify_P1",
    "middle_third",
    "interleaved_integers",
    "lattice_comb",
    "default_weight",
    "run_suite",
]
