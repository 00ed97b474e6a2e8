"""Fourier-Bohr intensities, Bragg classification and the gamma = gamma_S + gamma_0 split.

Convention: ``c_n(k) = (1/Vol A_n) sum_x w_x exp(-2 pi i k x)`` and
``I_n(k) = |c_n(k)|^2``.  Sums over points use :func:`math.fsum` per frequency,
so every intensity is a correctly rounded function of its terms and does not
depend on how candidates are chunked or scheduled.

The strongly almost periodic part of an autocorrelation is reconstructed by a
Fejer-tapered resummation of the intensities,

    gamma_S(z) = (1/K) sum_k tau(k) I_n(k) exp(2 pi i k z),
    tau(k) = (1 - |k|/K)_+ (1 - |k*|/K*)_+,

over *all* candidate frequencies of a dual-lattice window.  Because ``tau`` is
positive definite on the dual lattice, this is a positive linear functional of
``gamma_n``: domination ``gamma'_n <= C^2 gamma_n`` carries over exactly.  The
null part is measured against the autocorrelation smoothed by the matching
kernel ``sinc^2(K t)``, so both sides see the same frequency window.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .autocorr import Autocorrelation
from .comb import Interval, VanHoveSpec, WeightedComb, restrict
from .errors import DomainError, EmptySpectrumError
from .exactnum import QuadValue, format_quad, quad_cmp, star, to_float
from .linalg import MAX_GRAM, GramReport, gram_report

EPS_FACTOR = 1e-3
DELTA_REL = 0.05
CONTINUOUS_RATIO = 0.6

_CHUNK = 1 << 21


@dataclass(frozen=True)
class SpectrumEntry:
    k: QuadValue | float
    k_float: float
    intensities: tuple[float, ...]
    label: str
    i_inf: float | None = None
    internal: float | None = None

    @property
    def k_text(self) -> str:
        return format_quad(self.k) if isinstance(self.k, QuadValue) else repr(self.k)


@dataclass(frozen=True)
class SpectrumEstimate:
    entries: tuple[SpectrumEntry, ...]
    spec: VanHoveSpec
    provenance: str
    epsilon: float
    delta_rel: float
    freq_window: Interval
    max_gap: float | None = None
    meta: dict = field(default_factory=dict)

    def bragg(self) -> list[SpectrumEntry]:
        return [e for e in self.entries if e.label == "bragg"]

    def bragg_mass(self, window: Interval | None = None) -> float:
        lo, hi = window if window is not None else self.freq_window
        return math.fsum(e.i_inf for e in self.bragg() if lo <= e.k_float <= hi)


# -- Fourier-Bohr coefficients ---------------------------------------------------

def _kfloat(k) -> float:
    return to_float(k) if isinstance(k, QuadValue) else float(k)


def fb_coefficients(c: WeightedComb, ks: Sequence, spec: VanHoveSpec, n: int) -> np.ndarray:
    """``c_n(k)`` for many frequencies at once."""
    patch = restrict(c, spec.interval(n))
    vol = spec.volume(n)
    kf = np.array([_kfloat(k) for k in ks], dtype=float)
    out = np.zeros(len(kf), dtype=complex)
    if len(patch) == 0 or len(kf) == 0:
        return out
    x = patch.x
    w = patch.w
    rows = max(1, _CHUNK // max(1, len(x)))
    for start in range(0, len(kf), rows):
        block = kf[start:start + rows]
        terms = w[None, :] * np.exp(-2j * np.pi * np.outer(block, x))
        for r, row in enumerate(terms):
            out[start + r] = complex(math.fsum(row.real), math.fsum(row.imag))
    return out / vol


def fb_coefficient(c: WeightedComb, k, spec: VanHoveSpec, n: int) -> complex:
    return complex(fb_coefficients(c, [k], spec, n)[0])


def intensity_table(c: WeightedComb, ks: Sequence, spec: VanHoveSpec) -> np.ndarray:
    """Array of shape (len(ks), len(sizes)) with ``I_n(k)``."""
    cols = [np.abs(fb_coefficients(c, ks, spec, n)) ** 2 for n in spec.sizes]
    return np.stack(cols, axis=1) if cols else np.zeros((len(ks), 0))


def intensity_profile(c: WeightedComb, k, spec: VanHoveSpec) -> list[float]:
    return [float(v) for v in intensity_table(c, [k], spec)[0]]


# -- classification --------------------------------------------------------------

def classify_peak(profile: Sequence[float], epsilon: float, delta_rel: float = DELTA_REL,
                  ratio: float = CONTINUOUS_RATIO) -> tuple[str, float | None]:
    """``('bragg', I_inf)`` when the last two intensities agree within
    ``delta_rel`` and exceed ``epsilon``; ``('continuous', None)`` when each of
    the last two doublings shrinks the intensity by ``ratio`` or more;
    ``('undecided', None)`` otherwise."""
    if len(profile) < 3:
        raise DomainError("classification needs at least three sizes")
    i2, i1, i0 = profile[-3], profile[-2], profile[-1]
    if i0 > 0 and i0 >= epsilon and abs(i0 - i1) <= delta_rel * i0:
        return "bragg", float(i0)
    if i0 <= ratio * i1 and i1 <= ratio * i2:
        return "continuous", None
    return "undecided", None


def _sort_candidates(cands: Sequence) -> list:
    if all(isinstance(k, QuadValue) for k in cands):
        return sorted(cands, key=functools.cmp_to_key(quad_cmp))
    return sorted(cands, key=_kfloat)


def _internal(k) -> float | None:
    if isinstance(k, QuadValue) and k.m != 0:
        return to_float(star(k))
    return None


def _gap(ks: Sequence[float], window: Interval) -> float | None:
    if len(ks) < 2:
        return None
    ks = sorted(ks)
    gaps = [b - a for a, b in zip(ks, ks[1:])]
    return float(max(max(gaps), ks[0] - window[0], window[1] - ks[-1]))


def bragg_scan(
    c: WeightedComb,
    candidates: Iterable,
    spec: VanHoveSpec,
    epsilon: float | None = None,
    delta_rel: float = DELTA_REL,
    eps_factor: float = EPS_FACTOR,
    freq_window: Interval | None = None,
    provenance: str = "dual",
    meta: dict | None = None,
) -> SpectrumEstimate:
    """Profile and classify every candidate frequency.

    ``epsilon`` defaults to ``eps_factor`` times the largest final intensity
    among the candidates.  ``max_gap`` is the largest hole in the Bragg set
    inside ``freq_window`` (boundary gaps included), ``None`` with fewer than
    two Bragg peaks there.
    """
    cands = _sort_candidates(list(candidates))
    if not cands:
        raise DomainError("bragg_scan needs candidates")
    table = intensity_table(c, cands, spec)
    last = table[:, -1]
    if epsilon is None:
        epsilon = eps_factor * float(last.max()) if len(last) else 0.0
    kf = [_kfloat(k) for k in cands]
    if freq_window is None:
        freq_window = (min(kf), max(kf))
    entries = []
    for k, f, row in zip(cands, kf, table):
        label, inf = classify_peak(list(row), epsilon, delta_rel)
        entries.append(SpectrumEntry(k, f, tuple(float(v) for v in row), label, inf, _internal(k)))
    lo, hi = freq_window
    gap = _gap([e.k_float for e in entries if e.label == "bragg" and lo <= e.k_float <= hi], freq_window)
    return SpectrumEstimate(tuple(entries), spec, provenance, float(epsilon), delta_rel,
                            (float(lo), float(hi)), gap, dict(meta or {}))


def grid_candidates(c: WeightedComb, freq_window: Interval, step: float | None = None) -> list[float]:
    """Uniform grid with step ``1/(8 * density)`` by default."""
    lo, hi = freq_window
    if step is None:
        length = c.window[1] - c.window[0]
        density = len(c) / length if length > 0 and len(c) else 1.0
        step = 1.0 / (8.0 * density)
    count = int(math.floor((hi - lo) / step + 1e-9))
    return [lo + i * step for i in range(count + 1)]


def refine_peak(c: WeightedComb, k0: float, radius: float, spec: VanHoveSpec, width: float = 1e-9) -> float:
    """Golden-section maximization of ``I_n(k)`` (largest size) near ``k0``.

    A grid finer than the peak width picks the bracket first, so side lobes of
    the finite-patch kernel cannot capture the search.
    """
    if not radius > 0:
        raise DomainError("radius must be positive")
    n = spec.sizes[-1]
    vol = spec.volume(n)

    def f(k: float) -> float:
        return abs(fb_coefficients(c, [k], spec, n)[0]) ** 2

    step = min(radius / 4.0, 1.0 / (8.0 * vol))
    count = min(int(2 * radius / step) + 1, 20001)
    grid = np.linspace(k0 - radius, k0 + radius, count)
    vals = np.abs(fb_coefficients(c, grid, spec, n)) ** 2
    best = int(np.argmax(vals))
    f0 = f(k0)
    if vals[best] <= f0:
        return float(k0)
    h = grid[1] - grid[0] if count > 1 else radius
    a, b = grid[best] - h, grid[best] + h
    inv = (math.sqrt(5) - 1) / 2
    x1, x2 = b - inv * (b - a), a + inv * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > width:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv * (b - a)
            f2 = f(x2)
    return float((a + b) / 2)


def scan_with_refinement(c: WeightedComb, spec: VanHoveSpec, freq_window: Interval,
                         step: float | None = None, **kw) -> SpectrumEstimate:
    """Grid scan for combs without a known dual lattice; local maxima above the
    threshold are refined and re-profiled."""
    grid = grid_candidates(c, freq_window, step)
    first = bragg_scan(c, grid, spec, freq_window=freq_window, provenance="grid", **kw)
    last = np.array([e.intensities[-1] for e in first.entries])
    h = grid[1] - grid[0] if len(grid) > 1 else 1.0
    refined = []
    for i in range(len(last)):
        left = last[i - 1] if i > 0 else -1.0
        right = last[i + 1] if i + 1 < len(last) else -1.0
        if last[i] >= first.epsilon and last[i] > 0 and last[i] >= left and last[i] >= right:
            k = refine_peak(c, grid[i], h, spec)
            if freq_window[0] <= k <= freq_window[1]:
                refined.append(k)
    if not refined:
        return first
    kept = [g for g in grid if all(abs(g - r) > h / 2 for r in refined)]
    return bragg_scan(c, kept + refined, spec, epsilon=first.epsilon, freq_window=freq_window,
                      provenance="refined", delta_rel=first.delta_rel)


# -- resummation and decomposition ------------------------------------------------

def _zfloat(z) -> float:
    return to_float(z) if isinstance(z, QuadValue) else float(z)


def sap_resum(se: SpectrumEstimate, z) -> complex:
    """Truncated Fourier-Bohr series ``sum_bragg I_inf(k) exp(2 pi i k z)``."""
    peaks = se.bragg()
    if not peaks:
        raise EmptySpectrumError("no Bragg peaks to resum")
    zf = _zfloat(z)
    terms = [e.i_inf * np.exp(2j * np.pi * e.k_float * zf) for e in peaks]
    return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))


@dataclass(frozen=True)
class Decomposition:
    gamma_s: Autocorrelation
    gamma_0: Autocorrelation
    matched: Autocorrelation
    kmax: float
    internal_max: float | None
    n: int

    def residual(self) -> float:
        return float(np.max(np.abs(self.gamma_0.values))) if len(self.gamma_0) else 0.0


def _size_index(se: SpectrumEstimate, n: int) -> int:
    try:
        return se.spec.sizes.index(n)
    except ValueError:
        raise DomainError(f"spectrum has no intensities for patch size {n}") from None


def fejer_weights(se: SpectrumEstimate, kmax: float, internal_max: float | None):
    """Frequencies, taper weights and intensities used by the resummation.

    Spectra scanned on ``k >= 0`` only are mirrored (``I(-k) = I(k)`` for real
    combs).
    """
    ks, taus, idx = [], [], []
    mirror = se.freq_window[0] >= 0
    for t, e in enumerate(se.entries):
        k = e.k_float
        tau = 1.0 - abs(k) / kmax
        if tau <= 0:
            continue
        if internal_max is not None and e.internal is not None:
            tau *= max(0.0, 1.0 - abs(e.internal) / internal_max)
            if tau <= 0:
                continue
        ks.append(k)
        taus.append(tau)
        idx.append(t)
        if mirror and k > 0:
            ks.append(-k)
            taus.append(tau)
            idx.append(t)
    return np.array(ks), np.array(taus), idx


def resum_fejer(se: SpectrumEstimate, zs: Sequence, n: int, kmax: float,
                internal_max: float | None = None) -> np.ndarray:
    """``(1/K) sum_k tau(k) I_n(k) exp(2 pi i k z)`` at each z."""
    col = _size_index(se, n)
    ks, taus, idx = fejer_weights(se, kmax, internal_max)
    inten = np.array([se.entries[t].intensities[col] for t in idx])
    coef = taus * inten / kmax
    zf = np.array([_zfloat(z) for z in zs], dtype=float)
    out = np.zeros(len(zf), dtype=complex)
    for r, z in enumerate(zf):
        terms = coef * np.exp(2j * np.pi * ks * z)
        out[r] = complex(math.fsum(terms.real), math.fsum(terms.imag))
    return out


def matched_autocorrelation(a: Autocorrelation, zs: Sequence, kmax: float) -> np.ndarray:
    """``sum_s a(s) sinc^2(K (z - s))``: the table seen through the frequency
    window of the resummation."""
    sx = a.x
    vals = a.values
    out = np.zeros(len(zs), dtype=complex if np.iscomplexobj(vals) else float)
    for r, z in enumerate(zs):
        u = kmax * (_zfloat(z) - sx)
        terms = vals * np.sinc(u) ** 2
        if np.iscomplexobj(terms):
            out[r] = complex(math.fsum(terms.real), math.fsum(terms.imag))
        else:
            out[r] = math.fsum(terms)
    return out


def decompose(
    a: Autocorrelation,
    se: SpectrumEstimate,
    kmax: float | None = None,
    internal_max: float | None = None,
    points: Sequence[QuadValue] | None = None,
    require_peaks: bool = True,
) -> Decomposition:
    """Split ``a`` into strongly almost periodic and null parts.

    ``kmax`` defaults to the largest |k| of the scanned window and
    ``internal_max`` to the internal cut-off recorded by the scan.  Values are
    produced at ``points`` (default: the support of ``a`` within half its
    radius, where the matched smoothing is not affected by truncation).
    The resummation itself does not use the labels; ``require_peaks=False``
    skips the check that at least one candidate was classified Bragg.
    """
    if require_peaks and not se.bragg():
        raise EmptySpectrumError("decomposition needs at least one Bragg peak")
    if kmax is None:
        kmax = max(abs(se.freq_window[0]), abs(se.freq_window[1]))
    if internal_max is None:
        internal_max = se.meta.get("internal_max")
    if points is None:
        half = a.radius / 2
        points = [z for z, x in zip(a.coords, a.x) if abs(x) <= half + 1e-12]
    points = list(points)
    gs = resum_fejer(se, points, a.n, kmax, internal_max)
    real = a.is_real
    if real:
        gs = gs.real
    matched = matched_autocorrelation(a, points, kmax)
    if real:
        matched = np.real(matched)
    g0 = matched - gs
    radius = max((abs(_zfloat(z)) for z in points), default=0.0)

    def table(vals, tag):
        return Autocorrelation(tuple(points), np.asarray(vals), a.n, a.volume, radius, f"{a.source}:{tag}", a.m)

    return Decomposition(table(gs, "S"), table(g0, "0"), table(matched, "matched"), float(kmax), internal_max, a.n)


# -- positive definiteness ---------------------------------------------------------

def gram_psd(
    values: Autocorrelation | Mapping,
    sample_points: Sequence[QuadValue],
    tolerance_factor: float = 1e-8,
) -> GramReport:
    """Gram test of ``[v(z_i - z_j)]``.

    Differences missing from the table count as 0.  For an
    :class:`Autocorrelation` a difference within its radius is a genuine zero;
    only differences beyond the radius are reported in ``missing``.
    """
    pts = list(sample_points)
    if len(pts) > MAX_GRAM:
        raise DomainError(f"at most {MAX_GRAM} sample points")
    if isinstance(values, Autocorrelation):
        lookup = values.as_dict()
        radius = values.radius
    else:
        lookup = {(k.key() if isinstance(k, QuadValue) else k): v for k, v in values.items()}
        radius = None
    n = len(pts)
    mat = np.zeros((n, n), dtype=complex)
    missing = 0
    for i in range(n):
        for j in range(n):
            d = pts[i] - pts[j]
            v = lookup.get(d.key())
            if v is None:
                if radius is None or abs(to_float(d)) > radius:
                    missing += 1
                v = 0.0
            mat[i, j] = v
    if np.all(mat.imag == 0):
        mat = mat.real
    return gram_report(mat, tolerance_factor, missing)


def gram_sample(coords: Sequence[QuadValue], diameter: float, count: int = 40) -> list[QuadValue]:
    """Up to ``count`` consecutive points nearest 0 spanning at most ``diameter``."""
    pts = sorted(coords, key=lambda z: abs(to_float(z)))
    chosen: list[QuadValue] = []
    for z in pts:
        if len(chosen) >= count:
            break
        trial = chosen + [z]
        xs = [to_float(t) for t in trial]
        if max(xs) - min(xs) <= diameter:
            chosen = trial
    return sorted(chosen, key=functools.cmp_to_key(quad_cmp))
