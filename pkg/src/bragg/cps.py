"""Cut-and-project schemes over Q(sqrt(m)) and their weighted model combs.

A scheme is a lattice in ``R x R`` spanned by ``v1, v2`` whose internal
components are the Galois conjugates of the physical ones.  Projecting the
lattice points whose internal coordinate lies in the weight's support, with
weight ``h(x*)``, gives the model comb.  The dual lattice (inverse transpose of
the generator matrix) locates the Bragg peaks.
"""
from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .comb import Interval, WeightedComb, make_comb
from .errors import CapacityError, DomainError, ValidationError
from .exactnum import (
    QuadValue,
    cmp_real,
    golden,
    is_squarefree,
    parse_quad,
    quad_cmp,
    star,
    to_float,
)
from .linalg import GramReport, gram_report

MAX_CANDIDATES = 20_000_000

Vector = tuple[QuadValue, QuadValue]


@dataclass(frozen=True)
class CPScheme:
    """Lattice ``Z v1 + Z v2`` in physical x internal space with an internal window.

    ``degenerate`` schemes are the integer lattice with a trivial internal space
    (every internal coordinate is 0); they use ``v1`` only.
    """

    m: int
    v1: Vector
    v2: Vector | None
    window: Interval
    name: str = ""
    degenerate: bool = False

    @property
    def det(self) -> QuadValue:
        if self.degenerate:
            return QuadValue(1)
        return self.v1[0] * self.v2[1] - self.v2[0] * self.v1[1]

    @property
    def density(self) -> float:
        """Points per unit length of the indicator model set."""
        if self.degenerate:
            return 1.0 / abs(to_float(self.v1[0]))
        return (self.window[1] - self.window[0]) / abs(to_float(self.det))


@dataclass(frozen=True)
class WeightFn:
    """Compactly supported weight on internal space.

    ``indicator``: ``height`` on ``[lo, hi]``.  ``tent``: ``height`` at
    ``center``, falling linearly to 0 at ``center +- halfwidth``.
    ``autoconv_step``: ``g * g~`` for ``g = 1[-a/2, a/2] + 1[-r a/2, r a/2]``
    (``a = halfwidth``, ``r = step``), scaled to ``height`` at ``center``.
    """

    kind: str
    lo: float = -0.5
    hi: float = 0.5
    center: float = 0.0
    halfwidth: float = 1.0
    height: float = 1.0
    step: float = 0.5

    def __post_init__(self):
        if self.kind not in ("indicator", "tent", "autoconv_step"):
            raise ValidationError(f"unknown weight kind {self.kind!r}")
        if self.kind == "indicator":
            if not self.lo <= self.hi:
                raise ValidationError("indicator needs lo <= hi")
        else:
            if not self.halfwidth > 0:
                raise ValidationError("halfwidth must be positive")
            if not 0 < self.step <= 1:
                raise ValidationError("step ratio must lie in (0, 1]")
        if self.height < 0:
            raise ValidationError("weights must be nonnegative")

    @property
    def support(self) -> Interval:
        if self.kind == "indicator":
            return (self.lo, self.hi)
        return (self.center - self.halfwidth, self.center + self.halfwidth)

    @property
    def pd_certified(self) -> bool:
        # a translate of a positive definite function is not positive definite
        return self.kind in ("tent", "autoconv_step") and self.center == 0.0

    @property
    def max_value(self) -> float:
        return self.height


def tent(halfwidth: float = 1.0, height: float = 1.0, center: float = 0.0) -> WeightFn:
    return WeightFn("tent", center=center, halfwidth=halfwidth, height=height)


def indicator(lo: float, hi: float, height: float = 1.0) -> WeightFn:
    return WeightFn("indicator", lo=lo, hi=hi, height=height)


def _overlap(a: float, b: float, t: float) -> float:
    return max(0.0, min(a, t + b) - max(-a, t - b))


def weight_eval(h: WeightFn, t: float) -> float:
    if h.kind == "indicator":
        return h.height if h.lo <= t <= h.hi else 0.0
    u = t - h.center
    a = h.halfwidth
    if abs(u) >= a:
        return 0.0
    if h.kind == "tent":
        return h.height * (1.0 - abs(u) / a)
    r = h.step
    raw = _overlap(a / 2, a / 2, u) + 2.0 * _overlap(a / 2, r * a / 2, u) + _overlap(r * a / 2, r * a / 2, u)
    return h.height * raw / (a * (1.0 + 3.0 * r))


def weight_eval_array(h: WeightFn, t: np.ndarray) -> np.ndarray:
    return np.array([weight_eval(h, float(v)) for v in np.ravel(t)]).reshape(np.shape(t))


def _sinc(u: float) -> float:
    return 1.0 if u == 0 else math.sin(math.pi * u) / (math.pi * u)


def weight_ft(h: WeightFn, k: float):
    """Closed-form ``int h(t) exp(-2 pi i k t) dt``.  Real when h is centered
    at 0 (or the indicator is symmetric), complex otherwise."""
    if h.kind == "indicator":
        L = h.hi - h.lo
        val = h.height * L * _sinc(k * L)
        mid = (h.lo + h.hi) / 2
    else:
        a = h.halfwidth
        mid = h.center
        if h.kind == "tent":
            val = h.height * a * _sinc(k * a) ** 2
        else:
            r = h.step
            g = a * _sinc(k * a) + r * a * _sinc(k * r * a)
            val = h.height * g * g / (a * (1.0 + 3.0 * r))
    if mid == 0:
        return val
    return val * cmath.exp(-2j * math.pi * k * mid)


# -- schemes -------------------------------------------------------------------

def _tau_minus_one() -> float:
    return to_float(golden() - 1)


def preset(name: str) -> CPScheme:
    if name == "integer":
        one = QuadValue(1)
        return CPScheme(0, (one, one), None, (0.0, 0.0), "integer", degenerate=True)
    if name == "zroot2":
        r2 = QuadValue.sqrt(2)
        one = QuadValue(1, 0, 1, 2)
        return _validated(CPScheme(2, (one, one), (r2, -r2), (-1.0, 1.0), "zroot2"))
    if name == "fibonacci":
        t = golden()
        one = QuadValue(1, 0, 1, 5)
        return _validated(CPScheme(5, (one, one), (t, star(t)), (-1.0, _tau_minus_one()), "fibonacci"))
    raise ValidationError(f"unknown preset {name!r}")


PRESETS = ("integer", "zroot2", "fibonacci")


def _validated(s: CPScheme) -> CPScheme:
    if s.degenerate:
        return s
    if s.m != 0 and not is_squarefree(s.m):
        raise ValidationError(f"radicand {s.m} is not square-free")
    if not s.window[0] < s.window[1]:
        raise ValidationError("window needs lo < hi")
    for v in (s.v1, s.v2):
        if v[1] != star(v[0]):
            raise ValidationError("internal component must be the conjugate of the physical one")
    if s.det.sign() == 0:
        raise ValidationError("basis is singular")
    # projection to physical space must be injective on the lattice
    seen = set()
    for a in range(-4, 5):
        for b in range(-4, 5):
            x = s.v1[0] * a + s.v2[0] * b
            if x.key() in seen:
                raise ValidationError("physical projection is not injective")
            seen.add(x.key())
    return s


def _parse_vector(text: str, m: int) -> Vector:
    parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
    phys = parse_quad(parts[0], m)
    internal = parse_quad(parts[1], m) if len(parts) > 1 else star(phys)
    if phys.q == 0 and m:
        phys = QuadValue(phys.p, 0, phys.d, m)
    if internal.q == 0 and m:
        internal = QuadValue(internal.p, 0, internal.d, m)
    return (phys, internal)


def build_scheme(spec: Mapping[str, object]) -> CPScheme:
    """Scheme from a flat config mapping (``preset``, ``m``, ``basis.v1``,
    ``basis.v2``, ``window.lo``, ``window.hi``)."""
    name = spec.get("preset")
    if name:
        s = preset(str(name))
        if s.degenerate:
            return s
        lo = float(spec.get("window.lo", s.window[0]))
        hi = float(spec.get("window.hi", s.window[1]))
        if (lo, hi) != s.window:
            s = _validated(CPScheme(s.m, s.v1, s.v2, (lo, hi), s.name))
        return s
    if "m" not in spec:
        raise ValidationError("scheme needs a preset or a radicand m")
    m = int(spec["m"])
    if m == 0:
        return preset("integer")
    if not is_squarefree(m):
        raise ValidationError(f"radicand {m} is not square-free")
    try:
        v1 = _parse_vector(str(spec["basis.v1"]), m)
        v2 = _parse_vector(str(spec["basis.v2"]), m)
        window = (float(spec["window.lo"]), float(spec["window.hi"]))
    except KeyError as exc:
        raise ValidationError(f"scheme config lacks {exc.args[0]}") from None
    return _validated(CPScheme(m, v1, v2, window, str(spec.get("name", f"custom-m{m}"))))


def build_weight(spec: Mapping[str, object], scheme: CPScheme) -> WeightFn:
    """Weight from ``weight.kind``/``weight.halfwidth``/``weight.height``.

    Defaults: indicator of the scheme window; tents centered at 0 with the
    largest halfwidth that keeps the support inside the window.
    """
    kind = str(spec.get("weight.kind", "indicator"))
    height = float(spec.get("weight.height", 1.0))
    if kind == "indicator":
        lo, hi = scheme.window if not scheme.degenerate else (-0.5, 0.5)
        return indicator(float(spec.get("weight.lo", lo)), float(spec.get("weight.hi", hi)), height)
    if scheme.degenerate:
        default_hw = 1.0
    else:
        default_hw = min(-scheme.window[0], scheme.window[1])
        if default_hw <= 0:
            raise ValidationError("window does not contain 0; give weight.halfwidth explicitly")
    hw = float(spec.get("weight.halfwidth", default_hw))
    return WeightFn(kind, halfwidth=hw, height=height, step=float(spec.get("weight.step", 0.5)))


# -- enumeration ---------------------------------------------------------------

def _strip_points(basis: tuple[Vector, Vector], phys: Interval, internal: Interval):
    """All lattice points ``a*b1 + b*b2`` with physical part in ``phys`` and
    internal part in ``internal`` (closed, decided exactly).

    Float bounds only prune; each bound is widened by one lattice step so the
    exact test sees every candidate.
    """
    (p1, i1), (p2, i2) = basis
    f = [[to_float(p1), to_float(i1)], [to_float(p2), to_float(i2)]]
    det = f[0][0] * f[1][1] - f[1][0] * f[0][1]
    corners = [(x, y) for x in phys for y in internal]
    a_vals = [(x * f[1][1] - y * f[1][0]) / det for x, y in corners]
    a_lo, a_hi = math.floor(min(a_vals)) - 1, math.ceil(max(a_vals)) + 1
    width = (a_hi - a_lo + 1)
    if width > MAX_CANDIDATES:
        raise CapacityError("coefficient box too large")
    lo_x, hi_x = Fraction(phys[0]), Fraction(phys[1])
    lo_y, hi_y = Fraction(internal[0]), Fraction(internal[1])
    out = []
    total = 0
    for a in range(a_lo, a_hi + 1):
        bounds = []
        for (lo, hi), c0, c1 in ((phys, f[0][0], f[1][0]), (internal, f[0][1], f[1][1])):
            if c1 == 0:
                continue
            u, v = (lo - a * c0) / c1, (hi - a * c0) / c1
            bounds.append((min(u, v), max(u, v)))
        if not bounds:
            raise DomainError("degenerate basis in enumeration")
        b_lo = math.floor(max(b[0] for b in bounds)) - 1
        b_hi = math.ceil(min(b[1] for b in bounds)) + 1
        if b_hi < b_lo:
            continue
        total += b_hi - b_lo + 1
        if total > MAX_CANDIDATES:
            raise CapacityError("coefficient box too large")
        base_x = p1 * a
        base_y = i1 * a
        for b in range(b_lo, b_hi + 1):
            x = base_x + p2 * b
            if cmp_real(x, lo_x) < 0 or cmp_real(x, hi_x) > 0:
                continue
            y = base_y + i2 * b
            if cmp_real(y, lo_y) < 0 or cmp_real(y, hi_y) > 0:
                continue
            out.append((a, b, x, y))
    return out


def generate_model_comb(s: CPScheme, h: WeightFn, interval: Interval) -> WeightedComb:
    """Patch of ``sum h(x*) delta_x`` over lattice points with ``x`` in ``interval``."""
    lo, hi = float(interval[0]), float(interval[1])
    tag = f"{s.name}:{h.kind}"
    if s.degenerate:
        step = s.v1[0]
        n0, n1 = math.ceil(lo / to_float(step)), math.floor(hi / to_float(step))
        if n1 - n0 > MAX_CANDIDATES:
            raise CapacityError("interval too long")
        w0 = weight_eval(h, 0.0)
        coords = [step * n for n in range(n0, n1 + 1)]
        return make_comb(coords, [w0] * len(coords), (lo, hi), 0, tag)
    sup = h.support
    internal = (max(sup[0], s.window[0]), min(sup[1], s.window[1]))
    if internal[0] > internal[1]:
        return make_comb([], [], (lo, hi), s.m, tag)
    pts = _strip_points((s.v1, s.v2), (lo, hi), internal)
    coords = [x for _, _, x, _ in pts]
    weights = [weight_eval(h, to_float(y)) for _, _, _, y in pts]
    return make_comb(coords, weights, (lo, hi), s.m, tag)


def internal_coords(c: WeightedComb) -> list[QuadValue]:
    return [star(x) for x in c.coords]


def dual_basis(s: CPScheme) -> tuple[Vector, Vector]:
    """Rows of the inverse transpose of the generator matrix (exact)."""
    if s.degenerate:
        raise DomainError("integer scheme is self-dual; it has no 2x2 dual basis")
    det = s.det
    if det.sign() == 0:
        raise DomainError("degenerate scheme")
    (p1, i1), (p2, i2) = s.v1, s.v2
    w1 = (i2 / det, -p2 / det)
    w2 = (-i1 / det, p1 / det)
    return w1, w2


def pairing(v: Vector, w: Vector) -> QuadValue:
    return v[0] * w[0] + v[1] * w[1]


def dual_candidates(s: CPScheme, coeff_bound: int) -> list[QuadValue]:
    """Physical projections of dual lattice points with coefficients bounded by
    ``coeff_bound``, deduplicated and sorted."""
    if coeff_bound < 1:
        raise DomainError("coeff_bound must be >= 1")
    if s.degenerate:
        return [QuadValue(k) for k in range(-coeff_bound, coeff_bound + 1)]
    w1, w2 = dual_basis(s)
    seen = {}
    for a in range(-coeff_bound, coeff_bound + 1):
        for b in range(-coeff_bound, coeff_bound + 1):
            k = w1[0] * a + w2[0] * b
            seen[k.key()] = k
    return sorted(seen.values(), key=_exact_key)


def dual_window(s: CPScheme, kmax: float, internal_max: float, kmin: float | None = None) -> list[QuadValue]:
    """All projected dual points with ``kmin <= k <= kmax`` and ``|k*| <= internal_max``."""
    lo = -kmax if kmin is None else kmin
    if s.degenerate:
        return [QuadValue(k) for k in range(math.ceil(lo), math.floor(kmax) + 1)]
    w1, w2 = dual_basis(s)
    pts = _strip_points((w1, w2), (lo, kmax), (-internal_max, internal_max))
    return sorted((x for _, _, x, _ in pts), key=_exact_key)


_exact_key = functools.cmp_to_key(quad_cmp)


def model_amplitude(s: CPScheme, h: WeightFn, k: QuadValue) -> complex:
    """Limit Fourier-Bohr coefficient of the model comb at a dual point:
    ``h^(-k*) / |det|`` (``h(0)`` at integers for the integer scheme)."""
    if s.degenerate:
        return weight_eval(h, 0.0) if k.q == 0 and k.d == 1 else 0.0
    val = weight_ft(h, -to_float(star(k)))
    return val / abs(to_float(s.det))


def check_pd_weight(h: WeightFn, sample_count: int, tolerance_factor: float = 1e-8) -> GramReport:
    """Gram test of ``[h(t_i - t_j)]`` on equally spaced samples spanning twice
    the support length."""
    if sample_count < 2:
        raise DomainError("sample_count must be >= 2")
    lo, hi = h.support
    span = 2.0 * (hi - lo)
    t = np.linspace(0.0, span, sample_count)
    mat = np.array([[weight_eval(h, ti - tj) for tj in t] for ti in t])
    return gram_report(mat, tolerance_factor)
