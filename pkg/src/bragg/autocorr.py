"""Finite-patch autocorrelations and the measure inequalities built on them.

``gamma_n({z}) = (1/Vol A_n) * sum_{x - y = z} w_x conj(w_y)`` over the points of
the patch inside ``A_n``.  Pairs are grouped by their exact difference and each
group is summed with :func:`math.fsum`, so tables are bitwise reproducible and
independent of summation order.  Values at ``-z`` are stored as the conjugates
of the values at ``z``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .comb import (
    PointSet,
    VanHoveSpec,
    WeightedComb,
    close_pairs,
    diff_keys,
    restrict,
)
from .errors import DomainError
from .exactnum import QuadValue, format_quad, quad_cmp, to_float

ORDER_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Autocorrelation:
    coords: tuple[QuadValue, ...]
    values: np.ndarray
    n: int
    volume: float
    radius: float
    source: str = ""
    m: int = 0

    def __len__(self) -> int:
        return len(self.coords)

    @cached_property
    def x(self) -> np.ndarray:
        return np.array([to_float(z) for z in self.coords], dtype=float)

    @cached_property
    def _index(self) -> dict:
        return {z.key(): i for i, z in enumerate(self.coords)}

    def value_at(self, z: QuadValue, default=0.0):
        i = self._index.get(z.key())
        return default if i is None else self.values[i]

    def __contains__(self, z: QuadValue) -> bool:
        return z.key() in self._index

    def as_dict(self) -> dict:
        return {z.key(): v for z, v in zip(self.coords, self.values)}

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values) or bool(np.all(self.values.imag == 0))

    def scaled(self, factor: float, source: str | None = None) -> Autocorrelation:
        return Autocorrelation(
            self.coords, self.values * factor, self.n, self.volume, self.radius,
            self.source if source is None else source, self.m,
        )


def _sort_exact(zs: list[QuadValue]) -> list[int]:
    xs = [to_float(z) for z in zs]
    order = sorted(range(len(zs)), key=xs.__getitem__)
    if any(xs[a] == xs[b] for a, b in zip(order, order[1:])):
        order = sorted(range(len(zs)), key=functools.cmp_to_key(lambda a, b: quad_cmp(zs[a], zs[b])))
    return order


def _fsum(vals: np.ndarray):
    if np.iscomplexobj(vals):
        return complex(math.fsum(vals.real), math.fsum(vals.imag))
    return math.fsum(vals)


def _empty(n, volume, radius, source, m) -> Autocorrelation:
    return Autocorrelation((), np.zeros(0), n, volume, radius, source, m)


def pair_table(c: WeightedComb, radius: float) -> tuple[list[QuadValue], list]:
    """Unnormalized ``sum w_x conj(w_y)`` per exact difference ``z = x - y``,
    ``|z| <= radius``, for all points of ``c``."""
    if len(c) == 0:
        return [], []
    i, j = close_pairs(c.x, c.coords, radius)
    keep = i >= j  # z >= 0; the rest by conjugation
    i, j = i[keep], j[keep]
    w = c.w
    prod = w[i] * np.conj(w[j])
    keys, D = diff_keys(c, i, j)
    zs: list[QuadValue] = []
    vals: list = []
    if isinstance(keys, np.ndarray):
        uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
        inverse = inverse.ravel()
        order = np.argsort(inverse, kind="stable")
        bounds = np.searchsorted(inverse[order], np.arange(len(uniq) + 1))
        for g, (p, q) in enumerate(uniq.tolist()):
            zs.append(QuadValue(p, q, D, c.m))
            vals.append(_fsum(prod[order[bounds[g]:bounds[g + 1]]]))
    else:
        groups: dict = {}
        for t, k in enumerate(keys):
            groups.setdefault(k, []).append(t)
        for (p, q), idx in groups.items():
            zs.append(QuadValue(p, q, D, c.m))
            vals.append(_fsum(prod[np.array(idx)]))
    # mirror to negative differences
    full_z, full_v = [], []
    for z, v in zip(zs, vals):
        if z.sign() == 0 and isinstance(v, complex):
            v = complex(v.real, 0.0)  # |w|^2; drop rounding residue in the imaginary part
        full_z.append(z)
        full_v.append(v)
        if z.sign() != 0:
            full_z.append(-z)
            full_v.append(v.conjugate() if isinstance(v, complex) else v)
    order = _sort_exact(full_z)
    return [full_z[k] for k in order], [full_v[k] for k in order]


def autocorrelation(c: WeightedComb, spec: VanHoveSpec, n: int, radius: float) -> Autocorrelation:
    if not radius > 0:
        raise DomainError("radius must be positive")
    patch = restrict(c, spec.interval(n))
    vol = spec.volume(n)
    source = c.generator_tag
    if len(patch) == 0:
        return _empty(n, vol, radius, source, c.m)
    zs, vals = pair_table(patch, radius)
    arr = np.array(vals, dtype=complex if patch.is_complex else float) / vol
    return Autocorrelation(tuple(zs), arr, n, vol, float(radius), source, c.m)


@dataclass(frozen=True)
class ConvergenceSeries:
    coords: tuple[QuadValue, ...]
    sizes: tuple[int, ...]
    table: dict = field(repr=False)
    cauchy: float

    def series(self, z: QuadValue) -> list:
        return self.table.get(z.key(), [0.0] * len(self.sizes))


def convergence_series(c: WeightedComb, spec: VanHoveSpec, radius: float) -> ConvergenceSeries:
    """Per-difference sequences ``gamma_n(z)`` over the van Hove sizes plus the
    Cauchy statistic ``max_z |gamma_last(z) - gamma_prev(z)|``."""
    tables = [autocorrelation(c, spec, n, radius) for n in spec.sizes]
    allz: dict = {}
    for t in tables:
        for z in t.coords:
            allz.setdefault(z.key(), z)
    zs = list(allz.values())
    order = _sort_exact(zs)
    zs = [zs[k] for k in order]
    table = {z.key(): [t.value_at(z) for t in tables] for z in zs}
    if len(tables) >= 2:
        cauchy = max((abs(v[-1] - v[-2]) for v in table.values()), default=0.0)
    else:
        cauchy = float("nan")
    return ConvergenceSeries(tuple(zs), spec.sizes, table, float(cauchy))


def convolve_finite(a: Autocorrelation, f: PointSet) -> Autocorrelation:
    """``a * delta_F * conj(delta_F)~``: mass ``w_u conj(w_v) a(z)`` lands at ``z + u - v``."""
    if len(f) == 0:
        return Autocorrelation((), np.zeros(0), a.n, a.volume, a.radius, a.source + "*F", a.m)
    fw = f.weight_list()
    kernel: dict = {}
    kcoord: dict = {}
    for u, wu in zip(f.coords, fw):
        for v, wv in zip(f.coords, fw):
            s = u - v
            kernel.setdefault(s.key(), []).append(wu * np.conj(wv))
            kcoord[s.key()] = s
    contrib: dict = {}
    coords: dict = {}
    for z, val in zip(a.coords, a.values):
        for k, ws in kernel.items():
            t = z + kcoord[k]
            coords[t.key()] = t
            contrib.setdefault(t.key(), []).extend(w * val for w in ws)
    zs = list(coords.values())
    order = _sort_exact(zs)
    zs = [zs[k] for k in order]
    vals = np.array([_fsum(np.array(contrib[z.key()])) for z in zs])
    if not np.iscomplexobj(a.values) and np.iscomplexobj(vals) and np.all(vals.imag == 0):
        vals = vals.real
    reach = float(f.x.max() - f.x.min())
    return Autocorrelation(tuple(zs), vals, a.n, a.volume, a.radius + reach, a.source + "*F", a.m)


def _nearest(gx: np.ndarray, gamma: PointSet, x: QuadValue, xf: float) -> QuadValue:
    k = int(np.searchsorted(gx, xf))
    cands = [gamma.coords[t] for t in (k - 1, k, k + 1) if 0 <= t < len(gamma)]
    best = None
    best_d = None
    for g in cands:
        d = abs(x - g)
        if best is None:
            best, best_d = g, d
            continue
        cmp = quad_cmp(d, best_d)
        if cmp < 0 or (cmp == 0 and quad_cmp(g, best) < 0):
            best, best_d = g, d
    return best


def covering_set(lam: PointSet | WeightedComb, gamma: PointSet) -> PointSet:
    """Finite ``F`` with ``Lambda`` inside ``Gamma + F``: offsets from each point to
    its nearest Gamma point (ties go to the smaller Gamma coordinate)."""
    if len(gamma) == 0:
        raise DomainError("covering set needs a nonempty Gamma")
    gx = gamma.x
    offsets: dict = {}
    for x, xf in zip(lam.coords, lam.x):
        g = _nearest(gx, gamma, x, float(xf))
        f = x - g
        offsets[f.key()] = f
    fs = list(offsets.values())
    order = _sort_exact(fs)
    fs = [fs[k] for k in order]
    F = PointSet(tuple(fs), (to_float(fs[0]), to_float(fs[-1])), m=gamma.m)
    if not covers(lam, gamma, F):
        raise DomainError("covering postcondition failed")
    return F


def covers(lam, gamma: PointSet, F: PointSet) -> bool:
    """Exact check that every point of ``lam`` is ``g + f`` with ``g`` in Gamma, ``f`` in F."""
    return all(any((x - f).key() in gamma.keys for f in F.coords) for x in lam.coords)


@dataclass(frozen=True)
class OrderVerdict:
    passed: bool
    max_violation: float
    worst_z: str | None
    checked: int


def order_check(a1: Autocorrelation, a2: Autocorrelation, scale: float, tol: float = ORDER_TOL) -> OrderVerdict:
    """Pass iff ``a1(z) <= scale * a2(z) + tol`` on the union of supports."""
    if a1.n != a2.n or a1.volume != a2.volume:
        raise DomainError(f"patch sizes differ: {a1.n} vs {a2.n}")
    if a1.radius != a2.radius:
        raise DomainError(f"radii differ: {a1.radius} vs {a2.radius}")
    keys: dict = {}
    for z in a1.coords + a2.coords:
        keys.setdefault(z.key(), z)
    worst = 0.0
    worst_z = None
    for z in keys.values():
        v1 = a1.value_at(z)
        v2 = a2.value_at(z)
        if abs(np.imag(v1)) > tol or abs(np.imag(v2)) > tol:
            raise DomainError("order check needs real-valued tables")
        excess = float(np.real(v1)) - scale * float(np.real(v2))
        if excess > worst:
            worst, worst_z = excess, format_quad(z)
    return OrderVerdict(worst <= tol, worst, worst_z, len(keys))
