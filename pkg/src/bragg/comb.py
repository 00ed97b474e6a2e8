"""Finite patches of weighted Dirac combs on the real line.

Coordinates are exact :class:`~bragg.exactnum.QuadValue`; weights are doubles
(or complex).  A patch carries the closed window on which it is certified
complete, so restrictions that would reach outside it fail loudly instead of
returning silently truncated data.
"""
from __future__ import annotations

import functools
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, IncompleteDataError, UndefinedStatisticError
from .exactnum import QuadValue, cmp_real, format_quad, parse_quad, quad_cmp, to_float

Interval = tuple[float, float]

_INT64_SAFE = 2**61


@dataclass(frozen=True)
class VanHoveSpec:
    """Centered averaging intervals ``A_n = [-n*L0, n*L0]``."""

    L0: float = 1.0
    sizes: tuple[int, ...] = (50, 100, 200, 400)

    def __post_init__(self):
        if not self.L0 > 0:
            raise DomainError("L0 must be positive")
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes or any(s <= 0 for s in sizes):
            raise DomainError("sizes must be positive integers")
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise DomainError("sizes must be strictly increasing")
        object.__setattr__(self, "sizes", sizes)

    def interval(self, n: int) -> Interval:
        return (-n * self.L0, n * self.L0)

    def volume(self, n: int) -> float:
        return 2.0 * n * self.L0

    @property
    def largest(self) -> Interval:
        return self.interval(self.sizes[-1])


def _sorted_exact(coords: Sequence[QuadValue], weights: Sequence) -> tuple[list, list]:
    order = sorted(range(len(coords)), key=lambda i: to_float(coords[i]))
    cs = [coords[i] for i in order]
    ws = [weights[i] for i in order]
    if any(quad_cmp(a, b) >= 0 for a, b in zip(cs, cs[1:])):
        order = sorted(
            range(len(cs)), key=functools.cmp_to_key(lambda i, j: quad_cmp(cs[i], cs[j]))
        )
        cs = [cs[i] for i in order]
        ws = [ws[i] for i in order]
    return cs, ws


def _in_closed(x: QuadValue, interval: Interval) -> bool:
    return cmp_real(x, interval[0]) >= 0 and cmp_real(x, interval[1]) <= 0


@dataclass(frozen=True, eq=False)
class WeightedComb:
    """Finite patch ``sum_x w_x delta_x`` complete on ``window``.

    Build instances with :func:`make_comb`; the constructor assumes its input is
    already canonical (sorted, nonzero weights, inside the window).
    """

    coords: tuple[QuadValue, ...]
    weights: tuple
    window: Interval
    m: int = 0
    generator_tag: str = ""

    def __len__(self) -> int:
        return len(self.coords)

    @cached_property
    def x(self) -> np.ndarray:
        return np.array([to_float(c) for c in self.coords], dtype=float)

    @cached_property
    def w(self) -> np.ndarray:
        dtype = complex if self.is_complex else float
        return np.array(self.weights, dtype=dtype)

    @cached_property
    def is_complex(self) -> bool:
        return any(isinstance(v, complex) for v in self.weights)

    @cached_property
    def tb_bound(self) -> float:
        """Largest total |weight| over closed unit subintervals of the window."""
        if not self.coords:
            return 0.0
        x = self.x
        aw = np.abs(self.w)
        csum = np.concatenate([[0.0], np.cumsum(aw)])
        hi = np.searchsorted(x, x + 1.0 + 1e-12, side="right")
        return float(np.max(csum[hi] - csum[:-1]))

    @cached_property
    def int_coords(self):
        """Coordinates as integer pairs ``(P, Q)`` over one common denominator ``D``.

        Returns ``(P, Q, D)`` with int64 arrays when everything fits, otherwise
        Python-int lists.
        """
        D = 1
        for c in self.coords:
            D = D * c.d // math.gcd(D, c.d)
        P = [c.p * (D // c.d) for c in self.coords]
        Q = [c.q * (D // c.d) for c in self.coords]
        big = max((abs(v) for v in P + Q), default=0)
        if big < _INT64_SAFE:
            return np.array(P, dtype=np.int64), np.array(Q, dtype=np.int64), D
        return P, Q, D

    def weight_at(self, coord: QuadValue, default=0.0):
        return self._index.get(coord.key(), default)

    @cached_property
    def _index(self) -> dict:
        return {c.key(): w for c, w in zip(self.coords, self.weights)}

    def support(self) -> PointSet:
        return PointSet(self.coords, self.window, m=self.m)


@dataclass(frozen=True, eq=False)
class PointSet:
    """Sorted exact point set on a window; optional weights for finite kernels."""

    coords: tuple[QuadValue, ...]
    window: Interval
    weights: tuple | None = None
    m: int = 0

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    @cached_property
    def x(self) -> np.ndarray:
        return np.array([to_float(c) for c in self.coords], dtype=float)

    @cached_property
    def keys(self) -> frozenset:
        return frozenset(c.key() for c in self.coords)

    def __contains__(self, item: QuadValue) -> bool:
        return item.key() in self.keys

    def weight_list(self) -> list:
        return list(self.weights) if self.weights is not None else [1.0] * len(self.coords)


def make_comb(
    coords: Iterable,
    weights: Iterable,
    window: Interval,
    m: int = 0,
    generator_tag: str = "",
) -> WeightedComb:
    """Validate and canonicalize a patch: drop zero weights, sort exactly,
    reject duplicates and points outside the window."""
    cs = [QuadValue.coerce(c, m) for c in coords]
    ws = list(weights)
    if len(cs) != len(ws):
        raise DomainError("coordinates and weights differ in length")
    window = (float(window[0]), float(window[1]))
    keep = [i for i, w in enumerate(ws) if w != 0]
    cs = [cs[i] for i in keep]
    ws = [_clean_weight(ws[i]) for i in keep]
    for c in cs:
        if c.q != 0 and m != 0 and c.m != m:
            raise DomainError("coordinate radicand differs from comb context")
        if c.q != 0 and m == 0:
            m = c.m
    cs, ws = _sorted_exact(cs, ws)
    for a, b in zip(cs, cs[1:]):
        if quad_cmp(a, b) == 0:
            raise DomainError(f"duplicate coordinate {format_quad(a)}")
    for c in cs:
        if not _in_closed(c, window):
            raise DomainError(f"coordinate {format_quad(c)} outside window {window}")
    return WeightedComb(tuple(cs), tuple(ws), window, m, generator_tag)


def _clean_weight(w):
    if isinstance(w, complex) or (isinstance(w, np.complexfloating)):
        w = complex(w)
        return w.real if w.imag == 0 else w
    return float(w)


def empty_comb(window: Interval, m: int = 0, tag: str = "") -> WeightedComb:
    return WeightedComb((), (), (float(window[0]), float(window[1])), m, tag)


def with_weights(c: WeightedComb, weights: Sequence, tag: str | None = None) -> WeightedComb:
    """Same support, new weights (zeros are dropped)."""
    if len(weights) != len(c):
        raise DomainError("weight count differs from point count")
    keep = [i for i, w in enumerate(weights) if w != 0]
    return WeightedComb(
        tuple(c.coords[i] for i in keep),
        tuple(_clean_weight(weights[i]) for i in keep),
        c.window,
        c.m,
        c.generator_tag if tag is None else tag,
    )


# -- operations ----------------------------------------------------------------

def restrict(c: WeightedComb, interval: Interval) -> WeightedComb:
    lo, hi = float(interval[0]), float(interval[1])
    if lo > hi:
        return empty_comb((lo, hi), c.m, c.generator_tag)
    if lo < c.window[0] or hi > c.window[1]:
        raise IncompleteDataError(f"interval {(lo, hi)} exceeds certified window {c.window}")
    x = c.x
    # float prefilter with margin, exact decision at the boundary
    i0 = int(np.searchsorted(x, lo - 1e-9 * max(1.0, abs(lo)), side="left"))
    i1 = int(np.searchsorted(x, hi + 1e-9 * max(1.0, abs(hi)), side="right"))
    idx = [i for i in range(i0, i1) if _in_closed(c.coords[i], (lo, hi))]
    return WeightedComb(
        tuple(c.coords[i] for i in idx),
        tuple(c.weights[i] for i in idx),
        (lo, hi),
        c.m,
        c.generator_tag,
    )


def close_pairs(x: np.ndarray, coords: Sequence[QuadValue], radius: float):
    """Index arrays ``(i, j)`` of all ordered pairs with ``|x_i - x_j| <= radius``,
    decided exactly.  Pairs come out sorted by ``(i, j)``."""
    n = len(x)
    if n == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    slack = 1e-9 * max(1.0, radius)
    lo = np.searchsorted(x, x - radius - slack, side="left")
    hi = np.searchsorted(x, x + radius + slack, side="right")
    counts = hi - lo
    i = np.repeat(np.arange(n), counts)
    offsets = np.arange(int(counts.sum())) - np.repeat(np.cumsum(counts) - counts, counts)
    j = np.repeat(lo, counts) + offsets
    gap = np.abs(x[i] - x[j])
    border = np.abs(gap - radius) <= slack
    if border.any():
        r = Fraction(radius)
        keep = np.ones(len(i), dtype=bool)
        for t in np.nonzero(border)[0]:
            diff = abs(coords[i[t]] - coords[j[t]])
            keep[t] = cmp_real(diff, r) <= 0
        i, j = i[keep], j[keep]
    return i, j


def diff_keys(c, i: np.ndarray, j: np.ndarray):
    """Exact keys of ``x_i - x_j`` as an integer array of shape (k, 2) plus the
    common denominator, or a list of QuadValue keys when int64 is too narrow."""
    P, Q, D = c.int_coords
    if isinstance(P, np.ndarray):
        return np.stack([P[i] - P[j], Q[i] - Q[j]], axis=1), D
    return [(P[a] - P[b], Q[a] - Q[b]) for a, b in zip(i.tolist(), j.tolist())], D


def difference_set(c: WeightedComb | PointSet, radius: float) -> PointSet:
    if not radius > 0:
        raise DomainError("radius must be positive")
    if len(c) == 0:
        raise DomainError("difference set of an empty patch")
    i, j = close_pairs(c.x, c.coords, radius)
    keys, D = diff_keys(_as_comb(c), i, j)
    uniq = {tuple(k) for k in (keys.tolist() if isinstance(keys, np.ndarray) else keys)}
    m = c.m
    vals = [QuadValue(p, q, D, m) for p, q in uniq]
    vals.sort(key=functools.cmp_to_key(quad_cmp))
    return PointSet(tuple(vals), (-float(radius), float(radius)), m=m)


def _as_comb(s: WeightedComb | PointSet) -> WeightedComb:
    if isinstance(s, WeightedComb):
        return s
    return WeightedComb(s.coords, tuple(s.weight_list()), s.window, s.m)


def compare_combs(c1: WeightedComb, c2: WeightedComb, C: float, tol: float = 0.0) -> str:
    """``'below'`` if 0 <= c1 <= C*c2 pointwise, ``'sandwich'`` if
    |c1| <= C*c2 with c2 >= 0, ``'neither'`` otherwise."""
    if tuple(c1.window) != tuple(c2.window):
        raise DomainError(f"windows differ: {c1.window} vs {c2.window}")
    if C < 0:
        raise DomainError("C must be nonnegative")
    c2_nonneg = all(not isinstance(w, complex) and w >= 0 for w in c2.weights)
    below = c2_nonneg
    sandwich = c2_nonneg
    for coord, wp in zip(c1.coords, c1.weights):
        w = c2.weight_at(coord, 0.0)
        if isinstance(w, complex):
            return "neither"
        bound = C * w + tol
        if isinstance(wp, complex) or wp < 0 or wp > bound:
            below = False
        if abs(wp) > bound:
            sandwich = False
        if not (below or sandwich):
            break
    if below:
        return "below"
    if sandwich:
        return "sandwich"
    return "neither"


def threshold_subset(c: WeightedComb, C1: float) -> PointSet:
    if not C1 > 0:
        raise DomainError("threshold must be positive")
    if c.is_complex:
        raise DomainError("threshold subset needs real weights")
    pts = tuple(x for x, w in zip(c.coords, c.weights) if w >= C1)
    return PointSet(pts, c.window, m=c.m)


def max_gap(s: PointSet | WeightedComb) -> float:
    """Largest hole: consecutive spacings plus the two boundary gaps."""
    if len(s) < 2:
        raise UndefinedStatisticError("max_gap needs at least two points")
    x = s.x
    gaps = np.diff(x)
    edges = (x[0] - s.window[0], s.window[1] - x[-1])
    return float(max(gaps.max(), *edges))


def convolve_comb_finite(c: WeightedComb, F: PointSet, window: Interval | None = None) -> WeightedComb:
    """``c * delta_F`` (weights of coinciding points add), clipped to ``window``
    (default: the comb window shrunk by the reach of F, where it is complete)."""
    if len(F) == 0:
        return empty_comb(c.window, c.m, c.generator_tag)
    fx = F.x
    if window is None:
        window = (c.window[0] + max(0.0, float(fx.max())), c.window[1] + min(0.0, float(fx.min())))
    acc: dict = {}
    coords: dict = {}
    fw = F.weight_list()
    for y, wy in zip(c.coords, c.weights):
        for f, wf in zip(F.coords, fw):
            z = y + f
            k = z.key()
            acc[k] = acc.get(k, 0.0) + wy * wf
            coords[k] = z
    pts = [coords[k] for k in acc if _in_closed(coords[k], window)]
    return make_comb(pts, [acc[p.key()] for p in pts], window, c.m, c.generator_tag + "*F")


def subcomb(c: WeightedComb, mask: Sequence[bool], tag: str | None = None) -> WeightedComb:
    ws = [w if keep else 0.0 for w, keep in zip(c.weights, mask)]
    return with_weights(c, ws, tag)


def same_support_comb(s: PointSet, weight: float = 1.0, tag: str = "") -> WeightedComb:
    return WeightedComb(s.coords, (float(weight),) * len(s), s.window, s.m, tag)


# -- file format ---------------------------------------------------------------

def format_weight(w) -> str:
    if isinstance(w, complex):
        return f"{w.real!r}{w.imag:+}j"
    return repr(float(w))


def parse_weight(text: str):
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        return _clean_weight(complex(text.replace(" ", "")))


def dumps_comb(c: WeightedComb, sep: str = "\t", header: dict | None = None) -> str:
    out = io.StringIO()
    for k, v in (header or {}).items():
        out.write(f"# {k} {v}\n")
    out.write(f"# window {c.window[0]!r} {c.window[1]!r}\n")
    out.write(f"# m {c.m}\n")
    if c.generator_tag:
        out.write(f"# tag {c.generator_tag}\n")
    if sep == ",":
        out.write("coordinate,weight\n")
    for x, w in zip(c.coords, c.weights):
        out.write(f"{format_quad(x)}{sep}{format_weight(w)}\n")
    return out.getvalue()


def loads_comb(text: str) -> WeightedComb:
    window = None
    m = 0
    tag = ""
    coords, weights = [], []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split(None, 1)
            if not parts:
                continue
            key = parts[0]
            rest = parts[1] if len(parts) > 1 else ""
            if key == "window":
                a, b = rest.split()
                window = (float(a), float(b))
            elif key == "m":
                m = int(rest)
            elif key == "tag":
                tag = rest
            continue
        if line.lower().startswith("coordinate"):
            continue
        sep = "\t" if "\t" in line else ","
        coord, weight = line.split(sep, 1)
        coords.append(parse_quad(coord, m))
        weights.append(parse_weight(weight))
    if window is None:
        raise DomainError("comb file lacks a '# window a b' header")
    return make_comb(coords, weights, window, m, tag)


def read_comb(path) -> WeightedComb:
    with open(path, encoding="utf-8") as fh:
        return loads_comb(fh.read())


def write_comb(c: WeightedComb, path, header: dict | None = None) -> None:
    sep = "," if str(path).endswith(".csv") else "\t"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_comb(c, sep=sep, header=header))
