"""Exact arithmetic in real quadratic fields Q(sqrt(m)).

A value is stored as ``(p + q*sqrt(m)) / d`` with integer ``p, q``, positive
``d`` and ``gcd(p, q, d) == 1``.  ``m == 0`` marks the rational-only context
(the integer lattice scheme); rational values combine freely with any radicand,
two different nonzero radicands never do.

The Galois conjugation :func:`star` is the internal-space projection used by the
cut-and-project schemes in :mod:`bragg.cps`.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import total_ordering

from .errors import CapacityError, DomainError

# Numerators/denominators beyond this many bits raise CapacityError instead of
# silently eating memory during difference enumeration.
MAX_BITS = 4096


def is_squarefree(m: int) -> bool:
    if m < 2:
        return False
    k = 2
    while k * k <= m:
        if m % (k * k) == 0:
            return False
        k += 1
    return True


def _join_radicand(m1: int, m2: int, q1: int, q2: int) -> int:
    if m1 == m2:
        return m1
    if m1 == 0 and q1 == 0:
        return m2
    if m2 == 0 and q2 == 0:
        return m1
    if q1 == 0 and q2 == 0:
        return max(m1, m2)
    raise DomainError(f"mixed radicands sqrt({m1}) and sqrt({m2})")


@total_ordering
class QuadValue:
    __slots__ = ("p", "q", "d", "m", "_hash")

    def __init__(self, p: int, q: int = 0, d: int = 1, m: int = 0) -> None:
        if d == 0:
            raise ZeroDivisionError("zero denominator")
        if q != 0 and m == 0:
            raise DomainError("irrational part requires a radicand")
        if d < 0:
            p, q, d = -p, -q, -d
        g = math.gcd(math.gcd(p, q), d)
        if g > 1:
            p, q, d = p // g, q // g, d // g
        if max(abs(p).bit_length(), abs(q).bit_length(), d.bit_length()) > MAX_BITS:
            raise CapacityError(f"quadratic value exceeds {MAX_BITS} bits")
        self.p = p
        self.q = q
        self.d = d
        self.m = m
        self._hash = None

    # -- construction -----------------------------------------------------
    @classmethod
    def rational(cls, x: int | Fraction | float, m: int = 0) -> QuadValue:
        f = Fraction(x)
        return cls(f.numerator, 0, f.denominator, m)

    @classmethod
    def sqrt(cls, m: int) -> QuadValue:
        return cls(0, 1, 1, m)

    @classmethod
    def coerce(cls, x, m: int = 0) -> QuadValue:
        if isinstance(x, QuadValue):
            return x
        if isinstance(x, (int, Fraction, float)):
            return cls.rational(x, m)
        raise TypeError(f"cannot interpret {x!r} as a quadratic value")

    # -- properties -------------------------------------------------------
    @property
    def is_rational(self) -> bool:
        return self.q == 0

    def key(self) -> tuple[int, int, int]:
        """Canonical hashable form; equal values have equal keys."""
        return (self.p, self.q, self.d)

    def rational_part(self) -> Fraction:
        return Fraction(self.p, self.d)

    def irrational_part(self) -> Fraction:
        return Fraction(self.q, self.d)

    def norm(self) -> Fraction:
        return Fraction(self.p * self.p - self.m * self.q * self.q, self.d * self.d)

    def sign(self) -> int:
        return _sign(self.p, self.q, self.m)

    # -- arithmetic -------------------------------------------------------
    def _other(self, other) -> QuadValue | None:
        if isinstance(other, QuadValue):
            return other
        if isinstance(other, (int, Fraction)):
            return QuadValue.rational(other, self.m)
        return None

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        m = _join_radicand(self.m, o.m, self.q, o.q)
        return QuadValue(self.p * o.d + o.p * self.d, self.q * o.d + o.q * self.d, self.d * o.d, m)

    __radd__ = __add__

    def __neg__(self) -> QuadValue:
        return QuadValue(-self.p, -self.q, self.d, self.m)

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        m = _join_radicand(self.m, o.m, self.q, o.q)
        return QuadValue(
            self.p * o.p + m * self.q * o.q,
            self.p * o.q + self.q * o.p,
            self.d * o.d,
            m,
        )

    __rmul__ = __mul__

    def inverse(self) -> QuadValue:
        n = self.p * self.p - self.m * self.q * self.q
        if n == 0:
            raise ZeroDivisionError("division by zero quadratic value")
        # 1/((p+q r)/d) = d (p - q r) / (p^2 - m q^2)
        return QuadValue(self.d * self.p, -self.d * self.q, n, self.m)

    def __truediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __abs__(self) -> QuadValue:
        return -self if self.sign() < 0 else self

    # -- comparison -------------------------------------------------------
    def __eq__(self, other) -> bool:
        o = self._other(other)
        if o is None:
            return NotImplemented
        if self.key() != o.key():
            return False
        return self.q == 0 or self.m == o.m

    def __lt__(self, other) -> bool:
        o = self._other(other)
        if o is None:
            if isinstance(other, float):
                o = QuadValue.rational(other, self.m)
            else:
                return NotImplemented
        return quad_cmp(self, o) < 0

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.key())
        return self._hash

    def __float__(self) -> float:
        return to_float(self)

    def __repr__(self) -> str:
        return f"QuadValue({format_quad(self)!r}, m={self.m})"

    def __str__(self) -> str:
        return format_quad(self)


def _sign(p: int, q: int, m: int) -> int:
    """Exact sign of p + q*sqrt(m) (m square-free or q == 0)."""
    sp = (p > 0) - (p < 0)
    sq = (q > 0) - (q < 0)
    if sq == 0:
        return sp
    if sp == 0 or sp == sq:
        return sq
    # opposite signs: compare p^2 with m q^2
    diff = p * p - m * q * q
    return sp if diff > 0 else sq


def quad_arith(a: QuadValue, b: QuadValue, op: str) -> QuadValue:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise DomainError(f"unknown operation {op!r}")


def star(a: QuadValue) -> QuadValue:
    """Galois conjugate sqrt(m) -> -sqrt(m)."""
    if a.q == 0:
        return a
    return QuadValue(a.p, -a.q, a.d, a.m)


def quad_cmp(a: QuadValue, b: QuadValue) -> int:
    """Exact sign of ``a - b`` as -1, 0 or 1; never goes through floats."""
    m = _join_radicand(a.m, b.m, a.q, b.q)
    # (a - b) * a.d * b.d has the same sign since denominators are positive
    return _sign(a.p * b.d - b.p * a.d, a.q * b.d - b.q * a.d, m)


def to_float(a: QuadValue) -> float:
    """Double within a small fraction of an ulp of the exact real value.

    The irrational part is approximated by an integer square root scaled by
    ``2**k``; ``k`` grows until the scaled numerator has at least 70
    significant bits, so cancellation cannot cost precision.
    """
    if a.q == 0:
        return a.p / a.d if max(abs(a.p), a.d) < 2**53 else float(Fraction(a.p, a.d))
    sq = 1 if a.q > 0 else -1
    qq = a.q * a.q * a.m
    k = 80
    while True:
        root = math.isqrt(qq << (2 * k))  # floor(|q| sqrt(m) 2^k)
        num = (a.p << k) + sq * root
        if abs(num) >> 70 or k > 4 * MAX_BITS:
            return float(Fraction(num, a.d << k))
        k += 64


def to_fraction(x) -> Fraction:
    return Fraction(x)


def floor_quad(a: QuadValue) -> int:
    """Exact floor of a quadratic value."""
    n = math.floor(to_float(a))
    while quad_cmp(a, QuadValue.rational(n, a.m)) < 0:
        n -= 1
    while quad_cmp(a, QuadValue.rational(n + 1, a.m)) >= 0:
        n += 1
    return n


def cmp_real(a: QuadValue, x: float | Fraction | int) -> int:
    """Exact sign of ``a - x`` for a real number given as float/Fraction/int."""
    return quad_cmp(a, QuadValue.rational(x, a.m))


# -- text form ---------------------------------------------------------------

def _frac_text(num: int, den: int) -> str:
    return str(num) if den == 1 else f"{num}/{den}"


def format_quad(a: QuadValue) -> str:
    """Textual form ``p/d+q/d*sqrt(m)``, each term reduced, zero terms omitted."""
    r = Fraction(a.p, a.d)
    s = Fraction(a.q, a.d)
    parts = []
    if r != 0 or s == 0:
        parts.append(_frac_text(r.numerator, r.denominator))
    if s != 0:
        sign = "-" if s < 0 else ("+" if parts else "")
        mag = abs(s)
        if mag == 1:
            body = f"sqrt({a.m})"
        else:
            body = f"{_frac_text(mag.numerator, mag.denominator)}*sqrt({a.m})"
        parts.append(sign + body)
    return "".join(parts)


_TERM = re.compile(
    r"""\s*(?P<sign>[+-]?)\s*
    (?:
        (?P<coef>\d+(?:/\d+)?)\s*\*\s*sqrt\(\s*(?P<m1>\d+)\s*\)
      | sqrt\(\s*(?P<m2>\d+)\s*\)(?:\s*/\s*(?P<den>\d+))?
      | (?P<rat>\d+(?:/\d+)?)
    )\s*""",
    re.VERBOSE,
)


def parse_quad(text: str, m: int | None = None) -> QuadValue:
    """Parse the textual form.  Accepts omitted zero terms ("3", "sqrt(2)",
    "1/2+1/2*sqrt(5)", "-sqrt(5)/2").  ``m`` supplies the context radicand; a
    radicand written in the text must agree with it."""
    s = text.strip()
    if not s:
        raise DomainError("empty quadratic value")
    pos = 0
    rat = Fraction(0)
    irr = Fraction(0)
    radicand = None
    while pos < len(s):
        mt = _TERM.match(s, pos)
        if mt is None or mt.end() == pos:
            raise DomainError(f"cannot parse quadratic value {text!r}")
        if pos > 0 and not mt.group("sign"):
            raise DomainError(f"missing operator in {text!r}")
        sign = -1 if mt.group("sign") == "-" else 1
        if mt.group("rat") is not None:
            rat += sign * Fraction(mt.group("rat"))
        else:
            if mt.group("coef") is not None:
                coef = Fraction(mt.group("coef"))
                mm = int(mt.group("m1"))
            else:
                coef = Fraction(1, int(mt.group("den") or 1))
                mm = int(mt.group("m2"))
            if radicand is not None and radicand != mm:
                raise DomainError(f"two radicands in {text!r}")
            radicand = mm
            irr += sign * coef
        pos = mt.end()
    if radicand is not None:
        if m not in (None, 0) and m != radicand:
            raise DomainError(f"radicand {radicand} does not match context {m}")
        if not is_squarefree(radicand):
            raise DomainError(f"radicand {radicand} is not square-free")
    ctx = radicand if radicand is not None else (m or 0)
    if irr == 0:
        return QuadValue(rat.numerator, 0, rat.denominator, ctx)
    den = rat.denominator * irr.denominator // math.gcd(rat.denominator, irr.denominator)
    return QuadValue(int(rat * den), int(irr * den), den, ctx)


def golden() -> QuadValue:
    """tau = (1 + sqrt(5)) / 2."""
    return QuadValue(1, 1, 2, 5)
