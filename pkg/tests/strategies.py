"""Shared hypothesis strategies."""
from hypothesis import strategies as st

from bragg.exactnum import QuadValue

small_ints = st.integers(min_value=-50, max_value=50)
radicands = st.sampled_from([2, 3, 5])


@st.composite
def quads(draw, m=None):
    mm = draw(radicands) if m is None else m
    p = draw(small_ints)
    q = draw(small_ints)
    d = draw(st.integers(min_value=1, max_value=12))
    return QuadValue(p, q, d, mm)


def nonzero_quads(m=None):
    return quads(m).filter(lambda a: a.sign() != 0)
