import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bragg.errors import CapacityError, DomainError
from bragg.linalg import MAX_GRAM, gram_report, jacobi_eigenvalues


def test_antidiagonal():
    vals = jacobi_eigenvalues(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(vals, [-1.0, 1.0])
    assert not gram_report([[0.0, 1.0], [1.0, 0.0]]).passed


def test_zero_matrix_passes():
    r = gram_report(np.zeros((5, 5)))
    assert r.passed and r.min_eigenvalue == 0.0


def test_complex_hermitian():
    a = np.array([[2.0, 1j], [-1j, 2.0]])
    assert np.allclose(jacobi_eigenvalues(a), [1.0, 3.0])


def test_non_hermitian_rejected():
    with pytest.raises(DomainError):
        gram_report([[1.0, 2.0], [0.0, 1.0]])


def test_cap():
    with pytest.raises(CapacityError):
        gram_report(np.eye(MAX_GRAM + 1))


def test_toeplitz_near_ones():
    # gamma_n of the integers on {0..9}: entries (2n+1-|i-j|)/(2n) with n = 400
    n = 400
    idx = np.arange(10)
    mat = (2 * n + 1 - np.abs(idx[:, None] - idx[None, :])) / (2 * n)
    assert gram_report(mat).passed


@given(st.integers(1, 12), st.integers(0, 2**32 - 1), st.booleans())
def test_matches_numpy(n, seed, cplx):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n))
    if cplx:
        a = a + 1j * rng.normal(size=(n, n))
    h = (a + np.conj(a.T)) / 2
    ours = jacobi_eigenvalues(h)
    ref = np.linalg.eigvalsh(h)
    assert np.allclose(ours, ref, atol=1e-10 * max(1.0, np.abs(ref).max()))


@given(st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_gram_matrices_pass(n, seed):
    rng = np.random.default_rng(seed)
    b = rng.normal(size=(n, 3))
    assert gram_report(b @ b.T).passed
