"""Cyclic Jacobi eigenvalues and the finite positive-definiteness report.

Hermitian input with a nonzero imaginary part is handled through the real
symmetric embedding ``[[A, -B], [B, A]]``, whose spectrum is that of ``A + iB``
with every eigenvalue doubled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DomainError

MAX_GRAM = 64


def jacobi_eigenvalues(a, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues (ascending) of a real symmetric or complex Hermitian matrix.

    Sweeps rotate every off-diagonal pair until the off-diagonal Frobenius
    norm drops below ``tol`` times the Frobenius norm of the input.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("square matrix required")
    n = a.shape[0]
    if n == 0:
        return np.zeros(0)
    if np.iscomplexobj(a) and np.any(a.imag != 0):
        re, im = a.real, a.imag
        big = np.block([[re, -im], [im, re]])
        vals = jacobi_eigenvalues(big, tol, max_sweeps)
        return vals[::2]
    s = np.array(a.real, dtype=float, copy=True)
    scale = np.linalg.norm(s)
    if scale == 0:
        return np.zeros(n)
    target = tol * scale
    for _ in range(max_sweeps):
        off = math.sqrt(max(0.0, float(np.sum(s * s) - np.sum(np.diag(s) ** 2))))
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = s[p, q]
                if apq == 0.0:
                    continue
                diff = s[q, q] - s[p, p]
                if abs(apq) < 1e-150 * abs(diff):
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                sn = t * c
                rp = s[p, :].copy()
                rq = s[q, :].copy()
                s[p, :] = c * rp - sn * rq
                s[q, :] = sn * rp + c * rq
                cp = s[:, p].copy()
                cq = s[:, q].copy()
                s[:, p] = c * cp - sn * cq
                s[:, q] = sn * cp + c * cq
                s[p, q] = s[q, p] = 0.0
    return np.sort(np.diag(s))


@dataclass(frozen=True)
class GramReport:
    size: int
    min_eigenvalue: float
    trace: float
    passed: bool
    tolerance: float
    missing: int = 0

    def as_dict(self) -> dict:
        return {
            "size": self.size,
            "min_eigenvalue": self.min_eigenvalue,
            "trace": self.trace,
            "pass": self.passed,
            "tolerance": self.tolerance,
            "missing": self.missing,
        }


def gram_report(matrix, tolerance_factor: float = 1e-8, missing: int = 0) -> GramReport:
    """Pass iff the smallest eigenvalue is at least ``-tolerance_factor * trace``."""
    mat = np.asarray(matrix)
    n = mat.shape[0]
    if n > MAX_GRAM:
        raise CapacityError(f"Gram matrices are capped at {MAX_GRAM}x{MAX_GRAM}")
    if n and not np.allclose(mat, np.conj(mat.T), rtol=0.0, atol=1e-9):
        raise DomainError("Gram matrix is not Hermitian")
    herm = (mat + np.conj(mat.T)) / 2.0
    vals = jacobi_eigenvalues(herm)
    lo = float(vals[0]) if n else 0.0
    tr = float(np.trace(herm).real) if n else 0.0
    return GramReport(n, lo, tr, lo >= -tolerance_factor * tr, tolerance_factor, missing)
