"""Cyclic Jacobi eigenvalues for the small symmetric matrices of dual checks."""

import math

import numpy as np

from .errors import DomainError

SYMMETRY_TOL = 1e-12


def jacobi_eigenvalues(sym, tol=1e-15, max_sweeps=100):
    """All eigenvalues of a real symmetric matrix, in ascending order.

    Row-cyclic sweeps of plane rotations, each zeroing one off-diagonal pair,
    until the off-diagonal Frobenius norm falls below ``tol`` times the
    matrix norm.
    """
    a = np.array(sym, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix has non-finite entries")
    if np.max(np.abs(a - a.T), initial=0.0) > SYMMETRY_TOL:
        raise DomainError("matrix is not symmetric")
    a = (a + a.T) / 2
    n = a.shape[0]
    scale = np.linalg.norm(a)
    if n == 0:
        return np.zeros(0)
    if scale == 0.0:
        return np.zeros(n)

    for _ in range(max_sweeps):
        off = math.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(1.0, theta))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q]
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :]
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
    return np.sort(np.diag(a))


def min_eigenvalue(sym) -> float:
    return float(jacobi_eigenvalues(sym)[0])
