"""Symmetric eigendecomposition and matrix functions for small matrices.

The solver is the cyclic Jacobi rotation method, which is accurate and
entirely adequate for the d <= 64 matrices this library works with.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt
from typing import Callable

import numpy as np

from .core import check_symmetric
from .errors import DomainError, NumericalError

_MAX_SWEEPS = 100


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (descending) and orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def _jacobi_scalar(a: list, d: int, scale: float):
    """Plain-float cyclic Jacobi; fastest for the small matrices we use."""
    v = [[1.0 if i == j else 0.0 for j in range(d)] for i in range(d)]
    tol2 = (1e-15 * scale) ** 2
    skip = 1e-18 * scale
    for sweep in range(_MAX_SWEEPS + 1):
        off2 = 0.0
        for p in range(d - 1):
            row = a[p]
            for q in range(p + 1, d):
                off2 += row[q] * row[q]
        if off2 <= tol2:
            return a, v
        if sweep == _MAX_SWEEPS:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p][q]
                if abs(apq) <= skip:
                    continue
                tau = (a[q][q] - a[p][p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                ap, aq = a[p], a[q]
                for i in range(d):
                    rp, rq = ap[i], aq[i]
                    ap[i] = c * rp - s * rq
                    aq[i] = s * rp + c * rq
                for i in range(d):
                    ai = a[i]
                    cp, cq = ai[p], ai[q]
                    ai[p] = c * cp - s * cq
                    ai[q] = s * cp + c * cq
                ap[q] = 0.0
                aq[p] = 0.0
                for i in range(d):
                    vi = v[i]
                    vp, vq = vi[p], vi[q]
                    vi[p] = c * vp - s * vq
                    vi[q] = s * vp + c * vq
    raise NumericalError(f"Jacobi sweep limit ({_MAX_SWEEPS}) reached")


def sym_eigen(a: np.ndarray) -> EigenDecomposition:
    """Cyclic-Jacobi eigendecomposition of a symmetric matrix.

    Sweeps over all off-diagonal pairs, zeroing each with a Givens rotation,
    until the off-diagonal mass is negligible relative to the matrix scale.

    Raises
    ------
    NumericalError
        If 100 sweeps do not reach convergence.
    """
    a = check_symmetric(a, "a")
    d = a.shape[0]
    if d == 1:
        return EigenDecomposition(a[0, :1].copy(), np.eye(1))
    scale = float(np.linalg.norm(a))
    if scale == 0.0:
        return EigenDecomposition(np.zeros(d), np.eye(d))
    diag, vecs = _jacobi_scalar(a.tolist(), d, scale)
    lam = np.array([diag[i][i] for i in range(d)])
    v = np.array(vecs)
    order = np.argsort(lam)[::-1]
    return EigenDecomposition(lam[order], v[:, order])


def matrix_fn(a: np.ndarray, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply a scalar function to a symmetric matrix through its spectrum.

    Raises
    ------
    DomainError
        If ``f`` is undefined (non-finite) at some eigenvalue.
    """
    eig = sym_eigen(a)
    with np.errstate(all="ignore"):
        flam = np.asarray(f(eig.eigenvalues), dtype=float)
    if not np.all(np.isfinite(flam)):
        raise DomainError("eigenvalue outside the domain of the scalar function")
    v = eig.eigenvectors
    out = (v * flam) @ v.T
    return 0.5 * (out + out.T)


def sym_log(a: np.ndarray) -> np.ndarray:
    return matrix_fn(a, np.log)


def sym_exp(a: np.ndarray) -> np.ndarray:
    return matrix_fn(a, np.exp)


def sym_inv(a: np.ndarray) -> np.ndarray:
    return matrix_fn(a, lambda lam: 1.0 / lam)


def min_eigenvalue(a: np.ndarray) -> float:
    return float(sym_eigen(a).eigenvalues[-1])
