"""Spectral compatibility of embedding spaces.

Singular values are computed from the eigenvalues of the d x d Gram matrix
via cyclic Jacobi rotations; the singular value gap (SVG) compares two sorted
spectra on their first 40 log singular values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .embeddings import EmbeddingMatrix
from .errors import DataError, NumericError

SVG_TOP_K = 40
SIGMA_FLOOR = 1e-12
JACOBI_TOL = 1e-15


@dataclass(frozen=True)
class SingularSpectrum:
    values: tuple[float, ...]
    source: tuple[str, int, int] = ("", 0, 0)

    def __post_init__(self):
        vals = list(self.values)
        if any(v < 0 for v in vals):
            raise DataError("singular values must be non-negative")
        if vals != sorted(vals, reverse=True):
            raise DataError("singular values must be sorted descending")


@njit(cache=True, nogil=True)
def _jacobi_eigenvalues(A, tol, max_sweeps):
    n = A.shape[0]
    ref = 0.0
    for i in range(n):
        for j in range(n):
            ref += A[i, j] * A[i, j]
    ref = np.sqrt(ref)
    if ref == 0.0:
        return np.diag(A).copy()
    for _ in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += 2.0 * A[i, j] * A[i, j]
        if np.sqrt(off) <= tol * ref:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * akq
                    A[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = c * apk - s * aqk
                    A[q, k] = s * apk + c * aqk
    return np.diag(A).copy()


def gram_singular_values(X: np.ndarray, tol: float = JACOBI_TOL,
                         max_sweeps: int = 100) -> np.ndarray:
    """Singular values of X as sqrt of Gram-matrix eigenvalues, descending."""
    X = np.asarray(X, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        raise DataError("input matrix contains non-finite entries")
    gram = X.T @ X
    eig = _jacobi_eigenvalues(gram.copy(), tol, max_sweeps)
    eig = np.clip(eig, 0.0, None)
    return np.sqrt(np.sort(eig)[::-1])


def singular_values(em: EmbeddingMatrix | np.ndarray) -> SingularSpectrum:
    if isinstance(em, EmbeddingMatrix):
        X = em.rows
        source = (em.language_id, em.vocab_size, em.dim)
    else:
        X = np.asarray(em)
        source = ("", X.shape[0], X.shape[1])
    sigma = gram_singular_values(X)
    return SingularSpectrum(values=tuple(float(v) for v in sigma), source=source)


def svg(se: SingularSpectrum, sf: SingularSpectrum, k: int = SVG_TOP_K) -> float:
    """Singular value gap: sum of squared log-sigma differences over the
    first k values, with sigmas floored at 1e-12 before the log."""
    if len(se.values) < k or len(sf.values) < k:
        raise DataError(
            f"spectra too short for k={k}: {len(se.values)}, {len(sf.values)}"
        )
    total = 0.0
    for a, b in zip(se.values[:k], sf.values[:k]):
        total += (math.log(max(a, SIGMA_FLOOR)) - math.log(max(b, SIGMA_FLOOR))) ** 2
    return total


def compatibility_ratio(r_e: float, r_f: float) -> float:
    """log(r_e) / log(r_f) for compression rates in (0, 1)."""
    if not 0 < r_e < 1:
        raise NumericError(f"rate r_e={r_e} outside (0, 1)")
    if not 0 < r_f < 1:
        raise NumericError(f"rate r_f={r_f} outside (0, 1)")
    return math.log(r_e) / math.log(r_f)


def pearson(xs, ys) -> float:
    """Product-moment correlation of two equal-length sequences."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise DataError("pearson needs two equal-length 1-D sequences")
    if len(x) < 2:
        raise DataError("pearson needs at least two points")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float((xc * xc).sum()) * float((yc * yc).sum()))
    if denom == 0.0:
        raise NumericError("pearson undefined: zero variance")
    return float((xc * yc).sum()) / denom
