"""Small dense complex linear algebra.

Matrices are plain ``numpy.ndarray`` objects of complex dtype. Every matrix
handled here is at most 16x16, so nothing is tuned for size.
"""
from typing import NamedTuple, Optional

import numpy as np

from .errors import NonHermitianInput

HERMITIAN_TOL = 1e-9


class EigenResult(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def hermitian_from(m) -> np.ndarray:
    """Return ``(m + m^dagger) / 2``, which is Hermitian bit for bit."""
    a = as_matrix(m)
    return 0.5 * (a + dagger(a))


def hermiticity_error(m) -> float:
    a = as_matrix(m)
    return float(np.max(np.abs(a - dagger(a)), initial=0.0))


def hermitian_eigen(m, vectors: bool = True) -> EigenResult:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.

    Raises NonHermitianInput when any entry of ``m - m^dagger`` exceeds 1e-9.
    """
    a = as_matrix(m)
    if hermiticity_error(a) > HERMITIAN_TOL:
        raise NonHermitianInput(
            f"matrix deviates from its adjoint by {hermiticity_error(a):.3g}")
    a = hermitian_from(a)
    if vectors:
        w, v = np.linalg.eigh(a)
        return EigenResult(w, v)
    return EigenResult(np.linalg.eigvalsh(a))


def singular_values(m) -> np.ndarray:
    return np.linalg.svd(as_matrix(m), compute_uv=False)


def pseudo_inverse(m, cutoff: float = 1e-10) -> np.ndarray:
    """Moore-Penrose inverse dropping singular values below ``cutoff * s_max``."""
    if cutoff < 0:
        raise ValueError("cutoff must be non-negative")
    a = as_matrix(m)
    u, s, vh = np.linalg.svd(a)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros_like(a).T
    keep = s > cutoff * s[0]
    inv_s = np.zeros_like(s)
    inv_s[keep] = 1.0 / s[keep]
    return (dagger(vh) * inv_s) @ dagger(u)


def rank_at(m, cutoff: float) -> int:
    s = singular_values(m)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > cutoff * s[0]))


def trace_norm(m) -> float:
    """Sum of singular values."""
    return float(np.sum(singular_values(m)))


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def psd_sqrt(m, clip: float = HERMITIAN_TOL) -> np.ndarray:
    """Square root of a PSD Hermitian matrix; eigenvalues in ``[-clip, 0)`` are zeroed."""
    w, v = hermitian_eigen(m)
    if w[0] < -clip:
        raise ValueError(f"matrix has eigenvalue {w[0]:.3g} below -{clip}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ dagger(v)
