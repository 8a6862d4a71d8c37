"""Dense complex linear-algebra helpers shared by the other modules."""

import numpy as np

from .errors import InvalidInput

HERMITIAN_TOL = 1e-12


def hermitian_part(m):
    """Return (m + m^H) / 2."""
    m = np.asarray(m)
    return 0.5 * (m + m.conj().T)


def is_hermitian(m, tol=HERMITIAN_TOL):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol * scale)


def hermitian_eig(m, tol=1e-9):
    """Eigendecomposition of a Hermitian matrix.

    Returns eigenvalues in descending order and the matching orthonormal
    eigenvectors as columns. Input is symmetrized before decomposition, so
    floating-point drift below ``tol`` (relative to the largest entry) is
    absorbed; larger asymmetry raises :class:`InvalidInput`.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {m.shape}")
    if not is_hermitian(m, tol):
        raise InvalidInput("matrix is not Hermitian")
    lam, vec = np.linalg.eigh(hermitian_part(m))
    return lam[::-1], vec[:, ::-1]


def trace_inner(a, b):
    """Re Tr(a b) for two Hermitian matrices of equal size."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 2:
        raise InvalidInput(f"dimension mismatch: {a.shape} vs {b.shape}")
    # Tr(ab) = sum_ij a_ij b_ji
    return float(np.real(np.sum(a * b.T)))


def psd_repair(m):
    """Nearest Hermitian PSD matrix in Frobenius norm (clip negative eigenvalues)."""
    lam, vec = np.linalg.eigh(hermitian_part(m))
    lam = np.clip(lam, 0.0, None)
    return hermitian_part((vec * lam) @ vec.conj().T)


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)
