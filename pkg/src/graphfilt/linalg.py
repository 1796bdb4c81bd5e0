"""Dense numerical kernels backed by LAPACK.

Everything here operates on small dense matrices (N up to a few hundred).
The functions are thin contracts around numpy/scipy: they validate input,
translate LAPACK failures into library errors, and fix conventions
(ascending eigenvalues, Gram-matrix spectral norm, pivot threshold).
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NoConvergence, NotSymmetric, SingularMatrix

SYMMETRY_ATOL = 1e-12
PIVOT_RTOL = 1e-14


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenpairs of a real symmetric matrix.

    ``eigenvalues`` is ascending and ``eigenvectors[:, k]`` pairs with
    ``eigenvalues[k]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def _as_matrix(a) -> np.ndarray:
    m = getattr(a, "matrix", a)
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def eig_symmetric(a) -> EigenDecomposition:
    a = _as_matrix(a)
    if np.iscomplexobj(a):
        if np.max(np.abs(a.imag), initial=0.0) > SYMMETRY_ATOL:
            raise NotSymmetric("eig_symmetric requires a real matrix")
        a = a.real
    a = np.asarray(a, dtype=float)
    if np.max(np.abs(a - a.T), initial=0.0) > SYMMETRY_ATOL:
        raise NotSymmetric("matrix is not symmetric within 1e-12")
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return EigenDecomposition(w, v)


def spectral_norm(a) -> float:
    """Largest singular value, as sqrt(max eig(A^H A))."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    if a.ndim == 1:
        a = a[:, None]
    gram = a.conj().T @ a
    # force exact Hermitian symmetry before the Hermitian eigensolver
    gram = 0.5 * (gram + gram.conj().T)
    try:
        top = np.linalg.eigvalsh(gram)[-1]
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return float(np.sqrt(max(top, 0.0)))


def solve_complex(a, b) -> np.ndarray:
    """Solve ``a @ x = b`` by LU with partial pivoting.

    Raises SingularMatrix when a pivot falls below 1e-14 * max|a_ij|.
    """
    a = _as_matrix(a).astype(complex)
    b = np.asarray(b, dtype=complex)
    if b.shape[0] != a.shape[0]:
        raise DimensionMismatch(f"rhs has {b.shape[0]} rows, matrix is {a.shape[0]}x{a.shape[0]}")
    scale = np.max(np.abs(a), initial=0.0)
    if scale == 0.0:
        raise SingularMatrix("zero matrix")
    lu, piv = scipy.linalg.lu_factor(a, check_finite=True)
    if np.min(np.abs(np.diag(lu))) < PIVOT_RTOL * scale:
        raise SingularMatrix("pivot below 1e-14 * max|A|")
    return scipy.linalg.lu_solve((lu, piv), b)


def cayley_of_operator(s) -> np.ndarray:
    """Unitary Cayley transform (D - iI)(D + iI)^-1 of a symmetric matrix."""
    d = _as_matrix(s)
    n = d.shape[0]
    eye = np.eye(n)
    # (D + iI) and (D - iI) commute, so one left-solve suffices
    try:
        return solve_complex(d + 1j * eye, d - 1j * eye)
    except SingularMatrix as exc:  # pragma: no cover - impossible for real spectra
        raise SingularMatrix(f"internal error: D + iI singular ({exc})") from exc


def resolvent_at_minus_i(s) -> np.ndarray:
    """(D + iI)^-1."""
    d = _as_matrix(s)
    n = d.shape[0]
    return solve_complex(d + 1j * np.eye(n), np.eye(n))
