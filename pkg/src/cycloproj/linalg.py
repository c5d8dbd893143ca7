"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays (complex128 unless noted).  Hermitian
inputs are symmetrized on entry by :func:`hermitian`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EIG_TOL = 1e-10
FEAS_TOL = 1e-8
CERT_TOL = 1e-6

JACOBI_OFF_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100


class EigenError(RuntimeError):
    """Eigensolver did not converge; ``residual`` is the remaining off-diagonal norm."""

    def __init__(self, residual: float, sweeps: int):
        super().__init__(f"Jacobi did not converge after {sweeps} sweeps (off-diagonal norm {residual:.3e})")
        self.residual = residual
        self.sweeps = sweeps


class GramError(ValueError):
    def __init__(self, lam_min: float):
        super().__init__(f"matrix is not positive semidefinite (lambda_min = {lam_min:.3e})")
        self.lam_min = lam_min


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray  # real, ascending
    eigenvectors: np.ndarray  # unitary, columns

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


def as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def hermitian(A) -> np.ndarray:
    """Return (A + A*)/2 with an exactly real diagonal."""
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"Hermitian matrix must be square, got shape {A.shape}")
    H = 0.5 * (A + A.conj().T)
    H[np.diag_indices_from(H)] = H.diagonal().real
    return H


def _fix_phases(V: np.ndarray) -> np.ndarray:
    # first nonzero component of each column made real positive
    V = V.copy()
    for k in range(V.shape[1]):
        col = V[:, k]
        idx = np.flatnonzero(np.abs(col) > 1e-12)
        if idx.size:
            z = col[idx[0]]
            V[:, k] = col * (abs(z) / z)
    return V


def _off_norm(A: np.ndarray) -> float:
    return float(np.linalg.norm(A - np.diag(A.diagonal())))


def jacobi_eigh(A, tol: float = JACOBI_OFF_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS) -> SpectralDecomposition:
    """Cyclic Jacobi eigensolver for a Hermitian matrix.

    Each rotation zeroes one off-diagonal pair (p, q): a diagonal phase makes
    a_pq real, then a real plane rotation annihilates it.
    """
    A = hermitian(A).copy()
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    scale = max(1.0, np.linalg.norm(A))
    off = _off_norm(A)
    sweeps = 0
    while off > tol * scale:
        if sweeps >= max_sweeps:
            raise EigenError(off, sweeps)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                r = abs(apq)
                if r < 1e-300:
                    continue
                phase = apq / r
                theta = (A[q, q].real - A[p, p].real) / (2.0 * r)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                G = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]], dtype=complex)
                idx = [p, q]
                A[:, idx] = A[:, idx] @ G
                A[idx, :] = G.conj().T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                V[:, idx] = V[:, idx] @ G
        sweeps += 1
        off = _off_norm(A)
    w = A.diagonal().real
    order = np.argsort(w, kind="stable")
    return SpectralDecomposition(w[order], _fix_phases(V[:, order]))


def eig_hermitian(A, method: str = "lapack") -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    ``method="jacobi"`` uses :func:`jacobi_eigh`; ``"lapack"`` calls
    ``numpy.linalg.eigh``.  Both apply the same phase convention.
    """
    if method == "jacobi":
        return jacobi_eigh(A)
    if method != "lapack":
        raise ValueError(f"unknown eigensolver {method!r}")
    H = hermitian(A)
    w, V = np.linalg.eigh(H)
    return SpectralDecomposition(w, _fix_phases(V))


def eigvalsh(A) -> np.ndarray:
    return np.linalg.eigvalsh(hermitian(A))


def operator_norm(A) -> float:
    """Largest singular value, sqrt(lambda_max(A* A))."""
    A = as_matrix(A)
    lam = eigvalsh(A.conj().T @ A)[-1]
    return float(np.sqrt(max(lam, 0.0)))


def psd_distance(A) -> float:
    return float(max(0.0, -eigvalsh(A)[0]))


def spectral_clip(A, lo: float, hi: float) -> np.ndarray:
    """Frobenius-nearest matrix X with lo*I <= X <= hi*I.

    Real symmetric input stays real (this sits in the solver's inner loop).
    """
    if lo > hi:
        raise ValueError(f"empty spectral box [{lo}, {hi}]")
    A = np.asarray(A)
    H = hermitian(A) if np.iscomplexobj(A) else 0.5 * (A + A.T)
    w, V = np.linalg.eigh(H)
    if w[0] >= lo and w[-1] <= hi:
        return H
    X = (V * np.clip(w, lo, hi)) @ V.conj().T
    return 0.5 * (X + X.conj().T)


def gram_factor(A) -> np.ndarray:
    """Unit vectors v_1..v_n (columns) with <v_j, v_i> = a_ij."""
    H = hermitian(A)
    if np.max(np.abs(H.diagonal() - 1.0)) > EIG_TOL:
        raise ValueError("gram_factor needs a unit diagonal")
    dec = eig_hermitian(H)
    lam = dec.eigenvalues
    if lam[0] < -1e-6:
        raise GramError(float(lam[0]))
    V = dec.eigenvectors
    B = (V * np.sqrt(np.maximum(lam, 0.0))) @ V.conj().T
    return B / np.linalg.norm(B, axis=0)


def gram_matrix(vectors) -> np.ndarray:
    """G with g_ij = <v_j, v_i> for the columns v_i."""
    B = np.asarray(vectors, dtype=complex)
    return B.conj().T @ B
