"""Small dense symmetric eigensolver and orthogonal conjugation.

The solver is a cyclic Jacobi rotation method: deterministic pivot order,
deterministic output, small orthogonality residuals.  It exists to normalize
a symmetric positive matrix A to its diagonal form A = Q^T N Q (rows of Q are
eigenvectors) and to cross-check rank-one symmetric-function formulas against
honest eigenvalues.  Sized for n <= 64; not a general-purpose eigensolver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergenceError, NotOrthogonalError

SWEEP_CAP = 50
OFFDIAG_STOP = 1e-14      # relative to the Frobenius norm of the input
ORTHO_TOL = 1e-12


def symmetrize(A: np.ndarray) -> np.ndarray:
    """Exact symmetric part (A + A^T)/2 as float64."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return 0.5 * (A + A.T)


def quadratic_form(A: np.ndarray, X: np.ndarray) -> np.ndarray:
    """x^T A x for a single point (n,) or a batch (N, n)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        return float(X @ A @ X)
    return np.einsum("ni,ij,nj->n", X, A, X)


def is_orthogonal(Q: np.ndarray, tol: float = ORTHO_TOL) -> bool:
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    return bool(np.max(np.abs(Q.T @ Q - np.eye(n))) <= tol)


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Spectral factorization A = Q^T diag(values) Q with ascending values.

    Rows of ``vectors`` are the eigenvectors; ``vectors`` maps a point into
    eigencoordinates via x_tilde = Q x.
    """

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        Q = self.vectors
        return Q.T @ np.diag(self.values) @ Q


def eigh(A: np.ndarray, sweep_cap: int = SWEEP_CAP) -> EigenDecomposition:
    """Cyclic Jacobi diagonalization of a symmetric matrix.

    Sweeps fixed (p, q) pivot pairs until the off-diagonal Frobenius norm
    drops below OFFDIAG_STOP relative to ||A||_F.  Raises NoConvergenceError
    after ``sweep_cap`` sweeps (pathological input).
    """
    M = symmetrize(A)
    n = M.shape[0]
    V = np.eye(n)
    norm = float(np.linalg.norm(M))
    if n == 1 or norm == 0.0:
        return _finalize(np.diag(M).copy(), V)

    stop = OFFDIAG_STOP * norm
    for _ in range(sweep_cap):
        off = float(np.sqrt(np.sum(np.tril(M, -1) ** 2) * 2.0))
        if off <= stop:
            return _finalize(np.diag(M).copy(), V)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = M[p, q]
                if apq == 0.0:
                    continue
                # classic stable rotation parameters
                tau = (M[q, q] - M[p, p]) / (2.0 * apq)
                t = (1.0 if tau >= 0.0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rp = M[p, :].copy()
                rq = M[q, :].copy()
                M[p, :] = c * rp - s * rq
                M[q, :] = s * rp + c * rq
                cp = M[:, p].copy()
                cq = M[:, q].copy()
                M[:, p] = c * cp - s * cq
                M[:, q] = s * cp + c * cq
                M[p, q] = 0.0
                M[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    off = float(np.sqrt(np.sum(np.tril(M, -1) ** 2) * 2.0))
    if off <= stop:
        return _finalize(np.diag(M).copy(), V)
    raise NoConvergenceError(
        f"Jacobi sweeps exhausted (cap {sweep_cap}); off-diagonal residual {off:.3e}"
    )


def _finalize(values: np.ndarray, V: np.ndarray) -> EigenDecomposition:
    # ascending eigenvalues; stable sort keeps the pivot order on ties
    order = np.argsort(values, kind="stable")
    values = values[order]
    Q = V[:, order].T
    # deterministic sign: largest-magnitude component of each row positive
    for i in range(Q.shape[0]):
        j = int(np.argmax(np.abs(Q[i])))
        if Q[i, j] < 0.0:
            Q[i] = -Q[i]
    return EigenDecomposition(values=values, vectors=Q)


def conjugate_by(Q: np.ndarray, M: np.ndarray) -> np.ndarray:
    """Q^T M Q for orthogonal Q; preserves the spectrum."""
    Q = np.asarray(Q, dtype=float)
    if not is_orthogonal(Q):
        raise NotOrthogonalError("Q fails the orthogonality tolerance")
    return symmetrize(Q.T @ symmetrize(M) @ Q)
