"""Dense small-matrix kernels.

Symmetric eigendecomposition with a deterministic sign convention,
Gram-Schmidt complements of a hypothesized direction, and the
vec/Kronecker/commutation utilities used throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DegeneracyError",
    "EigenSystem",
    "sym_eigen",
    "jacobi_eigen",
    "gram_schmidt_complement",
    "commutation_matrix",
    "vec",
    "kron",
]

# Relative tolerance below which a matrix is accepted as symmetric.
SYMMETRY_RTOL = 1e-12


class DegeneracyError(ValueError):
    """Raised when an input is too degenerate for the requested operation
    (rank-deficient sample covariance, eigenvalue ties, collapsed
    Gram-Schmidt projections)."""


def _as_square(A: np.ndarray, name: str = "A") -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {A.shape}")
    return A


def _require_symmetric(A: np.ndarray) -> np.ndarray:
    A = _as_square(A)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    scale = max(1.0, float(np.max(np.abs(A))) if A.size else 1.0)
    if float(np.max(np.abs(A - A.T))) > SYMMETRY_RTOL * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    return A


@dataclass(frozen=True)
class EigenSystem:
    """Eigendecomposition of a symmetric matrix.

    Attributes
    ----------
    values : ndarray, shape (p,)
        Eigenvalues in non-increasing order.
    vectors : ndarray, shape (p, p)
        Orthonormal matrix whose column ``j`` is the unit eigenvector of
        ``values[j]``.  In every column the entry of largest absolute
        value is positive (ties broken by lowest row index), which makes
        the decomposition deterministic.
    """

    values: np.ndarray
    vectors: np.ndarray

    @property
    def p(self) -> int:
        return self.values.shape[0]

    def inverse_apply(self, x: np.ndarray) -> np.ndarray:
        """Compute ``A^{-1} x`` through the spectral factorization."""
        lam = self.values
        if np.min(lam) <= 0.0:
            raise DegeneracyError("matrix is singular; inverse is undefined")
        return self.vectors @ ((self.vectors.T @ x) / lam)


def _apply_sign_convention(V: np.ndarray) -> np.ndarray:
    # np.argmax returns the first index attaining the maximum, which is
    # exactly the "lowest row index" tie-break.
    V = V.copy()
    for j in range(V.shape[1]):
        k = int(np.argmax(np.abs(V[:, j])))
        if V[k, j] < 0.0:
            V[:, j] = -V[:, j]
    return V


def sym_eigen(A: np.ndarray) -> EigenSystem:
    """Eigendecompose a symmetric matrix.

    Parameters
    ----------
    A : array_like, shape (p, p)
        Symmetric matrix (validated to relative tolerance 1e-12).

    Returns
    -------
    EigenSystem
        Values in descending order, deterministic eigenvector signs.

    Raises
    ------
    ValueError
        If ``A`` is not square, not finite, or not symmetric.
    """
    A = _require_symmetric(A)
    lam, V = np.linalg.eigh(A)
    order = np.argsort(lam)[::-1]  # descending, stable for exact ties
    lam = lam[order]
    V = _apply_sign_convention(V[:, order])
    return EigenSystem(values=lam, vectors=V)


def jacobi_eigen(A: np.ndarray, tol: float = 1e-13, max_sweeps: int = 60) -> EigenSystem:
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    A self-contained rotation-based routine kept as an independent
    cross-check of :func:`sym_eigen`; identical output contract.
    Convergence is declared when the off-diagonal Frobenius norm drops
    below ``tol * ||A||_F``.
    """
    A = _require_symmetric(A)
    p = A.shape[0]
    B = A.copy()
    V = np.eye(p)
    norm_a = float(np.linalg.norm(A)) or 1.0
    for _ in range(max_sweeps):
        # Off-diagonal Frobenius norm, summed directly: the subtraction
        # ||B||^2 - ||diag||^2 cancels catastrophically near convergence
        # and would floor around sqrt(eps)*||A|| instead of reaching tol.
        off = float(np.linalg.norm(B - np.diag(np.diag(B))))
        if off < tol * norm_a:
            break
        for i in range(p - 1):
            for j in range(i + 1, p):
                diff = B[j, j] - B[i, i]
                if abs(B[i, j]) <= 1e-300 * abs(diff):
                    # entry already dead at this scale; rotating would
                    # overflow the angle computation for nothing
                    B[i, j] = B[j, i] = 0.0
                    continue
                # Classical two-sided Jacobi rotation annihilating B[i, j].
                theta = 0.5 * diff / B[i, j]
                t = np.sign(theta) / (abs(theta) + np.hypot(1.0, theta))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                rot = np.array([[c, s], [-s, c]])
                idx = [i, j]
                B[idx, :] = rot.T @ B[idx, :]
                B[:, idx] = B[:, idx] @ rot
                V[:, idx] = V[:, idx] @ rot
    else:
        raise RuntimeError("Jacobi iteration failed to converge")
    lam = np.diag(B).copy()
    order = np.argsort(lam)[::-1]
    return EigenSystem(values=lam[order], vectors=_apply_sign_convention(V[:, order]))


def gram_schmidt_complement(theta0: np.ndarray, eigvecs) -> list[np.ndarray]:
    """Orthonormal complement frame of ``theta0`` built from eigenvectors.

    Runs Gram-Schmidt on the sequence ``(theta0, v_2, ..., v_p)`` with
    ``theta0`` held fixed: each input vector is projected onto the
    orthocomplement of the span of ``theta0`` and the previously produced
    members, then normalized.  Re-orthogonalization is applied once for
    numerical stability (modified Gram-Schmidt with a second pass).

    Parameters
    ----------
    theta0 : array_like, shape (p,)
        Unit vector (norm 1 within 1e-10).
    eigvecs : sequence of p-1 vectors
        Typically the sample eigenvectors ordered by descending eigenvalue.

    Returns
    -------
    list of ndarray
        ``p-1`` unit vectors completing ``theta0`` to an orthonormal basis.

    Raises
    ------
    DegeneracyError
        If some input vector lies (numerically) in the span of the frame
        built so far; the message identifies the offending position.
    """
    theta0 = np.asarray(theta0, dtype=float)
    if abs(np.linalg.norm(theta0) - 1.0) > 1e-10:
        raise ValueError("theta0 must be a unit vector (within 1e-10)")
    p = theta0.shape[0]
    vecs = [np.asarray(v, dtype=float) for v in eigvecs]
    if len(vecs) != p - 1:
        raise ValueError(f"expected {p - 1} vectors, got {len(vecs)}")
    basis = [theta0]
    out: list[np.ndarray] = []
    for pos, v in enumerate(vecs, start=2):
        u = v.copy()
        for _ in range(2):
            for b in basis:
                u -= (b @ u) * b
        nrm = float(np.linalg.norm(u))
        if nrm < 1e-12:
            raise DegeneracyError(
                f"Gram-Schmidt degenerate at frame position j={pos}: "
                "input vector lies in the span of the current frame"
            )
        u /= nrm
        basis.append(u)
        out.append(u)
    return out


def commutation_matrix(p: int) -> np.ndarray:
    """The p²×p² permutation K_p with K_p vec(A) = vec(Aᵀ) for all p×p A."""
    if p < 1:
        raise ValueError("p must be at least 1")
    K = np.zeros((p * p, p * p))
    for i in range(p):
        for j in range(p):
            # vec(A)[j*p + i] = A[i, j] maps to vec(Aᵀ)[i*p + j].
            K[i * p + j, j * p + i] = 1.0
    return K


def vec(A: np.ndarray) -> np.ndarray:
    """Stack the columns of ``A`` into a single vector."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError("vec expects a matrix")
    return A.reshape(-1, order="F")


def kron(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Kronecker product with explicit dimension validation."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim != 2 or B.ndim != 2:
        raise ValueError("kron expects two matrices")
    return np.kron(A, B)
