"""Dense complex linear algebra for small (d <= ~64) matrices.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.
Everything here is a pure function of its inputs.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import NoConvergence, NotNormal, NotUnitary, ShapeMismatch

TOL_UNITARY = 1e-10
TOL_RECON = 1e-9
# eigenphases this close to -pi are moved onto +pi before halving
BRANCH_TOL = 1e-9
# eigenphases are bucketed to this resolution when ordering
_PHASE_GRID = 1e-12

__all__ = [
    "TOL_UNITARY",
    "TOL_RECON",
    "BRANCH_TOL",
    "SpectralDecomposition",
    "as_matrix",
    "kron",
    "dagger",
    "eig_normal",
    "principal_phase",
    "principal_sqrt_unitary",
    "singular_values",
    "is_unitary",
]


class SpectralDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(a, *, square: bool = False) -> np.ndarray:
    """Coerce `a` to a finite 2-D complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2 or m.size == 0:
        raise ShapeMismatch(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    if square and m.shape[0] != m.shape[1]:
        raise ShapeMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def kron(a, b) -> np.ndarray:
    """Kronecker product, first argument major.

    Entry ``(i*b.rows + k, j*b.cols + l)`` of the result is ``a[i, j] * b[k, l]``.
    Vectors are treated as column matrices.
    """
    return np.kron(as_matrix(a), as_matrix(b))


def principal_phase(z) -> np.ndarray:
    """Argument of `z` on the half-open interval (-pi, pi].

    Values within `BRANCH_TOL` of -pi (including a signed-zero imaginary
    part) are mapped to +pi so that nominal -1 eigenvalues land on the
    same side of the cut regardless of rounding.
    """
    theta = np.angle(np.asarray(z, dtype=np.complex128))
    return np.where(theta <= -np.pi + BRANCH_TOL, np.pi, theta)


def eig_normal(u, tol: float = 1e-8) -> SpectralDecomposition:
    """Spectral decomposition of a normal matrix.

    Uses the complex Schur form, which is diagonal for normal input, so the
    eigenvector matrix is unitary by construction even on degenerate
    eigenspaces.

    Eigenpairs are ordered by eigenphase in (-pi, pi], then by modulus, then
    by the index of the first maximal-magnitude component of the eigenvector.

    Raises
    ------
    NotNormal
        If ``||u u^H - u^H u||_F > tol``.
    NoConvergence
        If the Schur iteration fails or the reconstruction misses its bound.
    """
    u = as_matrix(u, square=True)
    comm = np.linalg.norm(u @ dagger(u) - dagger(u) @ u)
    if comm > tol:
        raise NotNormal(f"matrix is not normal: ||UU^H - U^HU||_F = {comm:.3e}")
    try:
        t, q = scipy.linalg.schur(u, output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NoConvergence(str(exc)) from exc

    lam = np.diag(t).copy()
    # phase convention on eigenvectors: largest component real positive
    lead = np.argmax(np.abs(q) > np.abs(q).max(axis=0) * (1 - 1e-9), axis=0)
    ph = q[lead, np.arange(q.shape[1])]
    q = q * (np.abs(ph) / ph)

    phase_key = np.round(principal_phase(lam) / _PHASE_GRID)
    mod_key = np.round(np.abs(lam) / _PHASE_GRID)
    order = np.lexsort((lead, mod_key, phase_key))
    dec = SpectralDecomposition(lam[order], q[:, order])

    scale = max(1.0, np.linalg.norm(u))
    recon = np.linalg.norm(u - dec.reconstruct())
    if recon > 1e-10 * scale:
        raise NoConvergence(f"spectral reconstruction residual {recon:.3e}")
    return dec


def is_unitary(u, tol: float = TOL_UNITARY) -> bool:
    u = as_matrix(u, square=True)
    return bool(np.linalg.norm(dagger(u) @ u - np.eye(u.shape[0])) <= tol)


def principal_sqrt_unitary(u) -> np.ndarray:
    """Principal square root of a unitary matrix.

    Each eigenvalue ``exp(i*theta)`` with theta in (-pi, pi] is mapped to
    ``exp(i*theta/2)``; theta = pi goes to +i.
    """
    u = as_matrix(u, square=True)
    if not is_unitary(u, TOL_UNITARY):
        raise NotUnitary("principal_sqrt_unitary needs a unitary input")
    dec = eig_normal(u)
    half = np.exp(0.5j * principal_phase(dec.eigenvalues))
    v = dec.eigenvectors
    s = (v * half) @ dagger(v)
    err = np.linalg.norm(s @ s - u)
    if err > TOL_RECON:
        raise NoConvergence(f"square-root check failed: ||S^2 - U||_F = {err:.3e}")
    return s


def singular_values(m) -> np.ndarray:
    """Singular values in descending order.

    Accepts a stack of matrices (``(..., r, c)``) as well as a single one.
    """
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    try:
        return np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
