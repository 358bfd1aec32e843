"""Dense linear-algebra kernels used throughout the package.

Every dimension decision in the library (closure, invariance, surjectivity,
ideal splitting) goes through :func:`orthonormal_basis` with the single
relative threshold :data:`RANK_RTOL`.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg as spla

RANK_RTOL = 1e-8


def orthonormal_basis(A, scale=None, rtol=RANK_RTOL):
    """Orthonormal basis of the column span of ``A`` via pivoted (rank-revealing) QR.

    A column direction is kept when its pivoted ``|R_ii|`` exceeds
    ``rtol * scale``.  ``scale`` defaults to ``|R_00|``, i.e. the threshold is
    relative to the largest column; pass an explicit scale when the columns of
    ``A`` are residuals whose natural size is set elsewhere.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    d = A.shape[0]
    if A.shape[1] == 0 or not np.any(A):
        return np.zeros((d, 0))
    Q, R, _ = spla.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if scale is None:
        scale = diag[0]
    rank = int(np.sum(diag > rtol * scale))
    return np.ascontiguousarray(Q[:, :rank])


def numerical_rank(A, scale=None, rtol=RANK_RTOL):
    return orthonormal_basis(A, scale=scale, rtol=rtol).shape[1]


def project_out(Q, W):
    """Component of the columns of ``W`` orthogonal to the orthonormal columns of ``Q``.

    Two projection sweeps (classical Gram-Schmidt twice is enough).
    """
    W = np.array(W, dtype=float)
    if Q.shape[1] == 0:
        return W
    for _ in range(2):
        W -= Q @ (Q.T @ W)
    return W


def extend_basis(Q, W, scale, rtol=RANK_RTOL):
    """Append to ``Q`` the directions of ``W`` not already in its span.

    Returns ``(Q_new, added)`` where ``added`` is the number of new columns.
    """
    R = project_out(Q, W)
    new = orthonormal_basis(R, scale=scale, rtol=rtol)
    if new.shape[1] == 0:
        return Q, 0
    new = project_out(Q, new)
    new, _ = np.linalg.qr(new)
    return np.hstack([Q, new]), new.shape[1]


def span_residual(Q, W):
    """Largest column norm of the part of ``W`` outside span(Q)."""
    W = np.asarray(W, dtype=float)
    if W.ndim == 1:
        W = W[:, None]
    if W.shape[1] == 0:
        return 0.0
    return float(np.max(np.linalg.norm(project_out(Q, W), axis=0)))


def expm(A):
    """Matrix exponential (scaling and squaring with Pade approximants)."""
    return spla.expm(A)


def polar_orthogonal(M):
    """Nearest orthogonal matrix to ``M`` in Frobenius norm (polar factor)."""
    U, _, Vt = np.linalg.svd(M)
    return U @ Vt


def null_space(A, rtol=RANK_RTOL):
    """Orthonormal basis of the numerical null space of ``A``."""
    A = np.asarray(A)
    if A.size == 0:
        return np.eye(A.shape[1])
    _, s, Vh = np.linalg.svd(A, full_matrices=True)
    top = s[0] if s.size else 0.0
    rank = int(np.sum(s > rtol * max(top, 1e-300)))
    return Vh[rank:].conj().T


def random_orthonormal(d, r, rng):
    """Orthonormal ``d x r`` frame with rotation-invariant distribution."""
    G = rng.standard_normal((d, r))
    Q, R = np.linalg.qr(G)
    # sign fix makes the law exactly Haar on the Stiefel manifold
    return Q * np.sign(np.diag(R))
