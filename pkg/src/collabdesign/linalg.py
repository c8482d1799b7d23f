"""Dense linear-algebra kernels used by every other module.

Symmetric eigendecomposition with deterministic ordering, the polar factor
(the Stiefel-manifold projection step of the generalized power method),
row-space projectors, and Gram-Schmidt row orthonormalization.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRows, NotSymmetric, RankDeficient

# Relative eigenvalue gap below which two eigenvalues count as tied.
TIE_TOL = 1e-10


@dataclass(frozen=True)
class EigenPairs:
    """Full spectral decomposition of a symmetric matrix.

    values are sorted descending; column k of vectors is the unit
    eigenvector belonging to values[k].
    """

    values: np.ndarray
    vectors: np.ndarray

    def top(self, m: int) -> np.ndarray:
        """Return the leading m eigenvectors as columns (N x m)."""
        return self.vectors[:, :m]


@dataclass(frozen=True)
class Projector:
    """Orthogonal projector onto the row space of a collaboration matrix."""

    matrix: np.ndarray
    rank: int

    def apply(self, s: np.ndarray) -> np.ndarray:
        return self.matrix @ s


def _canonicalize_columns(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its first nonzero coordinate is positive."""
    out = vectors.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        nz = np.nonzero(np.abs(col) > 1e-12 * max(1.0, np.abs(col).max()))[0]
        if nz.size and col[nz[0]] < 0:
            out[:, k] = -col
    return out


def sym_eig(matrix: np.ndarray) -> EigenPairs:
    """Spectral decomposition with descending eigenvalues.

    Ordering is deterministic even for (near-)degenerate spectra: within a
    tied group (gap below TIE_TOL relative to the largest magnitude
    eigenvalue) vectors are sign-canonicalized and sorted by the index of
    their largest-magnitude coordinate.

    Raises
    ------
    NotSymmetric
        If the input deviates from its transpose by more than 1e-9 relative.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max()))
    if float(np.abs(a - a.T).max()) > 1e-9 * scale:
        raise NotSymmetric("matrix is not symmetric within 1e-9 relative")
    a = 0.5 * (a + a.T)
    vals, vecs = np.linalg.eigh(a)
    order = np.argsort(vals, kind="stable")[::-1]
    vals = vals[order]
    vecs = _canonicalize_columns(vecs[:, order])
    # stable ordering inside tied groups
    n = vals.size
    gap_tol = TIE_TOL * max(1.0, float(np.abs(vals).max()))
    k = 0
    while k < n:
        j = k + 1
        while j < n and abs(vals[j - 1] - vals[j]) <= gap_tol:
            j += 1
        if j - k > 1:
            block = vecs[:, k:j]
            keys = [int(np.argmax(np.abs(block[:, c]))) for c in range(j - k)]
            perm = np.argsort(keys, kind="stable")
            vecs[:, k:j] = block[:, perm]
        k = j
    return EigenPairs(values=vals, vectors=vecs)


def polar_factor(g: np.ndarray) -> np.ndarray:
    """Polar factor U = G(G^T G)^{-1/2} of a tall matrix G.

    U has orthonormal columns and maximizes trace(U^T G) over the Stiefel
    manifold. Computed through the SVD for stability.

    Raises
    ------
    RankDeficient
        If the smallest singular value is below 1e-12 times the largest.
    """
    g = np.asarray(g, dtype=float)
    p, sv, qt = np.linalg.svd(g, full_matrices=False)
    if sv[0] == 0.0 or sv[-1] < 1e-12 * sv[0]:
        raise RankDeficient("polar factor undefined: rank-deficient input")
    return p @ qt


def projector_of(w: np.ndarray) -> Projector:
    """Orthogonal projector onto the row space of W.

    Zero rows (fully deactivated sensors) are dropped with a DegenerateRows
    warning rather than failing; an all-zero W yields the zero projector.

    Raises
    ------
    RankDeficient
        If the surviving rows are linearly dependent beyond tolerance.
    """
    w = np.atleast_2d(np.asarray(w, dtype=float))
    scale = float(np.abs(w).max()) if w.size else 0.0
    if scale == 0.0:
        warnings.warn("all rows are zero; projector is zero", DegenerateRows)
        return Projector(matrix=np.zeros((w.shape[1], w.shape[1])), rank=0)
    alive = np.abs(w).max(axis=1) > 0.0
    if not alive.all():
        warnings.warn(
            f"dropped {int((~alive).sum())} zero row(s) before inversion",
            DegenerateRows,
        )
    ws = w[alive]
    _, sv, vt = np.linalg.svd(ws, full_matrices=False)
    if sv[-1] < 1e-10 * sv[0]:
        raise RankDeficient("surviving rows are linearly dependent")
    v = vt[: ws.shape[0]].T
    p = v @ v.T
    return Projector(matrix=0.5 * (p + p.T), rank=ws.shape[0])


def gram_schmidt_rows(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Factor W^T = W_ort^T R^T with orthonormal rows W_ort.

    R is M x M triangular with positive diagonal (row i of W is a
    combination of the first i orthonormal rows), so that
    W = R W_ort and projector_of(W) equals W_ort^T W_ort.

    Raises
    ------
    RankDeficient
        If W does not have full row rank.
    """
    w = np.atleast_2d(np.asarray(w, dtype=float))
    m = w.shape[0]
    _, sv, _ = np.linalg.svd(w, full_matrices=False)
    if sv[-1] < 1e-10 * sv[0]:
        raise RankDeficient("Gram-Schmidt requires full row rank")
    # QR of W^T gives W^T = Q R_qr; rows of Q^T are orthonormal.
    q, r_qr = np.linalg.qr(w.T)
    signs = np.sign(np.diag(r_qr))
    signs[signs == 0] = 1.0
    q = q * signs[None, :]
    r = (r_qr * signs[:, None]).T
    assert r.shape == (m, m)
    return q.T, r
