"""Dense symmetric eigen-solvers used throughout the package.

Every routine here is a pure function of its inputs. Eigenvalues are always
returned in non-increasing order and eigenvectors carry a fixed sign: the
entry of largest magnitude in each column is made positive (the first such
entry when several share the maximum). Within a cluster of tied eigenvalues
the order of the basis vectors is whatever LAPACK returns; callers that need
invariance should compare projectors rather than bases.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy import linalg

from .errors import DimensionError, NotSPDError, NumericalError, PreconditionError

SYMMETRY_RTOL = 1e-10
# eigenvalues at or below this fraction of the largest one are treated as zero
SPD_FLOOR = 1e-12
GEN_EIG_RESIDUAL_RTOL = 1e-6


class SymEigen(NamedTuple):
    """Eigen-decomposition ``A = V diag(w) V^T`` with ``w`` descending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _as_square(a, name="A"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be a square matrix, got shape {a.shape}")
    return a


def check_symmetric(a, name="A", rtol=SYMMETRY_RTOL):
    """Raise :class:`PreconditionError` if ``a`` is not symmetric to ``rtol``.

    The tolerance is relative to the largest absolute entry of ``a``.
    Returns the input as a float array.
    """
    a = _as_square(a, name)
    asym = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    if asym > rtol * scale:
        raise PreconditionError(
            f"{name} is not symmetric: max |{name} - {name}^T| = {asym:.3e} "
            f"(max |entry| = {scale:.3e}, rtol = {rtol:g})"
        )
    return a


def fix_signs(vectors):
    """Flip columns so the largest-magnitude entry of each is positive."""
    vectors = np.array(vectors, dtype=float, copy=True)
    if vectors.size == 0:
        return vectors
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def sym_eig(a) -> SymEigen:
    """Eigen-decomposition of a real symmetric matrix.

    Parameters
    ----------
    a : (d, d) array_like
        Symmetric matrix. Asymmetry above ``1e-10`` relative to the largest
        entry is rejected; smaller asymmetry is removed by averaging with the
        transpose.

    Returns
    -------
    SymEigen
        Eigenvalues in non-increasing order and the matching orthonormal
        eigenvectors as columns, sign-normalized (see module docstring).
    """
    a = check_symmetric(a)
    w, v = np.linalg.eigh(0.5 * (a + a.T))
    w = w[::-1].copy()
    v = fix_signs(v[:, ::-1])
    return SymEigen(w, v)


def matrix_log_spd(c) -> np.ndarray:
    """Principal matrix logarithm of a symmetric positive definite matrix.

    Raises :class:`NotSPDError` when the smallest eigenvalue is not above
    ``1e-12`` times the largest. Nothing is clamped.
    """
    w, v = sym_eig(c)
    if w.size == 0:
        return np.zeros((0, 0))
    lam_max, lam_min = w[0], w[-1]
    if lam_max <= 0.0 or lam_min <= SPD_FLOOR * lam_max:
        raise NotSPDError(
            f"matrix is not SPD: smallest eigenvalue {lam_min:.6e} is not above "
            f"the floor {SPD_FLOOR:g} * {lam_max:.6e}"
        )
    out = (v * np.log(w)) @ v.T
    return 0.5 * (out + out.T)


def spd_from_log(log_c) -> np.ndarray:
    """Inverse of :func:`matrix_log_spd`: eigenvalue-wise exponential."""
    w, v = sym_eig(log_c)
    out = (v * np.exp(w)) @ v.T
    return 0.5 * (out + out.T)


def top_q_eigvecs(c, q: int) -> np.ndarray:
    """Orthonormal basis of the eigenvectors of the ``q`` largest eigenvalues."""
    c = _as_square(c, "C")
    d = c.shape[0]
    if not 1 <= q <= d:
        raise DimensionError(f"q must satisfy 1 <= q <= d = {d}, got q = {q}")
    return np.ascontiguousarray(sym_eig(c).eigenvectors[:, :q])


def solve_gen_eig(b, w, k: int):
    """Leading solutions of the symmetric-definite problem ``B e = lam W e``.

    ``W`` is factored as ``L L^T`` and the standard symmetric problem on
    ``L^-1 B L^-T`` is solved; this has the same spectrum as ``W^-1 B``.

    Parameters
    ----------
    b : (N, N) array_like
        Symmetric matrix.
    w : (N, N) array_like
        Symmetric positive definite matrix. Regularize before calling.
    k : int
        Number of leading eigenpairs to return, ``1 <= k <= N``.

    Returns
    -------
    vectors : (N, k) ndarray
        Generalized eigenvectors, ``e^T W e = 1`` for every column, largest
        magnitude entry positive.
    values : (k,) ndarray
        Matching eigenvalues, non-increasing.

    Raises
    ------
    NotSPDError
        ``W`` has no Cholesky factor.
    NumericalError
        A returned pair misses the residual bound
        ``||B e - lam W e|| <= 1e-6 ||B||_F ||e||``. The message includes an
        estimate of the condition number of ``W``.
    """
    b = check_symmetric(b, "B")
    w = check_symmetric(w, "W")
    n = b.shape[0]
    if w.shape != b.shape:
        raise DimensionError(f"B has shape {b.shape} but W has shape {w.shape}")
    if not 1 <= k <= n:
        raise DimensionError(f"k must satisfy 1 <= k <= N = {n}, got k = {k}")
    b = 0.5 * (b + b.T)
    w = 0.5 * (w + w.T)
    try:
        chol = linalg.cholesky(w, lower=True)
    except linalg.LinAlgError as exc:
        raise NotSPDError(
            "W is not positive definite; regularize it (add a multiple of the "
            "identity) before solving"
        ) from exc
    # M = L^-1 B L^-T
    tmp = linalg.solve_triangular(chol, b, lower=True)
    m = linalg.solve_triangular(chol, tmp.T, lower=True)
    vals, vecs = sym_eig(0.5 * (m + m.T))
    vals = vals[:k]
    vecs = linalg.solve_triangular(chol.T, vecs[:, :k], lower=False)
    vecs = fix_signs(vecs)

    resid = np.linalg.norm(b @ vecs - (w @ vecs) * vals, axis=0)
    bound = GEN_EIG_RESIDUAL_RTOL * np.linalg.norm(b) * np.linalg.norm(vecs, axis=0)
    if np.any(resid > bound):
        diag = np.abs(np.diag(chol))
        cond = (diag.max() / diag.min()) ** 2 if diag.min() > 0 else np.inf
        worst = int(np.argmax(resid - bound))
        raise NumericalError(
            f"generalized eigenpair {worst} has residual {resid[worst]:.3e} above "
            f"bound {bound[worst]:.3e}; W is ill-conditioned (cond estimate "
            f"{cond:.3e}), increase the regularization"
        )
    return vecs, vals
