"""Represent an image set as an SPD matrix and as a linear subspace.

A set of ``n`` vectorized images of dimension ``d`` is stored column-wise in a
``d x n`` matrix. Its regularized covariance is a point on the SPD manifold
and the span of the leading eigenvectors of that covariance is a point on the
Grassmann manifold G(q, d).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable

import numpy as np

from .errors import DegenerateSetError, DimensionError, PreconditionError
from .spectral import matrix_log_spd, spd_from_log, top_q_eigvecs

DEFAULT_ALPHA = 1e3
DEFAULT_Q = 10


def _frozen(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ImageSet:
    """A labeled set of vectorized images.

    Attributes
    ----------
    samples : (d, n) ndarray
        One column per image.
    label : hashable
        Class identifier.
    set_id : hashable
        Opaque identifier, used in reports and manifests.
    """

    samples: np.ndarray
    label: Hashable
    set_id: Hashable = None

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 2:
            raise DimensionError(f"samples must be a d x n matrix, got shape {s.shape}")
        if s.shape[1] < 2:
            raise DegenerateSetError(
                f"image set {self.set_id!r} has {s.shape[1]} image(s); at least 2 are needed"
            )
        object.__setattr__(self, "samples", _frozen(s))

    @property
    def d(self) -> int:
        return self.samples.shape[0]

    @property
    def n(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True, eq=False)
class SpdPoint:
    """A regularized covariance matrix with its cached matrix logarithm.

    Build with :meth:`from_matrix`; ``log_c`` is computed once. Points
    reloaded from a model file are rebuilt from the logarithm with
    :meth:`from_log`, in which case ``c_star`` is its eigenvalue-wise
    exponential.
    """

    c_star: np.ndarray
    log_c: np.ndarray

    @classmethod
    def from_matrix(cls, c_star) -> "SpdPoint":
        return cls(_frozen(c_star), _frozen(matrix_log_spd(c_star)))

    @classmethod
    def from_log(cls, log_c) -> "SpdPoint":
        return cls(_frozen(spd_from_log(log_c)), _frozen(log_c))

    @property
    def d(self) -> int:
        return self.log_c.shape[0]


@dataclass(frozen=True, eq=False)
class GrassmannPoint:
    """A q-dimensional subspace of R^d given by an orthonormal ``d x q`` basis."""

    basis: np.ndarray
    q: int = field(init=False)

    def __post_init__(self):
        y = np.asarray(self.basis, dtype=float)
        if y.ndim != 2 or y.shape[1] > y.shape[0] or y.shape[1] < 1:
            raise DimensionError(f"basis must be d x q with 1 <= q <= d, got {y.shape}")
        gram = y.T @ y
        err = float(np.max(np.abs(gram - np.eye(y.shape[1]))))
        if err > 1e-10:
            raise PreconditionError(f"basis is not orthonormal: max |Y^T Y - I| = {err:.3e}")
        object.__setattr__(self, "basis", _frozen(y))
        object.__setattr__(self, "q", y.shape[1])

    @property
    def d(self) -> int:
        return self.basis.shape[0]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T


def _samples(images) -> np.ndarray:
    if isinstance(images, ImageSet):
        return images.samples
    s = np.asarray(images, dtype=float)
    if s.ndim != 2:
        raise DimensionError(f"samples must be a d x n matrix, got shape {s.shape}")
    return s


def mean_vector(images) -> np.ndarray:
    """Column mean of an :class:`ImageSet` (or of a raw ``d x n`` matrix)."""
    return _samples(images).mean(axis=1)


def covariance(images) -> np.ndarray:
    """Unbiased sample covariance ``1/(n-1) sum (s_i - m)(s_i - m)^T``."""
    s = _samples(images)
    n = s.shape[1]
    if n < 2:
        raise DegenerateSetError(f"covariance needs at least 2 images, got {n}")
    centered = s - s.mean(axis=1, keepdims=True)
    c = centered @ centered.T / (n - 1)
    return 0.5 * (c + c.T)


def regularize_spd(c, alpha: float = DEFAULT_ALPHA) -> np.ndarray:
    """Shift ``c`` by ``tr(c)/alpha`` along the diagonal.

    Raises :class:`DegenerateSetError` when ``tr(c) == 0`` (every image in the
    set is identical), since the shift then vanishes.
    """
    c = np.asarray(c, dtype=float)
    if alpha <= 0:
        raise PreconditionError(f"alpha must be positive, got {alpha}")
    tr = float(np.trace(c))
    if not tr > 0.0:
        raise DegenerateSetError(
            f"covariance has trace {tr}; the set has no variance and cannot be regularized"
        )
    return c + (tr / alpha) * np.eye(c.shape[0])


def grassmann_basis(c_star, q: int = DEFAULT_Q) -> GrassmannPoint:
    return GrassmannPoint(top_q_eigvecs(c_star, q))


def model_set(images, q: int = DEFAULT_Q, alpha: float = DEFAULT_ALPHA):
    """Model one image set on both manifolds.

    Parameters
    ----------
    images : ImageSet or (d, n) array_like
    q : int
        Subspace dimension; must not exceed ``min(d, n - 1)``.
    alpha : float
        Regularization divisor of the covariance trace.

    Returns
    -------
    (SpdPoint, GrassmannPoint)
    """
    s = _samples(images)
    c_star = regularize_spd(covariance(s), alpha)
    d, n = s.shape
    if not 1 <= q <= min(d, n - 1):
        raise DimensionError(
            f"q = {q} must satisfy 1 <= q <= min(d, n - 1) = {min(d, n - 1)} "
            f"for a set with d = {d}, n = {n}"
        )
    return SpdPoint.from_matrix(c_star), grassmann_basis(c_star, q)
