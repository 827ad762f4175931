"""Distances and kernels on the SPD and Grassmann manifolds.

Two kernels are provided:

``log_euclidean``
    ``k(C_i, C_j) = tr(log C_i log C_j)``, the inner product behind the
    Log-Euclidean distance ``||log C_i - log C_j||_F``.
``projection``
    ``k(Y_1, Y_2) = ||Y_1^T Y_2||_F^2 = tr(Y_1 Y_1^T Y_2 Y_2^T)``, the inner
    product of subspace projectors behind the projection metric.

Each kernel entry is evaluated as ``(f(a, b) + f(b, a)) / 2``. Floating-point
addition commutes, so the value is bitwise symmetric in its arguments; a Gram
matrix column therefore coincides exactly with the kernel vector of the same
point against the gallery. ``f`` uses elementwise products and numpy
reductions rather than BLAS calls, whose rounding can depend on the memory
alignment of the operands.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .errors import DimensionError, NumericalError, PreconditionError
from .set_modeling import GrassmannPoint, SpdPoint

LOG_EUCLIDEAN = "log_euclidean"
PROJECTION = "projection"
KERNELS = (LOG_EUCLIDEAN, PROJECTION)
PSD_RTOL = 1e-8


def _check_spd_pair(a: SpdPoint, b: SpdPoint):
    if a.log_c.shape != b.log_c.shape:
        raise DimensionError(f"SPD points differ in size: {a.log_c.shape} vs {b.log_c.shape}")


def _check_grassmann_pair(a: GrassmannPoint, b: GrassmannPoint):
    if a.basis.shape != b.basis.shape:
        raise DimensionError(
            f"subspaces differ in (d, q): {a.basis.shape} vs {b.basis.shape}"
        )


def led_distance(a: SpdPoint, b: SpdPoint) -> float:
    """Log-Euclidean distance ``||log a - log b||_F``."""
    _check_spd_pair(a, b)
    return float(np.linalg.norm(a.log_c - b.log_c))


def _frob_inner(x, y):
    return float(np.sum(x * y))


def log_euclidean_kernel(a: SpdPoint, b: SpdPoint) -> float:
    """``tr(log a @ log b)`` using the cached logarithms."""
    _check_spd_pair(a, b)
    # log_c is symmetric so the trace of the product is the Frobenius inner product
    return 0.5 * (_frob_inner(a.log_c, b.log_c) + _frob_inner(b.log_c, a.log_c))


def _cross_norm2(y1, y2):
    m = np.sum(y1[:, :, None] * y2[:, None, :], axis=0)  # Y1^T Y2
    return float(np.sum(m * m))


def projection_kernel(a: GrassmannPoint, b: GrassmannPoint) -> float:
    """``||Y_a^T Y_b||_F^2``, a value in ``[0, q]``."""
    _check_grassmann_pair(a, b)
    return 0.5 * (_cross_norm2(a.basis, b.basis) + _cross_norm2(b.basis, a.basis))


def _residual_norm2(y1, y2):
    m = np.sum(y1[:, :, None] * y2[:, None, :], axis=0)  # Y1^T Y2
    r = y2 - np.sum(y1[:, :, None] * m[None, :, :], axis=1)  # (I - Y1 Y1^T) Y2
    return float(np.sum(r * r))


def projection_distance(a: GrassmannPoint, b: GrassmannPoint) -> float:
    """Projection metric ``2^-1/2 ||P_a - P_b||_F``.

    Both projectors have trace ``q``, so the squared distance equals
    ``q - ||Y_a^T Y_b||_F^2`` and also ``||(I - P_a) Y_b||_F^2``. The second
    form is evaluated (in O(d q^2)) because the first cancels catastrophically
    for nearby subspaces, where the square root would amplify the rounding
    error to about 1e-8.
    """
    _check_grassmann_pair(a, b)
    if np.array_equal(a.basis, b.basis):
        return 0.0
    return float(np.sqrt(0.5 * (_residual_norm2(a.basis, b.basis) + _residual_norm2(b.basis, a.basis))))


_KERNEL_FUNCS = {
    LOG_EUCLIDEAN: (SpdPoint, log_euclidean_kernel),
    PROJECTION: (GrassmannPoint, projection_kernel),
}


def _resolve(kernel):
    try:
        return _KERNEL_FUNCS[kernel]
    except KeyError:
        raise PreconditionError(f"unknown kernel {kernel!r}; expected one of {KERNELS}") from None


def _check_kind(points, kind, kernel):
    for i, p in enumerate(points):
        if not isinstance(p, kind):
            raise PreconditionError(
                f"kernel {kernel!r} needs {kind.__name__} inputs; item {i} is {type(p).__name__}"
            )


def check_psd(k, name="Gram matrix", rtol=PSD_RTOL):
    """Raise :class:`NumericalError` unless ``min eig >= -rtol * max eig``."""
    w = np.linalg.eigvalsh(k)
    if w.size and w[0] < -rtol * max(w[-1], 0.0):
        raise NumericalError(
            f"{name} is not PSD: smallest eigenvalue {w[0]:.3e}, largest {w[-1]:.3e}"
        )


def gram_matrix(points: Sequence, kernel: str) -> np.ndarray:
    """Pairwise kernel values over ``points``, symmetrized and PSD-checked."""
    kind, func = _resolve(kernel)
    _check_kind(points, kind, kernel)
    n = len(points)
    k = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            k[i, j] = k[j, i] = func(points[i], points[j])
    k = 0.5 * (k + k.T)
    check_psd(k, f"{kernel} Gram matrix")
    return k


def kernel_vector(probe, gallery: Sequence, kernel: str) -> np.ndarray:
    """Kernel values of ``probe`` against every gallery point."""
    kind, func = _resolve(kernel)
    _check_kind([probe], kind, kernel)
    _check_kind(gallery, kind, kernel)
    return np.array([func(probe, g) for g in gallery], dtype=float)


@dataclass(frozen=True, eq=False)
class KernelStack:
    """Per-model training Gram matrices over one gallery.

    Attributes
    ----------
    grams : tuple of (N, N) ndarray
        One Gram matrix per model, already divided by ``scales``.
    model_kinds : tuple of str
        Kernel name for each Gram.
    set_ids : tuple
        Gallery set identifiers, shared by all Grams.
    scales : tuple of float
        Divisor applied to each raw Gram (1.0 unless trace normalization was
        requested). Probe kernel vectors must be divided by the same value.
    """

    grams: tuple
    model_kinds: tuple
    set_ids: tuple
    scales: tuple = field(default=None)

    def __post_init__(self):
        grams = []
        for q, g in enumerate(self.grams):
            g = np.asarray(g, dtype=float)
            if g.ndim != 2 or g.shape[0] != g.shape[1]:
                raise DimensionError(f"Gram {q} is not square: {g.shape}")
            g = 0.5 * (g + g.T)
            check_psd(g, f"Gram {q}")
            g.setflags(write=False)
            grams.append(g)
        if not grams:
            raise PreconditionError("a kernel stack needs at least one Gram matrix")
        n = grams[0].shape[0]
        if any(g.shape != (n, n) for g in grams):
            raise DimensionError("all Gram matrices must share the same size")
        if len(self.model_kinds) != len(grams):
            raise PreconditionError("one model kind per Gram matrix is required")
        set_ids = tuple(self.set_ids) if self.set_ids is not None else tuple(range(n))
        if len(set_ids) != n:
            raise DimensionError(f"{len(set_ids)} set ids for {n} Gram rows")
        scales = tuple(self.scales) if self.scales is not None else (1.0,) * len(grams)
        object.__setattr__(self, "grams", tuple(grams))
        object.__setattr__(self, "model_kinds", tuple(self.model_kinds))
        object.__setattr__(self, "set_ids", set_ids)
        object.__setattr__(self, "scales", tuple(float(s) for s in scales))

    @property
    def n(self) -> int:
        return self.grams[0].shape[0]

    @property
    def n_models(self) -> int:
        return len(self.grams)


def build_kernel_stack(points_per_model: Sequence[Sequence], kinds: Sequence[str],
                       set_ids: Sequence[Hashable] = None,
                       normalize: bool = False) -> KernelStack:
    """Assemble the Gram matrix of each model over the same gallery.

    With ``normalize=True`` each Gram is divided by its mean diagonal entry
    (left unscaled if that mean is zero). The default applies the kernels raw.
    """
    grams, scales = [], []
    for points, kind in zip(points_per_model, kinds):
        g = gram_matrix(points, kind)
        scale = 1.0
        if normalize:
            mean_diag = float(np.mean(np.diag(g)))
            if mean_diag > 0.0:
                scale = mean_diag
                g = g / scale
        grams.append(g)
        scales.append(scale)
    return KernelStack(tuple(grams), tuple(kinds), set_ids, tuple(scales))
