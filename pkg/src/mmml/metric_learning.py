"""Discriminant metric learning over several kernel spaces.

Every training set ``S_i`` is represented in each model ``q`` by the column
``K^q_i`` of that model's Gram matrix. A single coefficient matrix ``E``
(``N x d_z``) is shared by all models; the learned squared distance between
two sets is

    d(S_i, S_j) = sum_q u_q^2 ||E^T (K^q_i - K^q_j)||^2,

i.e. the squared Euclidean distance between the block-concatenated embeddings
``[u_1 E^T K^1_i, ..., u_Q E^T K^Q_i]``. ``E`` holds the leading generalized
eigenvectors of the between-class and (regularized) within-class scatter
matrices, and sets are classified by their nearest gallery neighbor.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import DimensionError, PreconditionError, ProtocolError
from .kernels import (LOG_EUCLIDEAN, PROJECTION, KernelStack, build_kernel_stack,
                      kernel_vector)
from .set_modeling import DEFAULT_ALPHA, GrassmannPoint, SpdPoint
from .spectral import solve_gen_eig

DEFAULT_U = (0.8, 0.2)
DEFAULT_DZ = 10
DEFAULT_EPS = 1e-4


class ScatterPair(NamedTuple):
    """Within-class (``r_w``) and between-class (``r_b``) scatter matrices.

    ``m_w`` and ``m_b`` count the ordered same-class and different-class pairs
    ``(i, j)``, ``i != j``, that were averaged.
    """

    r_w: np.ndarray
    r_b: np.ndarray
    m_w: int
    m_b: int


class Neighbor(NamedTuple):
    distance: float
    index: int
    label: Hashable


def _check_weights(u, n_models):
    u = tuple(float(x) for x in u)
    if len(u) != n_models:
        raise DimensionError(f"{len(u)} weights given for {n_models} kernel models")
    if any(not np.isfinite(x) or x < 0 for x in u) or not any(x > 0 for x in u):
        raise PreconditionError(f"weights must be non-negative with at least one positive, got {u}")
    return u


def _pair_laplacian(mask):
    # sum_{i,j} A_ij (k_i - k_j)(k_i - k_j)^T = 2 K (D - A) K^T for symmetric A
    a = mask.astype(float)
    return np.diag(a.sum(axis=1)) - a


def scatter_matrices(stack: KernelStack, labels: Sequence[Hashable], u: Sequence[float]) -> ScatterPair:
    """Average pairwise scatter of Gram columns within and between classes.

    Parameters
    ----------
    stack : KernelStack
    labels : sequence of length N
        Class of each gallery set.
    u : sequence of Q non-negative floats
        Model weights. They enter squared.

    Raises
    ------
    ProtocolError
        No same-class pair or no different-class pair exists.
    """
    labels = np.asarray(labels, dtype=object)
    n = stack.n
    if labels.shape != (n,):
        raise DimensionError(f"{labels.shape[0]} labels for a gallery of {n} sets")
    u = _check_weights(u, stack.n_models)

    same = labels[:, None] == labels[None, :]
    off_diag = ~np.eye(n, dtype=bool)
    within = same & off_diag
    between = ~same
    m_w, m_b = int(within.sum()), int(between.sum())
    if m_w == 0:
        raise ProtocolError("no two gallery sets share a class; within-class scatter is undefined")
    if m_b == 0:
        raise ProtocolError("all gallery sets share one class; between-class scatter is undefined")

    lap_w, lap_b = _pair_laplacian(within), _pair_laplacian(between)
    r_w = np.zeros((n, n))
    r_b = np.zeros((n, n))
    for weight, k in zip(u, stack.grams):
        s_w = 2.0 * (k @ lap_w @ k) / m_w
        s_b = 2.0 * (k @ lap_b @ k) / m_b
        r_w = r_w + weight ** 2 * (0.5 * (s_w + s_w.T))
        r_b = r_b + weight ** 2 * (0.5 * (s_b + s_b.T))
    return ScatterPair(r_w, r_b, m_w, m_b)


def regularize_within(r_w, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Return ``r_w + eps * (tr(r_w) / N) * I``."""
    r_w = np.asarray(r_w, dtype=float)
    if eps < 0:
        raise PreconditionError(f"eps must be non-negative, got {eps}")
    n = r_w.shape[0]
    return r_w + (eps * np.trace(r_w) / n) * np.eye(n)


def objective_value(e_mat, scatter: ScatterPair) -> float:
    """Trace ratio ``tr(E^T r_b E) / tr(E^T r_w E)``."""
    e_mat = np.asarray(e_mat, dtype=float)
    den = float(np.trace(e_mat.T @ scatter.r_w @ e_mat))
    if not den > 0.0:
        raise PreconditionError(f"denominator trace is {den}; the ratio is undefined")
    return float(np.trace(e_mat.T @ scatter.r_b @ e_mat)) / den


@dataclass(frozen=True, eq=False)
class EmbeddingModel:
    """A trained metric together with what is needed to embed new sets.

    Attributes
    ----------
    e_mat : (N, d_z) ndarray
        Coefficients over the gallery; ``e^T R_w e = 1`` per column, where
        ``R_w`` is the regularized within-class scatter.
    u : tuple of float
        Model weights, one per kernel.
    gallery_labels : tuple
    model_kinds : tuple of str
        Kernel of each model, in the order of ``u``.
    kernel_scales : tuple of float
        Divisors applied to raw kernel values (trace normalization).
    eigenvalues : (d_z,) ndarray
    gallery_embedding : (N, Q * d_z) ndarray
    spd_anchors, grassmann_anchors : tuple or None
        Gallery points for each manifold, required by :func:`classify`.
    q, alpha, eps : hyperparameters recorded for consistency checks.
    set_ids : tuple
    """

    e_mat: np.ndarray
    u: tuple
    gallery_labels: tuple
    model_kinds: tuple
    kernel_scales: tuple
    eigenvalues: np.ndarray
    gallery_embedding: np.ndarray
    spd_anchors: Optional[tuple] = None
    grassmann_anchors: Optional[tuple] = None
    q: Optional[int] = None
    alpha: float = DEFAULT_ALPHA
    eps: float = DEFAULT_EPS
    set_ids: tuple = ()

    @property
    def d_z(self) -> int:
        return self.e_mat.shape[1]

    @property
    def n_gallery(self) -> int:
        return self.e_mat.shape[0]

    @property
    def d(self) -> Optional[int]:
        if self.spd_anchors:
            return self.spd_anchors[0].d
        if self.grassmann_anchors:
            return self.grassmann_anchors[0].d
        return None


def embed(model: EmbeddingModel, kvecs: Sequence) -> np.ndarray:
    """Concatenate ``u_q * E^T k_q`` over the models.

    ``kvecs[q]`` is the (scaled) kernel vector against the gallery under
    model ``q``.
    """
    if len(kvecs) != len(model.u):
        raise DimensionError(f"{len(kvecs)} kernel vectors for {len(model.u)} models")
    e_mat = np.ascontiguousarray(model.e_mat)
    blocks = []
    for weight, k in zip(model.u, kvecs):
        k = np.ascontiguousarray(k, dtype=float)
        if k.shape != (model.n_gallery,):
            raise DimensionError(f"kernel vector has shape {k.shape}, expected ({model.n_gallery},)")
        # E^T k without BLAS so the bits do not depend on array alignment
        blocks.append(weight * np.sum(e_mat * k[:, None], axis=0))
    return np.concatenate(blocks)


def _blockwise_sqdist(a, b, n_blocks, width):
    total = 0.0
    for q in range(n_blocks):
        diff = a[q * width:(q + 1) * width] - b[q * width:(q + 1) * width]
        total += float(np.sum(diff * diff))
    return total


def embedding_distance(model: EmbeddingModel, emb_a, emb_b) -> float:
    """Squared Euclidean distance between two embeddings, summed per model block."""
    return _blockwise_sqdist(np.asarray(emb_a), np.asarray(emb_b), len(model.u), model.d_z)


def learned_distance(model: EmbeddingModel, kvecs_a: Sequence, kvecs_b: Sequence) -> float:
    return embedding_distance(model, embed(model, kvecs_a), embed(model, kvecs_b))


def train(stack: KernelStack, labels: Sequence[Hashable], u: Sequence[float] = DEFAULT_U,
          d_z: int = DEFAULT_DZ, eps: float = DEFAULT_EPS, *,
          spd_anchors=None, grassmann_anchors=None, q=None,
          alpha: float = DEFAULT_ALPHA) -> EmbeddingModel:
    """Learn ``E`` from a kernel stack.

    The within-class scatter is regularized with
    :func:`regularize_within` and the ``d_z`` leading eigenvectors of the
    pencil ``(r_b, r_w)`` form the columns of ``E``.
    """
    if not 1 <= d_z <= stack.n:
        raise DimensionError(f"d_z = {d_z} must lie in [1, N = {stack.n}]")
    scatter = scatter_matrices(stack, labels, u)
    r_w = regularize_within(scatter.r_w, eps)
    e_mat, values = solve_gen_eig(scatter.r_b, r_w, d_z)
    # C order keeps embed() reductions identical for in-memory and reloaded models
    e_mat = np.ascontiguousarray(e_mat)
    e_mat.setflags(write=False)
    values.setflags(write=False)

    model = EmbeddingModel(
        e_mat=e_mat,
        u=_check_weights(u, stack.n_models),
        gallery_labels=tuple(labels),
        model_kinds=stack.model_kinds,
        kernel_scales=stack.scales,
        eigenvalues=values,
        gallery_embedding=np.empty((0, 0)),
        spd_anchors=tuple(spd_anchors) if spd_anchors is not None else None,
        grassmann_anchors=tuple(grassmann_anchors) if grassmann_anchors is not None else None,
        q=q,
        alpha=alpha,
        eps=eps,
        set_ids=stack.set_ids,
    )
    gallery = np.array([embed(model, [g[:, i] for g in stack.grams]) for i in range(stack.n)])
    gallery.setflags(write=False)
    object.__setattr__(model, "gallery_embedding", gallery)
    return model


def fit(spd_points: Sequence[SpdPoint], grassmann_points: Sequence[GrassmannPoint],
        labels: Sequence[Hashable], u: Sequence[float] = DEFAULT_U, d_z: int = DEFAULT_DZ,
        eps: float = DEFAULT_EPS, *, kinds: Sequence[str] = (LOG_EUCLIDEAN, PROJECTION),
        q: Optional[int] = None, alpha: float = DEFAULT_ALPHA,
        normalize: bool = False, set_ids=None) -> EmbeddingModel:
    """Build the kernel stack for the chosen ``kinds`` and train on it.

    ``kinds`` selects the models in weight order; pass a single kind to
    restrict learning to one manifold.
    """
    points = {LOG_EUCLIDEAN: spd_points, PROJECTION: grassmann_points}
    kinds = tuple(kinds)
    stack = build_kernel_stack([points[k] for k in kinds], kinds, set_ids, normalize)
    if q is None and grassmann_points:
        q = grassmann_points[0].q
    return train(
        stack, labels, u, d_z, eps,
        spd_anchors=spd_points if LOG_EUCLIDEAN in kinds else None,
        grassmann_anchors=grassmann_points if PROJECTION in kinds else None,
        q=q, alpha=alpha,
    )


def probe_kernel_vectors(model: EmbeddingModel, probe_spd: Optional[SpdPoint],
                         probe_grass: Optional[GrassmannPoint]) -> list:
    """Scaled kernel vectors of a probe against the gallery anchors, one per model."""
    kvecs = []
    for kind, scale in zip(model.model_kinds, model.kernel_scales):
        if kind == LOG_EUCLIDEAN:
            if model.spd_anchors is None or probe_spd is None:
                raise PreconditionError("log_euclidean model needs SPD anchors and an SPD probe")
            if probe_spd.d != model.spd_anchors[0].d:
                raise DimensionError(
                    f"probe covariance is {probe_spd.d}x{probe_spd.d}, gallery uses d = {model.spd_anchors[0].d}"
                )
            k = kernel_vector(probe_spd, model.spd_anchors, kind)
        elif kind == PROJECTION:
            if model.grassmann_anchors is None or probe_grass is None:
                raise PreconditionError("projection model needs Grassmann anchors and a subspace probe")
            ref = model.grassmann_anchors[0]
            if probe_grass.basis.shape != ref.basis.shape:
                raise DimensionError(
                    f"probe subspace has (d, q) = {probe_grass.basis.shape}, gallery uses {ref.basis.shape}"
                )
            k = kernel_vector(probe_grass, model.grassmann_anchors, kind)
        else:
            raise PreconditionError(f"unknown kernel {kind!r}")
        kvecs.append(k / scale if scale != 1.0 else k)
    return kvecs


def rank_gallery(model: EmbeddingModel, probe_embedding) -> list:
    """Gallery members sorted by learned distance; ties keep gallery order."""
    dists = np.array([embedding_distance(model, probe_embedding, g) for g in model.gallery_embedding])
    order = np.argsort(dists, kind="stable")
    return [Neighbor(float(dists[i]), int(i), model.gallery_labels[i]) for i in order]


def classify(model: EmbeddingModel, probe_spd: Optional[SpdPoint],
             probe_grass: Optional[GrassmannPoint]):
    """Nearest-neighbor label of a probe set under the learned distance.

    Returns
    -------
    label : hashable
        Label of the closest gallery set (lowest gallery index on ties).
    neighbors : list of Neighbor
        Every gallery member, sorted by distance.
    """
    emb = embed(model, probe_kernel_vectors(model, probe_spd, probe_grass))
    neighbors = rank_gallery(model, emb)
    return neighbors[0].label, neighbors
