"""Seeded synthetic image-set datasets.

Two presets are available.

``gaussian``
    Each class has a mean ``separation * m_c / sqrt(d)`` and covariance
    ``I + separation * A_c A_c^T / r`` with ``A_c`` a random ``d x r``
    Gaussian matrix, ``r = max(1, d // 3)``. Because set modeling discards the
    mean, ``separation`` also scales the class-specific covariance term: at
    ``separation = 0`` all classes share one distribution. Every set perturbs
    its class mean and covariance slightly.

``mixed``
    Half of the classes (rounded down) are *shape* classes and the rest are
    *orientation* classes. All shape classes share one principal subspace of
    dimension ``r = max(1, d // 4)`` and differ only in their eigenvalue
    profile inside it, so their subspaces coincide. Orientation classes each
    own a subspace drawn as a random rotation of the shared one, but every
    set draws its eigenvalue profile afresh, so their covariances vary
    strongly within a class while their subspaces do not. Set modeling on
    the subspace with ``q = r`` separates orientation classes; the covariance
    separates shape classes.

Samples are ``d x n`` matrices, labels ``c00, c01, ...`` and set ids
``c00_s00, ...``. The generator draws from a single ``numpy`` Generator
seeded with ``seed``, so output is identical for identical arguments.
"""
from __future__ import annotations

from typing import List

import numpy as np
from scipy.linalg import expm

from ..errors import PreconditionError
from ..set_modeling import ImageSet

PRESETS = ("gaussian", "mixed")
# within-class jitter of the set-level parameters
SET_JITTER = 0.1
# mixed preset: log-range of eigenvalue profiles and rotation angle between subspaces
PROFILE_SPREAD = 1.5
ROTATION_ANGLE = 0.5


def _labels(k):
    return f"c{k:02d}"


def _sample(rng, mean, cov, n):
    chol = np.linalg.cholesky(cov)
    return mean[:, None] + chol @ rng.standard_normal((mean.shape[0], n))


def _random_rotation(rng, d, angle):
    gen = rng.standard_normal((d, d))
    skew = (gen - gen.T) / np.sqrt(2 * d)
    return expm(angle * skew)


def synth_generate(classes: int, sets_per_class: int, images_per_set: int, d: int,
                   separation: float = 1.0, seed: int = 0,
                   preset: str = "gaussian") -> List[ImageSet]:
    """Generate ``classes * sets_per_class`` labeled image sets.

    Parameters
    ----------
    classes, sets_per_class, images_per_set, d : int
        Dataset geometry; ``images_per_set >= 2``.
    separation : float
        Non-negative class separation (see module docstring per preset).
    seed : int
    preset : {"gaussian", "mixed"}
    """
    if min(classes, sets_per_class, d) < 1 or images_per_set < 2:
        raise PreconditionError("classes, sets_per_class and d must be >= 1, images_per_set >= 2")
    if separation < 0:
        raise PreconditionError(f"separation must be non-negative, got {separation}")
    if preset not in PRESETS:
        raise PreconditionError(f"unknown preset {preset!r}; choose from {PRESETS}")
    rng = np.random.default_rng(seed)
    if preset == "gaussian":
        return _gaussian(rng, classes, sets_per_class, images_per_set, d, separation)
    return _mixed(rng, classes, sets_per_class, images_per_set, d, separation)


def _gaussian(rng, classes, sets_per_class, n, d, separation):
    r = max(1, d // 3)
    out = []
    for c in range(classes):
        mean = separation * rng.standard_normal(d) / np.sqrt(d)
        a = rng.standard_normal((d, r))
        cov = np.eye(d) + separation * (a @ a.T) / r
        for s in range(sets_per_class):
            b = rng.standard_normal((d, d))
            set_cov = cov + SET_JITTER * (b @ b.T) / d
            set_mean = mean + SET_JITTER * rng.standard_normal(d)
            out.append(ImageSet(_sample(rng, set_mean, set_cov, n), _labels(c), f"{_labels(c)}_s{s:02d}"))
    return out


def _mixed(rng, classes, sets_per_class, n, d, separation):
    r = max(1, d // 4)
    n_shape = classes // 2
    shared, _ = np.linalg.qr(rng.standard_normal((d, d)))
    base = shared[:, :r]
    # eigenvalues of the principal directions, relative to unit noise
    level = 1.0 + separation
    out = []
    for c in range(classes):
        if c < n_shape:
            profile = level * np.exp(rng.uniform(-PROFILE_SPREAD, PROFILE_SPREAD, r))
            basis = base
        else:
            profile = None
            basis = _random_rotation(rng, d, ROTATION_ANGLE) @ base
        for s in range(sets_per_class):
            if profile is None:
                spectrum = level * np.exp(rng.uniform(-PROFILE_SPREAD, PROFILE_SPREAD, r))
            else:
                spectrum = profile * np.exp(SET_JITTER * rng.standard_normal(r))
            cov = np.eye(d) + (basis * spectrum) @ basis.T
            out.append(ImageSet(_sample(rng, np.zeros(d), cov, n), _labels(c), f"{_labels(c)}_s{s:02d}"))
    return out
