"""Multiple-manifold metric learning for image-set classification.

An image set is modeled both as a regularized covariance matrix (SPD
manifold) and as the span of its leading eigenvectors (Grassmann manifold).
The Log-Euclidean and projection kernels map the two representations into
Hilbert spaces, where a discriminant metric is learned jointly and probe sets
are classified by their nearest gallery set.
"""
from .errors import (DegenerateSetError, DimensionError, FormatError, MMMLError, NotSPDError,
                     NumericalError, PreconditionError, ProtocolError, UnsupportedVersionError)
from .kernels import (KernelStack, build_kernel_stack, gram_matrix, kernel_vector, led_distance,
                      log_euclidean_kernel, projection_distance, projection_kernel)
from .metric_learning import (EmbeddingModel, ScatterPair, classify, embed, fit, learned_distance,
                              objective_value, scatter_matrices, train)
from .set_modeling import (GrassmannPoint, ImageSet, SpdPoint, covariance, grassmann_basis,
                           mean_vector, model_set, regularize_spd)
from .spectral import SymEigen, matrix_log_spd, solve_gen_eig, sym_eig, top_q_eigvecs

__version__ = "0.1.0"

__all__ = [
    "DegenerateSetError",
    "DimensionError",
    "FormatError",
    "MMMLError",
    "NotSPDError",
    "NumericalError",
    "PreconditionError",
    "ProtocolError",
    "UnsupportedVersionError",
    "KernelStack",
    "build_kernel_stack",
    "gram_matrix",
    "kernel_vector",
    "led_distance",
    "log_euclidean_kernel",
    "projection_distance",
    "projection_kernel",
    "EmbeddingModel",
    "ScatterPair",
    "classify",
    "embed",
    "fit",
    "learned_distance",
    "objective_value",
    "scatter_matrices",
    "train",
    "GrassmannPoint",
    "ImageSet",
    "SpdPoint",
    "covariance",
    "grassmann_basis",
    "mean_vector",
    "model_set",
    "regularize_spd",
    "SymEigen",
    "matrix_log_spd",
    "solve_gen_eig",
    "sym_eig",
    "top_q_eigvecs",
]
