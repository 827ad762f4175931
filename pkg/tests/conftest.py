import numpy as np
import pytest

from mmml.kernels import LOG_EUCLIDEAN, PROJECTION, build_kernel_stack
from mmml.set_modeling import GrassmannPoint, SpdPoint


def random_spd(rng, d, spread=1.0):
    a = rng.standard_normal((d, d))
    q, _ = np.linalg.qr(a)
    w = np.exp(rng.uniform(-spread, spread, d))
    return (q * w) @ q.T


def random_spd_point(rng, d, spread=1.0):
    return SpdPoint.from_matrix(random_spd(rng, d, spread))


def random_grassmann_point(rng, d, q):
    y, _ = np.linalg.qr(rng.standard_normal((d, q)))
    return GrassmannPoint(y)


def random_stack(rng, n_per_class=(3, 3, 3), d=5, q=2, normalize=False):
    """Kernel stack plus labels and points for a small random gallery."""
    labels = [c for c, k in enumerate(n_per_class) for _ in range(k)]
    spd = [random_spd_point(rng, d) for _ in labels]
    grass = [random_grassmann_point(rng, d, q) for _ in labels]
    stack = build_kernel_stack([spd, grass], (LOG_EUCLIDEAN, PROJECTION), normalize=normalize)
    return stack, labels, spd, grass


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
