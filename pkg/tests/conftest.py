import numpy as np
import pytest

from regap.dataio import toy_manifold_dataset
from regap.model import Layer, LatentPrior, LinearPair, MlpPair, TrainConfig, dct_basis_pair, train_autoencoder

# acceptance verdict lines, filled by test_acceptance.py and echoed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def orthonormal(n, d, seed=0):
    q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((n, d)))
    return q


def random_mlp(image_shape=(3, 3, 1), d=2, hidden=(6,), activation="tanh", seed=0, scale=0.8):
    """Untrained smooth MLP pair with random weights (no A1 guarantee)."""
    rng = np.random.default_rng(seed)
    n = int(np.prod(image_shape))

    def stack(sizes):
        layers = []
        for i in range(len(sizes) - 1):
            act = activation if i < len(sizes) - 2 else "identity"
            w = scale * rng.standard_normal((sizes[i + 1], sizes[i])) / np.sqrt(sizes[i])
            layers.append(Layer(w, 0.1 * rng.standard_normal(sizes[i + 1]), act))
        return layers

    return MlpPair(stack([n, *hidden, d]), stack([d, *reversed(hidden), n]), image_shape)


def e3_pair():
    """Columns e1, e2 in R^3 with the transpose as encoder."""
    A = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    return LinearPair(A, np.zeros(3), A.T, np.zeros(2))


@pytest.fixture(scope="session")
def plane_mlp():
    """Identity-activation MLP trained to convergence on a 2-plane in R^9."""
    rng = np.random.default_rng(0)
    B = orthonormal(9, 2, seed=0)
    data = [(0.5 + B @ z).reshape(3, 3, 1) for z in rng.standard_normal((64, 2))]
    prior = LatentPrior("standard-normal", 2)
    cfg = TrainConfig(2, hidden=(), activation="identity", epochs=5000, latent_weight=0.1, seed=1)
    model, report = train_autoencoder(data, prior, cfg)
    return model, prior, data, report


@pytest.fixture(scope="session")
def tanh_mlp():
    """Nonlinear tanh MLP trained on a curved toy manifold."""
    data = toy_manifold_dataset((4, 4, 1), 2, 256, seed=0)
    prior = LatentPrior("uniform-box", 2)
    model, report = train_autoencoder(data, prior, TrainConfig(2, hidden=(32,), epochs=3000, seed=0))
    return model, prior, data, report


@pytest.fixture(scope="session")
def dct_pair():
    return dct_basis_pair((16, 16, 1), 8)
