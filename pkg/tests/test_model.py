import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import e3_pair, orthonormal, random_mlp
from regap.model import (
    Layer,
    LatentPrior,
    LinearPair,
    ModelFormatError,
    MlpPair,
    ShapeError,
    TrainConfig,
    TrainingError,
    check_assumptions,
    dct_basis_pair,
    model_from_bytes,
    model_to_bytes,
    pca_pair,
    train_autoencoder,
)


def central_difference(f, x, step=1e-5):
    x = np.asarray(x, dtype=np.float64)
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = step
        cols.append((f(x + e) - f(x - e)) / (2 * step))
    return np.stack(cols, axis=1)


def rel_frobenius(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


# ---------------------------------------------------------------- decode / encode


def test_decode_identity_embedding():
    x = e3_pair().decode(np.array([2.0, 3.0]))
    np.testing.assert_array_equal(x.reshape(-1), [2.0, 3.0, 0.0])


def test_decode_is_deterministic(tanh_mlp):
    model = tanh_mlp[0]
    z = np.array([0.3, -0.2])
    a, b = model.decode(z), model.decode(z)
    assert a.tobytes() == b.tobytes()


def test_trained_mlp_reconstructs_training_data(plane_mlp):
    model, _, data, report = plane_mlp
    mse = np.mean([np.mean((model.reconstruct(x) - x) ** 2) for x in data])
    assert mse <= 1e-6
    assert report.recon_mse <= 1e-6


def test_encode_left_inverse():
    pair = e3_pair()
    np.testing.assert_array_equal(pair.encode(np.array([2.0, 3.0, 0.0])), [2.0, 3.0])


def test_encode_annihilates_normal_component():
    np.testing.assert_array_equal(e3_pair().encode(np.array([2.0, 3.0, 5.0])), [2.0, 3.0])


def test_normal_sensitive_encoder_is_exact_on_manifold():
    A = orthonormal(6, 3, seed=1)
    pair = LinearPair.normal_sensitive(A)
    rng = np.random.default_rng(0)
    for _ in range(20):
        z = rng.standard_normal(3)
        np.testing.assert_allclose(pair.encode(pair.decode(z)), z, atol=1e-12)
    np.testing.assert_allclose(pair.M @ pair.A, np.eye(3), atol=1e-12)


def test_dimension_mismatch_errors():
    pair = e3_pair()
    with pytest.raises(ShapeError):
        pair.decode(np.zeros(3))
    with pytest.raises(ShapeError):
        pair.encode(np.zeros(4))


# ---------------------------------------------------------------- Jacobians


def test_linear_jacobians_are_constant():
    pair = dct_basis_pair((4, 4, 1), 3)
    rng = np.random.default_rng(0)
    for _ in range(3):
        np.testing.assert_array_equal(pair.decoder_jacobian(rng.standard_normal(3)), pair.A)
        np.testing.assert_array_equal(pair.encoder_jacobian(rng.random(16)), pair.M)


@pytest.mark.parametrize("activation", ["tanh", "softplus"])
def test_mlp_jacobians_match_finite_differences(activation):
    model = random_mlp(activation=activation, seed=3)
    rng = np.random.default_rng(1)
    for _ in range(10):
        z = rng.standard_normal(2)
        x = rng.random(9)
        jd = model.decoder_jacobian(z)
        je = model.encoder_jacobian(x)
        assert np.max(np.abs(jd - central_difference(model.decode_flat, z)) / (np.abs(jd) + 1e-6)) <= 1e-4
        assert rel_frobenius(je, central_difference(model.encode_flat, x)) <= 1e-4


def test_single_tanh_layer_jacobian_at_zero():
    W = np.array([[1.0, 2.0], [-0.5, 0.3], [0.7, -1.1]])
    layer = Layer(W, np.zeros(3), "tanh")
    enc = Layer(np.zeros((2, 3)), np.zeros(2), "identity")
    model = MlpPair([enc], [layer], (3, 1, 1))
    np.testing.assert_allclose(model.decoder_jacobian(np.zeros(2)), W, atol=1e-15)


def test_composed_jacobian_is_identity_on_converged_pair(plane_mlp):
    model, prior, _, _ = plane_mlp
    rng = np.random.default_rng(5)
    for _ in range(10):
        z = prior.sample(rng)
        J = model.encoder_jacobian(model.decode(z)) @ model.decoder_jacobian(z)
        np.testing.assert_allclose(J, np.eye(2), atol=1e-6)


def test_rectifier_is_rejected():
    with pytest.raises(ValueError):
        Layer(np.eye(2), np.zeros(2), "relu")


def test_layer_shapes_must_compose():
    a = Layer(np.zeros((2, 4)), np.zeros(2), "tanh")
    b = Layer(np.zeros((4, 3)), np.zeros(4), "identity")
    with pytest.raises(ShapeError):
        MlpPair([a], [b], (4, 1, 1))


# ---------------------------------------------------------------- training


def test_empty_dataset_rejected():
    with pytest.raises(ValueError):
        train_autoencoder([], LatentPrior("standard-normal", 2), TrainConfig(2, epochs=1))


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_raises_training_error():
    data = [np.full((2, 2, 1), 0.5)] * 4
    cfg = TrainConfig(1, hidden=(), activation="identity", epochs=500, learning_rate=1e6)
    big = [x * 1e200 for x in data]
    with pytest.raises(TrainingError):
        train_autoencoder(big, LatentPrior("standard-normal", 1), cfg)


def test_training_is_deterministic():
    data = [x for x in np.random.default_rng(0).random((8, 2, 2, 1))]
    cfg = TrainConfig(1, hidden=(3,), epochs=50, seed=4)
    prior = LatentPrior("standard-normal", 1)
    m1, _ = train_autoencoder(data, prior, cfg)
    m2, _ = train_autoencoder(data, prior, cfg)
    assert model_to_bytes(m1) == model_to_bytes(m2)


def test_latent_consistency_term_does_not_hurt_a1(tanh_mlp):
    _, prior, data, _ = tanh_mlp
    base = TrainConfig(2, hidden=(32,), epochs=1500, seed=2, latent_weight=0.0)
    with_term = TrainConfig(2, hidden=(32,), epochs=1500, seed=2, latent_weight=0.1)
    a1_plain = check_assumptions(train_autoencoder(data, prior, base)[0], prior).a1_residual
    a1_term = check_assumptions(train_autoencoder(data, prior, with_term)[0], prior).a1_residual
    assert a1_term <= a1_plain


# ---------------------------------------------------------------- assumptions


def test_orthonormal_pair_passes_all_assumptions():
    pair = LinearPair.exact(orthonormal(10, 3))
    rep = check_assumptions(pair, LatentPrior("standard-normal", 3))
    assert rep.a1_residual <= 1e-12
    assert rep.a2_sigma_min == pytest.approx(1.0, abs=1e-12)
    assert rep.all_pass
    assert any("heuristic" in line for line in rep.lines())


def test_rank_deficient_decoder_fails_a2():
    A = np.array([[1.0, 0.0], [2.0, 0.0], [0.0, 0.0]])
    pair = LinearPair(A, np.zeros(3), np.linalg.pinv(A), np.zeros(2), check_inverse=False)
    rep = check_assumptions(pair, LatentPrior("standard-normal", 2))
    assert not rep.pass_a2


def test_trained_pair_meets_a1_tolerance(plane_mlp):
    model, prior, _, _ = plane_mlp
    rep = check_assumptions(model, prior, a1_tol=1e-3)
    assert rep.a1_residual < 1e-3 and rep.pass_a1


def test_check_assumptions_needs_two_samples():
    with pytest.raises(ValueError):
        check_assumptions(e3_pair(), LatentPrior("standard-normal", 2), n_samples=1)


def test_on_manifold_identity_for_fresh_samples(plane_mlp):
    model, prior, _, _ = plane_mlp
    rng = np.random.default_rng(11)
    Z = prior.sample(rng, 1000)
    err = np.linalg.norm(model.encode_flat(model.decode_flat(Z)) - Z, axis=1)
    assert err.max() <= 1e-3


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 12), st.integers(1, 6), st.integers(0, 10_000))
def test_left_inverse_invariant_on_random_orthonormal(n, d, seed):
    d = min(d, n)
    pair = LinearPair.exact(orthonormal(n, d, seed))
    assert np.abs(pair.M @ pair.A - np.eye(d)).max() <= 1e-10


def test_constructor_rejects_non_inverse():
    A = orthonormal(4, 2)
    with pytest.raises(ValueError):
        LinearPair(A, np.zeros(4), 2 * A.T, np.zeros(2))
    with pytest.raises(ValueError, match="bias"):
        LinearPair(A, np.full(4, 0.5), A.T, np.zeros(2))


def test_prior_validation():
    with pytest.raises(ValueError):
        LatentPrior("uniform-box", 2, lo=1.0, hi=1.0)
    with pytest.raises(ValueError):
        LatentPrior("laplace", 2)


def test_pca_pair_recovers_subspace():
    B = orthonormal(16, 3, seed=2)
    rng = np.random.default_rng(0)
    data = [(0.5 + 0.1 * B @ z).reshape(4, 4, 1) for z in rng.standard_normal((40, 3))]
    pair = pca_pair(data, 3)
    P = pair.A @ pair.A.T
    np.testing.assert_allclose(P, B @ B.T, atol=1e-10)
    for x in data[:5]:
        np.testing.assert_allclose(pair.reconstruct(x), x, atol=1e-12)


# ---------------------------------------------------------------- serialization


def test_serialization_round_trip_is_bit_exact(tanh_mlp):
    for model in (tanh_mlp[0], dct_basis_pair((4, 4, 1), 3), random_mlp(activation="softplus")):
        blob = model_to_bytes(model)
        assert blob[:4] == b"RGAE"
        again = model_from_bytes(blob)
        assert model_to_bytes(again) == blob
        z = np.full(model.latent_dim, 0.1)
        assert again.decode(z).tobytes() == model.decode(z).tobytes()


def test_serialization_rejects_damage():
    blob = model_to_bytes(dct_basis_pair((4, 4, 1), 2))
    with pytest.raises(ModelFormatError, match="magic"):
        model_from_bytes(b"XXXX" + blob[4:])
    with pytest.raises(ModelFormatError, match="truncated"):
        model_from_bytes(blob[:-3])
    with pytest.raises(ModelFormatError, match="trailing"):
        model_from_bytes(blob + b"\0")
