"""Classical autoencoder tests: training, scoring, latent extraction."""
import numpy as np
import pytest

from qaedet.cae import (CaeArch, CaeError, CaeModel, CaeTrainConfig,
                        cae_latent, cae_score, cae_scores, cae_train,
                        calibrate_threshold, init_model, reconstruct)


def make_blob(n=200, d=8, seed=0):
    rng = np.random.default_rng(seed)
    w = rng.normal(size=(n, 3))
    mix = rng.normal(size=(3, d))
    return 0.5 + 0.1 * (w @ mix) + 0.02 * rng.normal(size=(n, d))


# ---------------------------------------------------------------------------
# architecture
# ---------------------------------------------------------------------------

def test_decoder_mirrors_encoder():
    arch = CaeArch((24, 16, 8))
    assert arch.decoder_widths == (8, 16, 24)
    assert arch.layer_widths == (24, 16, 8, 16, 24)


def test_latent_wider_than_input_rejected():
    with pytest.raises(CaeError):
        CaeArch((4, 8))


def test_model_shape_validation():
    arch = CaeArch((4, 2))
    model = init_model(arch)
    for w, widths in zip(model.weights, [(4, 2), (2, 4)]):
        assert w.shape == widths
    with pytest.raises(CaeError):
        CaeModel(arch=arch, weights=model.weights[:1], biases=model.biases)


def test_mirror_invariant_for_every_arch():
    for widths in [(8, 4), (24, 16, 8), (10, 7, 5, 3)]:
        arch = CaeArch(widths)
        assert arch.layer_widths == widths + tuple(reversed(widths))[1:]


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

def test_identity_sized_linear_net_trains_to_zero():
    """latent = input with linear activation can represent the identity."""
    data = make_blob(n=100, d=4, seed=1)
    arch = CaeArch((4, 4), activation="linear", seed=0)
    model = cae_train(data, arch, config=CaeTrainConfig(epochs=300, patience=300,
                                                        learning_rate=2e-2, seed=0))
    assert model.train_meta["final_loss"] < 5e-3


def test_training_deterministic_under_seed():
    data = make_blob(seed=2)
    arch = CaeArch((8, 6, 4), seed=3)
    m1 = cae_train(data, arch, config=CaeTrainConfig(epochs=10, seed=5))
    m2 = cae_train(data, arch, config=CaeTrainConfig(epochs=10, seed=5))
    for w1, w2 in zip(m1.weights, m2.weights):
        assert np.array_equal(w1, w2)


def test_training_reduces_loss():
    """Regression bound frozen from a reference run: training improves on
    the initial reconstruction error."""
    data = make_blob(seed=4)
    arch = CaeArch((8, 6, 4), seed=0)
    initial = float(np.mean(np.abs(reconstruct(init_model(arch), data) - data)))
    model = cae_train(data, arch, config=CaeTrainConfig(epochs=30, seed=0))
    assert model.train_meta["final_loss"] < initial
    assert model.train_meta["loss_trace"][-1] <= model.train_meta["loss_trace"][0]


def test_training_width_mismatch():
    with pytest.raises(CaeError):
        cae_train(make_blob(d=8), CaeArch((6, 3)))


# ---------------------------------------------------------------------------
# scoring
# ---------------------------------------------------------------------------

def test_perfect_reconstruction_scores_zero():
    arch = CaeArch((3, 3), activation="linear")
    model = init_model(arch)
    # identity weights reconstruct exactly
    model.weights = [np.eye(3), np.eye(3)]
    model.biases = [np.zeros(3), np.zeros(3)]
    assert cae_score(model, np.array([0.1, 0.2, 0.3])) == pytest.approx(0.0)


def test_constant_offset_scores_offset():
    arch = CaeArch((3, 3), activation="linear")
    model = init_model(arch)
    model.weights = [np.eye(3), np.eye(3)]
    model.biases = [np.zeros(3), np.full(3, 0.1)]
    assert cae_score(model, np.array([0.4, 0.5, 0.6])) == pytest.approx(0.1)


def test_score_matches_manual_forward_pass():
    """Independent oracle: hand-computed forward pass plus MAE."""
    rng = np.random.default_rng(12)
    arch = CaeArch((4, 3, 2), seed=7)
    model = init_model(arch)
    x = rng.normal(size=4)

    a = x
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = a @ w + b
        a = z if i == len(model.weights) - 1 else np.maximum(z, 0.0)
    expected = float(np.mean(np.abs(a - x)))
    assert cae_score(model, x) == pytest.approx(expected, abs=1e-12)


def test_cae_scores_vectorized_matches_loop():
    data = make_blob(n=10, d=8, seed=3)
    model = init_model(CaeArch((8, 6, 4), seed=1))
    batch = cae_scores(model, data)
    singles = [cae_score(model, row) for row in data]
    assert np.allclose(batch, singles, atol=1e-12)


# ---------------------------------------------------------------------------
# latent extraction
# ---------------------------------------------------------------------------

def test_latent_shape():
    model = init_model(CaeArch((24, 16, 8)))
    data = np.zeros((5, 24))
    assert cae_latent(model, data).shape == (5, 8)


def test_latent_zero_weights_is_activation_of_zero():
    model = init_model(CaeArch((4, 2)))
    model.weights = [np.zeros_like(w) for w in model.weights]
    model.biases = [np.zeros_like(b) for b in model.biases]
    out = cae_latent(model, np.ones((3, 4)))
    assert np.array_equal(out, np.zeros((3, 2)))


def test_latent_equals_truncated_forward_pass():
    rng = np.random.default_rng(6)
    model = init_model(CaeArch((6, 4, 3), seed=2))
    data = rng.normal(size=(7, 6))
    a = data
    for i in range(2):  # encoder half
        a = np.maximum(a @ model.weights[i] + model.biases[i], 0.0)
    assert np.allclose(cae_latent(model, data), a, atol=1e-12)


# ---------------------------------------------------------------------------
# thresholding and translation detectability
# ---------------------------------------------------------------------------

def test_threshold_rule_shared_with_quantum_side():
    model = init_model(CaeArch((4, 2)))
    model = calibrate_threshold(model, [0.0, 1.0])
    assert model.threshold == pytest.approx(1.5)


def test_shift_increases_score_after_training():
    """A constant shift applied to a well-reconstructed sample must raise
    its score."""
    data = make_blob(n=150, d=6, seed=9)
    arch = CaeArch((6, 4), seed=1)
    model = cae_train(data, arch, config=CaeTrainConfig(epochs=200, patience=200,
                                                        learning_rate=2e-2, seed=1))
    sample = data[0]
    base = cae_score(model, sample)
    shifted = cae_score(model, sample + 0.5)
    assert shifted > base
