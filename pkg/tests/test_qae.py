"""QAE tests: assembly, SWAP-test scoring, training, calibration."""
import numpy as np
import pytest

from qaedet.ansatz import AnsatzSpec, build_ansatz
from qaedet.encode import (AMPLITUDE, DENSE_ANGLE, EncodingSpec, ScaledSample,
                           encode_sample, scale_features)
from qaedet.qae import (EXACT, QaeError, QaeLayout, QaeModel, ShotMode,
                        TrainConfig, assemble_circuit, batch_cost,
                        calibrate_threshold, classify, default_layout,
                        prepare_state, score_samples, similarity, train)
from qaedet.simcore import run_circuit
from qaedet.synth import SyntheticSpec, make_synthetic


def dense_model(params=None, seed=0):
    enc = EncodingSpec(DENSE_ANGLE, 8)
    ans = AnsatzSpec("RealAmplitudes", 4, reps=1, seed=seed)
    layout = default_layout(enc)
    if params is None:
        params = np.zeros(ans.n_params)
    return QaeModel(enc, ans, layout, params)


# ---------------------------------------------------------------------------
# layout and assembly
# ---------------------------------------------------------------------------

def test_dense_angle_assembly_is_seven_qubits():
    """4 data + 2 reference + 1 auxiliary qubits for 8 dense-angle features."""
    enc = EncodingSpec(DENSE_ANGLE, 8)
    ans = AnsatzSpec("RealAmplitudes", 4, reps=1)
    layout = default_layout(enc)
    circ = assemble_circuit(enc, ans, layout)
    assert circ.n_qubits == 7
    assert layout.trash_indices == (2, 3)
    assert layout.reference_indices == (4, 5)
    assert layout.aux_index == 6


def test_amplitude_assembly_is_five_qubits():
    """ceil(log2(8)) = 3 data qubits, 1 trash -> 1 reference + 1 aux."""
    enc = EncodingSpec(AMPLITUDE, 8)
    layout = default_layout(enc)
    ans = AnsatzSpec("RealAmplitudes", 3, reps=1)
    circ = assemble_circuit(enc, ans, layout)
    assert circ.n_qubits == 5
    assert layout.n_trash == 1


def test_assembly_ends_with_hadamard_on_aux():
    enc = EncodingSpec(DENSE_ANGLE, 8)
    layout = default_layout(enc)
    circ = assemble_circuit(enc, AnsatzSpec("RealAmplitudes", 4), layout)
    last = circ.gates[-1]
    assert last.kind == "H" and last.targets == (layout.aux_index,)
    swaps = [g for g in circ.gates if g.kind == "CSWAP"]
    assert len(swaps) == layout.n_trash


def test_assembly_rejects_mismatched_widths():
    enc = EncodingSpec(DENSE_ANGLE, 8)
    layout = default_layout(enc)
    with pytest.raises(QaeError):
        assemble_circuit(enc, AnsatzSpec("RealAmplitudes", 5), layout)


def test_layout_validation():
    with pytest.raises(QaeError):
        QaeLayout(n_data=2, n_latent=1, n_trash=1, trash_indices=(1,),
                  reference_indices=(1,), aux_index=3)
    with pytest.raises(QaeError):
        QaeLayout(n_data=2, n_latent=2, n_trash=1, trash_indices=(1,),
                  reference_indices=(2,), aux_index=3)
    with pytest.raises(QaeError):
        QaeLayout.standard(4, 4)  # no latent qubit left


def test_default_trash_counts():
    assert default_layout(EncodingSpec(DENSE_ANGLE, 8)).n_trash == 2
    assert default_layout(EncodingSpec(AMPLITUDE, 8)).n_trash == 1
    assert default_layout(EncodingSpec("Angle", 8)).n_trash == 2
    assert default_layout(EncodingSpec("EfficientSU2", 8, n_qubits=2)).n_trash == 1


# ---------------------------------------------------------------------------
# similarity / SWAP test
# ---------------------------------------------------------------------------

def test_perfect_compression_scores_zero():
    """Trash qubits already |0...0>: S = 1, A = 0."""
    model = dense_model()
    result = similarity(model, ScaledSample(np.zeros(8), DENSE_ANGLE))
    assert result.similarity == pytest.approx(1.0, abs=1e-12)
    assert result.anomaly == pytest.approx(0.0, abs=1e-12)
    assert result.shots_used is None


def test_orthogonal_trash_scores_one():
    """Trash state |11> against |00>: p1 = 1/2, S = 0, A = 1."""
    model = dense_model()
    vals = np.zeros(8)
    vals[4] = np.pi  # Ry(pi) on trash qubit 2
    vals[6] = np.pi  # Ry(pi) on trash qubit 3
    result = similarity(model, ScaledSample(vals, DENSE_ANGLE))
    assert result.similarity == pytest.approx(0.0, abs=1e-12)
    assert result.anomaly == pytest.approx(1.0, abs=1e-12)


def test_exact_similarity_matches_partial_trace_oracle():
    """Exact S equals <0..0| rho_trash |0..0> computed by partial trace."""
    rng = np.random.default_rng(44)
    enc = EncodingSpec(DENSE_ANGLE, 8)
    ans = AnsatzSpec("RealAmplitudes", 4, reps=1)
    layout = default_layout(enc)
    for trial in range(10):
        params = rng.uniform(-np.pi, np.pi, ans.n_params)
        model = QaeModel(enc, ans, layout, params)
        sample = ScaledSample(rng.uniform(0, np.pi, 8), DENSE_ANGLE)
        result = similarity(model, sample)

        # oracle: run encoding + ansatz on the data register only, then
        # trace out the latent qubits and read the |00> element
        data_state = encode_sample(sample, enc)
        data_state = run_circuit(build_ansatz(ans), params, data_state)
        psi = data_state.amplitudes.reshape(1 << layout.n_trash,
                                            1 << layout.n_latent)
        fidelity = float(np.sum(np.abs(psi[0]) ** 2))
        assert result.similarity == pytest.approx(fidelity, abs=1e-9)


def test_sampled_mode_converges_to_exact():
    rng = np.random.default_rng(7)
    model = dense_model(params=rng.uniform(-np.pi, np.pi, 8))
    sample = ScaledSample(rng.uniform(0, np.pi, 8), DENSE_ANGLE)
    exact = similarity(model, sample).similarity
    shots = 20000
    sampled = similarity(model, sample, ShotMode(shots=shots, seed=3))
    p1 = (1 - exact) / 2
    tol = 4 * np.sqrt(max(p1 * (1 - p1), 1e-12) / shots)
    assert abs(sampled.similarity - exact) <= 2 * tol
    assert sampled.shots_used == shots


def test_anomaly_always_clamped_to_unit_interval():
    rng = np.random.default_rng(15)
    model = dense_model(params=rng.uniform(-np.pi, np.pi, 8))
    for i in range(10):
        sample = ScaledSample(rng.uniform(0, np.pi, 8), DENSE_ANGLE)
        r = similarity(model, sample, ShotMode(shots=64, seed=i))
        assert 0.0 <= r.anomaly <= 1.0


# ---------------------------------------------------------------------------
# batch cost
# ---------------------------------------------------------------------------

def test_batch_cost_zero_for_perfectly_compressed_batch():
    model = dense_model()
    batch = [ScaledSample(np.zeros(8), DENSE_ANGLE) for _ in range(4)]
    cost = batch_cost(model.params, batch, model.encoding, model.ansatz,
                      model.layout)
    assert cost == pytest.approx(0.0, abs=1e-12)


def test_batch_cost_single_sample_equals_its_anomaly():
    rng = np.random.default_rng(2)
    model = dense_model(params=rng.uniform(-np.pi, np.pi, 8))
    sample = ScaledSample(rng.uniform(0, np.pi, 8), DENSE_ANGLE)
    cost = batch_cost(model.params, [sample], model.encoding, model.ansatz,
                      model.layout)
    assert cost == pytest.approx(similarity(model, sample).anomaly, abs=1e-12)


def test_batch_cost_is_mean_of_costs():
    rng = np.random.default_rng(3)
    model = dense_model(params=rng.uniform(-np.pi, np.pi, 8))
    s1 = ScaledSample(rng.uniform(0, np.pi, 8), DENSE_ANGLE)
    s2 = ScaledSample(rng.uniform(0, np.pi, 8), DENSE_ANGLE)
    c1 = batch_cost(model.params, [s1], model.encoding, model.ansatz, model.layout)
    c2 = batch_cost(model.params, [s2], model.encoding, model.ansatz, model.layout)
    c12 = batch_cost(model.params, [s1, s2], model.encoding, model.ansatz,
                     model.layout)
    assert c12 == pytest.approx((c1 + c2) / 2, abs=1e-12)


def test_batch_cost_rejects_empty_batch():
    model = dense_model()
    with pytest.raises(QaeError):
        batch_cost(model.params, [], model.encoding, model.ansatz, model.layout)


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

def test_training_on_precompressed_data_stays_near_zero():
    """Samples encoding to |0...0> have trash qubits at |00>; with zero
    init the ansatz acts trivially on them, so the cost starts and stays
    near zero."""
    enc = EncodingSpec(DENSE_ANGLE, 8)
    ans = AnsatzSpec("RealAmplitudes", 4, reps=1)
    dataset = [ScaledSample(np.zeros(8), DENSE_ANGLE) for _ in range(16)]
    model = train(dataset, enc, ans,
                  config=TrainConfig(iterations=30, seed=1, init="zeros"))
    trace = model.train_meta["loss_trace"]
    assert model.train_meta["final_cost"] <= trace[0] + 1e-12
    assert model.train_meta["final_cost"] < 1e-9


def test_training_never_ends_above_initial_cost():
    """Latent-only excitations leak into trash through the CNOT chain at
    zero parameters; training must still end at or below the initial cost."""
    rng = np.random.default_rng(5)
    dataset = []
    for _ in range(32):
        vals = np.zeros(8)
        vals[:4] = rng.uniform(0, np.pi, 4)
        dataset.append(ScaledSample(vals, DENSE_ANGLE))
    model = train(dataset, EncodingSpec(DENSE_ANGLE, 8),
                  AnsatzSpec("RealAmplitudes", 4, reps=1),
                  config=TrainConfig(iterations=30, seed=1, init="zeros"))
    trace = model.train_meta["loss_trace"]
    assert model.train_meta["final_cost"] <= trace[0] + 1e-12


def test_training_deterministic_under_seed():
    rng = np.random.default_rng(8)
    dataset = [ScaledSample(rng.uniform(0, np.pi, 8), DENSE_ANGLE)
               for _ in range(20)]
    enc = EncodingSpec(DENSE_ANGLE, 8)
    ans = AnsatzSpec("RealAmplitudes", 4, reps=1)
    m1 = train(dataset, enc, ans, config=TrainConfig(iterations=25, seed=4))
    m2 = train(dataset, enc, ans, config=TrainConfig(iterations=25, seed=4))
    assert np.array_equal(m1.params, m2.params)
    assert m1.train_meta["loss_trace"] == m2.train_meta["loss_trace"]


def test_training_on_synthetic_cluster_regression_bound():
    """Frozen regression bound: final batch cost < 0.15 on the benchmark
    synthetic profile with DenseAngle + RealAmplitudes(reps=1)."""
    train_df, _ = make_synthetic(SyntheticSpec(seed=0))
    enc = EncodingSpec(DENSE_ANGLE, 8)
    ans = AnsatzSpec("RealAmplitudes", 4, reps=1)
    samples, _ = scale_features(train_df.to_numpy(), enc)
    model = train(samples, enc, ans, config=TrainConfig(seed=0))
    assert model.train_meta["final_cost"] < 0.15


def test_training_best_so_far_trace_monotone():
    rng = np.random.default_rng(13)
    dataset = [ScaledSample(rng.uniform(0, np.pi, 8), DENSE_ANGLE)
               for _ in range(16)]
    model = train(dataset, EncodingSpec(DENSE_ANGLE, 8),
                  AnsatzSpec("RealAmplitudes", 4, reps=1),
                  config=TrainConfig(iterations=40, seed=2))
    running = np.minimum.accumulate(model.train_meta["loss_trace"])
    assert np.all(np.diff(running) <= 0)
    assert model.train_meta["final_cost"] == pytest.approx(running[-1])


def test_training_rejects_empty_dataset():
    with pytest.raises(QaeError):
        train([], EncodingSpec(DENSE_ANGLE, 8),
              AnsatzSpec("RealAmplitudes", 4, reps=1))


def test_optimizer_failure_surfaces_best_so_far(monkeypatch):
    """A non-finite objective aborts the optimizer; training keeps the best
    parameters found and records a diagnostic."""
    import qaedet.qae as qae_module

    calls = {"n": 0}
    real_batch_cost = qae_module.batch_cost

    def flaky(*args, **kwargs):
        calls["n"] += 1
        if calls["n"] > 12:
            return float("nan")
        return real_batch_cost(*args, **kwargs)

    monkeypatch.setattr(qae_module, "batch_cost", flaky)
    rng = np.random.default_rng(6)
    dataset = [ScaledSample(rng.uniform(0, np.pi, 8), DENSE_ANGLE)
               for _ in range(8)]
    model = train(dataset, EncodingSpec(DENSE_ANGLE, 8),
                  AnsatzSpec("RealAmplitudes", 4, reps=1),
                  config=TrainConfig(iterations=40, seed=3))
    assert "diagnostic" in model.train_meta
    assert model.train_meta["optimizer_status"] == "aborted"
    assert np.all(np.isfinite(model.params))
    assert np.isfinite(model.train_meta["final_cost"])


# ---------------------------------------------------------------------------
# threshold calibration and classification
# ---------------------------------------------------------------------------

def test_calibrate_constant_scores():
    model = dense_model()
    assert calibrate_threshold(model, [0.3, 0.3, 0.3]).threshold == pytest.approx(0.3)


def test_calibrate_two_point_scores():
    model = dense_model()
    assert calibrate_threshold(model, [0.0, 1.0]).threshold == pytest.approx(1.5)


def test_calibrate_gaussian_draws():
    """Threshold on N(0.1, 0.02^2) draws recomputes exactly and lands near
    0.14."""
    rng = np.random.default_rng(77)
    scores = rng.normal(0.1, 0.02, size=1000)
    model = calibrate_threshold(dense_model(), scores)
    expected = scores.mean() + 2 * scores.std(ddof=0)
    assert model.threshold == pytest.approx(expected, abs=1e-12)
    assert abs(model.threshold - 0.14) < 0.005


def test_classify_boundary_is_normal():
    model = calibrate_threshold(dense_model(), [0.0, 0.0])
    # A == threshold == 0 must classify as normal (strict inequality)
    label, score = classify(model, ScaledSample(np.zeros(8), DENSE_ANGLE))
    assert label == "normal"
    assert score == pytest.approx(model.threshold, abs=1e-12)


def test_classify_extremes():
    model = dense_model()
    model = calibrate_threshold(model, [0.05, 0.1, 0.15])
    vals = np.zeros(8)
    label, score = classify(model, ScaledSample(vals, DENSE_ANGLE))
    assert label == "normal" and score < model.threshold
    vals2 = np.zeros(8)
    vals2[4] = vals2[6] = np.pi
    label2, score2 = classify(model, ScaledSample(vals2, DENSE_ANGLE))
    assert label2 == "anomalous" and score2 > model.threshold


def test_classify_requires_calibration():
    with pytest.raises(QaeError):
        classify(dense_model(), ScaledSample(np.zeros(8), DENSE_ANGLE))


def test_score_samples_shot_mode_deterministic():
    rng = np.random.default_rng(21)
    model = dense_model(params=rng.uniform(-np.pi, np.pi, 8))
    samples = [ScaledSample(rng.uniform(0, np.pi, 8), DENSE_ANGLE)
               for _ in range(5)]
    a = score_samples(model, samples, ShotMode(shots=256, seed=5))
    b = score_samples(model, samples, ShotMode(shots=256, seed=5))
    assert np.array_equal(a, b)
    c = score_samples(model, samples, ShotMode(shots=256, seed=6))
    assert not np.array_equal(a, c)


def test_prepare_state_embeds_data_register():
    enc = EncodingSpec(DENSE_ANGLE, 8)
    layout = default_layout(enc)
    sample = ScaledSample(np.linspace(0, np.pi, 8), DENSE_ANGLE)
    full = prepare_state(sample, enc, layout)
    data = encode_sample(sample, enc)
    assert np.array_equal(full.amplitudes[:16], data.amplitudes)
    assert np.all(full.amplitudes[16:] == 0)
