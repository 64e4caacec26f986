"""Encoding tests: scaling, the four techniques, and their identities."""
import math

import numpy as np
import pytest

from qaedet.encode import (AMPLITUDE, ANGLE, DENSE_ANGLE, EFFICIENT_SU2,
                           EncodingError, EncodingSpec, FeatureScaler,
                           ScaledSample, encode_sample, scale_features)
from qaedet.simcore import marginal_prob_one


def test_qubit_count_formulas():
    """Derived qubit counts over feature counts 1..24."""
    for nf in range(1, 25):
        assert EncodingSpec(ANGLE, nf).n_qubits == nf
        assert EncodingSpec(DENSE_ANGLE, nf).n_qubits == math.ceil(nf / 2)
        if nf >= 2:
            assert EncodingSpec(AMPLITUDE, nf).n_qubits == math.ceil(math.log2(nf))
        su2 = EncodingSpec(EFFICIENT_SU2, nf, su2_reps=2)
        assert 2 * su2.n_qubits * (su2.su2_reps + 1) >= nf


def test_efficient_su2_eight_features_two_qubits():
    spec = EncodingSpec(EFFICIENT_SU2, 8, su2_reps=1)
    assert spec.n_qubits == 2


def test_efficient_su2_capacity_validated():
    with pytest.raises(EncodingError):
        EncodingSpec(EFFICIENT_SU2, 24, n_qubits=2, su2_reps=1)


def test_amplitude_single_feature_rejected():
    with pytest.raises(EncodingError):
        EncodingSpec(AMPLITUDE, 1)


def test_explicit_qubits_must_match_formula():
    with pytest.raises(EncodingError):
        EncodingSpec(ANGLE, 4, n_qubits=3)


# ---------------------------------------------------------------------------
# scaling
# ---------------------------------------------------------------------------

def test_minmax_midpoint_maps_to_half_pi():
    spec = EncodingSpec(ANGLE, 1)
    train = np.array([[0.0], [10.0]])
    samples, scaler = scale_features(train, spec)
    out = scaler.transform(np.array([[5.0]]))
    assert out[0].values[0] == pytest.approx(np.pi / 2)


def test_amplitude_three_four_five():
    spec = EncodingSpec(AMPLITUDE, 2)
    samples, _ = scale_features(np.array([[3.0, 4.0]]), spec)
    assert np.allclose(samples[0].values, [0.6, 0.8])


def test_out_of_range_test_value_clamped():
    spec = EncodingSpec(ANGLE, 1)
    _, scaler = scale_features(np.array([[0.0], [10.0]]), spec)
    out = scaler.transform(np.array([[12.0], [-3.0]]))
    assert out[0].values[0] == pytest.approx(np.pi)
    assert out[1].values[0] == pytest.approx(0.0)


def test_constant_column_degenerates_to_clamp_limit():
    spec = EncodingSpec(ANGLE, 1)
    _, scaler = scale_features(np.array([[2.0], [2.0]]), spec)
    out = scaler.transform(np.array([[2.0], [5.0], [-1.0]]))
    assert out[0].values[0] == 0.0
    assert out[1].values[0] == pytest.approx(np.pi)
    assert out[2].values[0] == 0.0


def test_zero_amplitude_row_flagged(caplog):
    spec = EncodingSpec(AMPLITUDE, 4)
    with caplog.at_level("WARNING"):
        samples, _ = scale_features(np.array([[0.0, 0, 0, 0]]), spec)
    assert samples[0].flags == ("zero_input",)
    assert np.allclose(samples[0].values, [1, 0, 0, 0])
    assert "all-zero" in caplog.text


def test_scale_rejects_non_finite():
    spec = EncodingSpec(ANGLE, 2)
    with pytest.raises(EncodingError):
        scale_features(np.array([[1.0, np.nan]]), spec)


def test_scale_rejects_empty():
    spec = EncodingSpec(ANGLE, 2)
    with pytest.raises(EncodingError):
        scale_features(np.empty((0, 2)), spec)


def test_test_split_reuses_train_statistics():
    spec = EncodingSpec(ANGLE, 1)
    _, scaler = scale_features(np.array([[0.0], [4.0]]), spec)
    before = (scaler.col_min.copy(), scaler.col_max.copy())
    scaler.transform(np.array([[100.0]]))
    assert np.array_equal(scaler.col_min, before[0])
    assert np.array_equal(scaler.col_max, before[1])


# ---------------------------------------------------------------------------
# encoding actions
# ---------------------------------------------------------------------------

def test_amplitude_basis_vector():
    spec = EncodingSpec(AMPLITUDE, 8)
    sample = ScaledSample(np.array([1.0, 0, 0, 0, 0, 0, 0, 0]), AMPLITUDE)
    state = encode_sample(sample, spec)
    assert abs(state.amplitudes[0]) == pytest.approx(1.0)


def test_angle_all_zeros_is_ground_state():
    spec = EncodingSpec(ANGLE, 8)
    state = encode_sample(ScaledSample(np.zeros(8), ANGLE), spec)
    assert abs(state.amplitudes[0]) == pytest.approx(1.0)


def test_dense_angle_pi_on_first_qubit():
    """Ry(pi) then Rz(0) on qubit 0 puts probability 1 on basis index 1."""
    spec = EncodingSpec(DENSE_ANGLE, 8)
    vals = np.zeros(8)
    vals[0] = np.pi
    state = encode_sample(ScaledSample(vals, DENSE_ANGLE), spec)
    assert state.probabilities()[0b0001] == pytest.approx(1.0, abs=1e-12)


def test_efficient_su2_zeros_is_ground_state():
    spec = EncodingSpec(EFFICIENT_SU2, 8, su2_reps=1)
    state = encode_sample(ScaledSample(np.zeros(8), EFFICIENT_SU2), spec)
    assert abs(state.amplitudes[0]) == pytest.approx(1.0, abs=1e-12)


def test_dense_angle_odd_feature_count_pads_final_rz():
    spec = EncodingSpec(DENSE_ANGLE, 3)
    assert spec.n_qubits == 2
    state = encode_sample(ScaledSample(np.array([0.3, 0.4, 0.9]), DENSE_ANGLE), spec)
    assert abs(np.sum(np.abs(state.amplitudes) ** 2) - 1.0) < 1e-10


def test_encode_length_mismatch():
    spec = EncodingSpec(ANGLE, 3)
    with pytest.raises(EncodingError):
        encode_sample(ScaledSample(np.zeros(2), ANGLE), spec)


def test_amplitude_norm_violation_rejected():
    with pytest.raises(EncodingError):
        ScaledSample(np.array([1.0, 1.0]), AMPLITUDE)


def test_angle_domain_violation_rejected():
    with pytest.raises(EncodingError):
        ScaledSample(np.array([3.5]), ANGLE)


# ---------------------------------------------------------------------------
# identities
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("technique,nf", [(ANGLE, 5), (DENSE_ANGLE, 8),
                                          (AMPLITUDE, 8), (EFFICIENT_SU2, 8)])
def test_encoded_states_have_unit_norm(technique, nf):
    rng = np.random.default_rng(17)
    spec = EncodingSpec(technique, nf, su2_reps=1) \
        if technique == EFFICIENT_SU2 else EncodingSpec(technique, nf)
    for _ in range(20):
        if technique == AMPLITUDE:
            v = rng.normal(size=nf)
            v /= np.linalg.norm(v)
        else:
            v = rng.uniform(0, np.pi, nf)
        state = encode_sample(ScaledSample(v, technique), spec)
        assert abs(np.sum(np.abs(state.amplitudes) ** 2) - 1.0) < 1e-10


def test_amplitude_round_trip_exact():
    """The first n_features amplitudes recover the scaled sample exactly."""
    rng = np.random.default_rng(23)
    spec = EncodingSpec(AMPLITUDE, 6)
    for _ in range(20):
        v = rng.normal(size=6)
        v /= np.linalg.norm(v)
        state = encode_sample(ScaledSample(v, AMPLITUDE), spec)
        assert np.array_equal(state.amplitudes[:6].real, v)
        assert np.all(state.amplitudes[6:] == 0)


def test_angle_marginal_law():
    """marginal_prob_one(qubit j) = sin^2(x_j / 2) within 1e-10."""
    rng = np.random.default_rng(5)
    spec = EncodingSpec(ANGLE, 4)
    for _ in range(100):
        x = rng.uniform(0, np.pi, 4)
        state = encode_sample(ScaledSample(x, ANGLE), spec)
        for j in range(4):
            assert marginal_prob_one(state, j) == pytest.approx(
                np.sin(x[j] / 2) ** 2, abs=1e-10)


def test_dense_angle_rz_invisible_at_poles():
    """When the Ry angle sits at 0 or pi, the paired Rz angle changes no
    measurement probability."""
    rng = np.random.default_rng(9)
    spec = EncodingSpec(DENSE_ANGLE, 4)
    for pole in (0.0, np.pi):
        base_vals = np.array([pole, 0.0, rng.uniform(0, np.pi), rng.uniform(0, np.pi)])
        base = encode_sample(ScaledSample(base_vals, DENSE_ANGLE), spec)
        for _ in range(10):
            vals = base_vals.copy()
            vals[1] = rng.uniform(0, np.pi)  # the Rz partner of the pole qubit
            state = encode_sample(ScaledSample(vals, DENSE_ANGLE), spec)
            assert np.allclose(state.probabilities(), base.probabilities(),
                               atol=1e-12)
