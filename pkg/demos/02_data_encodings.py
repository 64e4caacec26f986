"""The four classical-to-quantum encodings side by side.

Each technique maps an 8-feature row onto a quantum state with a
different qubit budget; this script shows the qubit counts and a few of
their characteristic identities.
"""
import numpy as np

from qaedet.encode import (AMPLITUDE, ANGLE, DENSE_ANGLE, EFFICIENT_SU2,
                           EncodingSpec, ScaledSample, encode_sample,
                           scale_features)
from qaedet.simcore import marginal_prob_one

rng = np.random.default_rng(0)
raw = rng.normal(size=(200, 8)) * [3, 1, 5, 2, 1, 1, 4, 2]

print("technique      qubits  (8 features)")
for technique in (ANGLE, DENSE_ANGLE, AMPLITUDE, EFFICIENT_SU2):
    spec = EncodingSpec(technique, 8)
    print(f"{technique:13s}  {spec.n_qubits}")

# --- angle encoding: one rotation per feature --------------------------------
spec = EncodingSpec(ANGLE, 8)
samples, scaler = scale_features(raw, spec)
state = encode_sample(samples[0], spec)
print("\nangle encoding marginals vs sin^2(x/2):")
for q in range(3):
    x = samples[0].values[q]
    print(f"  qubit {q}: {marginal_prob_one(state, q):.6f} vs {np.sin(x / 2) ** 2:.6f}")

# --- dense-angle: two features per qubit --------------------------------------
spec = EncodingSpec(DENSE_ANGLE, 8)
samples, _ = scale_features(raw, spec)
print(f"\ndense-angle packs 8 features on {spec.n_qubits} qubits "
      "(Ry for even slots, Rz for odd)")

# --- amplitude: features become the state vector itself ----------------------
spec = EncodingSpec(AMPLITUDE, 8)
samples, _ = scale_features(raw, spec)
state = encode_sample(samples[0], spec)
print("\namplitude encoding on", spec.n_qubits, "qubits; round-trip exact:",
      bool(np.array_equal(state.amplitudes[:8].real, samples[0].values)))

# --- hardware-efficient layered encoding --------------------------------------
spec = EncodingSpec(EFFICIENT_SU2, 8, su2_reps=1)
print(f"\nlayered Ry/Rz encoding fits 8 features on {spec.n_qubits} qubits "
      f"({spec.rotation_slots} rotation slots)")
zeros = encode_sample(ScaledSample(np.zeros(8), EFFICIENT_SU2), spec)
print("all-zero features stay in the ground state:",
      bool(abs(zeros.amplitudes[0]) > 1 - 1e-12))
