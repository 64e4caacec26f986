"""A tour of the statevector simulator.

Builds a few small circuits, inspects amplitudes and marginals, and
samples measurements with and without noise.
"""
import numpy as np

from qaedet.simcore import (Circuit, NoiseModel, Statevector, cnot, h,
                            marginal_prob_one, measure_qubit, run_circuit, ry,
                            sample_one_counts)

# --- single-qubit rotations -------------------------------------------------
state = Statevector.zero(1)
print("|0> amplitudes:", state.amplitudes)

rotated = run_circuit(Circuit(1, [ry(0, np.pi / 3)]))
print("Ry(pi/3)|0> probabilities:", np.round(rotated.probabilities(), 4))
print("expected sin^2(pi/6) =", round(np.sin(np.pi / 6) ** 2, 4))

# --- entanglement: the Bell pair ---------------------------------------------
bell = run_circuit(Circuit(2, [h(0), cnot(0, 1)]))
print("\nBell state probabilities:", np.round(bell.probabilities(), 3))
print("marginal P(q0=1):", marginal_prob_one(bell, 0))

# --- sampling ----------------------------------------------------------------
shots = 10_000
ones = measure_qubit(bell, 0, shots, rng_seed=1)
print(f"\n{shots} shots on qubit 0 -> {ones} ones (expect ~{shots // 2})")

# --- noise: readout flips and per-gate depolarizing --------------------------
noise = NoiseModel(readout_flip_prob=0.05, depolarizing_prob=0.01)
circ = Circuit(2, [ry(0, 0.2), cnot(0, 1)])
clean = sample_one_counts(circ, None, 1, shots, rng_seed=2)
noisy = sample_one_counts(circ, None, 1, shots, noise=noise, rng_seed=2)
print(f"\nnearly-|0> qubit, {shots} shots: clean {clean} ones, noisy {noisy} ones")
print("readout flips and stray Paulis push counts up, as expected")
