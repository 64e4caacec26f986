"""Ansatz construction tests."""
import numpy as np
import pytest

from qaedet.ansatz import (AnsatzSpec, PAULI_TWO_DESIGN, REAL_AMPLITUDES,
                           build_ansatz, entanglement_pairs)
from qaedet.simcore import run_circuit


def test_entanglement_linear():
    assert entanglement_pairs(4, "linear") == [(0, 1), (1, 2), (2, 3)]


def test_entanglement_reverse_linear():
    assert entanglement_pairs(4, "reverse_linear") == [(2, 3), (1, 2), (0, 1)]


def test_entanglement_full():
    assert entanglement_pairs(3, "full") == [(0, 1), (0, 2), (1, 2)]


def test_entanglement_single_qubit_empty():
    assert entanglement_pairs(1, "linear") == []


def test_entanglement_unknown_pattern():
    with pytest.raises(ValueError):
        entanglement_pairs(3, "ring")


def test_real_amplitudes_param_counts():
    assert build_ansatz(AnsatzSpec(REAL_AMPLITUDES, 4, reps=1)).n_params == 8
    assert build_ansatz(AnsatzSpec(REAL_AMPLITUDES, 4, reps=3)).n_params == 16


@pytest.mark.parametrize("kind", [REAL_AMPLITUDES, PAULI_TWO_DESIGN])
def test_param_count_formula_exhaustive(kind):
    """n_qubits * (reps + 1) parameters for all n_qubits <= 12, reps <= 4."""
    for n_qubits in range(1, 13):
        for reps in range(1, 5):
            spec = AnsatzSpec(kind, n_qubits, reps=reps)
            circ = build_ansatz(spec)
            assert circ.n_params == spec.n_params == n_qubits * (reps + 1)


def test_pauli_two_design_deterministic_rebuild():
    spec = AnsatzSpec(PAULI_TWO_DESIGN, 4, reps=3, seed=11)
    assert build_ansatz(spec).gates == build_ansatz(spec).gates


def test_pauli_two_design_seed_changes_axes():
    a = build_ansatz(AnsatzSpec(PAULI_TWO_DESIGN, 6, reps=2, seed=0))
    b = build_ansatz(AnsatzSpec(PAULI_TWO_DESIGN, 6, reps=2, seed=1))
    assert a.gates != b.gates


def test_pauli_two_design_opens_with_fixed_ry_layer():
    circ = build_ansatz(AnsatzSpec(PAULI_TWO_DESIGN, 3, reps=1, seed=2))
    for q in range(3):
        gate = circ.gates[q]
        assert gate.kind == "RY"
        assert gate.angle == pytest.approx(np.pi / 4)
        assert q not in circ.param_slots


def test_real_amplitudes_zero_params_is_identity_on_ground_state():
    circ = build_ansatz(AnsatzSpec(REAL_AMPLITUDES, 5, reps=2))
    out = run_circuit(circ, np.zeros(circ.n_params))
    assert abs(out.amplitudes[0]) == pytest.approx(1.0, abs=1e-12)


def test_real_amplitudes_rebuild_identical():
    spec = AnsatzSpec(REAL_AMPLITUDES, 4, reps=2, entanglement="full")
    assert build_ansatz(spec).gates == build_ansatz(spec).gates


def test_real_amplitudes_layer_structure():
    """reps entanglement blocks between reps+1 rotation layers."""
    spec = AnsatzSpec(REAL_AMPLITUDES, 3, reps=2)
    circ = build_ansatz(spec)
    kinds = [g.kind for g in circ.gates]
    expected = (["RY"] * 3 + ["CNOT"] * 2) * 2 + ["RY"] * 3
    assert kinds == expected


def test_pauli_two_design_alternating_cz_pairs():
    circ = build_ansatz(AnsatzSpec(PAULI_TWO_DESIGN, 4, reps=2, seed=0))
    cz_targets = [g.targets for g in circ.gates if g.kind == "CZ"]
    assert cz_targets == [(0, 1), (2, 3), (1, 2)]


def test_invalid_spec_rejected():
    with pytest.raises(ValueError):
        AnsatzSpec("Ring", 4)
    with pytest.raises(ValueError):
        AnsatzSpec(REAL_AMPLITUDES, 0)
    with pytest.raises(ValueError):
        AnsatzSpec(REAL_AMPLITUDES, 4, reps=0)
