"""Trainable encoder circuits: RealAmplitudes and PauliTwoDesign."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simcore import Circuit, SimulationError, cnot, cz, rx, ry, rz

REAL_AMPLITUDES = "RealAmplitudes"
PAULI_TWO_DESIGN = "PauliTwoDesign"
ANSATZ_KINDS = (REAL_AMPLITUDES, PAULI_TWO_DESIGN)

ENTANGLEMENT_PATTERNS = ("linear", "reverse_linear", "full")


def entanglement_pairs(n_qubits: int, pattern: str) -> list[tuple[int, int]]:
    """Ordered qubit pairs for an entanglement block.

    linear: (0,1),(1,2),...; reverse_linear: the same pairs in reverse
    order; full: all (i,j) with i<j in lexicographic order. Fewer than
    two qubits yields an empty list.
    """
    if pattern not in ENTANGLEMENT_PATTERNS:
        raise ValueError(f"unknown entanglement pattern {pattern!r}")
    if n_qubits < 2:
        return []
    if pattern == "linear":
        return [(i, i + 1) for i in range(n_qubits - 1)]
    if pattern == "reverse_linear":
        return [(i, i + 1) for i in range(n_qubits - 2, -1, -1)]
    return [(i, j) for i in range(n_qubits) for j in range(i + 1, n_qubits)]


@dataclass(frozen=True)
class AnsatzSpec:
    """Declarative ansatz configuration.

    ``seed`` fixes the PauliTwoDesign rotation axes; it is frozen with
    the spec so rebuilding reproduces the exact circuit.
    """

    kind: str
    n_qubits: int
    reps: int = 1
    entanglement: str = "linear"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ANSATZ_KINDS:
            raise ValueError(f"unknown ansatz kind {self.kind!r}")
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be >= 1, got {self.n_qubits}")
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if self.entanglement not in ENTANGLEMENT_PATTERNS:
            raise ValueError(f"unknown entanglement pattern {self.entanglement!r}")

    @property
    def n_params(self) -> int:
        # both kinds: one rotation per qubit per layer, reps+1 layers
        return self.n_qubits * (self.reps + 1)


def _pauli_axes(spec: AnsatzSpec) -> np.ndarray:
    """Seeded (reps+1, n_qubits) array of rotation kinds for PauliTwoDesign."""
    rng = np.random.default_rng(spec.seed)
    return rng.choice(["RX", "RY", "RZ"], size=(spec.reps + 1, spec.n_qubits))


def build_ansatz(spec: AnsatzSpec) -> Circuit:
    """Build the parameterized circuit for a spec.

    RealAmplitudes alternates Ry rotation layers with CNOT entanglement
    blocks (reps blocks, reps+1 rotation layers). PauliTwoDesign opens
    with a fixed Ry(pi/4) layer, then per repetition a layer of
    seeded random-axis rotations followed by CZ gates on alternating
    neighbor pairs, closing with a final rotation layer. Parameter slots
    enumerate rotation angles in layer-major, qubit-minor order.
    """
    circ = Circuit(spec.n_qubits)
    if spec.kind == REAL_AMPLITUDES:
        pairs = entanglement_pairs(spec.n_qubits, spec.entanglement)
        for layer in range(spec.reps + 1):
            for q in range(spec.n_qubits):
                circ.add(ry(q, 0.0), parametric=True)
            if layer < spec.reps:
                for c, t in pairs:
                    circ.add(cnot(c, t))
        return circ

    axes = _pauli_axes(spec)
    rot = {"RX": rx, "RY": ry, "RZ": rz}
    for q in range(spec.n_qubits):
        circ.add(ry(q, np.pi / 4))
    for layer in range(spec.reps + 1):
        for q in range(spec.n_qubits):
            circ.add(rot[axes[layer, q]](q, 0.0), parametric=True)
        if layer < spec.reps:
            start = layer % 2
            for a in range(start, spec.n_qubits - 1, 2):
                circ.add(cz(a, a + 1))
    return circ
