"""Dense statevector simulator.

Qubit ordering is little-endian throughout: qubit 0 is the least
significant bit of a basis-state index, so basis index ``i`` assigns
``(i >> q) & 1`` to qubit ``q``. States are immutable; every operation
returns a new :class:`Statevector`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

MAX_QUBITS = 20  # 2**20 complex128 amplitudes = 16 MB

ROTATION_KINDS = frozenset({"RX", "RY", "RZ"})
FIXED_KINDS = frozenset({"H", "CNOT", "CSWAP", "CZ"})
GATE_ARITY = {"RX": 1, "RY": 1, "RZ": 1, "H": 1, "CNOT": 2, "CZ": 2, "CSWAP": 3}

_SQRT2_INV = 1.0 / math.sqrt(2.0)


class SimulationError(ValueError):
    """Invalid gate, state, or circuit input."""


def _wrap_angle(theta: float) -> float:
    """Reduce an angle modulo 4*pi into [-2*pi, 2*pi].

    Rotation gates are 4*pi-periodic in their angle, so this leaves the
    unitary unchanged while keeping stored angles bounded.
    """
    theta = float(theta)
    if not math.isfinite(theta):
        raise SimulationError(f"rotation angle must be finite, got {theta!r}")
    if -2.0 * math.pi <= theta <= 2.0 * math.pi:
        return theta
    theta = math.fmod(theta, 4.0 * math.pi)
    if theta > 2.0 * math.pi:
        theta -= 4.0 * math.pi
    elif theta < -2.0 * math.pi:
        theta += 4.0 * math.pi
    return theta


@dataclass(frozen=True)
class Gate:
    """One gate application: a kind, target qubit indices, optional angle."""

    kind: str
    targets: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_ARITY:
            raise SimulationError(f"unknown gate kind {self.kind!r}")
        targets = tuple(int(t) for t in self.targets)
        if len(targets) != GATE_ARITY[self.kind]:
            raise SimulationError(
                f"{self.kind} acts on {GATE_ARITY[self.kind]} qubit(s), got {targets}"
            )
        if len(set(targets)) != len(targets):
            raise SimulationError(f"gate targets must be distinct, got {targets}")
        if any(t < 0 for t in targets):
            raise SimulationError(f"gate targets must be non-negative, got {targets}")
        object.__setattr__(self, "targets", targets)
        if self.kind in ROTATION_KINDS:
            if self.angle is None:
                raise SimulationError(f"{self.kind} requires an angle")
            object.__setattr__(self, "angle", _wrap_angle(self.angle))
        elif self.angle is not None:
            raise SimulationError(f"{self.kind} takes no angle")

    def inverse(self) -> "Gate":
        """Inverse gate: negated angle for rotations, self for the rest."""
        if self.kind in ROTATION_KINDS:
            return Gate(self.kind, self.targets, -self.angle)
        return self


def ry(qubit: int, angle: float) -> Gate:
    return Gate("RY", (qubit,), angle)


def rz(qubit: int, angle: float) -> Gate:
    return Gate("RZ", (qubit,), angle)


def rx(qubit: int, angle: float) -> Gate:
    return Gate("RX", (qubit,), angle)


def h(qubit: int) -> Gate:
    return Gate("H", (qubit,))


def cnot(control: int, target: int) -> Gate:
    return Gate("CNOT", (control, target))


def cz(a: int, b: int) -> Gate:
    return Gate("CZ", (a, b))


def cswap(control: int, a: int, b: int) -> Gate:
    return Gate("CSWAP", (control, a, b))


@dataclass(frozen=True)
class Statevector:
    """Dense complex amplitude vector over ``n_qubits`` qubits."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not 0 < self.n_qubits <= MAX_QUBITS:
            raise SimulationError(
                f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}"
            )
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (1 << self.n_qubits,):
            raise SimulationError(
                f"expected {1 << self.n_qubits} amplitudes, got shape {amps.shape}"
            )
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        if abs(norm_sq - 1.0) > 1e-10:
            raise SimulationError(f"state norm^2 deviates from 1 by {norm_sq - 1.0:.3e}")
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, n_qubits: int) -> "Statevector":
        """|0...0> on ``n_qubits`` qubits."""
        amps = np.zeros(1 << n_qubits, dtype=np.complex128)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass
class Circuit:
    """Ordered gate list; ``param_slots`` are gate indices with free angles."""

    n_qubits: int
    gates: list[Gate] = field(default_factory=list)
    param_slots: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not 0 < self.n_qubits <= MAX_QUBITS:
            raise SimulationError(
                f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}"
            )
        for g in self.gates:
            self._check_gate(g)
        for s in self.param_slots:
            if not 0 <= s < len(self.gates):
                raise SimulationError(f"param slot {s} out of range")
            if self.gates[s].kind not in ROTATION_KINDS:
                raise SimulationError(
                    f"param slot {s} refers to non-rotation gate {self.gates[s].kind}"
                )

    def _check_gate(self, gate: Gate):
        if max(gate.targets) >= self.n_qubits:
            raise SimulationError(
                f"gate targets {gate.targets} out of range for {self.n_qubits} qubits"
            )

    def add(self, gate: Gate, parametric: bool = False) -> None:
        self._check_gate(gate)
        self.gates.append(gate)
        if parametric:
            if gate.kind not in ROTATION_KINDS:
                raise SimulationError("only rotation gates can be parametric")
            self.param_slots.append(len(self.gates) - 1)

    @property
    def n_params(self) -> int:
        return len(self.param_slots)

    def extend(self, other: "Circuit") -> None:
        """Append another circuit's gates, re-basing its parameter slots."""
        if other.n_qubits > self.n_qubits:
            raise SimulationError("cannot extend with a wider circuit")
        offset = len(self.gates)
        self.gates.extend(other.gates)
        self.param_slots.extend(s + offset for s in other.param_slots)


def _single_qubit_matrix(gate: Gate) -> np.ndarray:
    if gate.kind == "H":
        return np.array([[_SQRT2_INV, _SQRT2_INV], [_SQRT2_INV, -_SQRT2_INV]],
                        dtype=np.complex128)
    half = 0.5 * gate.angle
    c, s = math.cos(half), math.sin(half)
    if gate.kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    if gate.kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
    # RZ
    return np.array([[c - 1j * s, 0.0], [0.0, c + 1j * s]], dtype=np.complex128)


def _apply_single(amps: np.ndarray, n: int, qubit: int, u: np.ndarray) -> np.ndarray:
    # view as (high bits, this qubit, low bits); little-endian puts qubit q
    # at stride 2**q
    lo = 1 << qubit
    hi = 1 << (n - qubit - 1)
    a = amps.reshape(hi, 2, lo)
    out = np.empty_like(a)
    out[:, 0, :] = u[0, 0] * a[:, 0, :] + u[0, 1] * a[:, 1, :]
    out[:, 1, :] = u[1, 0] * a[:, 0, :] + u[1, 1] * a[:, 1, :]
    return out.reshape(-1)


def apply_gate(state: Statevector, gate: Gate) -> Statevector:
    """Apply one gate; returns a new state with norm preserved."""
    n = state.n_qubits
    if max(gate.targets) >= n:
        raise SimulationError(
            f"gate targets {gate.targets} out of range for {n} qubits"
        )
    amps = state.amplitudes
    if gate.kind in ("RY", "RZ", "RX", "H"):
        out = _apply_single(amps, n, gate.targets[0], _single_qubit_matrix(gate))
    else:
        idx = np.arange(amps.size)
        out = amps.copy()
        if gate.kind == "CNOT":
            c, t = gate.targets
            sel = (idx >> c) & 1 == 1
            out[sel] = amps[idx[sel] ^ (1 << t)]
        elif gate.kind == "CZ":
            a, b = gate.targets
            sel = ((idx >> a) & 1 & (idx >> b)) == 1
            out[sel] = -amps[sel]
        else:  # CSWAP
            c, a, b = gate.targets
            sel = (((idx >> c) & 1) == 1) & (((idx >> a) & 1) != ((idx >> b) & 1))
            out[sel] = amps[idx[sel] ^ ((1 << a) | (1 << b))]
    return Statevector(n, out)


def run_circuit(circuit: Circuit, params=None,
                initial: Statevector | None = None) -> Statevector:
    """Run a circuit with parameter values bound to its free-angle slots."""
    params = np.asarray([] if params is None else params, dtype=float).ravel()
    if params.size != circuit.n_params:
        raise SimulationError(
            f"expected {circuit.n_params} parameters, got {params.size}"
        )
    if initial is None:
        state = Statevector.zero(circuit.n_qubits)
    else:
        if initial.n_qubits != circuit.n_qubits:
            raise SimulationError("initial state width does not match circuit")
        state = initial
    bound = dict(zip(circuit.param_slots, params))
    for i, gate in enumerate(circuit.gates):
        if i in bound:
            gate = replace(gate, angle=_wrap_angle(bound[i]))
        state = apply_gate(state, gate)
    return state


def marginal_prob_one(state: Statevector, qubit: int) -> float:
    """Probability that measuring ``qubit`` yields 1."""
    if not 0 <= qubit < state.n_qubits:
        raise SimulationError(f"qubit {qubit} out of range")
    idx = np.arange(state.amplitudes.size)
    sel = (idx >> qubit) & 1 == 1
    p = float(np.sum(np.abs(state.amplitudes[sel]) ** 2))
    return min(max(p, 0.0), 1.0)


@dataclass(frozen=True)
class NoiseModel:
    """Two-parameter noise: readout bit flips plus per-gate depolarizing."""

    readout_flip_prob: float = 0.0
    depolarizing_prob: float = 0.0

    def __post_init__(self):
        for name in ("readout_flip_prob", "depolarizing_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise SimulationError(f"{name} must lie in [0, 1], got {p}")

    @property
    def is_trivial(self) -> bool:
        return self.readout_flip_prob == 0.0 and self.depolarizing_prob == 0.0


def _flip(p1: float, flip_prob: float) -> float:
    return p1 * (1.0 - flip_prob) + (1.0 - p1) * flip_prob


def measure_qubit(state: Statevector, qubit: int, shots: int,
                  noise: NoiseModel | None = None, rng_seed: int = 0) -> int:
    """Sample ``shots`` measurements of one qubit; returns the count of 1s.

    Outcomes are binomial in the marginal |1> probability, with readout
    flips applied when a noise model is given. Reproducible per seed.
    """
    if shots < 1:
        raise SimulationError(f"shots must be >= 1, got {shots}")
    p1 = marginal_prob_one(state, qubit)
    if noise is not None:
        p1 = _flip(p1, noise.readout_flip_prob)
    rng = np.random.default_rng(rng_seed)
    return int(rng.binomial(shots, p1))


_PAULIS = {
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def _apply_pauli(state: Statevector, qubit: int, which: str) -> Statevector:
    out = _apply_single(state.amplitudes, state.n_qubits, qubit, _PAULIS[which])
    return Statevector(state.n_qubits, out)


def sample_one_counts(circuit: Circuit, params, qubit: int, shots: int,
                      noise: NoiseModel | None = None, rng_seed: int = 0,
                      initial: Statevector | None = None) -> int:
    """Sample the |1> count on one qubit after running a circuit.

    With depolarizing noise, each shot draws an independent error pattern:
    after every gate, with probability ``depolarizing_prob`` a uniformly
    random Pauli is inserted on a uniformly chosen target qubit of that
    gate. Error-free shots share a single clean circuit evaluation.
    """
    if shots < 1:
        raise SimulationError(f"shots must be >= 1, got {shots}")
    rng = np.random.default_rng(rng_seed)
    clean = run_circuit(circuit, params, initial)
    p_clean = marginal_prob_one(clean, qubit)
    flip = 0.0 if noise is None else noise.readout_flip_prob
    p_dep = 0.0 if noise is None else noise.depolarizing_prob

    n_gates = len(circuit.gates)
    if p_dep == 0.0 or n_gates == 0:
        return int(rng.binomial(shots, _flip(p_clean, flip)))

    params = np.asarray([] if params is None else params, dtype=float).ravel()
    bound = dict(zip(circuit.param_slots, params))
    error_masks = rng.random((shots, n_gates)) < p_dep  # per shot, per gate
    shot_has_error = error_masks.any(axis=1)
    n_clean = int(shots - shot_has_error.sum())
    ones = int(rng.binomial(n_clean, _flip(p_clean, flip))) if n_clean else 0
    for errs in error_masks[shot_has_error]:
        state = initial if initial is not None else Statevector.zero(circuit.n_qubits)
        for i, gate in enumerate(circuit.gates):
            if i in bound:
                gate = replace(gate, angle=_wrap_angle(bound[i]))
            state = apply_gate(state, gate)
            if errs[i]:
                target = gate.targets[rng.integers(len(gate.targets))]
                pauli = ("X", "Y", "Z")[rng.integers(3)]
                state = _apply_pauli(state, target, pauli)
        ones += rng.random() < _flip(marginal_prob_one(state, qubit), flip)
    return int(ones)
