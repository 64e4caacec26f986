"""Classical-to-quantum data encodings.

Four techniques are supported: Amplitude (values written into state
amplitudes), Angle (one Ry rotation per feature), DenseAngle (Ry + Rz
packing two features per qubit), and EfficientSU2 (layered Ry/Rz
rotations with CNOT entanglement used as a data-loading circuit).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .ansatz import ENTANGLEMENT_PATTERNS, entanglement_pairs
from .simcore import Circuit, Statevector, cnot, run_circuit, ry, rz

logger = logging.getLogger(__name__)

AMPLITUDE = "Amplitude"
ANGLE = "Angle"
DENSE_ANGLE = "DenseAngle"
EFFICIENT_SU2 = "EfficientSU2"
TECHNIQUES = (AMPLITUDE, ANGLE, DENSE_ANGLE, EFFICIENT_SU2)

ANGLE_FAMILY = (ANGLE, DENSE_ANGLE, EFFICIENT_SU2)


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class EncodingSpec:
    """Encoding technique plus qubit budget.

    ``n_qubits`` is derived from ``n_features`` for Amplitude, Angle and
    DenseAngle. For EfficientSU2 it is free (subject to the capacity
    constraint 2 * n_qubits * (su2_reps + 1) >= n_features) and defaults
    to the smallest qubit count that fits.
    """

    technique: str
    n_features: int
    n_qubits: int = None
    su2_reps: int = 1
    su2_entanglement: str = "linear"

    def __post_init__(self):
        if self.technique not in TECHNIQUES:
            raise EncodingError(f"unknown encoding technique {self.technique!r}")
        if self.n_features < 1:
            raise EncodingError(f"n_features must be >= 1, got {self.n_features}")
        if self.su2_reps < 1:
            raise EncodingError(f"su2_reps must be >= 1, got {self.su2_reps}")
        if self.su2_entanglement not in ENTANGLEMENT_PATTERNS:
            raise EncodingError(
                f"unknown entanglement pattern {self.su2_entanglement!r}")

        if self.technique == ANGLE:
            derived = self.n_features
        elif self.technique == DENSE_ANGLE:
            derived = math.ceil(self.n_features / 2)
        elif self.technique == AMPLITUDE:
            if self.n_features < 2:
                raise EncodingError("Amplitude encoding needs at least 2 features")
            derived = math.ceil(math.log2(self.n_features))
        else:  # EfficientSU2: smallest width that fits unless overridden
            derived = math.ceil(self.n_features / (2 * (self.su2_reps + 1)))

        if self.n_qubits is None:
            object.__setattr__(self, "n_qubits", derived)
        elif self.technique == EFFICIENT_SU2:
            if 2 * self.n_qubits * (self.su2_reps + 1) < self.n_features:
                raise EncodingError(
                    f"{self.n_qubits} qubits x {self.su2_reps} reps cannot hold "
                    f"{self.n_features} features")
        elif self.n_qubits != derived:
            raise EncodingError(
                f"{self.technique} with {self.n_features} features requires "
                f"{derived} qubits, got {self.n_qubits}")

    @property
    def rotation_slots(self) -> int:
        """Number of rotation angles the encoding circuit holds (EfficientSU2)."""
        return 2 * self.n_qubits * (self.su2_reps + 1)


@dataclass(frozen=True)
class ScaledSample:
    """One feature vector in the scale domain of its technique.

    Angle-family values lie in [0, pi]; Amplitude values have unit L2
    norm. ``flags`` records degenerate inputs (e.g. a zero row mapped to
    the first basis vector).
    """

    values: np.ndarray
    technique: str
    flags: tuple = ()

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size == 0:
            raise EncodingError("sample must be a non-empty 1-D vector")
        if not np.all(np.isfinite(vals)):
            raise EncodingError("sample contains non-finite values")
        if self.technique in ANGLE_FAMILY:
            if vals.min() < -1e-9 or vals.max() > math.pi + 1e-9:
                raise EncodingError("angle-family values must lie in [0, pi]")
        elif self.technique == AMPLITUDE:
            norm = float(np.linalg.norm(vals))
            if abs(norm - 1.0) > 1e-10:
                raise EncodingError(
                    f"amplitude values must have unit norm, got {norm!r}")
        else:
            raise EncodingError(f"unknown technique {self.technique!r}")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)


@dataclass
class FeatureScaler:
    """Min-max scaler to [0, pi] for angle-family encodings.

    Statistics come from the training split only; out-of-range values at
    transform time are clamped. Amplitude encoding bypasses min-max and
    L2-normalizes each row instead.
    """

    technique: str
    col_min: np.ndarray = field(default=None)
    col_max: np.ndarray = field(default=None)

    def fit(self, raw: np.ndarray) -> "FeatureScaler":
        raw = _check_matrix(raw)
        self.col_min = raw.min(axis=0)
        self.col_max = raw.max(axis=0)
        return self

    @property
    def is_fitted(self) -> bool:
        return self.col_min is not None

    def transform(self, raw: np.ndarray) -> list[ScaledSample]:
        raw = _check_matrix(raw)
        if self.technique == AMPLITUDE:
            samples = []
            for i, row in enumerate(raw):
                norm = float(np.linalg.norm(row))
                if norm == 0.0:
                    logger.warning(
                        "amplitude row %d is all-zero; mapping to first basis vector", i)
                    unit = np.zeros(row.size)
                    unit[0] = 1.0
                    samples.append(ScaledSample(unit, AMPLITUDE, flags=("zero_input",)))
                else:
                    samples.append(ScaledSample(row / norm, AMPLITUDE))
            return samples
        if not self.is_fitted:
            raise EncodingError("scaler must be fitted before transform")
        if raw.shape[1] != self.col_min.size:
            raise EncodingError(
                f"expected {self.col_min.size} columns, got {raw.shape[1]}")
        span = self.col_max - self.col_min
        safe_span = np.where(span > 0, span, 1.0)
        scaled = (raw - self.col_min) / safe_span
        # constant training columns degenerate to the clamp rule's limit:
        # values above the constant map to pi, the rest to 0
        scaled = np.where(span > 0, scaled, (raw > self.col_min).astype(float))
        scaled = np.clip(scaled, 0.0, 1.0) * math.pi
        return [ScaledSample(row, self.technique) for row in scaled]


def _check_matrix(raw) -> np.ndarray:
    raw = np.asarray(raw, dtype=float)
    if raw.ndim == 1:
        raw = raw.reshape(1, -1)
    if raw.ndim != 2 or raw.shape[0] == 0 or raw.shape[1] == 0:
        raise EncodingError("expected a non-empty 2-D matrix")
    if not np.all(np.isfinite(raw)):
        raise EncodingError("matrix contains non-finite values")
    return raw


def scale_features(raw, spec: EncodingSpec,
                   scaler: FeatureScaler | None = None):
    """Scale a raw feature matrix into the technique's domain.

    Returns ``(samples, scaler)``. Pass a fitted scaler to reuse
    training-split statistics on test data; otherwise one is fitted on
    ``raw`` (which must then be the training split).
    """
    raw = _check_matrix(raw)
    if raw.shape[1] != spec.n_features:
        raise EncodingError(
            f"expected {spec.n_features} feature columns, got {raw.shape[1]}")
    if scaler is None:
        scaler = FeatureScaler(spec.technique).fit(raw)
    elif scaler.technique != spec.technique:
        raise EncodingError("scaler technique does not match encoding spec")
    return scaler.transform(raw), scaler


def _efficient_su2_circuit(angles: np.ndarray, spec: EncodingSpec) -> Circuit:
    circ = Circuit(spec.n_qubits)
    pairs = entanglement_pairs(spec.n_qubits, spec.su2_entanglement)
    it = iter(angles)
    for layer in range(spec.su2_reps + 1):
        for q in range(spec.n_qubits):
            circ.add(ry(q, next(it)))
        for q in range(spec.n_qubits):
            circ.add(rz(q, next(it)))
        if layer < spec.su2_reps:
            for c, t in pairs:
                circ.add(cnot(c, t))
    return circ


def encode_sample(sample: ScaledSample, spec: EncodingSpec) -> Statevector:
    """Map one scaled sample onto a quantum state over ``spec.n_qubits``."""
    if sample.technique != spec.technique:
        raise EncodingError("sample technique does not match encoding spec")
    vals = sample.values
    if vals.size != spec.n_features:
        raise EncodingError(
            f"expected {spec.n_features} features, got {vals.size}")

    if spec.technique == AMPLITUDE:
        amps = np.zeros(1 << spec.n_qubits, dtype=np.complex128)
        amps[: vals.size] = vals
        return Statevector(spec.n_qubits, amps)

    circ = Circuit(spec.n_qubits)
    if spec.technique == ANGLE:
        for q, x in enumerate(vals):
            circ.add(ry(q, x))
    elif spec.technique == DENSE_ANGLE:
        for q in range(spec.n_qubits):
            y = vals[2 * q]
            z = vals[2 * q + 1] if 2 * q + 1 < vals.size else 0.0
            circ.add(ry(q, y))
            circ.add(rz(q, z))
    else:  # EfficientSU2: features fill rotation slots in layer order
        angles = np.zeros(spec.rotation_slots)
        angles[: vals.size] = vals
        circ = _efficient_su2_circuit(angles, spec)
    return run_circuit(circ)
