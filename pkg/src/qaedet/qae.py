"""Quantum autoencoder: circuit assembly, SWAP-test scoring, training.

The full circuit prepares the encoded sample on the data qubits, applies
the trainable ansatz there, then runs a SWAP test comparing each trash
qubit against a reference qubit held in |0>: H on the auxiliary qubit,
one controlled-SWAP per trash/reference pair, H again. The auxiliary
|1> probability p1 relates to the trash-register fidelity F with
|0...0> by p1 = (1 - F) / 2, so the similarity S = 1 - 2*p1 equals F in
exact mode. The anomaly score is A = 1 - S.

No decoder circuit is ever built; scoring needs only the SWAP test.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import simcore
from .ansatz import AnsatzSpec, build_ansatz
from .encode import (AMPLITUDE, ANGLE, DENSE_ANGLE, EFFICIENT_SU2,
                     EncodingSpec, ScaledSample, encode_sample)
from .metrics import threshold_two_sigma
from .optim import (CobylaResult, NonFiniteObjectiveError, OptimizerConfig,
                    cobyla_minimize)
from .simcore import Circuit, NoiseModel, Statevector, cswap, h

logger = logging.getLogger(__name__)


class QaeError(ValueError):
    pass


@dataclass(frozen=True)
class QaeLayout:
    """Qubit roles: data = latent + trash, plus references and one aux."""

    n_data: int
    n_latent: int
    n_trash: int
    trash_indices: tuple[int, ...]
    reference_indices: tuple[int, ...]
    aux_index: int

    def __post_init__(self):
        if self.n_trash < 1 or self.n_latent < 0:
            raise QaeError("need n_trash >= 1 and n_latent >= 0")
        if self.n_latent + self.n_trash != self.n_data:
            raise QaeError("n_latent + n_trash must equal n_data")
        trash = tuple(int(i) for i in self.trash_indices)
        ref = tuple(int(i) for i in self.reference_indices)
        if len(trash) != self.n_trash or len(ref) != self.n_trash:
            raise QaeError("trash and reference index lists must have n_trash entries")
        all_idx = trash + ref + (self.aux_index,)
        if len(set(all_idx)) != len(all_idx):
            raise QaeError("trash, reference, and aux indices must be disjoint")
        if min(all_idx) < 0 or max(all_idx) >= self.total_qubits:
            raise QaeError("qubit indices out of range")
        object.__setattr__(self, "trash_indices", trash)
        object.__setattr__(self, "reference_indices", ref)

    @property
    def total_qubits(self) -> int:
        return self.n_data + self.n_trash + 1

    @property
    def latent_indices(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n_data) if i not in self.trash_indices)

    @classmethod
    def standard(cls, n_data: int, n_trash: int) -> "QaeLayout":
        """Latent on the low data qubits, trash on the high ones, then
        references, aux last."""
        if not 1 <= n_trash < max(n_data, 2):
            raise QaeError(
                f"n_trash must leave at least one latent qubit "
                f"(n_data={n_data}, n_trash={n_trash})")
        n_latent = n_data - n_trash
        return cls(
            n_data=n_data,
            n_latent=n_latent,
            n_trash=n_trash,
            trash_indices=tuple(range(n_latent, n_data)),
            reference_indices=tuple(range(n_data, n_data + n_trash)),
            aux_index=n_data + n_trash,
        )


# documented trash-count defaults per encoding technique; override via
# QaeLayout.standard when a different split is wanted
def default_trash_count(technique: str, n_data: int) -> int:
    if n_data < 2:
        raise QaeError("need at least 2 data qubits to split latent/trash")
    if technique == AMPLITUDE:
        return 1
    if technique == DENSE_ANGLE:
        return n_data // 2
    if technique == ANGLE:
        return min(2, n_data - 1)
    if technique == EFFICIENT_SU2:
        return min(max(1, n_data // 2), n_data - 1)
    raise QaeError(f"unknown technique {technique!r}")


def default_layout(encoding: EncodingSpec, n_trash: int | None = None) -> QaeLayout:
    if n_trash is None:
        n_trash = default_trash_count(encoding.technique, encoding.n_qubits)
    return QaeLayout.standard(encoding.n_qubits, n_trash)


def assemble_circuit(encoding: EncodingSpec, ansatz: AnsatzSpec,
                     layout: QaeLayout) -> Circuit:
    """Ansatz on the data qubits followed by the SWAP test.

    The data encoding enters through the initial state (see
    :func:`prepare_state`); amplitude encoding has no gate realization
    in this gate set. The returned circuit always ends with H on the
    auxiliary qubit.
    """
    if ansatz.n_qubits != layout.n_data:
        raise QaeError(
            f"ansatz spans {ansatz.n_qubits} qubits but layout has "
            f"{layout.n_data} data qubits")
    if encoding.n_qubits != layout.n_data:
        raise QaeError(
            f"encoding produces {encoding.n_qubits} qubits but layout has "
            f"{layout.n_data} data qubits")
    circ = Circuit(layout.total_qubits)
    circ.extend(build_ansatz(ansatz))
    circ.add(h(layout.aux_index))
    for t, r in zip(layout.trash_indices, layout.reference_indices):
        circ.add(cswap(layout.aux_index, t, r))
    circ.add(h(layout.aux_index))
    return circ


def prepare_state(sample: ScaledSample, encoding: EncodingSpec,
                  layout: QaeLayout) -> Statevector:
    """Encoded sample on the data qubits, references and aux in |0>."""
    data_state = encode_sample(sample, encoding)
    full = np.zeros(1 << layout.total_qubits, dtype=np.complex128)
    full[: data_state.amplitudes.size] = data_state.amplitudes
    return Statevector(layout.total_qubits, full)


@dataclass(frozen=True)
class ExactMode:
    """Score from the exact auxiliary |1> probability (no sampling)."""


@dataclass(frozen=True)
class ShotMode:
    """Score from M-shot sampling, optionally under a noise model."""

    shots: int = 1024
    seed: int = 0
    noise: NoiseModel | None = None

    def __post_init__(self):
        if self.shots < 1:
            raise QaeError(f"shots must be >= 1, got {self.shots}")


EXACT = ExactMode()


@dataclass(frozen=True)
class SwapTestResult:
    similarity: float
    anomaly: float
    shots_used: int | None  # None marks exact mode


@dataclass
class QaeModel:
    """Trained parameters plus everything needed to replay scoring."""

    encoding: EncodingSpec
    ansatz: AnsatzSpec
    layout: QaeLayout
    params: np.ndarray
    threshold: float | None = None
    train_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        params = np.asarray(self.params, dtype=float).ravel()
        if params.size != self.ansatz.n_params:
            raise QaeError(
                f"expected {self.ansatz.n_params} parameters, got {params.size}")
        self.params = params

    def circuit(self) -> Circuit:
        return assemble_circuit(self.encoding, self.ansatz, self.layout)


def _swap_result_from_p1(p1: float) -> SwapTestResult:
    # numerical guard: p1 <= 1/2 holds exactly, clamp float error
    s = min(1.0, max(0.0, 1.0 - 2.0 * p1))
    return SwapTestResult(similarity=s, anomaly=1.0 - s, shots_used=None)


def _swap_result_from_counts(ones: int, shots: int) -> SwapTestResult:
    s = 1.0 - 2.0 * ones / shots
    a = min(1.0, max(0.0, 1.0 - s))
    return SwapTestResult(similarity=s, anomaly=a, shots_used=shots)


def similarity(model: QaeModel, sample: ScaledSample,
               mode: ExactMode | ShotMode = EXACT,
               circuit: Circuit | None = None) -> SwapTestResult:
    """SWAP-test similarity and anomaly score for one sample."""
    circ = circuit if circuit is not None else model.circuit()
    initial = prepare_state(sample, model.encoding, model.layout)
    aux = model.layout.aux_index
    if isinstance(mode, ExactMode):
        state = simcore.run_circuit(circ, model.params, initial)
        return _swap_result_from_p1(simcore.marginal_prob_one(state, aux))
    ones = simcore.sample_one_counts(
        circ, model.params, aux, mode.shots,
        noise=mode.noise, rng_seed=mode.seed, initial=initial)
    return _swap_result_from_counts(ones, mode.shots)


def score_samples(model: QaeModel, samples: list[ScaledSample],
                  mode: ExactMode | ShotMode = EXACT) -> np.ndarray:
    """Anomaly scores for a sample list; shot mode derives one RNG stream
    per sample from ``mode.seed`` and the sample position."""
    circ = model.circuit()
    aux = model.layout.aux_index
    scores = np.empty(len(samples))
    for i, sample in enumerate(samples):
        initial = prepare_state(sample, model.encoding, model.layout)
        if isinstance(mode, ExactMode):
            state = simcore.run_circuit(circ, model.params, initial)
            scores[i] = _swap_result_from_p1(
                simcore.marginal_prob_one(state, aux)).anomaly
        else:
            ones = simcore.sample_one_counts(
                circ, model.params, aux, mode.shots,
                noise=mode.noise, rng_seed=(mode.seed, i), initial=initial)
            scores[i] = _swap_result_from_counts(ones, mode.shots).anomaly
    return scores


def batch_cost(params, batch: list[ScaledSample], encoding: EncodingSpec,
               ansatz: AnsatzSpec, layout: QaeLayout,
               circuit: Circuit | None = None,
               prepared: list[Statevector] | None = None) -> float:
    """Mean of (1 - S) over the batch in exact mode; lies in [0, 1]."""
    if len(batch) == 0 and not prepared:
        raise QaeError("batch must be non-empty")
    circ = circuit if circuit is not None else assemble_circuit(encoding, ansatz, layout)
    states = prepared if prepared is not None else [
        prepare_state(s, encoding, layout) for s in batch]
    aux = layout.aux_index
    total = 0.0
    for initial in states:
        state = simcore.run_circuit(circ, params, initial)
        total += _swap_result_from_p1(
            simcore.marginal_prob_one(state, aux)).anomaly
    return total / len(states)


@dataclass(frozen=True)
class TrainConfig:
    """COBYLA budget and batch draw for QAE training.

    ``iterations`` is an objective-evaluation budget. One batch of
    ``batch_size`` samples is drawn once per run (seeded) and the same
    batch objective is evaluated at every iteration, keeping the
    objective deterministic for the optimizer.
    """

    iterations: int = 60
    batch_size: int = 64
    seed: int = 0
    init: str = "random"  # "random": uniform in [-pi, pi]; or "zeros"
    rho_begin: float = 0.5
    rho_end: float = 1e-4

    def __post_init__(self):
        if self.iterations < 1 or self.batch_size < 1:
            raise QaeError("iterations and batch_size must be >= 1")
        if self.init not in ("random", "zeros"):
            raise QaeError(f"unknown init {self.init!r}")


def train(dataset: list[ScaledSample], encoding: EncodingSpec,
          ansatz: AnsatzSpec, layout: QaeLayout | None = None,
          config: TrainConfig | None = None) -> QaeModel:
    """Fit ansatz parameters on normal-only data by minimizing batch_cost.

    The dataset must contain no labeled anomalies (caller contract). The
    returned model has no threshold yet; see :func:`calibrate_threshold`.
    If the optimizer aborts on a non-finite objective value, the best
    parameters found so far are kept and the failure is recorded in
    ``train_meta['diagnostic']``.
    """
    if not dataset:
        raise QaeError("training dataset must be non-empty")
    config = config or TrainConfig()
    if layout is None:
        layout = default_layout(encoding)

    rng = np.random.default_rng(config.seed)
    if len(dataset) > config.batch_size:
        pick = rng.choice(len(dataset), size=config.batch_size, replace=False)
        batch = [dataset[i] for i in pick]
    else:
        batch = list(dataset)

    circ = assemble_circuit(encoding, ansatz, layout)
    prepared = [prepare_state(s, encoding, layout) for s in batch]

    if config.init == "zeros":
        x0 = np.zeros(ansatz.n_params)
    else:
        x0 = rng.uniform(-np.pi, np.pi, size=ansatz.n_params)

    def objective(params):
        return batch_cost(params, batch, encoding, ansatz, layout,
                          circuit=circ, prepared=prepared)

    opt_config = OptimizerConfig(max_evals=config.iterations,
                                 rho_begin=config.rho_begin,
                                 rho_end=config.rho_end)
    diagnostic = None
    try:
        result = cobyla_minimize(objective, x0, opt_config)
    except NonFiniteObjectiveError as err:
        logger.warning("optimizer aborted on non-finite objective: %s", err)
        result = CobylaResult(x_best=np.asarray(err.x_best, dtype=float),
                              f_best=float(err.f_best), trace=list(err.trace),
                              n_evals=len(err.trace), status="aborted")
        diagnostic = str(err)

    meta = {
        "iterations": result.n_evals,
        "batch_size": len(batch),
        "seed": config.seed,
        "loss_trace": [float(v) for v in result.trace],
        "final_cost": result.f_best,
        "optimizer_status": result.status,
    }
    if diagnostic:
        meta["diagnostic"] = diagnostic
    return QaeModel(encoding=encoding, ansatz=ansatz, layout=layout,
                    params=result.x_best, threshold=None, train_meta=meta)


def calibrate_threshold(model: QaeModel, train_scores) -> QaeModel:
    """Set the threshold from training scores (mean + 2 sigma rule)."""
    return replace(model, threshold=threshold_two_sigma(train_scores))


def classify(model: QaeModel, sample: ScaledSample,
             mode: ExactMode | ShotMode = EXACT) -> tuple[str, float]:
    """Label one sample; anomalous iff the score strictly exceeds the
    threshold."""
    if model.threshold is None:
        raise QaeError("model threshold is not calibrated")
    score = similarity(model, sample, mode).anomaly
    label = "anomalous" if score > model.threshold else "normal"
    return label, score
