"""Classical dense autoencoder baseline.

A mirrored encoder/decoder MLP trained with Adam on mean absolute
reconstruction error. The anomaly score of a sample is the MAE between
the sample and its reconstruction; the encoder half doubles as the
autoencoder-based feature-reduction strategy.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .metrics import threshold_two_sigma
from .optim import AdamState, OptimizerConfig, adam_step

logger = logging.getLogger(__name__)


class CaeError(ValueError):
    pass


@dataclass(frozen=True)
class CaeArch:
    """Encoder widths from input to latent; the decoder mirrors them."""

    encoder_widths: tuple[int, ...]
    activation: str = "relu"  # hidden layers; the output layer is linear
    seed: int = 0

    def __post_init__(self):
        widths = tuple(int(w) for w in self.encoder_widths)
        if len(widths) < 2:
            raise CaeError("encoder needs at least input and latent widths")
        if any(w < 1 for w in widths):
            raise CaeError("layer widths must be positive")
        if widths[-1] > widths[0]:
            raise CaeError("latent width cannot exceed input width")
        if self.activation not in ("relu", "linear"):
            raise CaeError(f"unknown activation {self.activation!r}")
        object.__setattr__(self, "encoder_widths", widths)

    @property
    def input_width(self) -> int:
        return self.encoder_widths[0]

    @property
    def latent_width(self) -> int:
        return self.encoder_widths[-1]

    @property
    def decoder_widths(self) -> tuple[int, ...]:
        return tuple(reversed(self.encoder_widths))

    @property
    def layer_widths(self) -> tuple[int, ...]:
        """Full chain input -> ... -> latent -> ... -> input."""
        return self.encoder_widths + self.decoder_widths[1:]

    @property
    def n_encoder_layers(self) -> int:
        return len(self.encoder_widths) - 1


@dataclass
class CaeModel:
    arch: CaeArch
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    threshold: float | None = None
    train_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        widths = self.arch.layer_widths
        if len(self.weights) != len(widths) - 1 or len(self.biases) != len(widths) - 1:
            raise CaeError("layer count does not match architecture")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (widths[i], widths[i + 1]) or b.shape != (widths[i + 1],):
                raise CaeError(f"layer {i} has shape {w.shape}, expected "
                               f"{(widths[i], widths[i + 1])}")


def _activate(z: np.ndarray, kind: str) -> np.ndarray:
    return np.maximum(z, 0.0) if kind == "relu" else z


def _activate_grad(z: np.ndarray, kind: str) -> np.ndarray:
    return (z > 0).astype(float) if kind == "relu" else np.ones_like(z)


def init_model(arch: CaeArch) -> CaeModel:
    """Glorot-uniform weights, zero biases, seeded."""
    rng = np.random.default_rng(arch.seed)
    widths = arch.layer_widths
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return CaeModel(arch=arch, weights=weights, biases=biases)


def _forward_all(model: CaeModel, x: np.ndarray):
    """Forward pass keeping pre-activations for backprop."""
    n_layers = len(model.weights)
    acts, pres = [x], []
    a = x
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = a @ w + b
        pres.append(z)
        a = z if i == n_layers - 1 else _activate(z, model.arch.activation)
        acts.append(a)
    return acts, pres


def reconstruct(model: CaeModel, data) -> np.ndarray:
    data = _as_matrix(data, model.arch.input_width)
    acts, _ = _forward_all(model, data)
    return acts[-1]


def cae_score(model: CaeModel, sample) -> float:
    """MAE between a sample and its reconstruction."""
    sample = np.asarray(sample, dtype=float).ravel()
    recon = reconstruct(model, sample)[0]
    return float(np.mean(np.abs(recon - sample)))


def cae_scores(model: CaeModel, data) -> np.ndarray:
    data = _as_matrix(data, model.arch.input_width)
    recon = reconstruct(model, data)
    return np.mean(np.abs(recon - data), axis=1)


def cae_latent(model: CaeModel, data) -> np.ndarray:
    """Encoder-half forward pass only."""
    data = _as_matrix(data, model.arch.input_width)
    a = data
    for i in range(model.arch.n_encoder_layers):
        z = a @ model.weights[i] + model.biases[i]
        a = _activate(z, model.arch.activation)
    return a


def _as_matrix(data, width: int) -> np.ndarray:
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data.reshape(1, -1)
    if data.ndim != 2 or data.shape[1] != width:
        raise CaeError(f"expected {width} feature columns, got shape {data.shape}")
    if not np.all(np.isfinite(data)):
        raise CaeError("data contains non-finite values")
    return data


@dataclass(frozen=True)
class CaeTrainConfig:
    epochs: int = 50
    batch_size: int = 64
    learning_rate: float = 1e-2
    patience: int = 5  # early stop after this many non-improving epochs
    seed: int = 0


def _mae_gradients(model: CaeModel, batch: np.ndarray):
    acts, pres = _forward_all(model, batch)
    n_layers = len(model.weights)
    recon = acts[-1]
    scale = 1.0 / (batch.shape[0] * batch.shape[1])
    delta = np.sign(recon - batch) * scale  # subgradient of MAE
    grads_w = [None] * n_layers
    grads_b = [None] * n_layers
    for i in range(n_layers - 1, -1, -1):
        grads_w[i] = acts[i].T @ delta
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ model.weights[i].T) * _activate_grad(
                pres[i - 1], model.arch.activation)
    loss = float(np.mean(np.abs(recon - batch)))
    return loss, grads_w, grads_b


def cae_train(data, arch: CaeArch, epochs: int | None = None,
              batch_size: int | None = None,
              config: CaeTrainConfig | None = None) -> CaeModel:
    """Mini-batch Adam on MAE over normal-only data.

    Deterministic under a fixed ``arch.seed``/``config.seed``. Training
    stops early after ``config.patience`` epochs without improvement and
    the best-epoch weights are restored. The threshold is left unset.
    """
    config = config or CaeTrainConfig()
    if epochs is not None:
        config = replace(config, epochs=epochs)
    if batch_size is not None:
        config = replace(config, batch_size=batch_size)
    data = _as_matrix(data, arch.input_width)

    model = init_model(arch)
    opt = OptimizerConfig(kind="Adam", adam_step_size=config.learning_rate)
    states_w = [AdamState.zeros_like(w) for w in model.weights]
    states_b = [AdamState.zeros_like(b) for b in model.biases]
    rng = np.random.default_rng(config.seed)

    trace = []
    best_loss = np.inf
    best_weights = [w.copy() for w in model.weights]
    best_biases = [b.copy() for b in model.biases]
    stale = 0

    for epoch in range(config.epochs):
        order = rng.permutation(data.shape[0])
        for start in range(0, data.shape[0], config.batch_size):
            batch = data[order[start:start + config.batch_size]]
            loss, grads_w, grads_b = _mae_gradients(model, batch)
            if not np.isfinite(loss):
                raise CaeError(f"training loss became non-finite at epoch {epoch}")
            for i in range(len(model.weights)):
                model.weights[i], states_w[i] = adam_step(
                    model.weights[i], grads_w[i], states_w[i], opt)
                model.biases[i], states_b[i] = adam_step(
                    model.biases[i], grads_b[i], states_b[i], opt)
        epoch_loss = float(np.mean(np.abs(reconstruct(model, data) - data)))
        trace.append(epoch_loss)
        if epoch_loss < best_loss - 1e-12:
            best_loss = epoch_loss
            best_weights = [w.copy() for w in model.weights]
            best_biases = [b.copy() for b in model.biases]
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                logger.debug("early stop at epoch %d (best %.6f)", epoch, best_loss)
                break

    model.weights = best_weights
    model.biases = best_biases
    model.train_meta = {
        "epochs_run": len(trace),
        "loss_trace": trace,
        "final_loss": best_loss,
        "seed": config.seed,
        "batch_size": config.batch_size,
        "learning_rate": config.learning_rate,
    }
    return model


def calibrate_threshold(model: CaeModel, train_scores) -> CaeModel:
    """Same rule as the quantum model: mean + 2 * population stddev."""
    model.threshold = threshold_two_sigma(train_scores)
    return model
