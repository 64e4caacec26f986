"""End-to-end scoring pipelines and their versioned model files.

A pipeline bundles the fitted feature selection, the scaler, the trained
model, and the calibrated threshold, so a persisted file is sufficient
to score unseen data exactly as the in-memory object would. Both model
kinds share one JSON file format (``format_version`` 1). Files contain
no timestamps; reruns with identical config and seed are byte-identical.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import qae
from .ansatz import AnsatzSpec
from .cae import CaeArch, CaeModel, cae_scores
from .encode import EncodingSpec, FeatureScaler, scale_features
from .features import SelectionResult, SelectionSpec
from .qae import EXACT, ExactMode, QaeLayout, QaeModel, ShotMode
from .simcore import NoiseModel

FORMAT_VERSION = 1


class ModelIOError(ValueError):
    pass


@dataclass
class UnitScaler:
    """Min-max scaler to [0, 1] with train-split statistics (CAE input)."""

    col_min: np.ndarray = None
    col_max: np.ndarray = None

    def fit(self, matrix) -> "UnitScaler":
        matrix = np.asarray(matrix, dtype=float)
        self.col_min = matrix.min(axis=0)
        self.col_max = matrix.max(axis=0)
        return self

    def transform(self, matrix) -> np.ndarray:
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape[1] != self.col_min.size:
            raise ModelIOError(
                f"expected {self.col_min.size} columns, got {matrix.shape[1]}")
        span = self.col_max - self.col_min
        safe = np.where(span > 0, span, 1.0)
        out = (matrix - self.col_min) / safe
        out = np.where(span > 0, out, (matrix > self.col_min).astype(float))
        return np.clip(out, 0.0, 1.0)


@dataclass
class QaePipeline:
    model: QaeModel
    scaler: FeatureScaler
    selection: SelectionResult | None = None
    config_hash: str = ""
    seed: int = 0
    scoring: dict = field(default_factory=dict)  # mode/shots/noise used at train time

    kind = "qae"

    @property
    def n_input_features(self) -> int:
        if self.selection is not None and self.selection.indices is not None:
            return max(self.selection.indices) + 1
        if self.selection is not None and self.selection.pca_mean is not None:
            return self.selection.pca_mean.size
        if self.selection is not None and self.selection.ae_model is not None:
            return self.selection.ae_model.arch.input_width
        return self.model.encoding.n_features

    def reduce(self, matrix) -> np.ndarray:
        matrix = np.asarray(matrix, dtype=float)
        return self.selection.apply(matrix) if self.selection is not None else matrix

    def score(self, matrix, mode: ExactMode | ShotMode = EXACT) -> np.ndarray:
        reduced = self.reduce(matrix)
        samples, _ = scale_features(reduced, self.model.encoding, scaler=self.scaler)
        return qae.score_samples(self.model, samples, mode=mode)

    @property
    def threshold(self):
        return self.model.threshold


@dataclass
class CaePipeline:
    model: CaeModel
    scaler: UnitScaler
    selection: SelectionResult | None = None
    config_hash: str = ""
    seed: int = 0
    scoring: dict = field(default_factory=dict)

    kind = "cae"

    @property
    def n_input_features(self) -> int:
        if self.selection is not None and self.selection.indices is not None:
            return max(self.selection.indices) + 1
        if self.selection is not None and self.selection.pca_mean is not None:
            return self.selection.pca_mean.size
        if self.selection is not None and self.selection.ae_model is not None:
            return self.selection.ae_model.arch.input_width
        return self.model.arch.input_width

    def reduce(self, matrix) -> np.ndarray:
        matrix = np.asarray(matrix, dtype=float)
        return self.selection.apply(matrix) if self.selection is not None else matrix

    def score(self, matrix, mode=None) -> np.ndarray:
        # mode accepted for interface parity; classical scoring is exact
        reduced = self.reduce(matrix)
        return cae_scores(self.model, self.scaler.transform(reduced))

    @property
    def threshold(self):
        return self.model.threshold


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _arr(x):
    return None if x is None else np.asarray(x).tolist()


def _selection_to_dict(sel: SelectionResult | None):
    if sel is None:
        return None
    out = {"spec": asdict(sel.spec), "indices": sel.indices,
           "pca_mean": _arr(sel.pca_mean), "pca_components": _arr(sel.pca_components),
           "ae_model": None}
    if sel.ae_model is not None:
        out["ae_model"] = _cae_model_to_dict(sel.ae_model)
    return out


def _selection_from_dict(data) -> SelectionResult | None:
    if data is None:
        return None
    sel = SelectionResult(spec=SelectionSpec(**data["spec"]), indices=data["indices"])
    if data["pca_mean"] is not None:
        sel.pca_mean = np.asarray(data["pca_mean"], dtype=float)
        sel.pca_components = np.asarray(data["pca_components"], dtype=float)
    if data["ae_model"] is not None:
        sel.ae_model = _cae_model_from_dict(data["ae_model"])
    return sel


def _cae_model_to_dict(model: CaeModel) -> dict:
    return {
        "arch": {"encoder_widths": list(model.arch.encoder_widths),
                 "activation": model.arch.activation, "seed": model.arch.seed},
        "weights": [w.tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
        "threshold": model.threshold,
        "train_meta": model.train_meta,
    }


def _cae_model_from_dict(data: dict) -> CaeModel:
    arch = CaeArch(encoder_widths=tuple(data["arch"]["encoder_widths"]),
                   activation=data["arch"]["activation"], seed=data["arch"]["seed"])
    return CaeModel(arch=arch,
                    weights=[np.asarray(w, dtype=float) for w in data["weights"]],
                    biases=[np.asarray(b, dtype=float) for b in data["biases"]],
                    threshold=data["threshold"], train_meta=data["train_meta"])


def _qae_model_to_dict(model: QaeModel) -> dict:
    return {
        "encoding": asdict(model.encoding),
        "ansatz": asdict(model.ansatz),
        "layout": asdict(model.layout),
        "params": model.params.tolist(),
        "threshold": model.threshold,
        "train_meta": model.train_meta,
    }


def _qae_model_from_dict(data: dict) -> QaeModel:
    return QaeModel(
        encoding=EncodingSpec(**data["encoding"]),
        ansatz=AnsatzSpec(**data["ansatz"]),
        layout=QaeLayout(**{k: (tuple(v) if isinstance(v, list) else v)
                            for k, v in data["layout"].items()}),
        params=np.asarray(data["params"], dtype=float),
        threshold=data["threshold"],
        train_meta=data["train_meta"],
    )


def pipeline_to_dict(pipe) -> dict:
    out = {
        "format_version": FORMAT_VERSION,
        "kind": pipe.kind,
        "config_hash": pipe.config_hash,
        "seed": pipe.seed,
        "scoring": pipe.scoring,
        "selection": _selection_to_dict(pipe.selection),
    }
    if pipe.kind == "qae":
        out["scaler"] = {"technique": pipe.scaler.technique,
                         "col_min": _arr(pipe.scaler.col_min),
                         "col_max": _arr(pipe.scaler.col_max)}
        out["model"] = _qae_model_to_dict(pipe.model)
    else:
        out["scaler"] = {"col_min": _arr(pipe.scaler.col_min),
                         "col_max": _arr(pipe.scaler.col_max)}
        out["model"] = _cae_model_to_dict(pipe.model)
    return out


def pipeline_from_dict(data: dict):
    if data.get("format_version") != FORMAT_VERSION:
        raise ModelIOError(
            f"unsupported model file version {data.get('format_version')!r}")
    kind = data.get("kind")
    selection = _selection_from_dict(data.get("selection"))
    common = dict(selection=selection, config_hash=data.get("config_hash", ""),
                  seed=data.get("seed", 0), scoring=data.get("scoring", {}))
    if kind == "qae":
        sc = data["scaler"]
        scaler = FeatureScaler(technique=sc["technique"])
        if sc["col_min"] is not None:
            scaler.col_min = np.asarray(sc["col_min"], dtype=float)
            scaler.col_max = np.asarray(sc["col_max"], dtype=float)
        return QaePipeline(model=_qae_model_from_dict(data["model"]),
                           scaler=scaler, **common)
    if kind == "cae":
        sc = data["scaler"]
        scaler = UnitScaler()
        scaler.col_min = np.asarray(sc["col_min"], dtype=float)
        scaler.col_max = np.asarray(sc["col_max"], dtype=float)
        return CaePipeline(model=_cae_model_from_dict(data["model"]),
                           scaler=scaler, **common)
    raise ModelIOError(f"unknown model kind {kind!r}")


def save_pipeline(path, pipe) -> None:
    with open(path, "w") as fh:
        json.dump(pipeline_to_dict(pipe), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_pipeline(path):
    with open(path) as fh:
        return pipeline_from_dict(json.load(fh))


def scoring_mode_from_dict(scoring: dict, seed: int = 0):
    """Build ExactMode/ShotMode from the persisted scoring description."""
    if not scoring or scoring.get("mode", "exact") == "exact":
        return EXACT
    noise = scoring.get("noise")
    noise_model = None
    if noise and (noise.get("readout_flip_prob", 0) or noise.get("depolarizing_prob", 0)):
        noise_model = NoiseModel(readout_flip_prob=noise.get("readout_flip_prob", 0.0),
                                 depolarizing_prob=noise.get("depolarizing_prob", 0.0))
    return ShotMode(shots=int(scoring.get("shots", 1024)), seed=seed,
                    noise=noise_model)
