"""Run configuration: one strict, versioned JSON file per experiment.

Unknown keys are errors (a silently ignored typo in an experiment config
is the main reproducibility hazard). All randomness derives from the
single root ``seed`` through named substreams, so reruns with the same
config file are bit-identical.
"""
from __future__ import annotations

import copy
import hashlib
import json

from .ansatz import AnsatzSpec
from .encode import EncodingSpec
from .features import SelectionSpec
from .qae import QaeLayout, TrainConfig, default_layout
from .synth import SyntheticSpec

CONFIG_VERSION = 1


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "config_version": CONFIG_VERSION,
    "seed": 0,
    "output_dir": "runs/out",
    "model": "qae",  # or "cae"
    "data": {
        "train_csv": None,
        "test_csv": None,
        "label_column": "label",
    },
    "preprocess": {
        "label_column": "sus",
        "smoothing": 10.0,
    },
    "selection": {
        "strategy": None,  # null disables selection
        "k": 8,
        "mi_bins": 16,
        "ae_epochs": 50,
    },
    "encoding": {
        "technique": "DenseAngle",
        "n_features": 8,
        "n_qubits": None,  # EfficientSU2 only; derived otherwise
        "su2_reps": 1,
        "su2_entanglement": "linear",
    },
    "ansatz": {
        "kind": "RealAmplitudes",
        "reps": 1,
        "entanglement": "linear",
    },
    "layout": {
        "n_trash": None,  # null uses the per-technique default
    },
    "train": {
        "iterations": 60,
        "batch_size": 64,
        "init": "random",
        "rho_begin": 0.5,
        "rho_end": 1e-4,
    },
    "cae": {
        "encoder_widths": None,  # null derives [n, (n+latent)//2, latent]
        "latent_width": None,    # null uses half the input width
        "epochs": 50,
        "batch_size": 64,
        "learning_rate": 1e-2,
        "patience": 5,
    },
    "scoring": {
        "mode": "exact",  # or "shots"
        "shots": 1024,
        "noise": {
            "readout_flip_prob": 0.0,
            "depolarizing_prob": 0.0,
        },
    },
    "synth": {
        "n_normal": 1000,
        "n_test_normal": 500,
        "n_anomalous": 500,
        "dimension": 8,
        "cluster_scale": 1.0,
        "displacement": 2.0,
        "profile": "security-log",
        "latent_rank": 3,
    },
    "eval": {
        "bins": 100,
    },
}


def _merge_strict(defaults: dict, user: dict, path: str = "") -> dict:
    out = copy.deepcopy(defaults)
    for key, value in user.items():
        here = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"unknown config key: {here}")
        if isinstance(defaults[key], dict) and defaults[key]:
            if not isinstance(value, dict):
                raise ConfigError(f"config key {here} must be an object")
            out[key] = _merge_strict(defaults[key], value, here)
        else:
            out[key] = value
    return out


def load_config(path: str | None = None, overrides: dict | None = None) -> dict:
    """Load, merge with defaults, and validate a config file.

    ``overrides`` maps dotted key paths (e.g. ``"train.iterations"``) to
    values and is applied after the file, mirroring CLI flags.
    """
    user = {}
    if path is not None:
        with open(path) as fh:
            user = json.load(fh)
        if not isinstance(user, dict):
            raise ConfigError("config file must hold a JSON object")
    cfg = _merge_strict(DEFAULTS, user)
    for dotted, value in (overrides or {}).items():
        _apply_override(cfg, dotted, value)
    if cfg["config_version"] != CONFIG_VERSION:
        raise ConfigError(
            f"unsupported config_version {cfg['config_version']!r} "
            f"(this build reads version {CONFIG_VERSION})")
    validate_config(cfg)
    return cfg


def _apply_override(cfg: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    node = cfg
    for part in parts[:-1]:
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"unknown config key: {dotted}")
        node = node[part]
    if not isinstance(node, dict) or parts[-1] not in node:
        raise ConfigError(f"unknown config key: {dotted}")
    node[parts[-1]] = value


def _file_digest(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def config_hash(cfg: dict) -> str:
    """Stable short hash identifying the experiment.

    ``output_dir`` is excluded (it changes where artifacts land, not what
    they contain) and data paths are replaced by digests of the file
    contents, so equal hashes imply bit-identical artifacts regardless of
    where inputs and outputs live.
    """
    semantic = copy.deepcopy({k: v for k, v in cfg.items() if k != "output_dir"})
    for key in ("train_csv", "test_csv"):
        path = semantic.get("data", {}).get(key)
        if path:
            try:
                semantic["data"][key] = _file_digest(path)
            except OSError:
                pass  # unresolved path: hash the literal value
    canonical = json.dumps(semantic, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def derive_seed(root_seed: int, stream: str) -> int:
    """Named substream seed from the root seed (stable across platforms)."""
    digest = hashlib.sha256(f"{root_seed}:{stream}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


# ---------------------------------------------------------------------------
# typed views
# ---------------------------------------------------------------------------

def encoding_spec(cfg: dict) -> EncodingSpec:
    e = cfg["encoding"]
    return EncodingSpec(technique=e["technique"], n_features=e["n_features"],
                        n_qubits=e["n_qubits"], su2_reps=e["su2_reps"],
                        su2_entanglement=e["su2_entanglement"])


def ansatz_spec(cfg: dict, n_qubits: int) -> AnsatzSpec:
    a = cfg["ansatz"]
    return AnsatzSpec(kind=a["kind"], n_qubits=n_qubits, reps=a["reps"],
                      entanglement=a["entanglement"],
                      seed=derive_seed(cfg["seed"], "ansatz"))


def layout_spec(cfg: dict, encoding: EncodingSpec) -> QaeLayout:
    n_trash = cfg["layout"]["n_trash"]
    if n_trash is None:
        return default_layout(encoding)
    return QaeLayout.standard(encoding.n_qubits, int(n_trash))


def selection_spec(cfg: dict) -> SelectionSpec | None:
    s = cfg["selection"]
    if s["strategy"] is None:
        return None
    return SelectionSpec(strategy=s["strategy"], k=s["k"], mi_bins=s["mi_bins"],
                         seed=derive_seed(cfg["seed"], "selection"),
                         ae_epochs=s["ae_epochs"])


def train_config(cfg: dict) -> TrainConfig:
    t = cfg["train"]
    return TrainConfig(iterations=t["iterations"], batch_size=t["batch_size"],
                       seed=derive_seed(cfg["seed"], "train"), init=t["init"],
                       rho_begin=t["rho_begin"], rho_end=t["rho_end"])


def synthetic_spec(cfg: dict) -> SyntheticSpec:
    s = cfg["synth"]
    return SyntheticSpec(n_normal=s["n_normal"], n_test_normal=s["n_test_normal"],
                         n_anomalous=s["n_anomalous"], dimension=s["dimension"],
                         cluster_scale=s["cluster_scale"],
                         displacement=s["displacement"], profile=s["profile"],
                         latent_rank=s["latent_rank"],
                         seed=derive_seed(cfg["seed"], "synth"))


def validate_config(cfg: dict) -> None:
    """Re-validate cross-module constraints (qubit agreement, enums)."""
    if cfg["model"] not in ("qae", "cae"):
        raise ConfigError(f"model must be 'qae' or 'cae', got {cfg['model']!r}")
    if cfg["scoring"]["mode"] not in ("exact", "shots"):
        raise ConfigError("scoring.mode must be 'exact' or 'shots'")
    if cfg["scoring"]["shots"] < 1:
        raise ConfigError("scoring.shots must be >= 1")
    for key in ("readout_flip_prob", "depolarizing_prob"):
        p = cfg["scoring"]["noise"][key]
        if not 0.0 <= p <= 1.0:
            raise ConfigError(f"scoring.noise.{key} must lie in [0, 1]")
    try:
        sel = selection_spec(cfg)
        if cfg["model"] == "qae":
            n_features = sel.k if sel is not None else cfg["encoding"]["n_features"]
            if n_features != cfg["encoding"]["n_features"]:
                raise ConfigError(
                    f"selection.k={n_features} disagrees with "
                    f"encoding.n_features={cfg['encoding']['n_features']}")
            enc = encoding_spec(cfg)
            layout_spec(cfg, enc)  # validates trash split
            ansatz_spec(cfg, enc.n_qubits)
            train_config(cfg)
        synthetic_spec(cfg)
    except ConfigError:
        raise
    except ValueError as err:
        raise ConfigError(str(err)) from err
