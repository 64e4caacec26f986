"""Command-line pipeline: preprocess, synth, train, eval, compare, select-report.

Every artifact embeds the config hash and root seed; reruns with an
identical config produce byte-identical files. Exit codes: 2 for config
errors, 3 for data errors, 4 for runtime failures.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from . import cae as cae_mod
from . import config as cfgmod
from . import metrics, qae
from .cae import CaeArch, CaeTrainConfig
from .config import ConfigError, config_hash, derive_seed, load_config
from .encode import scale_features
from .features import (FEATURE_COLUMNS, STRATEGIES, PreprocessorState,
                       SchemaError, SelectionSpec, feature_stats,
                       group_variance_summary, preprocess, select_features)
from .pipeline import (CaePipeline, QaePipeline, UnitScaler, load_pipeline,
                       save_pipeline, scoring_mode_from_dict)
from .synth import make_synthetic

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_RUNTIME = 4


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()[:16]


def _read_feature_csv(path, label_column: str):
    """Read a numeric feature CSV; returns (matrix, labels-or-None, columns)."""
    frame = pd.read_csv(path)
    if frame.shape[0] == 0:
        raise SchemaError(f"{path} holds no rows")
    labels = None
    if label_column in frame.columns:
        labels = (pd.to_numeric(frame[label_column]).to_numpy() > 0).astype(int)
        frame = frame.drop(columns=[label_column])
    matrix = frame.to_numpy(dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise SchemaError(f"{path} contains non-finite feature values")
    return matrix, labels, list(frame.columns)


def _out_dir(cfg) -> Path:
    out = Path(cfg["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_preprocess(cfg: dict, input_csv: str, state_path: str | None = None) -> dict:
    """Raw event CSV -> cached 24-column feature CSV + fitted encoder state."""
    out = _out_dir(cfg)
    raw = pd.read_csv(input_csv)
    state = None
    if state_path:
        with open(state_path) as fh:
            state = PreprocessorState.from_dict(json.load(fh)["state"])
    features, labels, state = preprocess(
        raw, state=state,
        label_column=cfg["preprocess"]["label_column"],
        smoothing=cfg["preprocess"]["smoothing"])

    cached = features.copy()
    if labels is not None:
        cached["label"] = labels
    features_path = out / "features.csv"
    cached.to_csv(features_path, index=False)

    state_file = out / "preprocessor_state.json"
    _write_json(state_file, {"config_hash": config_hash(cfg), "seed": cfg["seed"],
                             "state": state.to_dict()})
    print(f"wrote {features_path} ({features.shape[0]} rows x "
          f"{features.shape[1]} feature columns) and {state_file}")
    return {"features_csv": str(features_path), "state": str(state_file),
            "n_columns": features.shape[1]}


def cmd_synth(cfg: dict) -> dict:
    """Seeded synthetic train/test CSV pair."""
    out = _out_dir(cfg)
    spec = cfgmod.synthetic_spec(cfg)
    train, test = make_synthetic(spec)
    if spec.n_anomalous == 0:
        print("note: n_anomalous=0, test split holds normal rows only")
    train_path, test_path = out / "synth_train.csv", out / "synth_test.csv"
    train.to_csv(train_path, index=False)
    test.to_csv(test_path, index=False)
    meta = {"config_hash": config_hash(cfg), "seed": cfg["seed"],
            "train_rows": len(train), "test_rows": len(test),
            "n_anomalous": spec.n_anomalous}
    _write_json(out / "synth_meta.json", meta)
    print(f"wrote {train_path} ({len(train)} rows) and {test_path} ({len(test)} rows)")
    return {"train_csv": str(train_path), "test_csv": str(test_path)}


def _fit_qae_pipeline(cfg: dict, matrix, labels) -> QaePipeline:
    sel_spec = cfgmod.selection_spec(cfg)
    selection = None
    if sel_spec is not None:
        selection = select_features(matrix, labels, sel_spec)
        matrix = selection.apply(matrix)
    if matrix.shape[1] != cfg["encoding"]["n_features"]:
        raise ConfigError(
            f"encoding.n_features={cfg['encoding']['n_features']} but the "
            f"training matrix has {matrix.shape[1]} columns after selection")
    encoding = cfgmod.encoding_spec(cfg)
    layout = cfgmod.layout_spec(cfg, encoding)
    ansatz = cfgmod.ansatz_spec(cfg, encoding.n_qubits)

    samples, scaler = scale_features(matrix, encoding)
    model = qae.train(samples, encoding, ansatz, layout, cfgmod.train_config(cfg))

    mode = scoring_mode_from_dict(cfg["scoring"], seed=derive_seed(cfg["seed"], "sampling"))
    train_scores = qae.score_samples(model, samples, mode=mode)
    model = qae.calibrate_threshold(model, train_scores)
    return QaePipeline(model=model, scaler=scaler, selection=selection,
                       config_hash=config_hash(cfg), seed=cfg["seed"],
                       scoring=cfg["scoring"])


def _fit_cae_pipeline(cfg: dict, matrix, labels) -> CaePipeline:
    sel_spec = cfgmod.selection_spec(cfg)
    selection = None
    if sel_spec is not None:
        selection = select_features(matrix, labels, sel_spec)
        matrix = selection.apply(matrix)
    n = matrix.shape[1]
    widths = cfg["cae"]["encoder_widths"]
    if widths is None:
        latent = cfg["cae"]["latent_width"] or max(1, n // 2)
        widths = [n, max(latent, (n + latent) // 2), latent]
    if widths[0] != n:
        raise ConfigError(
            f"cae.encoder_widths starts at {widths[0]} but the training "
            f"matrix has {n} columns after selection")
    arch = CaeArch(encoder_widths=tuple(widths),
                   seed=derive_seed(cfg["seed"], "cae-init"))
    scaler = UnitScaler().fit(matrix)
    scaled = scaler.transform(matrix)
    train_cfg = CaeTrainConfig(epochs=cfg["cae"]["epochs"],
                               batch_size=cfg["cae"]["batch_size"],
                               learning_rate=cfg["cae"]["learning_rate"],
                               patience=cfg["cae"]["patience"],
                               seed=derive_seed(cfg["seed"], "cae-train"))
    model = cae_mod.cae_train(scaled, arch, config=train_cfg)
    model = cae_mod.calibrate_threshold(model, cae_mod.cae_scores(model, scaled))
    return CaePipeline(model=model, scaler=scaler, selection=selection,
                       config_hash=config_hash(cfg), seed=cfg["seed"],
                       scoring={"mode": "exact"})


def cmd_train(cfg: dict) -> dict:
    """Selection -> scaling -> model training -> threshold calibration."""
    train_csv = cfg["data"]["train_csv"]
    if not train_csv:
        raise ConfigError("data.train_csv is not set")
    matrix, labels, _ = _read_feature_csv(train_csv, cfg["data"]["label_column"])

    if cfg["model"] == "qae":
        pipe = _fit_qae_pipeline(cfg, matrix, labels)
        loss_trace = pipe.model.train_meta["loss_trace"]
    else:
        pipe = _fit_cae_pipeline(cfg, matrix, labels)
        loss_trace = pipe.model.train_meta["loss_trace"]

    out = _out_dir(cfg)
    model_path = out / f"model_{cfg['model']}.json"
    save_pipeline(model_path, pipe)
    trace_path = out / f"loss_trace_{cfg['model']}.csv"
    with open(trace_path, "w") as fh:
        fh.write("iteration,loss\n")
        for i, v in enumerate(loss_trace):
            fh.write(f"{i},{v!r}\n")
    print(f"wrote {model_path} (threshold {pipe.threshold:.6f}) and {trace_path}")
    return {"model": str(model_path), "loss_trace": str(trace_path),
            "threshold": pipe.threshold}


def cmd_eval(model_path: str, test_csv: str, cfg: dict,
             label_column: str = "label", tag: str = "") -> dict:
    """Score a test CSV with a persisted model; never mutates the model."""
    pipe = load_pipeline(model_path)
    matrix, labels, _ = _read_feature_csv(test_csv, label_column)
    if labels is None:
        raise SchemaError(f"{test_csv} lacks the label column {label_column!r}")
    expected = pipe.n_input_features if pipe.selection is not None else None
    if expected is not None and matrix.shape[1] < expected:
        raise ConfigError(
            f"model expects at least {expected} feature columns, "
            f"test data has {matrix.shape[1]}")
    if pipe.selection is None:
        needed = (pipe.model.encoding.n_features if pipe.kind == "qae"
                  else pipe.model.arch.input_width)
        if matrix.shape[1] != needed:
            raise ConfigError(
                f"model expects {needed} feature columns, test data has "
                f"{matrix.shape[1]}")

    mode = scoring_mode_from_dict(pipe.scoring, seed=derive_seed(pipe.seed, "eval-sampling"))
    scores = pipe.score(matrix, mode=mode)
    report = metrics.evaluate(scores, labels, pipe.threshold,
                              bins=cfg["eval"]["bins"])
    noisy = bool(pipe.scoring.get("noise", {}) and (
        pipe.scoring["noise"].get("readout_flip_prob", 0)
        or pipe.scoring["noise"].get("depolarizing_prob", 0)))
    # basenames only: artifacts must be byte-identical regardless of where
    # a rerun writes them, and the sha256 already pins the data content
    report.meta = {
        "model_file": Path(model_path).name,
        "model_kind": pipe.kind,
        "test_csv": Path(test_csv).name,
        "test_sha256": _file_sha256(test_csv),
        "config_hash": pipe.config_hash,
        "seed": pipe.seed,
        "noisy_mode": noisy,
        "mean_score": float(np.mean(scores)),
    }

    out = _out_dir(cfg)
    suffix = f"_{tag}" if tag else f"_{pipe.kind}"
    report_path = out / f"report{suffix}.json"
    payload = report.to_dict()
    payload["histogram_csv"] = f"histogram{suffix}.csv"
    _write_json(report_path, payload)
    metrics.export_histograms(out / f"histogram{suffix}.csv",
                              scores[labels == 0], scores[labels == 1],
                              bins=cfg["eval"]["bins"])
    print(f"wrote {report_path}: f1={report.f1:.4f} auroc={report.auroc} "
          f"separation={report.separation}")
    return payload


def cmd_compare(model_paths: list[str], test_csv: str, cfg: dict) -> list[dict]:
    """Side-by-side metric table, one row per model in argument order."""
    test_hash = _file_sha256(test_csv)
    rows = []
    for path in model_paths:
        payload = cmd_eval(path, test_csv, cfg,
                           label_column=cfg["data"]["label_column"],
                           tag=Path(path).stem)
        rows.append({
            "model": Path(path).name,
            "kind": payload["model_kind"],
            "f1": payload["f1"],
            "auroc": payload["auroc"],
            "separation": payload["separation"],
            "test_sha256": test_hash,
        })
    out = _out_dir(cfg)
    table_path = out / "compare.csv"
    pd.DataFrame(rows).to_csv(table_path, index=False)
    print(f"\n{'model':40s} {'kind':5s} {'F1':>8s} {'AUROC':>8s} {'separation':>11s}")
    for r in rows:
        sep = "n/a" if r["separation"] is None else f"{r['separation']:.4f}"
        auc = "n/a" if r["auroc"] is None else f"{r['auroc']:.4f}"
        print(f"{r['model']:40s} {r['kind']:5s} {r['f1']:8.4f} "
              f"{auc:>8s} {sep:>11s}")
    print(f"wrote {table_path}")
    return rows


def cmd_select_report(features_csv: str, cfg: dict) -> list[dict]:
    """Selected columns and variance summaries for every applicable strategy."""
    matrix, labels, columns = _read_feature_csv(
        features_csv, cfg["data"]["label_column"])
    stats = feature_stats(matrix)
    k = cfg["selection"]["k"]
    rows = []
    for strategy in STRATEGIES:
        spec = SelectionSpec(strategy=strategy, k=k,
                             mi_bins=cfg["selection"]["mi_bins"],
                             seed=derive_seed(cfg["seed"], "selection"),
                             ae_epochs=cfg["selection"]["ae_epochs"])
        try:
            result = select_features(matrix, labels, spec)
        except ValueError as err:
            rows.append({"strategy": strategy, "columns": None,
                         "variance_mean": None, "variance_std": None,
                         "note": str(err)})
            continue
        if result.indices is not None:
            mu, sigma = group_variance_summary(stats.variances, result.indices)
            rows.append({"strategy": strategy,
                         "columns": ";".join(columns[i] for i in result.indices),
                         "variance_mean": mu, "variance_std": sigma, "note": ""})
        else:
            rows.append({"strategy": strategy, "columns": "(transform)",
                         "variance_mean": None, "variance_std": None,
                         "note": "k-dimensional fitted transform"})
    out = _out_dir(cfg)
    path = out / "selection_report.csv"
    pd.DataFrame(rows).to_csv(path, index=False)
    for r in rows:
        print(f"{r['strategy']:18s} {r['columns'] or r['note']}")
    print(f"wrote {path}")
    return rows


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _parse_set(pairs: list[str]) -> dict:
    overrides = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(f"--set expects key.path=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        overrides[key] = value
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qaedet",
        description="Quantum-autoencoder anomaly detection pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--set", action="append", dest="overrides", metavar="KEY=VALUE",
                       help="override a config key (dotted path, JSON value)")
        p.add_argument("--output-dir", help="shortcut for --set output_dir=...")
        p.add_argument("--seed", type=int, help="shortcut for --set seed=...")

    p = sub.add_parser("preprocess", help="raw event CSV -> 24-column feature CSV")
    common(p)
    p.add_argument("--input", required=True, help="raw event CSV")
    p.add_argument("--state", help="reuse a fitted preprocessor state file")

    p = sub.add_parser("synth", help="generate a synthetic train/test CSV pair")
    common(p)

    p = sub.add_parser("train", help="train a model and calibrate its threshold")
    common(p)
    p.add_argument("--train-csv", help="shortcut for --set data.train_csv=...")

    p = sub.add_parser("eval", help="evaluate a persisted model on a test CSV")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--test-csv", required=True)

    p = sub.add_parser("compare", help="side-by-side metrics for several models")
    common(p)
    p.add_argument("--models", required=True, nargs="+")
    p.add_argument("--test-csv", required=True)

    p = sub.add_parser("select-report", help="feature-selection strategy report")
    common(p)
    p.add_argument("--features", required=True, help="feature matrix CSV")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        overrides = _parse_set(args.overrides)
        if getattr(args, "output_dir", None):
            overrides["output_dir"] = args.output_dir
        if getattr(args, "seed", None) is not None:
            overrides["seed"] = args.seed
        if getattr(args, "train_csv", None):
            overrides["data.train_csv"] = args.train_csv
        cfg = load_config(args.config, overrides)

        if args.command == "preprocess":
            cmd_preprocess(cfg, args.input, args.state)
        elif args.command == "synth":
            cmd_synth(cfg)
        elif args.command == "train":
            cmd_train(cfg)
        elif args.command == "eval":
            cmd_eval(args.model, args.test_csv, cfg,
                     label_column=cfg["data"]["label_column"])
        elif args.command == "compare":
            cmd_compare(args.models, args.test_csv, cfg)
        elif args.command == "select-report":
            cmd_select_report(args.features, cfg)
        return EXIT_OK
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (SchemaError, FileNotFoundError, pd.errors.ParserError,
            json.JSONDecodeError) as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except Exception as err:  # noqa: BLE001 -- CLI boundary
        print(f"runtime error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
