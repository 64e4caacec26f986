"""Tabular preprocessing for kernel-event security logs and feature selection.

Raw events carry process/thread identifiers, a namespace id, a syscall
return value, an event id, and up to five argument records per row. The
transformation pipeline maps these onto exactly 24 numeric columns:

* processId, parentProcessId: 0 if in {0, 1, 2} else 1
* userId: 0 if < 1000 else 1
* mountNameSpace: 0 if equal to 4026531840 else 1
* returnValue: 0 if zero, 1 if positive, 2 if negative
* timestamp, eventName, stackAddresses, hostName: dropped
* processName, threadId, eventId: target-encoded
* args: flattened slot-major into 15 columns (arg1_name, arg1_type,
  arg1_value, arg2_name, ...), missing slots filled with the sentinel
  category "ABSENT", then target-encoded
* argsNum: standard-scaled

All categorical encoders and the argsNum scaler are fitted on the
training split only and reused verbatim on test data.
"""
from __future__ import annotations

import ast
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.stats import kendalltau

from .cae import CaeArch, CaeModel, cae_latent, cae_train

logger = logging.getLogger(__name__)

ABSENT = "ABSENT"  # sentinel category for missing arg slots
N_ARG_SLOTS = 5

ARG_COLUMNS = [f"arg{i}_{part}" for i in range(1, N_ARG_SLOTS + 1)
               for part in ("name", "type", "value")]

# 24 output columns in schema order; FirstN selection counts from here
FEATURE_COLUMNS = [
    "processId", "parentProcessId", "userId", "mountNameSpace",
    "returnValue", "eventId", "processName", "threadId", "argsNum",
] + ARG_COLUMNS

TARGET_ENCODED_COLUMNS = ["eventId", "processName", "threadId"] + ARG_COLUMNS

REQUIRED_RAW_COLUMNS = [
    "processId", "parentProcessId", "userId", "mountNameSpace",
    "returnValue", "eventId", "processName", "threadId", "argsNum", "args",
]

DEFAULT_LABEL_COLUMN = "sus"


class SchemaError(ValueError):
    """A required raw column is missing or malformed."""


class FeatureError(ValueError):
    pass


@dataclass
class TargetEncoder:
    """Smoothed mean-label encoding for one categorical column.

    A category seen ``count`` times with mean label ``m`` maps to
    ``(count * m + smoothing * prior) / (count + smoothing)``; categories
    unseen during fit map to the prior.
    """

    smoothing: float = 10.0
    prior: float | None = None
    mapping: dict = field(default_factory=dict)

    def fit(self, column, labels) -> "TargetEncoder":
        column = pd.Series(column).reset_index(drop=True)
        labels = np.asarray(labels, dtype=float).ravel()
        if column.size == 0:
            raise FeatureError("cannot fit a target encoder on empty data")
        if column.size != labels.size:
            raise FeatureError("column and labels must have equal length")
        self.prior = float(labels.mean())
        self.mapping = {}
        frame = pd.DataFrame({"cat": column.astype(str), "y": labels})
        grouped = frame.groupby("cat", sort=True)["y"].agg(["count", "mean"])
        for cat, row in grouped.iterrows():
            count, mean = float(row["count"]), float(row["mean"])
            self.mapping[cat] = (count * mean + self.smoothing * self.prior) / (
                count + self.smoothing)
        return self

    def transform(self, column) -> np.ndarray:
        if self.prior is None:
            raise FeatureError("target encoder is not fitted")
        column = pd.Series(column).astype(str)
        return column.map(self.mapping).fillna(self.prior).to_numpy(dtype=float)

    def to_dict(self) -> dict:
        return {"smoothing": self.smoothing, "prior": self.prior,
                "mapping": [[k, v] for k, v in sorted(self.mapping.items())]}

    @classmethod
    def from_dict(cls, data: dict) -> "TargetEncoder":
        enc = cls(smoothing=data["smoothing"], prior=data["prior"])
        enc.mapping = {k: v for k, v in data["mapping"]}
        return enc


def target_encode(column, labels, smoothing: float = 10.0):
    """Fit-and-transform convenience; returns ``(encoded, encoder)``."""
    enc = TargetEncoder(smoothing=smoothing).fit(column, labels)
    return enc.transform(column), enc


@dataclass
class PreprocessorState:
    """Fitted encoders and scaler statistics, reusable on test data."""

    smoothing: float = 10.0
    label_column: str = DEFAULT_LABEL_COLUMN
    encoders: dict = field(default_factory=dict)
    argsnum_mean: float | None = None
    argsnum_std: float | None = None

    @property
    def is_fitted(self) -> bool:
        return self.argsnum_mean is not None

    def to_dict(self) -> dict:
        return {
            "smoothing": self.smoothing,
            "label_column": self.label_column,
            "argsnum_mean": self.argsnum_mean,
            "argsnum_std": self.argsnum_std,
            "encoders": {k: enc.to_dict() for k, enc in sorted(self.encoders.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PreprocessorState":
        state = cls(smoothing=data["smoothing"], label_column=data["label_column"],
                    argsnum_mean=data["argsnum_mean"], argsnum_std=data["argsnum_std"])
        state.encoders = {k: TargetEncoder.from_dict(v)
                          for k, v in data["encoders"].items()}
        return state


def parse_args_cell(cell) -> list[dict]:
    """Parse one raw ``args`` cell: a list of records or its text form."""
    if isinstance(cell, list):
        return cell
    if cell is None or (isinstance(cell, float) and np.isnan(cell)):
        return []
    text = str(cell).strip()
    if not text or text == "[]":
        return []
    try:
        parsed = ast.literal_eval(text)
    except (ValueError, SyntaxError):
        logger.warning("unparseable args cell %r; treating as empty", text[:80])
        return []
    return parsed if isinstance(parsed, list) else []


def _flatten_args(args_column) -> pd.DataFrame:
    rows = []
    for cell in args_column:
        records = parse_args_cell(cell)
        if len(records) > N_ARG_SLOTS:
            raise SchemaError(f"args list longer than {N_ARG_SLOTS} records")
        row = []
        for i in range(N_ARG_SLOTS):
            if i < len(records) and isinstance(records[i], dict):
                rec = records[i]
                row.extend([str(rec.get("name", ABSENT)),
                            str(rec.get("type", ABSENT)),
                            str(rec.get("value", ABSENT))])
            else:
                row.extend([ABSENT, ABSENT, ABSENT])
        rows.append(row)
    return pd.DataFrame(rows, columns=ARG_COLUMNS)


def _resolve_columns(raw: pd.DataFrame) -> dict:
    """Case-insensitive lookup of required raw columns."""
    lower = {c.lower(): c for c in raw.columns}
    resolved = {}
    for name in REQUIRED_RAW_COLUMNS:
        actual = lower.get(name.lower())
        if actual is None:
            raise SchemaError(f"missing required column: {name}")
        resolved[name] = actual
    return resolved


def _extract_labels(raw: pd.DataFrame, label_column: str) -> np.ndarray | None:
    lower = {c.lower(): c for c in raw.columns}
    actual = lower.get(label_column.lower())
    if actual is None:
        return None
    return (pd.to_numeric(raw[actual], errors="raise").to_numpy() > 0).astype(int)


def preprocess(raw: pd.DataFrame, state: PreprocessorState | None = None,
               label_column: str = DEFAULT_LABEL_COLUMN,
               smoothing: float = 10.0):
    """Transform a raw event table into the 24-column feature matrix.

    Pass ``state=None`` to fit encoders on this data (training split; the
    label column is then required). Returns
    ``(features, labels, state)`` where ``labels`` is None when the
    label column is absent.
    """
    if raw.shape[0] == 0:
        raise SchemaError("raw table is empty")
    cols = _resolve_columns(raw)
    labels = _extract_labels(raw, state.label_column if state else label_column)

    fitting = state is None
    if fitting:
        if labels is None:
            raise SchemaError(
                f"missing required column: {label_column} (needed to fit encoders)")
        state = PreprocessorState(smoothing=smoothing, label_column=label_column)

    out = pd.DataFrame(index=range(raw.shape[0]))
    pid = pd.to_numeric(raw[cols["processId"]], errors="raise")
    out["processId"] = (~pid.isin([0, 1, 2])).astype(int).to_numpy()
    ppid = pd.to_numeric(raw[cols["parentProcessId"]], errors="raise")
    out["parentProcessId"] = (~ppid.isin([0, 1, 2])).astype(int).to_numpy()
    uid = pd.to_numeric(raw[cols["userId"]], errors="raise")
    out["userId"] = (uid >= 1000).astype(int).to_numpy()
    mnt = pd.to_numeric(raw[cols["mountNameSpace"]], errors="raise")
    out["mountNameSpace"] = (mnt != 4026531840).astype(int).to_numpy()
    ret = pd.to_numeric(raw[cols["returnValue"]], errors="raise")
    out["returnValue"] = np.select([ret == 0, ret > 0], [0, 1], default=2)

    args_flat = _flatten_args(raw[cols["args"]])
    categorical = {
        "eventId": raw[cols["eventId"]],
        "processName": raw[cols["processName"]],
        "threadId": raw[cols["threadId"]],
    }
    for col in ARG_COLUMNS:
        categorical[col] = args_flat[col]

    for col in TARGET_ENCODED_COLUMNS:
        if fitting:
            state.encoders[col] = TargetEncoder(smoothing=state.smoothing).fit(
                categorical[col], labels)
        out[col] = state.encoders[col].transform(categorical[col])

    argsnum = pd.to_numeric(raw[cols["argsNum"]], errors="raise").to_numpy(dtype=float)
    if fitting:
        state.argsnum_mean = float(argsnum.mean())
        state.argsnum_std = float(argsnum.std(ddof=0))
    if state.argsnum_std > 0:
        out["argsNum"] = (argsnum - state.argsnum_mean) / state.argsnum_std
    else:
        out["argsNum"] = np.zeros_like(argsnum)

    out = out[FEATURE_COLUMNS]
    if not np.all(np.isfinite(out.to_numpy())):
        raise FeatureError("feature matrix contains non-finite values")
    return out, labels, state


# ---------------------------------------------------------------------------
# feature selection
# ---------------------------------------------------------------------------

STRATEGIES = ("FirstN", "AeLatent", "PcaReduce", "PcaFilter", "MutualInfo",
              "Anova", "Kendall", "LeastCorrelated", "VarianceBalanced",
              "HighestVariance")

_SUPERVISED = ("MutualInfo", "Anova", "Kendall")


@dataclass(frozen=True)
class SelectionSpec:
    strategy: str
    k: int = 8
    mi_bins: int = 16
    seed: int = 0       # AeLatent training seed
    ae_epochs: int = 50

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise FeatureError(f"unknown selection strategy {self.strategy!r}")
        if self.k < 1:
            raise FeatureError("k must be >= 1")
        if self.mi_bins < 2:
            raise FeatureError("mi_bins must be >= 2")


@dataclass
class SelectionResult:
    """Either a column-index subset or a fitted linear/AE transform."""

    spec: SelectionSpec
    indices: list[int] | None = None
    pca_mean: np.ndarray | None = None
    pca_components: np.ndarray | None = None  # (n_cols, k)
    ae_model: CaeModel | None = None

    def apply(self, matrix) -> np.ndarray:
        matrix = np.asarray(matrix, dtype=float)
        if self.indices is not None:
            return matrix[:, self.indices]
        if self.pca_components is not None:
            return (matrix - self.pca_mean) @ self.pca_components
        if self.ae_model is not None:
            return cae_latent(self.ae_model, matrix)
        raise FeatureError("selection result is empty")


def _check_selection_inputs(matrix, spec: SelectionSpec):
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] == 0:
        raise FeatureError("matrix must be a non-empty 2-D array")
    if spec.k > matrix.shape[1]:
        raise FeatureError(f"k={spec.k} exceeds {matrix.shape[1]} columns")
    return matrix


def _check_labels(labels, n_rows, strategy):
    if labels is None:
        raise FeatureError(f"{strategy} selection requires labels")
    labels = np.asarray(labels).ravel().astype(int)
    if labels.size != n_rows:
        raise FeatureError("labels length must match matrix rows")
    if labels.min() == labels.max():
        raise FeatureError(f"{strategy} selection needs both classes present")
    return labels


def _top_k(scores: np.ndarray, k: int) -> list[int]:
    """Indices of the k largest scores, ties broken toward lower index."""
    order = np.lexsort((np.arange(scores.size), -scores))
    return sorted(int(i) for i in order[:k])


def mutual_information(column: np.ndarray, labels: np.ndarray, bins: int) -> float:
    """MI between a binned continuous column and binary labels (nats)."""
    lo, hi = float(column.min()), float(column.max())
    if hi <= lo:
        return 0.0
    binned = np.clip(((column - lo) / (hi - lo) * bins).astype(int), 0, bins - 1)
    mi = 0.0
    n = column.size
    for b in np.unique(binned):
        in_bin = binned == b
        p_b = in_bin.sum() / n
        for y in (0, 1):
            p_by = np.sum(in_bin & (labels == y)) / n
            if p_by > 0:
                p_y = np.sum(labels == y) / n
                mi += p_by * np.log(p_by / (p_b * p_y))
    return float(max(mi, 0.0))


def anova_f(column: np.ndarray, labels: np.ndarray) -> float:
    """One-way F statistic between the two label groups."""
    g0, g1 = column[labels == 0], column[labels == 1]
    grand = column.mean()
    ss_between = g0.size * (g0.mean() - grand) ** 2 + g1.size * (g1.mean() - grand) ** 2
    ss_within = float(((g0 - g0.mean()) ** 2).sum() + ((g1 - g1.mean()) ** 2).sum())
    df_within = column.size - 2
    if ss_within <= 0 or df_within <= 0:
        return float("inf") if ss_between > 0 else 0.0
    return float(ss_between / (ss_within / df_within))


def kendall_tau_b(column: np.ndarray, labels: np.ndarray) -> float:
    """Kendall's tau-b with tie correction; 0 for constant columns."""
    tau = kendalltau(column, labels).statistic
    return 0.0 if np.isnan(tau) else float(tau)


def _pca_components(matrix: np.ndarray, k: int):
    variances = matrix.var(axis=0)
    if int(np.sum(variances > 0)) < k:
        raise FeatureError(
            f"PCA needs at least {k} non-constant columns, "
            f"found {int(np.sum(variances > 0))}")
    mean = matrix.mean(axis=0)
    cov = np.cov(matrix, rowvar=False, ddof=0)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1][:k]
    comps = eigvecs[:, order]
    # deterministic sign: largest-magnitude loading of each component positive
    for j in range(comps.shape[1]):
        pivot = int(np.argmax(np.abs(comps[:, j])))
        if comps[pivot, j] < 0:
            comps[:, j] = -comps[:, j]
    return mean, comps


def _least_correlated(matrix: np.ndarray, k: int) -> list[int]:
    n_cols = matrix.shape[1]
    stds = matrix.std(axis=0)
    safe = np.where(stds > 0, stds, 1.0)
    centered = (matrix - matrix.mean(axis=0)) / safe
    corr = (centered.T @ centered) / matrix.shape[0]
    corr[stds == 0, :] = 0.0  # constant columns carry no linear relation
    corr[:, stds == 0] = 0.0
    np.fill_diagonal(corr, 0.0)
    abs_corr = np.abs(corr)

    # start from the column whose worst pairwise correlation is smallest
    selected = [int(np.argmin(abs_corr.max(axis=1)))]
    while len(selected) < k:
        candidates = [c for c in range(n_cols) if c not in selected]
        worst = [abs_corr[c, selected].max() for c in candidates]
        selected.append(candidates[int(np.argmin(worst))])
    return sorted(selected)


def _variance_balanced(variances: np.ndarray, k: int) -> list[int]:
    """Low/mid/high variance groups contribute ~k/4, k/2, k/4 columns.

    For 24 columns and k=8 this is the 2 + 4 + 2 split across the three
    8-column variance groups.
    """
    n = variances.size
    order = np.argsort(variances, kind="stable")
    low_group = order[: n // 3]
    mid_group = order[n // 3: 2 * n // 3]
    high_group = order[2 * n // 3:]
    n_low = max(1, round(k / 4)) if k >= 3 else max(0, k - 1)
    n_high = n_low
    n_mid = k - n_low - n_high
    # cap at group sizes, spilling any remainder into the outer groups
    if n_mid > len(mid_group):
        spill = n_mid - len(mid_group)
        n_mid = len(mid_group)
        n_low += spill - spill // 2
        n_high += spill // 2
    n_low = min(n_low, len(low_group))
    n_high = min(n_high, len(high_group))
    n_mid = k - n_low - n_high
    if n_mid < 0 or n_mid > len(mid_group):
        raise FeatureError(f"cannot form a balanced split for k={k} over {n} columns")
    picks = []
    picks.extend(low_group[:n_low])              # lowest of the low group
    mid_start = max(0, (len(mid_group) - n_mid) // 2)
    picks.extend(mid_group[mid_start: mid_start + n_mid])  # center of the mid group
    picks.extend(high_group[len(high_group) - n_high:])    # top of the high group
    return sorted(int(i) for i in picks)


def select_features(matrix, labels, spec: SelectionSpec) -> SelectionResult:
    """Pick k columns (or fit a k-dimensional transform) from a matrix.

    MutualInfo, Anova, and Kendall rank columns against the labels;
    the remaining strategies are unsupervised. PcaReduce and AeLatent
    return a fitted transform instead of column indices.
    """
    matrix = _check_selection_inputs(matrix, spec)
    strategy, k = spec.strategy, spec.k

    if strategy == "FirstN":
        return SelectionResult(spec, indices=list(range(k)))

    if strategy in _SUPERVISED:
        labels = _check_labels(labels, matrix.shape[0], strategy)
        if strategy == "MutualInfo":
            scores = np.array([mutual_information(matrix[:, j], labels, spec.mi_bins)
                               for j in range(matrix.shape[1])])
        elif strategy == "Anova":
            scores = np.array([anova_f(matrix[:, j], labels)
                               for j in range(matrix.shape[1])])
        else:
            scores = np.abs([kendall_tau_b(matrix[:, j], labels)
                             for j in range(matrix.shape[1])])
        return SelectionResult(spec, indices=_top_k(np.asarray(scores, float), k))

    if strategy == "HighestVariance":
        return SelectionResult(spec, indices=_top_k(matrix.var(axis=0), k))

    if strategy == "VarianceBalanced":
        return SelectionResult(spec, indices=_variance_balanced(matrix.var(axis=0), k))

    if strategy == "LeastCorrelated":
        return SelectionResult(spec, indices=_least_correlated(matrix, k))

    if strategy == "PcaReduce":
        mean, comps = _pca_components(matrix, k)
        return SelectionResult(spec, pca_mean=mean, pca_components=comps)

    if strategy == "PcaFilter":
        _, comps = _pca_components(matrix, k)
        scores = np.abs(comps).max(axis=1)
        return SelectionResult(spec, indices=_top_k(scores, k))

    # AeLatent: encoder half of a trained autoencoder
    n_cols = matrix.shape[1]
    arch = CaeArch(encoder_widths=(n_cols, (n_cols + k) // 2, k), seed=spec.seed)
    model = cae_train(matrix, arch, epochs=spec.ae_epochs)
    return SelectionResult(spec, ae_model=model)


@dataclass(frozen=True)
class FeatureStats:
    means: np.ndarray
    variances: np.ndarray


def feature_stats(matrix) -> FeatureStats:
    """Per-column population mean and variance."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] == 0:
        raise FeatureError("matrix must be a non-empty 2-D array")
    return FeatureStats(means=matrix.mean(axis=0),
                        variances=matrix.var(axis=0, ddof=0))


def group_variance_summary(variances, indices) -> tuple[float, float]:
    """Mean and population stddev of the variances of selected columns."""
    variances = np.asarray(variances, dtype=float)
    picked = variances[list(indices)]
    if picked.size == 0:
        raise FeatureError("selection is empty")
    return float(picked.mean()), float(picked.std(ddof=0))
