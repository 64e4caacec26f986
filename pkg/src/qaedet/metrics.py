"""Thresholding, confusion metrics, AUROC, separation, histogram export.

Shared by the quantum model and the classical baseline so that both use
the identical threshold rule and scoring conventions. A sample is
predicted anomalous iff its score strictly exceeds the threshold.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata


class MetricsError(ValueError):
    pass


def threshold_two_sigma(scores) -> float:
    """Mean plus two population standard deviations of the scores."""
    scores = np.asarray(scores, dtype=float).ravel()
    if scores.size == 0:
        raise MetricsError("scores must be non-empty")
    if not np.all(np.isfinite(scores)):
        raise MetricsError("scores contain non-finite values")
    return float(scores.mean() + 2.0 * scores.std(ddof=0))


@dataclass
class EvalReport:
    tp: int
    fp: int
    tn: int
    fn: int
    precision: float
    recall: float
    f1: float
    accuracy: float
    threshold: float
    auroc: float | None = None
    separation: float | None = None
    histogram: dict | None = None
    flags: tuple = ()
    meta: dict = field(default_factory=dict)

    @property
    def counts(self) -> tuple[int, int, int, int]:
        return self.tp, self.fp, self.tn, self.fn

    def to_dict(self) -> dict:
        out = {
            "tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn,
            "precision": self.precision, "recall": self.recall,
            "f1": self.f1, "accuracy": self.accuracy,
            "threshold": self.threshold,
            "auroc": self.auroc, "separation": self.separation,
            "flags": list(self.flags),
        }
        out.update(self.meta)
        return out


def _check_scores_labels(scores, labels):
    scores = np.asarray(scores, dtype=float).ravel()
    labels = np.asarray(labels).ravel().astype(int)
    if scores.size != labels.size:
        raise MetricsError("scores and labels must have equal length")
    if scores.size == 0:
        raise MetricsError("scores must be non-empty")
    if not np.all(np.isfinite(scores)):
        raise MetricsError("scores contain non-finite values")
    if not np.all((labels == 0) | (labels == 1)):
        raise MetricsError("labels must be binary 0/1")
    return scores, labels


def confusion_metrics(scores, labels, threshold: float) -> EvalReport:
    """Confusion counts and derived metrics at a fixed threshold.

    Zero-division cases (no predicted positives, no true positives, or a
    single-class label vector) yield 0 for the affected metric and a
    flag naming it.
    """
    scores, labels = _check_scores_labels(scores, labels)
    pred = scores > threshold
    pos = labels == 1
    tp = int(np.sum(pred & pos))
    fp = int(np.sum(pred & ~pos))
    fn = int(np.sum(~pred & pos))
    tn = int(np.sum(~pred & ~pos))

    flags = []
    if pos.all() or not pos.any():
        flags.append("single_class_labels")

    if tp + fp > 0:
        precision = tp / (tp + fp)
    else:
        precision, flags = 0.0, flags + ["zero_division_precision"]
    if tp + fn > 0:
        recall = tp / (tp + fn)
    else:
        recall, flags = 0.0, flags + ["zero_division_recall"]
    if precision + recall > 0:
        f1 = 2.0 * precision * recall / (precision + recall)
    else:
        f1, flags = 0.0, flags + ["zero_division_f1"]
    accuracy = (tp + tn) / scores.size

    return EvalReport(tp=tp, fp=fp, tn=tn, fn=fn,
                      precision=float(precision), recall=float(recall),
                      f1=float(f1), accuracy=float(accuracy),
                      threshold=float(threshold), flags=tuple(flags))


def auroc(scores, labels) -> float:
    """Rank-based AUROC (Mann-Whitney statistic with midrank ties)."""
    scores, labels = _check_scores_labels(scores, labels)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MetricsError("AUROC needs both classes present")
    ranks = rankdata(scores)  # average ranks resolve ties as midranks
    u = float(ranks[labels == 1].sum()) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def separation_from_modes(mode_normal: float, mode_anomaly: float) -> float:
    """(mode_anomaly - mode_normal) / mode_anomaly."""
    if mode_anomaly == 0:
        raise MetricsError("separation undefined: anomaly mode is zero")
    return (mode_anomaly - mode_normal) / mode_anomaly


def score_mode(scores, hi: float, bins: int) -> float:
    """Center of the highest-count bin over [0, hi]; ties take the lower bin."""
    counts, edges = np.histogram(np.asarray(scores, dtype=float), bins=bins,
                                 range=(0.0, hi))
    k = int(np.argmax(counts))  # argmax returns the first (lowest) max bin
    return float(0.5 * (edges[k] + edges[k + 1]))


def separation(normal_scores, anomaly_scores, bins: int = 100) -> float:
    """Mode-based separation of the two score distributions.

    Both distributions are binned over the shared range [0, max of all
    scores] so the modes are comparable. Returns NaN when the anomaly
    mode is zero (undefined; callers flag it).
    """
    normal_scores = np.asarray(normal_scores, dtype=float).ravel()
    anomaly_scores = np.asarray(anomaly_scores, dtype=float).ravel()
    if normal_scores.size == 0 or anomaly_scores.size == 0:
        raise MetricsError("both score vectors must be non-empty")
    if bins < 1:
        raise MetricsError("bins must be >= 1")
    hi = float(max(normal_scores.max(), anomaly_scores.max()))
    if hi <= 0.0:
        return float("nan")
    mode_n = score_mode(normal_scores, hi, bins)
    mode_a = score_mode(anomaly_scores, hi, bins)
    if mode_a == 0.0:
        return float("nan")
    return separation_from_modes(mode_n, mode_a)


def score_histogram(normal_scores, anomaly_scores, bins: int = 100):
    """Shared-range histogram of both classes.

    Returns ``(edges, counts_normal, counts_anomalous)``; the range is
    [0, max of all scores] (or [0, 1] if every score is zero).
    """
    normal_scores = np.asarray(normal_scores, dtype=float).ravel()
    anomaly_scores = np.asarray(anomaly_scores, dtype=float).ravel()
    both = np.concatenate([normal_scores, anomaly_scores])
    hi = float(both.max()) if both.size and both.max() > 0 else 1.0
    counts_n, edges = np.histogram(normal_scores, bins=bins, range=(0.0, hi))
    counts_a, _ = np.histogram(anomaly_scores, bins=bins, range=(0.0, hi))
    return edges, counts_n, counts_a


def export_histograms(path, normal_scores, anomaly_scores, bins: int = 100) -> None:
    """Write per-class score histograms as CSV rows of
    ``bin_lo,bin_hi,count_normal,count_anomalous``."""
    edges, counts_n, counts_a = score_histogram(normal_scores, anomaly_scores, bins)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_lo", "bin_hi", "count_normal", "count_anomalous"])
        for i in range(len(counts_n)):
            writer.writerow([repr(float(edges[i])), repr(float(edges[i + 1])),
                             int(counts_n[i]), int(counts_a[i])])


def load_histograms(path):
    """Read a histogram CSV back; inverse of :func:`export_histograms`."""
    edges, counts_n, counts_a = [], [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            edges.append(float(row["bin_lo"]))
            counts_n.append(int(row["count_normal"]))
            counts_a.append(int(row["count_anomalous"]))
            last_hi = float(row["bin_hi"])
    edges.append(last_hi)
    return np.asarray(edges), np.asarray(counts_n), np.asarray(counts_a)


def evaluate(scores, labels, threshold: float, bins: int = 100) -> EvalReport:
    """Full report: confusion metrics plus AUROC, separation, histogram."""
    report = confusion_metrics(scores, labels, threshold)
    scores, labels = _check_scores_labels(scores, labels)
    flags = list(report.flags)
    pos = labels == 1
    if pos.any() and not pos.all():
        report.auroc = auroc(scores, labels)
        sep = separation(scores[~pos], scores[pos], bins=bins)
        if np.isnan(sep):
            flags.append("undefined_separation")
            report.separation = None
        else:
            report.separation = float(sep)
        edges, counts_n, counts_a = score_histogram(scores[~pos], scores[pos], bins)
        if counts_a.sum() == 0:
            flags.append("empty_anomaly_histogram")
        report.histogram = {
            "edges": edges.tolist(),
            "count_normal": counts_n.tolist(),
            "count_anomalous": counts_a.tolist(),
        }
    report.flags = tuple(flags)
    return report
