"""Seeded synthetic tabular data: a Gaussian cluster plus displaced anomalies.

Two feature profiles share the same latent construction (a seeded
Gaussian cluster; anomalies are the same cluster with a displaced mean):

* ``gaussian`` emits the latent coordinates directly: d continuous
  columns with a randomly oriented covariance. Displacement is measured
  in covariance-square-root units along a seeded direction.
* ``security-log`` pushes a low-rank latent cluster through monotone
  per-column maps that mimic preprocessed kernel-event logs: moderate
  binary flags, saturated bounded columns, and rare tail flags that
  normal rows almost never set. Anomaly displacement shifts the latent
  mean mostly along the tail-flag dimensions, so anomalies set rare
  flags that normal data leaves clear. This is the profile the
  end-to-end benchmark uses; fully continuous marginals spread over
  their whole range make every compression model score poorly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

PROFILES = ("security-log", "gaussian")


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class SyntheticSpec:
    n_normal: int = 1000        # training rows (all normal)
    n_test_normal: int = 500
    n_anomalous: int = 500      # anomalous test rows
    dimension: int = 8
    cluster_scale: float = 1.0
    displacement: float = 2.0
    profile: str = "security-log"
    latent_rank: int = 3        # security-log: intrinsic dimension
    seed: int = 0

    def __post_init__(self):
        if self.dimension < 1:
            raise SynthError("dimension must be >= 1")
        if self.n_normal < 1 or self.n_test_normal < 0 or self.n_anomalous < 0:
            raise SynthError("row counts must be non-negative (n_normal >= 1)")
        if self.cluster_scale <= 0:
            raise SynthError("cluster_scale must be positive")
        if self.profile not in PROFILES:
            raise SynthError(f"unknown profile {self.profile!r}")
        if not 1 <= self.latent_rank <= self.dimension:
            raise SynthError("latent_rank must lie in [1, dimension]")


def _draw_gaussian(spec: SyntheticSpec, rng):
    d = spec.dimension
    mean = rng.uniform(-2.0, 2.0, size=d)
    sigmas = rng.uniform(0.5, 1.5, size=d) * spec.cluster_scale
    basis, _ = np.linalg.qr(rng.normal(size=(d, d)))
    sqrt_cov = basis @ np.diag(sigmas)
    direction = rng.normal(size=d)
    direction /= np.linalg.norm(direction)
    anomaly_mean = mean + spec.displacement * (sqrt_cov @ direction)

    def draw(center, count):
        if count == 0:
            return np.empty((0, d))
        return center + rng.normal(size=(count, d)) @ sqrt_cov.T

    return (draw(mean, spec.n_normal), draw(mean, spec.n_test_normal),
            draw(anomaly_mean, spec.n_anomalous))


def _draw_security_log(spec: SyntheticSpec, rng):
    d = spec.dimension
    rank = spec.latent_rank
    noise = 0.3
    mixing = rng.normal(size=(d, rank))
    # per-coordinate variance of the latent cluster normalized to ~1
    row_scale = np.sqrt((mixing ** 2).sum(axis=1) + noise ** 2)
    mixing /= row_scale[:, None]
    noise_scale = noise / row_scale * spec.cluster_scale
    mean = rng.uniform(-0.3, 0.3, size=d)

    # first half: smooth bounded columns (latent texture both models must
    # compress); second half: rare tail flags, alternating between
    # detection-relevant (2 sigma, strongly displaced by anomalies) and
    # near-silent (2.9 sigma, barely displaced) cutoffs
    half = d // 2
    cuts = np.empty(d)
    cuts[:half] = mean[:half] + rng.uniform(-0.4, 0.4, size=half)
    kinds = ["bounded"] * half
    deep = []
    for j in range(half, d):
        deep.append((j - half) % 2 == 1)
        cuts[j] = mean[j] + (2.9 if deep[-1] else 2.0)
        kinds.append("tail_flag")

    shift_dir = np.empty(d)
    shift_dir[:half] = rng.uniform(-0.15, 0.15, size=half)
    tail_weights = rng.uniform(0.95, 1.05, size=d - half)
    tail_weights[np.asarray(deep)] = rng.uniform(0.25, 0.35, size=sum(deep))
    shift_dir[half:] = tail_weights

    def draw(count, shift=0.0):
        if count == 0:
            return np.empty((0, d))
        w = rng.normal(size=(count, rank))
        z = (mean + w @ mixing.T
             + noise_scale * rng.normal(size=(count, d)) + shift * shift_dir)
        x = np.empty_like(z)
        for j, kind in enumerate(kinds):
            if kind == "bounded":
                x[:, j] = 1.0 / (1.0 + np.exp(-1.2 * (z[:, j] - cuts[j])))
            else:
                x[:, j] = (z[:, j] > cuts[j]).astype(float)
        return x

    return (draw(spec.n_normal), draw(spec.n_test_normal),
            draw(spec.n_anomalous, shift=spec.displacement))


def make_synthetic(spec: SyntheticSpec) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Generate ``(train, test)`` frames.

    The train frame holds normal rows only and no label column. The test
    frame appends anomalies after the normal rows and carries a binary
    ``label`` column (1 = anomalous).
    """
    rng = np.random.default_rng(spec.seed)
    if spec.profile == "gaussian":
        train_rows, test_normal, test_anomalous = _draw_gaussian(spec, rng)
    else:
        train_rows, test_normal, test_anomalous = _draw_security_log(spec, rng)

    columns = [f"f{i}" for i in range(spec.dimension)]
    train = pd.DataFrame(train_rows, columns=columns)
    test = pd.DataFrame(np.vstack([test_normal, test_anomalous]), columns=columns)
    test["label"] = [0] * spec.n_test_normal + [1] * spec.n_anomalous
    return train, test
