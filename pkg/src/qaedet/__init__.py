"""Quantum-autoencoder anomaly detection with a classical baseline.

A small statevector simulator drives SWAP-test-based quantum autoencoder
training on normal-only tabular data; a mirrored dense autoencoder
provides the classical comparison. See the README for the pipeline
walk-through and the demos/ directory for runnable examples.
"""

from .ansatz import AnsatzSpec, build_ansatz, entanglement_pairs
from .cae import CaeArch, CaeModel, cae_latent, cae_score, cae_scores, cae_train
from .encode import (AMPLITUDE, ANGLE, DENSE_ANGLE, EFFICIENT_SU2,
                     EncodingSpec, FeatureScaler, ScaledSample, encode_sample,
                     scale_features)
from .features import (FEATURE_COLUMNS, SelectionSpec, feature_stats,
                       preprocess, select_features, target_encode)
from .metrics import (EvalReport, auroc, confusion_metrics, evaluate,
                      export_histograms, separation, threshold_two_sigma)
from .optim import AdamState, OptimizerConfig, adam_step, cobyla_minimize
from .qae import (EXACT, ExactMode, QaeLayout, QaeModel, ShotMode,
                  SwapTestResult, TrainConfig, assemble_circuit,
                  batch_cost, calibrate_threshold, classify, default_layout,
                  score_samples, similarity, train)
from .simcore import (Circuit, Gate, NoiseModel, Statevector, apply_gate,
                      marginal_prob_one, measure_qubit, run_circuit,
                      sample_one_counts)
from .synth import SyntheticSpec, make_synthetic

__version__ = "0.1.0"
