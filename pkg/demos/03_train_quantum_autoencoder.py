"""Train a quantum autoencoder on normal-only synthetic data.

The circuit compresses 8 dense-angle-encoded features into 2 latent
qubits; the SWAP test against reference qubits measures how far the 2
trash qubits are from |00>, which is the anomaly score.
"""
import numpy as np

from qaedet.ansatz import AnsatzSpec
from qaedet.encode import DENSE_ANGLE, EncodingSpec, scale_features
from qaedet.qae import (TrainConfig, calibrate_threshold, classify,
                        default_layout, score_samples, train)
from qaedet.synth import SyntheticSpec, make_synthetic

train_df, test_df = make_synthetic(SyntheticSpec(seed=0))
labels = test_df["label"].to_numpy()
test_matrix = test_df.drop(columns=["label"]).to_numpy()

encoding = EncodingSpec(DENSE_ANGLE, 8)
ansatz = AnsatzSpec("RealAmplitudes", 4, reps=1)
layout = default_layout(encoding)
print(f"circuit: {layout.n_data} data qubits "
      f"({layout.n_latent} latent + {layout.n_trash} trash), "
      f"{layout.n_trash} reference, 1 auxiliary = "
      f"{layout.total_qubits} total; {ansatz.n_params} trainable angles")

samples, scaler = scale_features(train_df.to_numpy(), encoding)
model = train(samples, encoding, ansatz, layout,
              config=TrainConfig(iterations=60, batch_size=64, seed=0))

trace = model.train_meta["loss_trace"]
print(f"\ntraining: {len(trace)} objective evaluations, "
      f"cost {trace[0]:.4f} -> {min(trace):.4f}")
for i in range(0, len(trace), 10):
    bar = "#" * int(40 * trace[i])
    print(f"  eval {i:3d}  {trace[i]:.4f} {bar}")

train_scores = score_samples(model, samples)
model = calibrate_threshold(model, train_scores)
print(f"\nthreshold (mean + 2 sigma of training scores): {model.threshold:.4f}")

test_samples, _ = scale_features(test_matrix, encoding, scaler=scaler)
scores = score_samples(model, test_samples)
print(f"\nmean score, normal rows:    {scores[labels == 0].mean():.4f}")
print(f"mean score, anomalous rows: {scores[labels == 1].mean():.4f}")

flagged = scores > model.threshold
print(f"flagged {flagged[labels == 1].sum()}/500 anomalies "
      f"and {flagged[labels == 0].sum()}/500 normal rows")

label_out, score = classify(model, test_samples[int(np.argmax(scores))])
print(f"highest-scoring row: score {score:.4f} -> {label_out}")
