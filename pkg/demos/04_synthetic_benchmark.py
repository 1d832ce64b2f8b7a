"""
Place recognition on a synthetic benchmark
==========================================

Database and query images of the same places, with descriptor noise,
keypoint jitter, dropout and distractor features. Three ways of scoring
image pairs are compared by average precision and recall@k.
"""

from dataclasses import replace

from hdcagg import Encoder, average_precision, recall_at_k
from hdcagg.experiments import PINNED, run_benchmark
from hdcagg.synth import make_benchmark

# a smaller copy of the pinned configuration keeps this quick
cfg = replace(PINNED, n_places=80)
bench = make_benchmark(cfg)
print(f"{cfg.n_places} places, {cfg.n_features} features each, query noise cos {cfg.noise_cos}")

mats = run_benchmark(bench, Encoder(d=4096, seed=cfg.seed), ("hdc", "bundle", "positional"))
labels = {"hdc": "pose-bound bundle", "bundle": "plain bundle", "positional": "exhaustive matching"}
for name, m in mats.items():
    ap = average_precision(m, bench.gt)
    r = dict(recall_at_k(m, bench.gt, (1, 5)))
    print(f"{labels[name]:>20}: AP {ap:.3f}  recall@1 {r[1]:.3f}  recall@5 {r[5]:.3f}")
