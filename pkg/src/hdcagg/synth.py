"""Synthetic place-recognition benchmark.

Every place is a set of landmarks (descriptor, position, score). Database
images show the landmarks as they are; the query image of a place is a
degraded observation: descriptor noise at a fixed cosine to the original,
Gaussian position jitter, optional horizontal viewpoint shift, feature
dropout and injected distractor features. Ground truth is the diagonal.

Descriptors are drawn around the words of a shared random vocabulary, so
features of different places (and of the same image) are correlated the way
real local descriptors are. ``n_words=0`` gives i.i.d. Gaussian descriptors.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .core import seeded_generator
from .evaluation import GroundTruth
from .features import FeatureSet

__all__ = ["BenchmarkConfig", "Benchmark", "make_benchmark", "perturb_unit", "sample_descriptors"]


@dataclass(frozen=True)
class BenchmarkConfig:
    n_places: int = 200
    n_features: int = 50
    desc_dim: int = 128
    width: float = 640.0
    height: float = 480.0
    noise_cos: float = 0.6
    jitter: float = 0.05
    dropout: float = 0.2
    distractors: float = 0.2
    shift: float = 0.0
    n_words: int = 32
    word_spread: float = 1.0
    seed: int = 42

    def __post_init__(self):
        if self.n_places < 1 or self.n_features < 1 or self.desc_dim < 2:
            raise ValueError("benchmark needs at least one place, one feature and desc_dim >= 2")
        if not 0.0 <= self.noise_cos <= 1.0:
            raise ValueError(f"noise_cos must be in [0, 1], got {self.noise_cos}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "BenchmarkConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown benchmark parameters: {sorted(unknown)}")
        return cls(**data)

    def with_seed(self, seed: int) -> "BenchmarkConfig":
        return replace(self, seed=int(seed))


@dataclass
class Benchmark:
    config: BenchmarkConfig
    db: list[FeatureSet]
    query: list[FeatureSet]
    gt: GroundTruth


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def sample_descriptors(rng: np.random.Generator, n: int, vocab: np.ndarray | None, dim: int, spread: float) -> np.ndarray:
    if vocab is None or len(vocab) == 0:
        return _unit(rng.standard_normal((n, dim)))
    words = rng.integers(0, len(vocab), size=n)
    noise = rng.standard_normal((n, dim)) * (spread / np.sqrt(dim))
    return _unit(vocab[words] + noise)


def perturb_unit(rng: np.random.Generator, u: np.ndarray, cos: float) -> np.ndarray:
    """Unit vectors at exactly cosine ``cos`` to the unit rows of ``u``."""
    g = rng.standard_normal(u.shape)
    g -= np.sum(g * u, axis=-1, keepdims=True) * u
    return cos * u + np.sqrt(max(0.0, 1.0 - cos * cos)) * _unit(g)


def make_benchmark(cfg: BenchmarkConfig = BenchmarkConfig()) -> Benchmark:
    vocab = None
    if cfg.n_words > 0:
        vrng = seeded_generator(cfg.seed, "synth-vocab")
        vocab = _unit(vrng.standard_normal((cfg.n_words, cfg.desc_dim)))
    w, h, k = cfg.width, cfg.height, cfg.n_features
    db, query = [], []
    for p in range(cfg.n_places):
        rng = seeded_generator(cfg.seed, "synth-place", p)
        desc = sample_descriptors(rng, k, vocab, cfg.desc_dim, cfg.word_spread)
        xy = np.column_stack([rng.uniform(1.0, w, k), rng.uniform(1.0, h, k)])
        scores = rng.uniform(0.0, 1.0, k)
        db.append(FeatureSet(f"db{p:05d}", w, h, desc, xy, scores))

        keep = rng.uniform(size=k) >= cfg.dropout
        qdesc = perturb_unit(rng, desc, cfg.noise_cos)
        qxy = xy + rng.standard_normal((k, 2)) * np.array([cfg.jitter * w, cfg.jitter * h])
        qxy[:, 0] += cfg.shift * w
        keep &= qxy[:, 0] <= w  # shifted out of view
        qxy = np.clip(qxy, [1.0, 1.0], [w, h])
        qscores = rng.uniform(0.0, 1.0, k)
        n_extra = int(round(cfg.distractors * k))
        extra_desc = sample_descriptors(rng, n_extra, vocab, cfg.desc_dim, cfg.word_spread)
        extra_xy = np.column_stack([rng.uniform(1.0, w, n_extra), rng.uniform(1.0, h, n_extra)])
        extra_scores = rng.uniform(0.0, 1.0, n_extra)
        query.append(
            FeatureSet(
                f"q{p:05d}",
                w,
                h,
                np.vstack([qdesc[keep], extra_desc]),
                np.vstack([qxy[keep], extra_xy]),
                np.concatenate([qscores[keep], extra_scores]),
            )
        )
    return Benchmark(cfg, db, query, GroundTruth.diagonal(cfg.n_places))
