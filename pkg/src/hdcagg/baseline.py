"""Exhaustive pairwise comparison of local features.

Image similarity is the sum of (optionally position-weighted) cosine
similarities over mutual nearest-neighbour matches, divided by
``sqrt(n_db * n_q)``. This is the slow reference the holistic descriptors
approximate: ``O(n_db * n_q * D)`` per image pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .features import FeatureSet
from .preprocess import EPS, l2_normalize, standardize_per_image

__all__ = [
    "MatchSet",
    "MODES",
    "cosine_matrix",
    "mutual_matches",
    "position_weight",
    "exhaustive_similarity",
    "exhaustive_similarity_matrix",
]

MODES = ("uniform", "positional")


@dataclass
class MatchSet:
    """Mutual matches as parallel arrays of db index, query index, sim, weight."""

    i: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    j: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    sim: np.ndarray = field(default_factory=lambda: np.zeros(0))
    weight: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __len__(self) -> int:
        return len(self.i)

    @property
    def pairs(self) -> list[tuple[int, int, float, float]]:
        return [(int(a), int(b), float(s), float(w)) for a, b, s, w in zip(self.i, self.j, self.sim, self.weight)]


def cosine_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """All-pairs cosine; zero-norm rows give zero similarity."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    an = np.linalg.norm(a, axis=1)
    bn = np.linalg.norm(b, axis=1)
    a = np.where(an[:, None] > EPS, a / np.where(an > EPS, an, 1.0)[:, None], 0.0)
    b = np.where(bn[:, None] > EPS, b / np.where(bn > EPS, bn, 1.0)[:, None], 0.0)
    return a @ b.T


def position_weight(dx, dy, w: float, h: float, n_x: int, n_y: int):
    """Spatial weight in [0, 1]: the smaller of the two per-axis tent values."""
    wx = np.maximum(0.0, 1.0 - np.abs(dx) / (w / n_x))
    wy = np.maximum(0.0, 1.0 - np.abs(dy) / (h / n_y))
    out = np.minimum(wx, wy)
    return float(out) if np.ndim(out) == 0 else out


def mutual_matches(
    db: FeatureSet,
    q: FeatureSet,
    n_x: int = 4,
    n_y: int = 6,
    sims: np.ndarray | None = None,
) -> MatchSet:
    """Pairs that are each other's best match; argmax ties go to the lowest index.

    Descriptors are compared as given, so both sets should already be
    preprocessed the same way. Weights are filled with the positional weight
    computed from ``db``'s image size.
    """
    if len(db) == 0 or len(q) == 0:
        return MatchSet()
    s = cosine_matrix(db.descriptors, q.descriptors) if sims is None else sims
    best_q = np.argmax(s, axis=1)
    best_db = np.argmax(s, axis=0)
    i = np.flatnonzero(best_db[best_q] == np.arange(len(db)))
    j = best_q[i]
    dxy = db.xy[i] - q.xy[j]
    w = position_weight(dxy[:, 0], dxy[:, 1], db.width, db.height, n_x, n_y)
    return MatchSet(i, j, s[i, j], np.atleast_1d(w))


def exhaustive_similarity(
    db: FeatureSet,
    q: FeatureSet,
    mode: str = "uniform",
    n_x: int = 4,
    n_y: int = 6,
    standardize: bool = False,
) -> float:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if len(db) == 0 or len(q) == 0:
        return 0.0
    if standardize:
        db, q = standardize_per_image(db), standardize_per_image(q)
    m = mutual_matches(db, q, n_x, n_y)
    p = m.weight if mode == "positional" else np.ones(len(m))
    return float(np.sum(p * m.sim) / np.sqrt(len(db) * len(q)))


def _pad(sets: Sequence[FeatureSet]):
    k = max((len(fs) for fs in sets), default=0)
    dim = next((fs.dim for fs in sets if len(fs)), 0)
    desc = np.zeros((len(sets), k, dim))
    xy = np.zeros((len(sets), k, 2))
    mask = np.zeros((len(sets), k), dtype=bool)
    for t, fs in enumerate(sets):
        n = len(fs)
        if n:
            desc[t, :n] = l2_normalize(fs.descriptors)
            xy[t, :n] = fs.xy
            mask[t, :n] = True
    return desc, xy, mask


def exhaustive_similarity_matrix(
    db: Sequence[FeatureSet],
    q: Sequence[FeatureSet],
    mode: str = "uniform",
    n_x: int = 4,
    n_y: int = 6,
    standardize: bool = True,
) -> np.ndarray:
    """``(len(db), len(q))`` matrix of exhaustive similarities, batched per db image."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if standardize:
        db = [standardize_per_image(fs) if len(fs) else fs for fs in db]
        q = [standardize_per_image(fs) if len(fs) else fs for fs in q]
    qd, qxy, qmask = _pad(q)
    q_counts = qmask.sum(axis=1)
    out = np.zeros((len(db), len(q)))
    for a, fs in enumerate(db):
        n = len(fs)
        if n == 0 or qd.shape[1] == 0:
            continue
        d = l2_normalize(fs.descriptors)
        s = np.einsum("kd,jmd->jkm", d, qd)  # (n_q_images, n, k_max)
        masked = np.where(qmask[:, None, :], s, -np.inf)
        best_q = np.argmax(masked, axis=2)  # (J, n)
        best_db = np.argmax(masked, axis=1)  # (J, k_max)
        mutual = np.take_along_axis(best_db, best_q, axis=1) == np.arange(n)[None, :]
        mutual &= q_counts[:, None] > 0
        sim = np.take_along_axis(s, best_q[:, :, None], axis=2)[:, :, 0]
        if mode == "positional":
            qpos = np.take_along_axis(qxy, best_q[:, :, None], axis=1)  # (J, n, 2)
            dxy = fs.xy[None, :, :] - qpos
            p = position_weight(dxy[..., 0], dxy[..., 1], fs.width, fs.height, n_x, n_y)
        else:
            p = 1.0
        total = np.sum(np.where(mutual, p * sim, 0.0), axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            out[a] = np.where(q_counts > 0, total / np.sqrt(n * q_counts), 0.0)
    return out
