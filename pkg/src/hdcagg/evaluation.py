"""Similarity matrices, ground truth and retrieval metrics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .aggregation import Fingerprint, HolisticDescriptor, IncompatibleDescriptors
from .baseline import cosine_matrix

__all__ = [
    "SimilarityMatrix",
    "GroundTruth",
    "EvalReport",
    "similarity_matrix",
    "pr_curve",
    "average_precision",
    "recall_at_k",
    "evaluate",
]


@dataclass(eq=False)
class SimilarityMatrix:
    """Database x query similarities (rows are database images)."""

    values: np.ndarray
    db_ids: list[str]
    q_ids: list[str]
    method: str = "hdc"
    meta: Optional[Fingerprint] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (len(self.db_ids), len(self.q_ids)):
            raise ValueError(
                f"matrix shape {self.values.shape} does not match "
                f"{len(self.db_ids)} db ids x {len(self.q_ids)} query ids"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("similarity matrix holds non-finite entries")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @classmethod
    def from_array(cls, values, method: str = "hdc", meta: Fingerprint | None = None) -> "SimilarityMatrix":
        values = np.asarray(values, dtype=np.float64)
        n_db, n_q = values.shape
        return cls(values, [str(i) for i in range(n_db)], [str(j) for j in range(n_q)], method, meta)


@dataclass(eq=False)
class GroundTruth:
    positives: set[tuple[int, int]]
    shape: tuple[int, int]

    def __post_init__(self):
        self.positives = {(int(i), int(j)) for i, j in self.positives}
        n_db, n_q = self.shape
        for i, j in self.positives:
            if not (0 <= i < n_db and 0 <= j < n_q):
                raise ValueError(f"ground-truth pair ({i}, {j}) outside {n_db}x{n_q}")

    @classmethod
    def diagonal(cls, n: int) -> "GroundTruth":
        return cls({(i, i) for i in range(n)}, (n, n))

    @classmethod
    def from_mask(cls, mask) -> "GroundTruth":
        mask = np.asarray(mask, dtype=bool)
        return cls(set(zip(*map(lambda a: a.tolist(), np.nonzero(mask)))), mask.shape)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.shape, dtype=bool)
        if self.positives:
            idx = np.array(sorted(self.positives))
            m[idx[:, 0], idx[:, 1]] = True
        return m


@dataclass
class EvalReport:
    average_precision: float
    recall_at_k: list[tuple[int, float]]
    sweep_records: list[dict] = field(default_factory=list)


def similarity_matrix(
    db: Sequence[HolisticDescriptor],
    q: Sequence[HolisticDescriptor],
    method: str | None = None,
) -> SimilarityMatrix:
    metas = {h.meta for h in list(db) + list(q)}
    if len(metas) > 1:
        raise IncompatibleDescriptors(f"mixed encoder fingerprints: {metas}")
    meta = metas.pop() if metas else None
    a = np.stack([h.vector for h in db]) if len(db) else np.zeros((0, 0))
    b = np.stack([h.vector for h in q]) if len(q) else np.zeros((0, 0))
    values = cosine_matrix(a, b) if len(db) and len(q) else np.zeros((len(db), len(q)))
    values = np.clip(values, -1.0, 1.0)
    if method is None:
        method = meta.method if meta is not None else "hdc"
    return SimilarityMatrix(values, [h.image_id for h in db], [h.image_id for h in q], method, meta)


def _check(m: SimilarityMatrix | np.ndarray, gt: GroundTruth) -> tuple[np.ndarray, np.ndarray]:
    values = m.values if isinstance(m, SimilarityMatrix) else np.asarray(m, dtype=np.float64)
    if tuple(values.shape) != tuple(gt.shape):
        raise ValueError(f"ground truth shape {gt.shape} != matrix shape {values.shape}")
    return values, gt.mask()


def pr_curve(m: SimilarityMatrix | np.ndarray, gt: GroundTruth) -> np.ndarray:
    """Precision-recall points, one per distinct similarity value.

    Returns an ``(n, 3)`` array of ``(threshold, precision, recall)`` ordered
    by decreasing threshold; a pair counts as a match when its similarity is
    at least the threshold.
    """
    values, mask = _check(m, gt)
    n_pos = int(mask.sum())
    if n_pos == 0:
        raise ValueError("ground truth holds no positives")
    flat = values.ravel()
    labels = mask.ravel()
    order = np.argsort(-flat, kind="stable")
    s = flat[order]
    tp = np.cumsum(labels[order])
    # last index of every run of equal similarity
    last = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    tp = tp[last].astype(np.float64)
    n_sel = (last + 1).astype(np.float64)
    return np.column_stack([s[last], tp / n_sel, tp / n_pos])


def average_precision(m: SimilarityMatrix | np.ndarray, gt: GroundTruth) -> float:
    """Area under the precision-recall curve, trapezoidal over recall.

    Points that retrieve no positive carry no recall and are skipped; the
    curve is extended flat from its first remaining point back to recall 0.
    """
    curve = pr_curve(m, gt)
    curve = curve[curve[:, 2] > 0]
    precision = np.r_[curve[0, 1], curve[:, 1]]
    recall = np.r_[0.0, curve[:, 2]]
    return float(np.sum(np.diff(recall) * (precision[1:] + precision[:-1]) / 2.0))


def recall_at_k(m: SimilarityMatrix | np.ndarray, gt: GroundTruth, ks: Iterable[int]) -> list[tuple[int, float]]:
    """Fraction of queries with a positive among their ``k`` best database entries.

    Queries without any positive are left out of the denominator; equal
    similarities rank the lower database index first.
    """
    values, mask = _check(m, gt)
    ks = [int(k) for k in ks]
    if any(k < 1 for k in ks):
        raise ValueError(f"k must be >= 1, got {ks}")
    has_pos = mask.any(axis=0)
    if not has_pos.any():
        return [(k, 0.0) for k in ks]
    order = np.argsort(-values, axis=0, kind="stable")  # (n_db, n_q)
    hits_sorted = np.take_along_axis(mask, order, axis=0)
    first = np.argmax(hits_sorted, axis=0)  # rank of the first positive
    first = first[has_pos]
    return [(k, float(np.mean(first < k))) for k in ks]


def evaluate(m: SimilarityMatrix | np.ndarray, gt: GroundTruth, ks: Iterable[int] = (1, 2, 5, 10, 20)) -> EvalReport:
    return EvalReport(average_precision(m, gt), recall_at_k(m, gt, ks))
