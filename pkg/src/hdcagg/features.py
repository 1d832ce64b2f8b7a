from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = ["FeatureSet"]


@dataclass(frozen=True, eq=False)
class FeatureSet:
    """Local features of one image.

    ``descriptors`` is ``(n, D)``; ``xy`` is ``(n, 2)`` pixel coordinates with
    the origin at the top-left (x in ``[1, width]``, y in ``[1, height]``);
    ``scores`` is ``(n,)``.
    """

    image_id: str
    width: float
    height: float
    descriptors: np.ndarray
    xy: np.ndarray
    scores: np.ndarray

    def __post_init__(self):
        desc = np.asarray(self.descriptors, dtype=np.float64)
        if desc.ndim == 1 and desc.size == 0:
            desc = desc.reshape(0, 0)
        if desc.ndim != 2:
            raise ValueError("descriptors must be a 2-D array")
        n = desc.shape[0]
        xy = np.asarray(self.xy, dtype=np.float64).reshape(n, 2)
        scores = np.asarray(self.scores, dtype=np.float64).reshape(n)
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"image size must be positive, got {self.width}x{self.height}")
        for name, a in (("descriptors", desc), ("positions", xy), ("scores", scores)):
            if not np.all(np.isfinite(a)):
                raise ValueError(f"non-finite {name} in feature set {self.image_id!r}")
        if np.any(scores < 0):
            raise ValueError(f"negative score in feature set {self.image_id!r}")
        object.__setattr__(self, "descriptors", desc)
        object.__setattr__(self, "xy", xy)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "width", float(self.width))
        object.__setattr__(self, "height", float(self.height))

    def __len__(self) -> int:
        return self.descriptors.shape[0]

    @property
    def dim(self) -> int:
        return self.descriptors.shape[1]

    def with_descriptors(self, descriptors: np.ndarray) -> "FeatureSet":
        return replace(self, descriptors=descriptors)

    def subset(self, idx) -> "FeatureSet":
        idx = np.asarray(idx, dtype=np.int64)
        return replace(
            self,
            descriptors=self.descriptors[idx],
            xy=self.xy[idx],
            scores=self.scores[idx],
        )

    def top_k(self, budget: int) -> "FeatureSet":
        """Keep the ``budget`` highest-scoring features; ties keep input order."""
        if budget is None or len(self) <= budget:
            return self
        order = np.argsort(-self.scores, kind="stable")[:budget]
        return self.subset(np.sort(order))
