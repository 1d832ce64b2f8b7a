"""Vector space, deterministic symbol vectors and the two HDC operators.

Hypervectors are plain 1-D float64 numpy arrays. Binding is elementwise
multiplication, bundling is the elementwise sum, similarity is cosine.
"""

from __future__ import annotations

import hashlib
import threading
from typing import Sequence

import numpy as np

__all__ = [
    "DimensionMismatch",
    "SymbolTable",
    "random_symbol",
    "bind",
    "bundle",
    "cosine",
    "seeded_generator",
    "ones",
]


class DimensionMismatch(ValueError):
    """Raised when operands do not share dimensionality."""


def _key(*parts) -> np.ndarray:
    h = hashlib.blake2b(digest_size=16)
    for p in parts:
        b = p if isinstance(p, bytes) else str(p).encode("utf-8")
        h.update(len(b).to_bytes(4, "little"))
        h.update(b)
    return np.frombuffer(h.digest(), dtype="<u8").copy()


def seeded_generator(seed: int, *tags) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, *tags)``.

    Philox output depends only on the key, so streams are identical across
    processes and platforms and independent of the order they are created in.
    """
    seed_bytes = (int(seed) & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")
    return np.random.Generator(np.random.Philox(key=_key(seed_bytes, *tags)))


class SymbolTable:
    """Memoized map from symbol names to bipolar hypervectors.

    Every vector is a pure function of ``(master_seed, d, name)``; lookups are
    guarded by a lock so the table can be shared between threads.
    """

    def __init__(self, master_seed: int, d: int):
        if d < 1:
            raise ValueError(f"dimension must be >= 1, got {d}")
        self.master_seed = int(master_seed)
        self.d = int(d)
        self._entries: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def names(self) -> list[str]:
        with self._lock:
            return list(self._entries)

    def get(self, name: str) -> np.ndarray:
        if not name:
            raise ValueError("symbol name must be non-empty")
        with self._lock:
            v = self._entries.get(name)
            if v is None:
                rng = seeded_generator(self.master_seed, "symbol", name)
                bits = rng.integers(0, 2, size=self.d, dtype=np.int8)
                v = (2.0 * bits - 1.0).astype(np.float64)
                v.flags.writeable = False
                self._entries[name] = v
            return v

    def permutation(self, name: str) -> np.ndarray:
        """Seeded permutation of ``range(d)``; not memoized."""
        rng = seeded_generator(self.master_seed, "perm", name)
        return rng.permutation(self.d)


def random_symbol(table: SymbolTable, name: str) -> np.ndarray:
    return table.get(name)


def ones(d: int) -> np.ndarray:
    """Neutral element of binding."""
    return np.ones(d, dtype=np.float64)


def _check_same(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape[-1] != y.shape[-1]:
        raise DimensionMismatch(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")


def bind(x, y) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check_same(x, y)
    return x * y


def bundle(vs: Sequence) -> np.ndarray:
    """Elementwise sum of a non-empty sequence of vectors (no renormalization)."""
    if len(vs) == 0:
        raise ValueError("cannot bundle an empty list")
    arr = [np.asarray(v, dtype=np.float64) for v in vs]
    d = arr[0].shape[-1]
    for v in arr[1:]:
        if v.shape[-1] != d:
            raise DimensionMismatch(f"dimension mismatch: {d} vs {v.shape[-1]}")
    return np.sum(arr, axis=0)


def cosine(x, y) -> float:
    """Cosine similarity; 0.0 when either operand has zero norm."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check_same(x, y)
    nx = np.linalg.norm(x)
    ny = np.linalg.norm(y)
    if nx == 0.0 or ny == 0.0:
        return 0.0
    c = float(np.dot(x, y) / (nx * ny))
    return min(1.0, max(-1.0, c))
