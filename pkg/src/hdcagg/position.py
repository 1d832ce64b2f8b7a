"""Encoding of scalars and 2-D image positions as bipolar hypervectors.

A coordinate range is split into ``n`` equal subintervals whose ``n + 1``
borders each own a random basis vector. A value inside a subinterval is
encoded by taking a prefix of the left border's vector and the remaining
suffix of the right border's vector; the split point moves linearly with the
value, so cosine similarity falls off linearly with distance and reaches zero
one subinterval width away.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from .core import DimensionMismatch, SymbolTable

__all__ = [
    "BasisBank",
    "PoseEncoding",
    "make_basis_bank",
    "encode_scalar",
    "encode_scalars",
    "encode_pose",
    "round_half_away",
]

AXES = ("X", "Y")


def round_half_away(x: float) -> int:
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


@dataclass(frozen=True, eq=False)
class BasisBank:
    axis: str
    range_lo: float
    range_hi: float
    n: int
    basis: np.ndarray  # (n + 1, d), bipolar
    order: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def d(self) -> int:
        return self.basis.shape[1]

    @property
    def width(self) -> float:
        """Subinterval width."""
        return (self.range_hi - self.range_lo) / self.n

    @cached_property
    def rank(self) -> np.ndarray:
        """Position of each dimension in the concatenation order."""
        return np.arange(self.d) if self.order is None else np.argsort(self.order)

    @cached_property
    def basis_i8(self) -> np.ndarray:
        return self.basis.astype(np.int8)

    def locate(self, v: float) -> tuple[int, int]:
        """Subinterval index and split index for value ``v`` (clamped)."""
        v = min(max(float(v), self.range_lo), self.range_hi)
        u = (v - self.range_lo) / (self.range_hi - self.range_lo) * self.n
        i = min(int(math.floor(u)), self.n - 1)
        frac = u - i
        alpha = round_half_away(self.d * (1.0 - frac))
        return i, min(max(alpha, 0), self.d)


@dataclass(frozen=True, eq=False)
class PoseEncoding:
    vector: np.ndarray
    x: float
    y: float


def make_basis_bank(
    table: SymbolTable,
    axis: str,
    range_: tuple[float, float],
    n: int,
    decorrelate: bool = True,
) -> BasisBank:
    """Build the ``n + 1`` border vectors for one axis.

    Border vectors are looked up in ``table`` under ``"basis/<axis>/<index>"``.
    With ``decorrelate`` the Y axis walks its dimensions in a seeded order
    instead of ``0..d-1``, so the block of dimensions where two Y encodings
    differ is independent of the corresponding block for X. Per-axis
    similarities are unchanged; pose similarities then factor into the
    product of the per-axis similarities.
    """
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    n = int(n)
    if n < 1:
        raise ValueError(f"need at least one subinterval, got n={n}")
    lo, hi = float(range_[0]), float(range_[1])
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        raise ValueError(f"degenerate range [{lo}, {hi}]")
    basis = np.stack([table.get(f"basis/{axis}/{i}") for i in range(n + 1)])
    basis.flags.writeable = False
    order = None
    if decorrelate and axis == "Y":
        order = table.permutation(f"basis-order/{axis}")
    return BasisBank(axis, lo, hi, n, basis, order)


def encode_scalar(bank: BasisBank, v: float) -> np.ndarray:
    i, alpha = bank.locate(v)
    left, right = bank.basis[i], bank.basis[i + 1]
    if bank.order is None:
        return np.concatenate([left[:alpha], right[alpha:]])
    out = right.copy()
    head = bank.order[:alpha]
    out[head] = left[head]
    return out


def encode_scalars(bank: BasisBank, values, dtype=np.float64) -> np.ndarray:
    """Vectorized ``encode_scalar`` over many values; returns ``(len, d)``.

    Entries are exactly +-1, so a compact ``dtype`` such as ``np.int8``
    loses nothing and is faster to gather.
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        return np.zeros((0, bank.d), dtype=dtype)
    lo, hi, n, d = bank.range_lo, bank.range_hi, bank.n, bank.d
    u = (np.clip(values, lo, hi) - lo) / (hi - lo) * n
    idx = np.minimum(np.floor(u).astype(np.int64), n - 1)
    t = d * (1.0 - (u - idx))
    alpha = np.clip(np.floor(t + 0.5).astype(np.int64), 0, d)  # t >= 0
    basis = bank.basis_i8 if dtype == np.int8 else bank.basis.astype(dtype, copy=False)
    take_left = bank.rank[None, :] < alpha[:, None]
    return np.where(take_left, basis[idx], basis[idx + 1])


def encode_pose(bx: BasisBank, by: BasisBank, x: float, y: float) -> PoseEncoding:
    if bx.axis != "X" or by.axis != "Y":
        raise ValueError("encode_pose expects an X bank and a Y bank")
    if bx.d != by.d:
        raise DimensionMismatch(f"dimension mismatch: {bx.d} vs {by.d}")
    return PoseEncoding(encode_scalar(bx, x) * encode_scalar(by, y), float(x), float(y))
