"""Holistic descriptors built by bundling, typed bundling and pose binding."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import DimensionMismatch, SymbolTable, bind, bundle, cosine
from .features import FeatureSet
from .position import BasisBank, encode_scalars, make_basis_bank
from .preprocess import ProjectionSpec, l2_normalize, project

__all__ = [
    "Fingerprint",
    "HolisticDescriptor",
    "IncompatibleDescriptors",
    "OpCounter",
    "Encoder",
    "bundle_holistic",
    "typed_bundle",
    "recover_typed",
    "aggregate_local",
    "compare",
]

KINDS = ("bundled", "typed", "local_pose")


class IncompatibleDescriptors(ValueError):
    """Descriptors built under different encoder configurations."""


@dataclass(frozen=True)
class Fingerprint:
    """Encoder configuration that determines comparability of descriptors."""

    d: int
    seed: int
    n_x: int = 4
    n_y: int = 6
    centering: str = "image"
    project: bool = True
    decorrelate: bool = True
    method: str = "hdc"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Fingerprint":
        return cls(**data)


@dataclass(eq=False)
class HolisticDescriptor:
    vector: np.ndarray
    kind: str
    meta: Optional[Fingerprint] = None
    image_id: str = ""
    degenerate: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown descriptor kind {self.kind!r}")
        self.vector = np.asarray(self.vector, dtype=np.float64)

    @property
    def d(self) -> int:
        return self.vector.shape[0]


@dataclass
class OpCounter:
    """Vector-level operation counts."""

    sums: int = 0
    multiplications: int = 0


def check_compatible(a: HolisticDescriptor, b: HolisticDescriptor) -> None:
    if a.meta != b.meta:
        raise IncompatibleDescriptors(f"fingerprint mismatch: {a.meta} vs {b.meta}")
    if a.d != b.d:
        raise DimensionMismatch(f"dimension mismatch: {a.d} vs {b.d}")


def compare(a: HolisticDescriptor, b: HolisticDescriptor) -> float:
    check_compatible(a, b)
    return cosine(a.vector, b.vector)


def bundle_holistic(hs: Sequence[np.ndarray], meta: Fingerprint | None = None, image_id: str = "") -> HolisticDescriptor:
    if len(hs) == 0:
        raise ValueError("need at least one descriptor to bundle")
    v = bundle(hs)
    return HolisticDescriptor(v, "bundled", meta, image_id, not np.any(v))


def _type_symbol(table: SymbolTable, type_name: str) -> np.ndarray:
    return table.get(f"type/{type_name}")


def typed_bundle(
    table: SymbolTable,
    pairs: Iterable[tuple[str, np.ndarray]],
    meta: Fingerprint | None = None,
    image_id: str = "",
) -> HolisticDescriptor:
    """Bind each descriptor to the symbol of its type, then bundle."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("need at least one (type, descriptor) pair")
    names = [name for name, _ in pairs]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate type names in {names}")
    v = bundle([bind(_type_symbol(table, name), h) for name, h in pairs])
    return HolisticDescriptor(v, "typed", meta, image_id, not np.any(v))


def recover_typed(table: SymbolTable, H: HolisticDescriptor, type_name: str) -> np.ndarray:
    """Approximate member of type ``type_name``.

    An unknown type yields a vector that is quasi-orthogonal to every member.
    """
    if H.kind != "typed":
        raise ValueError(f"expected a typed descriptor, got kind {H.kind!r}")
    return bind(_type_symbol(table, type_name), H.vector)


def _check_bank(bank: BasisBank, extent: float, axis: str) -> None:
    if bank.axis != axis:
        raise ValueError(f"expected a {axis} bank, got {bank.axis}")
    if not (np.isclose(bank.range_lo, 1.0) and np.isclose(bank.range_hi, extent)):
        raise ValueError(
            f"{axis} bank covers [{bank.range_lo}, {bank.range_hi}], image needs [1, {extent}]"
        )


def aggregate_local(
    fs: FeatureSet,
    bx: BasisBank,
    by: BasisBank,
    proj: ProjectionSpec | None,
    counter: OpCounter | None = None,
    meta: Fingerprint | None = None,
    center: np.ndarray | None = None,
) -> HolisticDescriptor:
    """Bundle every local descriptor bound to the encoding of its position.

    Descriptors are projected (when ``proj`` is given), L2-normalized and
    centered before binding: on the image mean by default, on ``center``
    when a population mean is supplied. An empty feature set yields a zero
    vector flagged ``degenerate``.
    """
    _check_bank(bx, fs.width, "X")
    _check_bank(by, fs.height, "Y")
    if bx.d != by.d:
        raise DimensionMismatch(f"bank dimensions differ: {bx.d} vs {by.d}")
    d = bx.d
    n = len(fs)
    if n == 0:
        return HolisticDescriptor(np.zeros(d), "local_pose", meta, fs.image_id, True)

    desc = fs.descriptors
    if proj is not None:
        if proj.out_dim != d:
            raise DimensionMismatch(f"projection outputs {proj.out_dim}, banks use {d}")
        desc = project(proj, desc, fast=True)
    elif desc.shape[1] != d:
        raise DimensionMismatch(f"descriptor dim {desc.shape[1]} != {d} and no projection")
    desc = l2_normalize(desc)
    desc = desc - (desc.mean(axis=0) if center is None else center)

    xs = encode_scalars(bx, fs.xy[:, 0], np.int8)
    ys = encode_scalars(by, fs.xy[:, 1], np.int8)
    # n pose bindings, n descriptor bindings, then n - 1 pairwise sums
    poses = xs * ys
    terms = desc * poses
    acc = terms.sum(axis=0)
    if counter is not None:
        counter.multiplications += 2 * n
        counter.sums += n - 1
    return HolisticDescriptor(acc, "local_pose", meta, fs.image_id, not np.any(acc))


@dataclass
class Encoder:
    """Shared encoder state for one run: symbol table, banks and projections.

    Everything is derived from ``seed``, so encoders built in separate
    processes with the same settings produce identical descriptors.
    """

    d: int = 4096
    seed: int = 0
    n_x: int = 4
    n_y: int = 6
    budget: Optional[int] = 200
    project: bool = True
    decorrelate: bool = True
    _banks: dict = field(default_factory=dict, init=False, repr=False)
    _projections: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self.table = SymbolTable(self.seed, self.d)

    def fingerprint(self, method: str = "hdc", centering: str = "image") -> Fingerprint:
        return Fingerprint(self.d, self.seed, self.n_x, self.n_y, centering, self.project, self.decorrelate, method)

    def banks(self, width: float, height: float) -> tuple[BasisBank, BasisBank]:
        key = (float(width), float(height))
        if key not in self._banks:
            self._banks[key] = (
                make_basis_bank(self.table, "X", (1.0, width), self.n_x, self.decorrelate),
                make_basis_bank(self.table, "Y", (1.0, height), self.n_y, self.decorrelate),
            )
        return self._banks[key]

    def projection(self, in_dim: int) -> ProjectionSpec | None:
        if not self.project:
            return None
        if in_dim not in self._projections:
            self._projections[in_dim] = ProjectionSpec(self.seed, in_dim, self.d)
        return self._projections[in_dim]

    def prepare(self, fs: FeatureSet) -> FeatureSet:
        """Apply the feature budget."""
        return fs.top_k(self.budget) if self.budget else fs

    def encode(
        self,
        fs: FeatureSet,
        counter: OpCounter | None = None,
        center: np.ndarray | None = None,
    ) -> HolisticDescriptor:
        """Pose-bound holistic descriptor; ``center`` switches to set centering."""
        fs = self.prepare(fs)
        bx, by = self.banks(fs.width, fs.height)
        proj = self.projection(fs.dim) if len(fs) else None
        meta = self.fingerprint("hdc", "image" if center is None else "set")
        return aggregate_local(fs, bx, by, proj, counter, meta, center)

    def encode_many(self, sets: Iterable[FeatureSet], center: np.ndarray | None = None) -> list[HolisticDescriptor]:
        return [self.encode(fs, center=center) for fs in sets]

    def _normalized(self, fs: FeatureSet) -> np.ndarray:
        desc = fs.descriptors
        proj = self.projection(fs.dim)
        if proj is not None:
            desc = project(proj, desc, fast=True)
        elif desc.shape[1] != self.d:
            raise DimensionMismatch(f"descriptor dim {desc.shape[1]} != {self.d} and projection disabled")
        return l2_normalize(desc)

    def population_mean(self, sets: Iterable[FeatureSet]) -> np.ndarray:
        """Mean preprocessed descriptor over every feature of ``sets``."""
        total = np.zeros(self.d)
        count = 0
        for fs in sets:
            fs = self.prepare(fs)
            if len(fs):
                total += self._normalized(fs).sum(axis=0)
                count += len(fs)
        if count == 0:
            raise ValueError("centering population holds no features")
        return total / count

    def encode_plain(
        self,
        sets: Sequence[FeatureSet],
        centering: str = "set",
        mean: np.ndarray | None = None,
    ) -> list[HolisticDescriptor]:
        """Plain bundles of local descriptors without position binding.

        With ``centering="set"`` the mean is taken over ``sets`` unless an
        explicit ``mean`` is given. Image centering makes each full bundle
        exactly zero, so it is only meaningful for partial bundles.
        """
        if centering not in ("set", "image"):
            raise ValueError(f"unknown centering mode {centering!r}")
        sets = [self.prepare(fs) for fs in sets]
        if centering == "set" and mean is None:
            mean = self.population_mean(sets)
        meta = self.fingerprint("bundle", centering)
        out = []
        for fs in sets:
            if len(fs) == 0:
                out.append(HolisticDescriptor(np.zeros(self.d), "bundled", meta, fs.image_id, True))
                continue
            desc = self._normalized(fs)
            desc = desc - (desc.mean(axis=0) if centering == "image" else mean)
            out.append(bundle_holistic(list(desc), meta, fs.image_id))
        return out
