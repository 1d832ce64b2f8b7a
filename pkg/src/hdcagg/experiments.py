"""Experiment drivers: capacity curve and parameter sweeps on synthetic data.

Every function returns a list of flat dict records and is a deterministic
function of its arguments.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable, Sequence

import numpy as np

from .aggregation import Encoder
from .baseline import exhaustive_similarity_matrix
from .core import seeded_generator
from .evaluation import SimilarityMatrix, average_precision, similarity_matrix
from .features import FeatureSet
from .position import encode_scalars
from .preprocess import l2_normalize, project
from .synth import Benchmark, BenchmarkConfig, make_benchmark, perturb_unit, sample_descriptors

__all__ = [
    "run_benchmark",
    "capacity_experiment",
    "dimension_sweep",
    "grid_sweep",
    "feature_count_sweep",
    "summarize",
]

PINNED = BenchmarkConfig()


def run_benchmark(bench: Benchmark, encoder: Encoder, methods: Sequence[str] = ("hdc",)) -> dict[str, SimilarityMatrix]:
    """Similarity matrices for the requested methods.

    ``hdc`` is pose-bound aggregation, ``bundle`` the plain bundle of the same
    descriptors (set centering over db and query), ``uniform``/``positional``
    the exhaustive local comparison.
    """
    out = {}
    for m in methods:
        if m == "hdc":
            out[m] = similarity_matrix(encoder.encode_many(bench.db), encoder.encode_many(bench.query))
        elif m == "bundle":
            hs = encoder.encode_plain(list(bench.db) + list(bench.query), centering="set")
            out[m] = similarity_matrix(hs[: len(bench.db)], hs[len(bench.db):])
        elif m in ("uniform", "positional"):
            values = exhaustive_similarity_matrix(bench.db, bench.query, m, encoder.n_x, encoder.n_y)
            out[m] = SimilarityMatrix(
                values, [fs.image_id for fs in bench.db], [fs.image_id for fs in bench.query], m, None
            )
        else:
            raise ValueError(f"unknown method {m!r}")
    return out


def _bound_encodings(encoder: Encoder, fs: FeatureSet) -> tuple[np.ndarray, np.ndarray]:
    """Preprocessed descriptors and their pose-bound encodings, row per feature."""
    desc = fs.descriptors
    proj = encoder.projection(fs.dim)
    if proj is not None:
        desc = project(proj, desc)
    desc = l2_normalize(desc)
    desc = desc - desc.mean(axis=0)
    bx, by = encoder.banks(fs.width, fs.height)
    poses = encode_scalars(bx, fs.xy[:, 0]) * encode_scalars(by, fs.xy[:, 1])
    return desc, desc * poses


def _row_cos(v: np.ndarray, rows: np.ndarray) -> np.ndarray:
    nv = np.linalg.norm(v)
    nr = np.linalg.norm(rows, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        c = rows @ v / (nr * nv)
    return np.where((nr > 0) & (nv > 0), c, 0.0)


def capacity_experiment(
    d: int = 4096,
    ns: Iterable[int] = (1, 2, 5, 10, 20, 50, 100, 200),
    trials: int = 20,
    seed: int = 0,
    n_features: int | None = None,
    desc_dim: int = 1024,
    noise_cos: float = 1.0,
    jitter: float = 0.0,
    n_words: int = 0,
    word_spread: float = 1.0,
    width: float = 640.0,
    height: float = 480.0,
    n_x: int = 4,
    n_y: int = 6,
) -> list[dict]:
    """Similarity of one true match as distractors are bundled in.

    Per trial a database image and a query observation of it are generated.
    Database feature 0 is the single encoding; the query bundle holds its
    counterpart plus ``n - 1`` other query features in random order. Three
    curves come out per ``n``: with pose binding, without binding, and the
    random-pair statistics (of descriptors and of pose-bound encodings).
    With ``noise_cos=1`` and ``jitter=0`` the query equals the database
    image, so ``n=1`` gives similarity 1.
    """
    ns = sorted({int(n) for n in ns})
    if not ns or ns[0] < 1:
        raise ValueError("counts must be >= 1")
    k = int(n_features or ns[-1])
    if k < ns[-1]:
        raise ValueError(f"query image has {k} features, cannot bundle {ns[-1]}")
    encoder = Encoder(d=d, seed=seed, n_x=n_x, n_y=n_y, budget=None)
    vocab = None
    if n_words > 0:
        vocab = l2_normalize(seeded_generator(seed, "capacity-vocab").standard_normal((n_words, desc_dim)))

    with_b = np.zeros((trials, len(ns)))
    without_b = np.zeros((trials, len(ns)))
    rand_desc, rand_bound = [], []
    for t in range(trials):
        rng = seeded_generator(seed, "capacity", t)
        desc = sample_descriptors(rng, k, vocab, desc_dim, word_spread)
        xy = np.column_stack([rng.uniform(1.0, width, k), rng.uniform(1.0, height, k)])
        qdesc = perturb_unit(rng, desc, noise_cos) if noise_cos < 1.0 else desc
        qxy = np.clip(xy + rng.standard_normal((k, 2)) * [jitter * width, jitter * height], 1.0, [width, height])
        db = FeatureSet("db", width, height, desc, xy, np.ones(k))
        q = FeatureSet("q", width, height, qdesc, qxy, np.ones(k))
        db_desc, db_bound = _bound_encodings(encoder, db)
        q_desc, q_bound = _bound_encodings(encoder, q)

        order = np.r_[0, 1 + rng.permutation(k - 1)]
        cum_bound = np.cumsum(q_bound[order], axis=0)[np.array(ns) - 1]
        cum_desc = np.cumsum(q_desc[order], axis=0)[np.array(ns) - 1]
        with_b[t] = _row_cos(db_bound[0], cum_bound)
        without_b[t] = _row_cos(db_desc[0], cum_desc)

        i = rng.integers(0, k, size=k)
        j = (i + 1 + rng.integers(0, k - 1, size=k)) % k if k > 1 else i
        for a, b in zip(i, j):
            rand_desc.append(_row_cos(db_desc[a], q_desc[b : b + 1])[0])
            rand_bound.append(_row_cos(db_bound[a], q_bound[b : b + 1])[0])

    rd, rb = np.array(rand_desc), np.array(rand_bound)
    return [
        {
            "n": n,
            "with_binding": float(with_b[:, c].mean()),
            "with_binding_std": float(with_b[:, c].std()),
            "without_binding": float(without_b[:, c].mean()),
            "without_binding_std": float(without_b[:, c].std()),
            "random_mean": float(rd.mean()),
            "random_std": float(rd.std()),
            "random_bound_mean": float(rb.mean()),
            "random_bound_std": float(rb.std()),
        }
        for c, n in enumerate(ns)
    ]


def _encoder_for(seed: int, **kwargs) -> Encoder:
    return Encoder(seed=seed, **kwargs)


def dimension_sweep(
    dims: Iterable[int] = (64, 128, 256, 512, 1024, 2048, 4096),
    seeds: Iterable[int] = range(10),
    bench: BenchmarkConfig = PINNED,
    n_x: int = 4,
    n_y: int = 6,
) -> list[dict]:
    """Average precision of pose-bound aggregation per (d, seed).

    The seed drives both the synthetic benchmark and the encoder.
    """
    dims = [int(d) for d in dims]
    if any(d < 16 for d in dims):
        raise ValueError(f"dimensions must be >= 16, got {dims}")
    records = []
    for s in seeds:
        b = make_benchmark(bench.with_seed(s))
        for d in dims:
            m = run_benchmark(b, _encoder_for(s, d=d, n_x=n_x, n_y=n_y))["hdc"]
            records.append({"d": d, "seed": int(s), "ap": average_precision(m, b.gt)})
    return records


def grid_sweep(
    nxs: Iterable[int] = range(1, 10),
    nys: Iterable[int] = range(1, 10),
    seeds: Iterable[int] = range(3),
    bench: BenchmarkConfig = replace(PINNED, shift=0.25),
    d: int = 4096,
) -> list[dict]:
    """Average precision per (n_x, n_y, seed); default benchmark shifts queries by w/4."""
    records = []
    for s in seeds:
        b = make_benchmark(bench.with_seed(s))
        for nx in nxs:
            for ny in nys:
                m = run_benchmark(b, _encoder_for(s, d=d, n_x=int(nx), n_y=int(ny)))["hdc"]
                records.append({"n_x": int(nx), "n_y": int(ny), "seed": int(s), "ap": average_precision(m, b.gt)})
    return records


def feature_count_sweep(
    counts: Iterable[int] = (10, 25, 50, 100, 200),
    seeds: Iterable[int] = range(3),
    bench: BenchmarkConfig = PINNED,
    d: int = 4096,
    n_x: int = 4,
    n_y: int = 6,
    exhaustive: bool = True,
) -> list[dict]:
    """HDC and exhaustive positional AP as the number of features per place grows."""
    records = []
    for s in seeds:
        for c in counts:
            b = make_benchmark(replace(bench, n_features=int(c), seed=int(s)))
            methods = ("hdc", "positional") if exhaustive else ("hdc",)
            mats = run_benchmark(b, _encoder_for(s, d=d, n_x=n_x, n_y=n_y), methods)
            rec = {"n_features": int(c), "seed": int(s), "ap_hdc": average_precision(mats["hdc"], b.gt)}
            if exhaustive:
                rec["ap_positional"] = average_precision(mats["positional"], b.gt)
            records.append(rec)
    return records


def summarize(records: Sequence[dict], by: str | Sequence[str], value: str = "ap") -> list[dict]:
    """Mean, std (population), min and max of ``value`` grouped by key(s)."""
    keys = [by] if isinstance(by, str) else list(by)
    groups: dict[tuple, list[float]] = {}
    for r in records:
        groups.setdefault(tuple(r[k] for k in keys), []).append(r[value])
    out = []
    for g in sorted(groups):
        v = np.array(groups[g])
        row = dict(zip(keys, g))
        row.update({"mean": float(v.mean()), "std": float(v.std()), "min": float(v.min()), "max": float(v.max()), "count": len(v)})
        out.append(row)
    return out
