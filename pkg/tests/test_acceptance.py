"""Acceptance suite: one check per criterion, each at its stated tolerance.

Every check returns ``(passed, detail)``. Under pytest each result is also
listed in an "acceptance criteria" section of the terminal summary; run
this file directly to print only the PASS/FAIL lines.
"""

import os
import statistics
import subprocess
import sys
import tempfile
import time
from dataclasses import replace
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import spearmanr

import oracles
from hdcagg.aggregation import Encoder, OpCounter, aggregate_local
from hdcagg.baseline import exhaustive_similarity, mutual_matches
from hdcagg.core import SymbolTable, bind, bundle, cosine, ones
from hdcagg.evaluation import GroundTruth, average_precision, recall_at_k
from hdcagg.experiments import PINNED, capacity_experiment, dimension_sweep, grid_sweep, run_benchmark, summarize
from hdcagg.features import FeatureSet
from hdcagg.position import encode_scalars, make_basis_bank
from hdcagg.preprocess import ProjectionSpec
from hdcagg.synth import make_benchmark

# Frozen from the first oracle-validated run of the pinned benchmark.
ANCHOR_AP_HDC = 1.0
ANCHOR_AP_BUNDLE = 0.9700819844166421


def _rng(*key):
    return np.random.default_rng(list(key))


def check_algebra():
    worst = 0.0
    for d in (64, 4096):
        for s in range(100):
            rng = _rng(1, d, s)
            b = rng.choice([-1.0, 1.0], size=d)
            worst = max(worst, np.max(np.abs(bind(b, b) - ones(d))))
            x = rng.normal(size=d)
            S = rng.normal(size=(int(rng.integers(2, 8)), d))
            worst = max(worst, np.max(np.abs(bind(x, bundle(S)) - bundle([bind(x, v) for v in S]))))
            a, c = rng.normal(size=(2, d))
            worst = max(worst, abs(cosine(bind(b, a), bind(b, c)) - cosine(a, c)))
    return worst <= 1e-12, f"max deviation {worst:.2e} over 200 instances (tol 1e-12)"


def check_quasi_orthogonality():
    t0 = time.perf_counter()
    table = SymbolTable(2024, 4096)
    c = np.array([cosine(table.get(f"a{i}"), table.get(f"b{i}")) for i in range(1000)])
    dt = time.perf_counter() - t0
    mean, std, mx = c.mean(), c.std(), np.abs(c).max()
    ok = -0.005 <= mean <= 0.005 and 0.012 <= std <= 0.020 and mx < 0.08 and dt < 5
    return ok, f"mean {mean:+.4f}, std {std:.4f}, max|cos| {mx:.4f}, {dt:.2f}s"


def check_distance_law():
    t0 = time.perf_counter()
    fracs = (0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0)
    seeds = 100
    cos_1d = np.zeros((seeds, len(fracs)))
    # (p1, p2) pairs for the 2-D product law
    pairs = [((100, 100), (140, 130)), ((300, 50), (250, 90)), ((20, 400), (60, 440)), ((10, 10), (600, 470))]
    pose, prod = np.zeros((seeds, len(pairs))), np.zeros((seeds, len(pairs)))
    for s in range(seeds):
        table = SymbolTable(s, 4096)
        bx = make_basis_bank(table, "X", (1, 641), 4)
        L = bx.width
        v1 = 1.0 + _rng(3, s).uniform(0, L)  # v1 + 3L stays in range
        xs = encode_scalars(bx, [v1] + [v1 + f * L for f in fracs])
        cos_1d[s] = [cosine(xs[0], x) for x in xs[1:]]

        bx = make_basis_bank(table, "X", (1, 640), 4)
        by = make_basis_bank(table, "Y", (1, 480), 6)
        for k, (p1, p2) in enumerate(pairs):
            X = encode_scalars(bx, [p1[0], p2[0]])
            Y = encode_scalars(by, [p1[1], p2[1]])
            pose[s, k] = cosine(X[0] * Y[0], X[1] * Y[1])
            prod[s, k] = cosine(X[0], X[1]) * cosine(Y[0], Y[1])
    dt = time.perf_counter() - t0
    expect = np.maximum(0.0, 1.0 - np.array(fracs))
    err_1d = np.abs(cos_1d.mean(axis=0) - expect).max()
    err_2d = np.abs(pose.mean(axis=0) - prod.mean(axis=0)).max()
    ok = err_1d <= 0.05 and err_2d <= 0.05 and dt < 30
    return ok, f"max |mean cos - max(0, 1 - D/L)| {err_1d:.4f}, product law {err_2d:.4f}, {dt:.1f}s"


def check_capacity():
    t0 = time.perf_counter()
    recs = capacity_experiment(d=4096)
    dt = time.perf_counter() - t0
    r200 = next(r for r in recs if r["n"] == 200)
    margin = r200["with_binding"] / (3 * r200["random_bound_std"])
    rel = max(abs(r["with_binding"] * np.sqrt(r["n"]) - 1.0) for r in recs)
    ok = margin > 1.0 and rel <= 0.2 and dt < 120
    return ok, (
        f"n=200 similarity {r200['with_binding']:.4f} vs 3 x std {3 * r200['random_bound_std']:.4f} "
        f"(pose-bound random pairs; raw-descriptor pairs give {3 * r200['random_std']:.4f}), "
        f"max deviation from 1/sqrt(n) {rel:.1%}, {dt:.1f}s"
    )


def _random_fs(rng, n):
    return FeatureSet(
        "f", 640, 480, rng.normal(size=(n, 16)),
        np.column_stack([rng.uniform(1, 640, n), rng.uniform(1, 480, n)]), np.ones(n),
    )


def check_oracles():
    bad = []
    for s in range(100):
        rng = _rng(5, s)
        a, b = _random_fs(rng, int(rng.integers(1, 31))), _random_fs(rng, int(rng.integers(1, 31)))
        got = [(i, j, v) for i, j, v, _ in mutual_matches(a, b).pairs]
        ref = oracles.mutual_pairs(a.descriptors, b.descriptors)
        if [g[:2] for g in got] != [r[:2] for r in ref] or any(abs(g[2] - r[2]) > 1e-9 for g, r in zip(got, ref)):
            bad.append(("mutual_matches", s))
        sa, sb = oracles.standardize(a.descriptors), oracles.standardize(b.descriptors)
        for mode in ("uniform", "positional"):
            got = exhaustive_similarity(a, b, mode, standardize=True)
            ref = oracles.exhaustive(sa, a.xy, sb, b.xy, 640, 480, 4, 6, mode == "positional")
            if abs(got - ref) > 1e-9:
                bad.append((mode, s))

        n_db, n_q = rng.integers(1, 31, size=2)
        S = np.round(rng.uniform(-1, 1, (n_db, n_q)), int(rng.integers(1, 4)))
        mask = rng.uniform(size=(n_db, n_q)) < 0.15
        mask[rng.integers(n_db), rng.integers(n_q)] = True
        gt = GroundTruth.from_mask(mask)
        if abs(average_precision(S, gt) - oracles.average_precision(S, gt.positives)) > 1e-9:
            bad.append(("average_precision", s))
        ks = [1, 2, 5, 10, 30]
        got_r = recall_at_k(S, gt, ks)
        ref_r = oracles.recall_at_k(S, gt.positives, ks)
        if any(g[0] != r[0] or abs(g[1] - r[1]) > 1e-9 for g, r in zip(got_r, ref_r)):
            bad.append(("recall_at_k", s))
    return not bad, f"{len(bad)} mismatches over 100 instances x 5 functions" + (f": {bad[:5]}" if bad else "")


@lru_cache(maxsize=1)
def pinned_run():
    t0 = time.perf_counter()
    bench = make_benchmark(PINNED)
    mats = run_benchmark(bench, Encoder(d=4096, seed=PINNED.seed, n_x=4, n_y=6), ("hdc", "bundle", "positional"))
    aps = {k: average_precision(m, bench.gt) for k, m in mats.items()}
    rho = spearmanr(mats["hdc"].values.ravel(), mats["positional"].values.ravel()).statistic
    return aps, float(rho), time.perf_counter() - t0


def check_pinned_vs_bundle():
    aps, _, dt = pinned_run()
    ok = aps["hdc"] > aps["bundle"] and dt < 300
    return ok, f"AP hdc {aps['hdc']:.6f} > plain bundle {aps['bundle']:.6f} ({dt:.1f}s for all three methods)"


def check_pinned_spearman():
    aps, rho, _ = pinned_run()
    return rho > 0.7, f"Spearman rho(hdc, exhaustive positional) {rho:.4f} (needs > 0.7)"


def check_pinned_anchor():
    aps, _, _ = pinned_run()
    ok = abs(aps["hdc"] - ANCHOR_AP_HDC) <= 1e-9 and abs(aps["bundle"] - ANCHOR_AP_BUNDLE) <= 1e-9
    return ok, f"AP hdc {aps['hdc']!r} (anchor {ANCHOR_AP_HDC!r}), plain bundle {aps['bundle']!r} (anchor {ANCHOR_AP_BUNDLE!r})"


def check_dimension_sweep():
    t0 = time.perf_counter()
    recs = dimension_sweep((64, 512, 4096), seeds=range(10), bench=PINNED)
    s = {r["d"]: r for r in summarize(recs, "d")}
    ok = abs(s[512]["mean"] - s[4096]["mean"]) <= 0.05 and s[64]["std"] > s[4096]["std"]
    return ok, (
        f"mean AP d=512 {s[512]['mean']:.4f} vs d=4096 {s[4096]['mean']:.4f}; "
        f"std d=64 {s[64]['std']:.4f} > d=4096 {s[4096]['std']:.4f}; 10 seeds, {time.perf_counter() - t0:.0f}s"
    )


def check_grid_sweep():
    t0 = time.perf_counter()
    recs = grid_sweep((2, 7), (6,), seeds=range(3), bench=replace(PINNED, shift=0.25))
    s = {r["n_x"]: r["mean"] for r in summarize(recs, "n_x")}
    return s[2] > s[7], f"shift w/4: mean AP n_x=2 {s[2]:.4f} > n_x=7 {s[7]:.4f}; 3 seeds, {time.perf_counter() - t0:.0f}s"


def check_cost():
    table = SymbolTable(0, 4096)
    bx, by = make_basis_bank(table, "X", (1, 640), 4), make_basis_bank(table, "Y", (1, 480), 6)
    proj = ProjectionSpec(0, 16, 4096)
    counts_ok = True
    for n in (1, 2, 50, 200):
        c = OpCounter()
        aggregate_local(_random_fs(_rng(9, n), n), bx, by, proj, counter=c)
        counts_ok &= (c.sums, c.multiplications) == (n - 1, 2 * n)
    rng = _rng(9)
    fs = FeatureSet(
        "t", 640, 480, rng.normal(size=(200, 1024)),
        np.column_stack([rng.uniform(1, 640, 200), rng.uniform(1, 480, 200)]), rng.uniform(size=200),
    )
    enc = Encoder(d=4096, seed=0)
    enc.encode(fs)  # build the cached projection and banks once
    times = []
    for _ in range(20):
        t0 = time.perf_counter()
        enc.encode(fs)
        times.append(time.perf_counter() - t0)
    best, med = min(times) * 1e3, statistics.median(times) * 1e3
    return counts_ok and best < 50, (
        f"op counts (n-1 sums, 2n multiplications) {'exact' if counts_ok else 'WRONG'}; "
        f"200 x 1024-D features -> 4096-D in {best:.1f} ms (best of 20, median {med:.1f} ms)"
    )


def _cli(args, cwd, hashseed):
    env = dict(os.environ, PYTHONHASHSEED=str(hashseed))
    r = subprocess.run([sys.executable, "-m", "hdcagg.cli", *map(str, args)], cwd=cwd, env=env, capture_output=True, text=True)
    if r.returncode != 0:
        raise RuntimeError(f"{args[0]} failed: {r.stderr}")
    return r.stdout


CLI_SCRIPT = [
    ["synth", "--out", "bench", "--places", 10, "--features", 20],
    ["synth", "--out", "benchb", "--places", 4, "--features", 8, "--binary"],
    ["encode", "bench/db", "--out", "db.hdv", "--dim", 512],
    ["encode", "bench/query", "--out", "q.hdv", "--dim", 512],
    ["encode", "bench/query", "--out", "qb.hdv", "--dim", 512, "--method", "bundle", "--centering", "set",
     "--population", "bench/db", "bench/query"],
    ["similarity", "--db", "db.hdv", "--query", "q.hdv", "--out", "sim.csv", "--dim", 512],
    ["evaluate", "--sim", "sim.csv", "--gt", "bench/ground_truth.csv", "--out", "pr.csv", "--db", "db.hdv"],
    ["baseline", "--db", "bench/db", "--query", "bench/query", "--mode", "positional", "--out", "base.csv"],
    ["capacity", "--ns", "1,4,16", "--trials", 3, "--dim", 512, "--out", "cap.csv"],
    ["sweep-dims", "--dims", "64,256", "--seeds", 2, "--places", 6, "--out", "dims.csv"],
    ["sweep-grid", "--nx-values", "1,3", "--ny-values", "2", "--seeds", 1, "--places", 6, "--dim", 256, "--out", "grid.csv"],
]


def check_determinism():
    with tempfile.TemporaryDirectory() as tmp:
        outs = []
        for run, hashseed in (("a", 1), ("b", 2)):
            root = Path(tmp) / run
            root.mkdir()
            stdout = [_cli(args, root, hashseed) for args in CLI_SCRIPT]
            files = {p.relative_to(root): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}
            outs.append((stdout, files))
        (sa, fa), (sb, fb) = outs
        differ = [str(p) for p in sorted(set(fa) | set(fb)) if fa.get(p) != fb.get(p)]
        ok = not differ and sa == sb
        return ok, (
            f"{len(CLI_SCRIPT)} commands ({len({a[0] for a in CLI_SCRIPT})} distinct) run twice in fresh processes: "
            f"{len(fa)} files, {len(differ)} differ" + (f" {differ[:5]}" if differ else "") + ("" if sa == sb else ", stdout differs")
        )


CRITERIA = [
    ("1 algebraic exactness", check_algebra),
    ("2 quasi-orthogonality", check_quasi_orthogonality),
    ("3 position distance law", check_distance_law),
    ("4 capacity curve", check_capacity),
    ("5 oracle equivalence", check_oracles),
    ("6a pinned benchmark: hdc beats plain bundle", check_pinned_vs_bundle),
    ("6b pinned benchmark: rank agreement with exhaustive", check_pinned_spearman),
    ("6c pinned benchmark: regression anchor", check_pinned_anchor),
    ("7 dimension sweep", check_dimension_sweep),
    ("8 grid sweep under shift", check_grid_sweep),
    ("9 cost accounting", check_cost),
    ("10 CLI determinism", check_determinism),
]


@pytest.mark.acceptance
@pytest.mark.parametrize("name, check", CRITERIA, ids=[c[0].split()[0] for c in CRITERIA])
def test_criterion(name, check, acceptance):
    passed, detail = check()
    acceptance(name, passed, detail)
    assert passed, detail


if __name__ == "__main__":
    failed = 0
    for name, check in CRITERIA:
        passed, detail = check()
        failed += not passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}", flush=True)
    sys.exit(1 if failed else 0)
