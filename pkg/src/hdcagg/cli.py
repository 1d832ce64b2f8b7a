"""Command-line pipelines.

    hdcagg synth --out bench/
    hdcagg encode bench/db --out db.hdv
    hdcagg encode bench/query --out q.hdv
    hdcagg similarity --db db.hdv --query q.hdv --out sim.csv
    hdcagg evaluate --sim sim.csv --gt bench/ground_truth.csv --out pr.csv

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from . import io
from .aggregation import IncompatibleDescriptors
from .config import RunConfig, load_config
from .evaluation import SimilarityMatrix, average_precision, pr_curve, recall_at_k, similarity_matrix
from .experiments import capacity_experiment, dimension_sweep, grid_sweep, summarize
from .baseline import exhaustive_similarity_matrix
from .synth import make_benchmark

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    out = []
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part[1:]:
                lo, hi = part.split("-", 1)
                out.extend(range(int(lo), int(hi) + 1))
            elif part:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers or ranges, got {text!r}")
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("run configuration (flags override --config)")
    g.add_argument("--config", type=Path, help="YAML configuration file")
    g.add_argument("--dim", type=int, dest="d", help="hypervector dimensionality (default 4096)")
    g.add_argument("--seed", type=int, help="master seed (default 42)")
    g.add_argument("--nx", type=int, dest="n_x", help="horizontal subintervals (default 4)")
    g.add_argument("--ny", type=int, dest="n_y", help="vertical subintervals (default 6)")
    g.add_argument("--budget", type=int, help="max features per image, highest score first (default 200)")
    g.add_argument("--centering", choices=("set", "image"))
    g.add_argument("--no-project", dest="project", action="store_const", const=False)
    g.add_argument("--no-decorrelate", dest="decorrelate", action="store_const", const=False,
                   help="use the plain contiguous split for the Y axis as well")


def _config(args) -> RunConfig:
    cfg = load_config(args.config)
    overrides = {k: getattr(args, k, None) for k in ("d", "seed", "n_x", "n_y", "budget", "centering", "project", "decorrelate")}
    for k in ("mode", "ks"):
        if getattr(args, k, None) is not None:
            overrides[k] = getattr(args, k)
    return cfg.override(**overrides)


def cmd_synth(args, cfg: RunConfig) -> int:
    bench_over = {k: v for k, v in (("n_places", args.places), ("n_features", args.features), ("shift", args.shift)) if v is not None}
    bcfg = replace(cfg.benchmark, **bench_over)
    bench = make_benchmark(bcfg)
    out = Path(args.out)
    suffix = ".featb" if args.binary else ".feat"
    for sub, sets in (("db", bench.db), ("query", bench.query)):
        for fs in sets:
            io.write_feature_file(out / sub / f"{fs.image_id}{suffix}", fs, binary=args.binary)
    io.write_ground_truth(out / "ground_truth.csv", bench.gt)
    io.atomic_write(out / "benchmark.yaml", yaml.safe_dump(bcfg.to_dict(), sort_keys=True))
    print(f"wrote {len(bench.db)} database and {len(bench.query)} query images to {out}")
    return EXIT_OK


def cmd_encode(args, cfg: RunConfig) -> int:
    enc = cfg.encoder()
    sets = io.read_feature_dir(*args.inputs)
    if not sets:
        raise UsageError("no feature files found")
    if args.method == "bundle":
        population = io.read_feature_dir(*args.population) if args.population else sets
        mean = enc.population_mean(population) if cfg.centering == "set" else None
        hs = enc.encode_plain(sets, cfg.centering, mean)
    else:
        center = None
        if cfg.centering == "set":
            population = io.read_feature_dir(*args.population) if args.population else sets
            center = enc.population_mean(population)
        hs = enc.encode_many(sets, center=center)
    io.write_holistic(args.out, hs)
    n_deg = sum(h.degenerate for h in hs)
    print(f"encoded {len(hs)} images into {cfg.d}-D descriptors ({n_deg} degenerate) -> {args.out}")
    return EXIT_OK


def _session_check(hs, cfg: RunConfig, path) -> None:
    if not hs:
        return
    meta = hs[0].meta
    expect = cfg.fingerprint(meta.method if meta else "hdc", meta.centering if meta else None)
    if meta != expect:
        raise IncompatibleDescriptors(f"{path}: descriptors built with {meta}, session uses {expect}")


def cmd_similarity(args, cfg: RunConfig) -> int:
    db = io.read_holistic(args.db)
    q = io.read_holistic(args.query)
    _session_check(db, cfg, args.db)
    _session_check(q, cfg, args.query)
    m = similarity_matrix(db, q)
    io.write_similarity(args.out, m)
    print(f"wrote {m.shape[0]}x{m.shape[1]} similarity matrix -> {args.out}")
    return EXIT_OK


def cmd_evaluate(args, cfg: RunConfig) -> int:
    m = io.read_similarity(args.sim)
    for path in (args.db, args.query):
        if path is None:
            continue
        hs = io.read_holistic(path)
        if hs and hs[0].meta != m.meta:
            raise IncompatibleDescriptors(f"{path}: fingerprint {hs[0].meta} disagrees with matrix {m.meta}")
    gt = io.read_ground_truth(args.gt, shape=m.shape)
    ap = average_precision(m, gt)
    rk = recall_at_k(m, gt, cfg.ks)
    print(f"AP {ap:.6f}")
    for k, r in rk:
        print(f"recall@{k} {r:.6f}")
    if args.out:
        curve = pr_curve(m, gt)
        recs = [{"threshold": t, "precision": p, "recall": r} for t, p, r in curve]
        io.write_records(args.out, recs, {"method": m.method, "average_precision": ap, "recall_at_k": rk})
    return EXIT_OK


def cmd_baseline(args, cfg: RunConfig) -> int:
    db = [fs.top_k(cfg.budget) for fs in io.read_feature_dir(args.db)]
    q = [fs.top_k(cfg.budget) for fs in io.read_feature_dir(args.query)]
    values = exhaustive_similarity_matrix(db, q, cfg.mode, cfg.n_x, cfg.n_y)
    # no hypervectors involved; the fingerprint still records the seed and grid settings
    meta = cfg.fingerprint(f"exhaustive-{cfg.mode}", "image")
    m = SimilarityMatrix(values, [fs.image_id for fs in db], [fs.image_id for fs in q], meta.method, meta)
    io.write_similarity(args.out, m)
    print(f"wrote {m.shape[0]}x{m.shape[1]} exhaustive ({cfg.mode}) similarity matrix -> {args.out}")
    return EXIT_OK


def cmd_capacity(args, cfg: RunConfig) -> int:
    recs = capacity_experiment(cfg.d, args.ns, args.trials, cfg.seed, n_x=cfg.n_x, n_y=cfg.n_y)
    io.write_records(args.out, recs, {"experiment": "capacity", "config": cfg.to_dict()})
    for r in recs:
        print(f"n={r['n']:4d} with={r['with_binding']:.4f} without={r['without_binding']:.4f} random_std={r['random_bound_std']:.4f}")
    return EXIT_OK


def cmd_sweep_dims(args, cfg: RunConfig) -> int:
    seeds = [cfg.seed + i for i in range(args.seeds)]
    bench = replace(cfg.benchmark, **({"n_places": args.places} if args.places else {}))
    recs = dimension_sweep(args.dims, seeds, bench, cfg.n_x, cfg.n_y)
    io.write_records(args.out, recs, {"experiment": "sweep-dims", "config": cfg.to_dict()})
    for row in summarize(recs, "d"):
        print(f"d={row['d']:5d} AP mean={row['mean']:.4f} std={row['std']:.4f}")
    return EXIT_OK


def cmd_sweep_grid(args, cfg: RunConfig) -> int:
    seeds = [cfg.seed + i for i in range(args.seeds)]
    over = {"shift": args.shift}
    if args.places:
        over["n_places"] = args.places
    bench = replace(cfg.benchmark, **over)
    recs = grid_sweep(args.nx_values, args.ny_values, seeds, bench, cfg.d)
    io.write_records(args.out, recs, {"experiment": "sweep-grid", "config": cfg.to_dict()})
    for row in summarize(recs, "n_x"):
        print(f"n_x={row['n_x']} AP mean={row['mean']:.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hdcagg", description="Hyperdimensional aggregation of local image descriptors.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="write a synthetic place-recognition benchmark")
    p.add_argument("--out", required=True)
    p.add_argument("--binary", action="store_true", help="binary feature files")
    p.add_argument("--places", type=int)
    p.add_argument("--features", type=int)
    p.add_argument("--shift", type=float, help="horizontal query shift as a fraction of the width")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("encode", help="feature files -> holistic descriptor file")
    p.add_argument("inputs", nargs="+", help="feature files or directories")
    p.add_argument("--out", required=True)
    p.add_argument("--method", choices=("hdc", "bundle"), default="hdc")
    p.add_argument("--population", nargs="+", help="centering population for --centering set")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("similarity", help="cosine similarity matrix of two descriptor files")
    p.add_argument("--db", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_similarity)

    p = sub.add_parser("evaluate", help="average precision, recall@k and PR curve")
    p.add_argument("--sim", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--k", type=_int_list, dest="ks")
    p.add_argument("--db", help="descriptor file to cross-check the matrix fingerprint")
    p.add_argument("--query", help="descriptor file to cross-check the matrix fingerprint")
    p.add_argument("--out", help="PR-curve CSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("baseline", help="exhaustive pairwise local-feature similarity")
    p.add_argument("--db", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--mode", choices=("uniform", "positional"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("capacity", help="true-match similarity vs number of bundled distractors")
    p.add_argument("--ns", type=_int_list, default=[1, 2, 5, 10, 20, 50, 100, 200])
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("sweep-dims", help="AP over hypervector dimensionality")
    p.add_argument("--dims", type=_int_list, default=[64, 128, 256, 512, 1024, 2048, 4096])
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--places", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep_dims)

    p = sub.add_parser("sweep-grid", help="AP over (n_x, n_y) under a horizontal viewpoint shift")
    p.add_argument("--nx-values", type=_int_list, default=list(range(1, 10)))
    p.add_argument("--ny-values", type=_int_list, default=list(range(1, 10)))
    p.add_argument("--seeds", type=int, default=3)
    p.add_argument("--shift", type=float, default=0.25)
    p.add_argument("--places", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep_grid)

    for p in sub.choices.values():
        _common(p)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
    except (ValueError, OSError, yaml.YAMLError) as e:
        print(f"hdcagg: configuration error: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args, cfg)
    except UsageError as e:
        print(f"hdcagg: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as e:
        print(f"hdcagg: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
