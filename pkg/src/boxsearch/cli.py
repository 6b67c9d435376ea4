"""Operator CLI: synthesize corpora, ingest features, build indexes, bench, serve.

Every command is deterministic given --seed (bench wall-clock columns
excepted). Env vars BOXSEARCH_DATA_ROOT and BOXSEARCH_PORT provide serve
defaults; explicit flags win.
"""

from __future__ import annotations

import argparse
import os
import socket
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from .classifier import derive_seed, predict_scan, train_branch_model
from .errors import BoxSearchError
from .feature_store import StoreHandle, open_store, write_store
from .query_engine import EngineConfig, SearchRequest, execute_search
from .range_index import DEFAULT_LEAF_SIZE, build_catalog, load_catalog
from .service import ServiceConfig, create_app
from .synth import SynthConfig, generate_corpus, load_ground_truth

BENCH_COLUMNS = (
    "model",
    "n_rows",
    "selectivity",
    "query",
    "train_ms",
    "infer_ms",
    "total_ms",
    "n_results",
    "agreement",
)

MODELS = ("dbranch", "dbranch_ens", "dtree", "rforest", "knn")

BENCH_REPS = 5


def cmd_synth(args: argparse.Namespace) -> int:
    config = SynthConfig(
        n_patches=args.n_patches,
        n_dims=args.dims,
        grid_cols=args.grid_cols,
        n_clusters=args.n_clusters,
        planted_classes=args.planted_classes,
        planted_size=args.planted_size,
        seed=args.seed,
        write_images=not args.skip_images,
    )
    t0 = time.perf_counter()
    manifest, ground_truth = generate_corpus(config, args.out)
    dt = time.perf_counter() - t0
    print(f"wrote store: {manifest.n_rows} patches x {manifest.n_dims} dims at {args.out}")
    print(f"fingerprint: {manifest.fingerprint:#018x}")
    for name, ids in ground_truth.items():
        print(f"planted {name}: {len(ids)} patches")
    print(f"done in {dt:.1f}s")
    return 0


def cmd_ingest(args: argparse.Namespace) -> int:
    """Re-ingest an existing feature file + record table into a fresh store
    (validates finiteness and shape, writes manifest)."""
    src = open_store(args.src)
    records = [src.records.record(i) for i in range(src.n_rows)]
    matrix = np.asarray(src.matrix)
    manifest = write_store(matrix, records, args.out)
    print(f"ingested {manifest.n_rows} x {manifest.n_dims} -> {args.out}")
    print(f"fingerprint: {manifest.fingerprint:#018x}")
    return 0


def cmd_build_index(args: argparse.Namespace) -> int:
    store = open_store(args.store)

    def on_built(pos, subset, index, seconds):
        dims = ",".join(str(c) for c in subset)
        print(
            f"index {pos:3d} subset=[{dims}] nodes={index.n_nodes} "
            f"leaves={index.n_leaves} build={seconds:.2f}s"
        )

    t0 = time.perf_counter()
    catalog = build_catalog(
        store,
        n_indexes=args.n_indexes,
        subset_size=args.subset_size,
        seed=args.seed,
        leaf_size=args.leaf_size,
        out_dir=args.out,
        on_built=on_built,
    )
    print(f"catalog: {len(catalog)} indexes at {args.out} ({time.perf_counter() - t0:.1f}s)")
    return 0


def _bench_query(
    store: StoreHandle,
    class_ids: list[int],
    rng: np.random.Generator,
    n_pos: int = 20,
    n_neg: int = 100,
    n_random: int = 200,
) -> SearchRequest:
    ids = np.asarray(class_ids, dtype=np.int64)
    pos = rng.choice(ids, size=min(n_pos, len(ids)), replace=False)
    outside = np.setdiff1d(np.arange(store.n_rows, dtype=np.int64), ids, assume_unique=False)
    neg = rng.choice(outside, size=min(n_neg, len(outside)), replace=False)
    return SearchRequest(
        positives=tuple(int(i) for i in np.sort(pos)),
        negatives=tuple(int(i) for i in np.sort(neg)),
        n_random_negatives=min(n_random, store.n_rows - len(pos) - len(neg)),
        seed=int(rng.integers(0, 2**31)),
    )


def cmd_bench(args: argparse.Namespace) -> int:
    store = open_store(args.store)
    catalog = load_catalog(args.catalog)
    try:
        ground_truth = load_ground_truth(args.store)
    except FileNotFoundError:
        print(f"error: no ground truth file under {args.store} (run synth first)", file=sys.stderr)
        return 2
    config = EngineConfig(n_candidate_subsets=args.candidates)

    classes = sorted(ground_truth.items())
    if args.selectivities:
        wanted = [float(s) for s in args.selectivities.split(",")]
        chosen = []
        for s in wanted:
            best = min(classes, key=lambda kv: abs(len(kv[1]) / store.n_rows - s))
            if best not in chosen:
                chosen.append(best)
        classes = chosen

    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    print("\t".join(BENCH_COLUMNS), file=out)
    for name, ids in classes:
        selectivity = len(ids) / store.n_rows
        for q in range(args.queries):
            rng = np.random.default_rng(derive_seed(args.seed, name, q))
            request = _bench_query(store, ids, rng)
            agreement = "-"
            for model in MODELS:
                req = SearchRequest(
                    positives=request.positives,
                    negatives=request.negatives,
                    model_kind=model,
                    n_random_negatives=request.n_random_negatives,
                    seed=request.seed,
                )
                train_times, infer_times, total_times, n_results = [], [], [], 0
                for _ in range(BENCH_REPS):
                    results, stats = execute_search(req, store, catalog, config)
                    train_times.append(stats.train_ms)
                    infer_times.append(stats.infer_ms)
                    total_times.append(stats.total_ms)
                    n_results = stats.n_results
                if model == "dbranch":
                    agreement = _check_agreement(req, store, catalog, config, results)
                row = (
                    model,
                    str(store.n_rows),
                    f"{selectivity:.6f}",
                    f"{name}#{q}",
                    f"{statistics.median(train_times):.2f}",
                    f"{statistics.median(infer_times):.2f}",
                    f"{statistics.median(total_times):.2f}",
                    str(n_results),
                    agreement if model == "dbranch" else "-",
                )
                print("\t".join(row), file=out)
    if args.out:
        out.close()
        print(f"wrote {args.out}")
    return 0


def _check_agreement(request, store, catalog, config, results) -> str:
    """Retrain the (deterministic) dbranch model and compare the indexed
    result ids against its full-scan prediction."""
    from .query_engine import augment_negatives, _labeled_from

    augmented = augment_negatives(request, store)
    model = train_branch_model(
        _labeled_from(augmented), store, catalog, config.n_candidate_subsets, request.seed
    )
    scan_ids = set(int(i) for i in predict_scan(model, store))
    indexed_ids = set(r.id for r in results)
    return "exact" if scan_ids == indexed_ids else "MISMATCH"


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    data_root = args.data_root or os.environ.get("BOXSEARCH_DATA_ROOT")
    port = args.port if args.port is not None else int(os.environ.get("BOXSEARCH_PORT", "8000"))

    store_path = Path(args.store)
    catalog_path = Path(args.catalog)
    for path, what in ((store_path, "store"), (catalog_path, "catalog")):
        if not path.exists():
            print(f"error: {what} path {path} does not exist", file=sys.stderr)
            return 1
    config = ServiceConfig(
        store_path=store_path,
        catalog_path=catalog_path,
        data_root=Path(data_root) if data_root else None,
        host=args.host,
        port=port,
        knn_k=args.knn_k,
        ensemble_size=args.ensemble_size,
        n_candidate_subsets=args.candidates,
        frontend_dir=Path(args.frontend) if args.frontend else None,
    )
    try:
        app = create_app(config)
    except BoxSearchError as exc:
        print(f"error: startup validation failed: {exc}", file=sys.stderr)
        return 1

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        probe.bind((config.host, config.port))
    except OSError as exc:
        print(f"error: bind_error: cannot listen on {config.host}:{config.port} ({exc})", file=sys.stderr)
        return 1
    finally:
        probe.close()

    print(f"listening on {config.host}:{config.port}", flush=True)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boxsearch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labeled corpus")
    p.add_argument("--n-patches", type=int, required=True)
    p.add_argument("--dims", type=int, default=384)
    p.add_argument("--grid-cols", type=int, default=None)
    p.add_argument("--n-clusters", type=int, default=8)
    p.add_argument("--planted-classes", type=int, default=4)
    p.add_argument("--planted-size", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--skip-images", action="store_true", help="do not render patch PNGs")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="validate and re-ingest a feature file + record table")
    p.add_argument("--src", required=True, help="directory holding features.bin + records.tsv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("build-index", help="build the k-d tree index catalog")
    p.add_argument("--store", required=True)
    p.add_argument("--n-indexes", type=int, required=True)
    p.add_argument("--subset-size", type=int, required=True)
    p.add_argument("--leaf-size", type=int, default=DEFAULT_LEAF_SIZE)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("bench", help="scan vs index timing table over planted classes")
    p.add_argument("--store", required=True)
    p.add_argument("--catalog", required=True)
    p.add_argument("--queries", type=int, default=1, help="distinct queries per planted class")
    p.add_argument("--selectivities", default=None, help="comma list; picks nearest classes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--candidates", type=int, default=10)
    p.add_argument("--out", default=None, help="write TSV here instead of stdout")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="run the search + data HTTP service")
    p.add_argument("--store", required=True)
    p.add_argument("--catalog", required=True)
    p.add_argument("--data-root", default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--knn-k", type=int, default=1000)
    p.add_argument("--ensemble-size", type=int, default=25)
    p.add_argument("--candidates", type=int, default=10)
    p.add_argument("--frontend", default=None, help="static frontend directory to mount at /")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "synth" and args.n_patches < 1:
        parser.error("--n-patches must be >= 1")
    if args.command == "build-index" and args.n_indexes < 1:
        parser.error("--n-indexes must be >= 1")
    if args.command == "bench" and args.queries < 0:
        parser.error("--queries must be >= 0")
    try:
        return args.func(args)
    except BoxSearchError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
