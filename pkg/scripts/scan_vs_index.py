#!/usr/bin/env python3
"""Scan-vs-index timing experiment at a chosen corpus scale.

Synthesizes a corpus with rare planted classes, builds the index catalog,
and emits the per-model timing table (median of 5 runs per cell, TSV).

Usage: python scripts/scan_vs_index.py [--n 1000000] [--dims 64] [--out bench.tsv]
"""

import argparse
import sys
import tempfile
from pathlib import Path

from boxsearch.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=1_000_000)
    parser.add_argument("--dims", type=int, default=64)
    parser.add_argument("--n-indexes", type=int, default=50)
    parser.add_argument("--subset-size", type=int, default=6)
    parser.add_argument("--planted-size", type=int, default=800)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workdir", default=None, help="keep artifacts here (default: temp dir)")
    parser.add_argument("--out", default=None, help="TSV output path (default: stdout)")
    args = parser.parse_args()

    workdir = Path(args.workdir) if args.workdir else Path(tempfile.mkdtemp(prefix="scanvsidx_"))
    store = workdir / "store"
    catalog = workdir / "catalog"
    print(f"workdir: {workdir}", file=sys.stderr)

    if not store.exists():
        code = cli_main([
            "synth",
            "--n-patches", str(args.n),
            "--dims", str(args.dims),
            "--n-clusters", "12",
            "--planted-classes", "4",
            "--planted-size", str(args.planted_size),
            "--seed", str(args.seed),
            "--out", str(store),
            "--skip-images",
        ])
        if code != 0:
            return code
    if not catalog.exists():
        code = cli_main([
            "build-index",
            "--store", str(store),
            "--n-indexes", str(args.n_indexes),
            "--subset-size", str(args.subset_size),
            "--seed", str(args.seed),
            "--out", str(catalog),
        ])
        if code != 0:
            return code

    bench = [
        "bench",
        "--store", str(store),
        "--catalog", str(catalog),
        "--queries", "1",
        "--seed", str(args.seed),
    ]
    if args.out:
        bench += ["--out", args.out]
    return cli_main(bench)


if __name__ == "__main__":
    sys.exit(main())
