#!/usr/bin/env python3
"""Build a small labeled demo corpus with patch images and launch the service.

Usage: python scripts/make_demo.py [--out demo_data] [--port 8000]
The UI (if built under frontend/) is mounted at /.
"""

import argparse
import sys
from pathlib import Path

from boxsearch.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_data")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--n-patches", type=int, default=2500)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    out = Path(args.out)
    store = out / "store"
    catalog = out / "catalog"
    if not store.exists():
        code = cli_main([
            "synth",
            "--n-patches", str(args.n_patches),
            "--dims", "64",
            "--n-clusters", "8",
            "--planted-classes", "4",
            "--planted-size", str(max(20, args.n_patches // 50)),
            "--seed", str(args.seed),
            "--out", str(store),
        ])
        if code != 0:
            return code
    if not catalog.exists():
        code = cli_main([
            "build-index",
            "--store", str(store),
            "--n-indexes", "30",
            "--subset-size", "6",
            "--seed", str(args.seed),
            "--out", str(catalog),
        ])
        if code != 0:
            return code

    frontend = Path(__file__).resolve().parent.parent / "frontend"
    serve = [
        "serve",
        "--store", str(store),
        "--catalog", str(catalog),
        "--port", str(args.port),
    ]
    if (frontend / "dist").is_dir():
        serve += ["--frontend", str(frontend)]
    else:
        print("note: frontend/dist not built; serving the API only", file=sys.stderr)
    return cli_main(serve)


if __name__ == "__main__":
    sys.exit(main())
