import hashlib
import json
import socket
import subprocess
import sys
import time
import urllib.request
from pathlib import Path

import numpy as np
import pytest

from boxsearch.cli import main
from boxsearch.synth import GAP, RADIUS, SynthConfig, generate_features


def file_hash(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_synth_deterministic(tmp_path, capsys):
    args = [
        "synth", "--n-patches", "500", "--dims", "24", "--n-clusters", "5",
        "--planted-classes", "2", "--seed", "11", "--skip-images",
    ]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert file_hash(tmp_path / "a" / "features.bin") == file_hash(tmp_path / "b" / "features.bin")
    assert file_hash(tmp_path / "a" / "records.tsv") == file_hash(tmp_path / "b" / "records.tsv")
    out = capsys.readouterr().out
    assert "wrote store: 500 patches x 24 dims" in out


def test_synth_single_patch(tmp_path):
    assert main([
        "synth", "--n-patches", "1", "--dims", "4", "--n-clusters", "1",
        "--planted-classes", "1", "--out", str(tmp_path / "one"), "--skip-images",
    ]) == 0
    records = (tmp_path / "one" / "records.tsv").read_text().strip().split("\t")
    assert records[1] == "0" and records[2] == "0"  # grid 1x1


def test_synth_ground_truth_disjoint_and_margin(tmp_path):
    assert main([
        "synth", "--n-patches", "800", "--dims", "16", "--n-clusters", "4",
        "--planted-classes", "3", "--seed", "2", "--out", str(tmp_path / "c"),
        "--skip-images",
    ]) == 0
    gt = json.loads((tmp_path / "c" / "ground_truth.json").read_text())
    assert len(gt) == 3
    all_ids = [i for ids in gt.values() for i in ids]
    assert len(all_ids) == len(set(all_ids))  # disjoint classes

    # generator margin: on informative dims, class intervals are separated
    config = SynthConfig(
        n_patches=800, n_dims=16, n_clusters=4, planted_classes=3, seed=2, write_images=False
    )
    X, assignment = generate_features(config)
    informative = [
        j for j in range(16)
        if max(X[assignment == c, j].max() - X[assignment == c, j].min() for c in range(4)) < 3 * RADIUS
    ]
    assert informative
    for j in informative:
        intervals = sorted(
            (X[assignment == c, j].min(), X[assignment == c, j].max()) for c in range(4)
        )
        gaps = [intervals[i + 1][0] - intervals[i][1] for i in range(3)]
        assert min(gaps) >= GAP - 2 * RADIUS  # clip keeps at least this much air
        assert min(gaps) >= 2 * RADIUS  # the box-coverage condition


def test_synth_images_have_motifs(tmp_path):
    assert main([
        "synth", "--n-patches", "40", "--dims", "8", "--n-clusters", "3",
        "--planted-classes", "2", "--seed", "4", "--out", str(tmp_path / "img"),
    ]) == 0
    gt = json.loads((tmp_path / "img" / "ground_truth.json").read_text())
    from PIL import Image

    planted = gt["class_0"][0]
    plain = next(i for i in range(40) if not any(i in ids for ids in gt.values()))
    arr_planted = np.asarray(Image.open(tmp_path / "img" / "images" / f"patch_{planted:08d}.png"))
    arr_plain = np.asarray(Image.open(tmp_path / "img" / "images" / f"patch_{plain:08d}.png"))
    # the motif saturates color channels apart; speckle does not
    spread_planted = int(arr_planted.astype(int).max() - arr_planted.astype(int).min())
    spread_plain = int(arr_plain.astype(int).max() - arr_plain.astype(int).min())
    assert spread_planted > spread_plain


def test_build_index_outputs_and_determinism(tmp_path, capsys):
    assert main([
        "synth", "--n-patches", "400", "--dims", "384", "--n-clusters", "4",
        "--planted-classes", "2", "--seed", "0", "--out", str(tmp_path / "s"),
        "--skip-images",
    ]) == 0
    base = [
        "build-index", "--store", str(tmp_path / "s"), "--n-indexes", "50",
        "--subset-size", "6", "--leaf-size", "32", "--seed", "13",
    ]
    assert main(base + ["--out", str(tmp_path / "c1")]) == 0
    out = capsys.readouterr().out
    assert out.count("index ") == 50
    assert "nodes=" in out and "build=" in out
    files = sorted(p.name for p in (tmp_path / "c1").glob("*.kdx"))
    assert len(files) == 50
    assert (tmp_path / "c1" / "catalog.txt").exists()
    assert main(base + ["--out", str(tmp_path / "c2")]) == 0
    assert file_hash(tmp_path / "c1" / "catalog.txt") == file_hash(tmp_path / "c2" / "catalog.txt")


def test_build_index_zero_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as err:
        main([
            "build-index", "--store", str(tmp_path), "--n-indexes", "0",
            "--subset-size", "2", "--out", str(tmp_path / "c"),
        ])
    assert err.value.code == 2


def test_synth_zero_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["synth", "--n-patches", "0", "--out", str(tmp_path / "x")])
    assert err.value.code == 2


@pytest.fixture(scope="module")
def bench_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("bench_corpus")
    assert main([
        "synth", "--n-patches", "3000", "--dims", "16", "--n-clusters", "5",
        "--planted-classes", "2", "--planted-size", "60", "--seed", "3",
        "--out", str(root / "store"), "--skip-images",
    ]) == 0
    assert main([
        "build-index", "--store", str(root / "store"), "--n-indexes", "8",
        "--subset-size", "3", "--leaf-size", "32", "--seed", "1",
        "--out", str(root / "catalog"),
    ]) == 0
    return root


def test_bench_table(bench_corpus, tmp_path):
    out_file = tmp_path / "bench.tsv"
    assert main([
        "bench", "--store", str(bench_corpus / "store"),
        "--catalog", str(bench_corpus / "catalog"),
        "--queries", "1", "--seed", "5", "--candidates", "4",
        "--out", str(out_file),
    ]) == 0
    lines = out_file.read_text().strip().splitlines()
    header = lines[0].split("\t")
    assert header[0] == "model" and "agreement" in header
    rows = [line.split("\t") for line in lines[1:]]
    assert len(rows) == 5 * 2  # five models, two planted classes
    dbranch_rows = [r for r in rows if r[0] == "dbranch"]
    assert all(r[header.index("agreement")] == "exact" for r in dbranch_rows)


def test_bench_selectivity_filter(bench_corpus, tmp_path, capsys):
    assert main([
        "bench", "--store", str(bench_corpus / "store"),
        "--catalog", str(bench_corpus / "catalog"),
        "--queries", "1", "--selectivities", "0.02", "--seed", "5",
        "--candidates", "4",
    ]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    rows = [line for line in lines[1:] if line]
    assert len(rows) == 5  # one class picked


def test_bench_zero_queries(bench_corpus, capsys):
    assert main([
        "bench", "--store", str(bench_corpus / "store"),
        "--catalog", str(bench_corpus / "catalog"), "--queries", "0",
    ]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[-1].startswith("model\t")  # header only


def test_bench_missing_ground_truth(tmp_path):
    from conftest import make_records
    from boxsearch.feature_store import write_store
    from boxsearch.range_index import build_catalog
    from boxsearch.feature_store import open_store

    write_store(np.ones((10, 2), dtype=np.float32), make_records(10), tmp_path / "s")
    store = open_store(tmp_path / "s")
    build_catalog(store, 1, 2, seed=0, out_dir=tmp_path / "c")
    code = main([
        "bench", "--store", str(tmp_path / "s"), "--catalog", str(tmp_path / "c"),
    ])
    assert code == 2


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def wait_for_line(proc, needle: str, timeout: float = 20.0) -> str:
    deadline = time.time() + timeout
    while time.time() < deadline:
        line = proc.stdout.readline()
        if needle in line:
            return line
        if proc.poll() is not None:
            break
    raise AssertionError(f"service never printed {needle!r}")


def test_serve_end_to_end(bench_corpus):
    port = free_port()
    proc = subprocess.Popen(
        [
            sys.executable, "-m", "boxsearch.cli", "serve",
            "--store", str(bench_corpus / "store"),
            "--catalog", str(bench_corpus / "catalog"),
            "--port", str(port),
        ],
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
        text=True,
    )
    try:
        line = wait_for_line(proc, "listening on")
        assert f"127.0.0.1:{port}" in line
        deadline = time.time() + 15
        meta = None
        while time.time() < deadline:
            try:
                with urllib.request.urlopen(f"http://127.0.0.1:{port}/api/meta", timeout=2) as resp:
                    meta = json.loads(resp.read())
                break
            except OSError:
                time.sleep(0.2)
        assert meta is not None and meta["n_rows"] == 3000
    finally:
        proc.terminate()
        proc.wait(timeout=10)


def test_serve_missing_catalog(bench_corpus):
    result = subprocess.run(
        [
            sys.executable, "-m", "boxsearch.cli", "serve",
            "--store", str(bench_corpus / "store"),
            "--catalog", str(bench_corpus / "nope"),
            "--port", str(free_port()),
        ],
        capture_output=True,
        text=True,
        timeout=30,
    )
    assert result.returncode != 0
    assert "does not exist" in result.stderr


def test_serve_port_conflict(bench_corpus):
    port = free_port()
    blocker = socket.socket()
    blocker.bind(("127.0.0.1", port))
    blocker.listen(1)
    try:
        result = subprocess.run(
            [
                sys.executable, "-m", "boxsearch.cli", "serve",
                "--store", str(bench_corpus / "store"),
                "--catalog", str(bench_corpus / "catalog"),
                "--port", str(port),
            ],
            capture_output=True,
            text=True,
            timeout=30,
        )
        assert result.returncode != 0
        assert "bind_error" in result.stderr
    finally:
        blocker.close()


def test_serve_env_port(bench_corpus):
    import os

    port = free_port()
    env = dict(os.environ, BOXSEARCH_PORT=str(port))
    proc = subprocess.Popen(
        [
            sys.executable, "-m", "boxsearch.cli", "serve",
            "--store", str(bench_corpus / "store"),
            "--catalog", str(bench_corpus / "catalog"),
        ],
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
        text=True,
        env=env,
    )
    try:
        line = wait_for_line(proc, "listening on")
        assert str(port) in line
    finally:
        proc.terminate()
        proc.wait(timeout=10)


def test_ingest_round_trip(tmp_path):
    assert main([
        "synth", "--n-patches", "50", "--dims", "6", "--n-clusters", "2",
        "--planted-classes", "1", "--seed", "8", "--out", str(tmp_path / "src"),
        "--skip-images",
    ]) == 0
    # drop the manifest: ingest must revalidate and regenerate it
    (tmp_path / "src" / "manifest.txt").unlink()
    assert main(["ingest", "--src", str(tmp_path / "src"), "--out", str(tmp_path / "dst")]) == 0
    assert file_hash(tmp_path / "src" / "features.bin") == file_hash(tmp_path / "dst" / "features.bin")
    assert (tmp_path / "dst" / "manifest.txt").exists()
