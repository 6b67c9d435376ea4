"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s``. The million-row corpus
for the equivalence and speed criteria builds once per session (a few
minutes); everything else is quick.
"""

import math
import statistics
import time
from contextlib import contextmanager

import numpy as np
import pytest

from boxsearch.classifier import (
    LabeledSample,
    predict_scan,
    train_branch_model,
    train_ensemble,
)
from boxsearch.feature_store import open_store
from boxsearch.query_engine import (
    EngineConfig,
    SearchRequest,
    _labeled_from,
    augment_negatives,
    execute_search,
    export_session,
    import_session,
    session_from_request,
)
from boxsearch.range_index import (
    QueryBox,
    build_catalog,
    build_kd_index_from_points,
    knn_query,
    load_catalog,
    range_query,
)
from boxsearch.synth import SynthConfig, generate_corpus

from test_classifier import worked_example_tree
from test_range_index import brute_force_box, brute_force_knn


@contextmanager
def criterion(name: str):
    try:
        yield
    except Exception:
        print(f"\nACCEPTANCE {name}: FAIL")
        raise
    print(f"\nACCEPTANCE {name}: PASS")


@pytest.fixture(scope="module")
def million_corpus(tmp_path_factory):
    """N=1e6, D=64, planted classes at 0.08% selectivity, 50-index catalog."""
    root = tmp_path_factory.mktemp("million")
    config = SynthConfig(
        n_patches=1_000_000,
        n_dims=64,
        n_clusters=12,
        planted_classes=4,
        planted_size=800,
        seed=1234,
        write_images=False,
    )
    t0 = time.perf_counter()
    _, ground_truth = generate_corpus(config, root / "store")
    store = open_store(root / "store")
    build_catalog(
        store, n_indexes=50, subset_size=6, seed=99, leaf_size=64, out_dir=root / "catalog"
    )
    catalog = load_catalog(root / "catalog")
    store.records  # warm the record table, as a served deployment would
    print(f"\n[million corpus built in {time.perf_counter() - t0:.0f}s]")
    return store, catalog, ground_truth


def planted_query(store, ground_truth, name, kind, seed):
    rng = np.random.default_rng(seed)
    ids = np.asarray(ground_truth[name])
    pos = rng.choice(ids, size=20, replace=False)
    outside = np.setdiff1d(np.arange(store.n_rows, dtype=np.int64), ids)
    neg = rng.choice(outside, size=100, replace=False)
    return SearchRequest(
        positives=tuple(int(i) for i in pos),
        negatives=tuple(int(i) for i in neg),
        model_kind=kind,
        n_random_negatives=200,
        seed=seed,
    )


def test_range_query_exactness():
    """1e5 synthetic points (D=16): 1000 random + 100 boundary boxes, exact."""
    with criterion("range-query exactness"):
        t_start = time.perf_counter()
        rng = np.random.default_rng(42)
        d = 16
        pts = rng.normal(0, 1, size=(100_000, d)).astype(np.float32)
        subset = tuple(range(d))
        index = build_kd_index_from_points(pts, subset, leaf_size=64)
        mismatches = 0
        for _ in range(1000):
            center = rng.normal(0, 1, d)
            half = rng.uniform(0.05, 1.2, d)
            lo, hi = center - half, center + half
            got = range_query(index, QueryBox(subset, tuple(lo), tuple(hi)))
            if not np.array_equal(got.astype(np.int64), brute_force_box(pts, lo, hi)):
                mismatches += 1
        split_values = index.node_value[index.node_left != -1]
        for i in range(100):
            dim = int(rng.integers(0, d))
            v = float(rng.choice(split_values))
            lo = np.full(d, -math.inf)
            hi = np.full(d, math.inf)
            if i % 2:
                lo[dim] = v
            else:
                hi[dim] = v
            got = range_query(index, QueryBox(subset, tuple(lo), tuple(hi)))
            if not np.array_equal(got.astype(np.int64), brute_force_box(pts, lo, hi)):
                mismatches += 1
        elapsed = time.perf_counter() - t_start
        assert mismatches == 0
        assert elapsed < 60.0, f"range exactness took {elapsed:.1f}s"


def test_knn_exactness_with_duplicates():
    """1e4 points with injected duplicates: k in {1,10,1000} matches the
    exhaustive (distance, id) sort; the engine default k is 1000."""
    with criterion("knn exactness"):
        rng = np.random.default_rng(7)
        base = rng.normal(0, 1, size=(8_000, 8)).astype(np.float32)
        dupes = base[rng.integers(0, 8_000, size=2_000)]
        pts = np.vstack([base, dupes])
        index = build_kd_index_from_points(pts, tuple(range(8)), leaf_size=64)
        for k in (1, 10, 1000):
            for _ in range(5):
                q = rng.normal(0, 1, 8)
                assert knn_query(index, q, k) == brute_force_knn(pts, q, k)
            q_dup = pts[int(rng.integers(0, len(pts)))].astype(np.float64)
            assert knn_query(index, q_dup, k) == brute_force_knn(pts, q_dup, k)
        assert EngineConfig().knn_k == 1000


def test_worked_example_box_extraction():
    """The worked 2-D tree yields exactly B1=(x2 in (2.4,3.1]) and
    B2=(x1 in (3.4,inf), x2 in (-inf,2.1])."""
    with criterion("worked-example box extraction"):
        from boxsearch.classifier import extract_boxes

        boxes = extract_boxes(worked_example_tree(), (0, 1))
        assert len(boxes) == 2
        wanted_b1 = QueryBox((0, 1), (-math.inf, 2.4), (math.inf, 3.1))
        wanted_b2 = QueryBox((0, 1), (3.4, -math.inf), (math.inf, 2.1))
        assert set(boxes) == {wanted_b1, wanted_b2}


def test_path_box_equivalence():
    """100 random trained trees: tree prediction == box membership on 1e5
    sampled points each, zero mismatches."""
    with criterion("path/box equivalence"):
        from boxsearch.classifier import boxes_contain, extract_boxes, predict_tree, train_tree

        rng = np.random.default_rng(31)
        for t in range(100):
            d = int(rng.integers(1, 7))
            m = int(rng.integers(2, 80))
            X = rng.normal(0, 1, (m, d))
            y = rng.integers(0, 2, m).astype(bool)
            if y.all() or not y.any():
                y[0] = not y[0]
            tree = train_tree(X, y, rng_seed=t)
            boxes = extract_boxes(tree, tuple(range(d)))
            sample = rng.normal(0, 1.6, (100_000, d)).astype(np.float32)
            counts = boxes_contain(boxes, sample.astype(np.float64))
            pred = predict_tree(tree, sample)
            assert (counts <= 1).all()
            assert ((counts == 1) == pred).all()


def test_indexed_vs_scan_equivalence_million(million_corpus):
    """execute_search(dbranch) ids == predict_scan of the same model at N=1e6."""
    with criterion("indexed-vs-scan equivalence (N=1e6)"):
        store, catalog, ground_truth = million_corpus
        config = EngineConfig(n_candidate_subsets=10)
        for name in ("class_0", "class_1"):
            request = planted_query(store, ground_truth, name, "dbranch", seed=5)
            results, stats = execute_search(request, store, catalog, config)
            augmented = augment_negatives(request, store)
            model = train_branch_model(
                _labeled_from(augmented), store, catalog, config.n_candidate_subsets, request.seed
            )
            scan_ids = set(int(i) for i in predict_scan(model, store))
            assert {r.id for r in results} == scan_ids
            assert stats.n_results == len(scan_ids)


def test_index_awareness_thousand_runs(small_corpus):
    """Every trained model subset is a catalog subset, over 1000 runs."""
    with criterion("index-awareness (1000 runs)"):
        store, catalog, ground_truth = small_corpus
        subsets = set(catalog.subsets)
        rng = np.random.default_rng(17)
        names = sorted(ground_truth)
        runs = 0
        while runs < 950:
            name = names[int(rng.integers(0, len(names)))]
            ids = np.asarray(ground_truth[name])
            pos = rng.choice(ids, size=10, replace=False)
            outside = np.setdiff1d(np.arange(store.n_rows), ids)
            neg = rng.choice(outside, size=30, replace=False)
            labeled = [LabeledSample(int(i), True) for i in pos] + [
                LabeledSample(int(i), False) for i in neg
            ]
            model = train_branch_model(
                labeled, store, catalog, n_candidate_subsets=4, seed=int(rng.integers(0, 2**31))
            )
            assert model.subset in subsets
            runs += 1
        for e in range(5):
            name = names[e % len(names)]
            ids = np.asarray(ground_truth[name])
            pos = rng.choice(ids, size=10, replace=False)
            outside = np.setdiff1d(np.arange(store.n_rows), ids)
            neg = rng.choice(outside, size=30, replace=False)
            labeled = [LabeledSample(int(i), True) for i in pos] + [
                LabeledSample(int(i), False) for i in neg
            ]
            ensemble = train_ensemble(
                labeled, store, catalog, n_members=10, seed=e, n_candidate_subsets=4
            )
            for member in ensemble.members:
                assert member.subset in subsets
                runs += 1
        assert runs == 1000


def test_speed_indexed_vs_scan(million_corpus):
    """N=1e6, D=64, 50-index catalog, selectivity <= 0.1%: end-to-end
    dbranch <= 2s and indexed inference >= 10x faster than the identical
    model's full scan (medians of 5)."""
    with criterion("speed (<=2s end-to-end, >=10x vs scan)"):
        store, catalog, ground_truth = million_corpus
        config = EngineConfig(n_candidate_subsets=10)
        selectivity = len(ground_truth["class_2"]) / store.n_rows
        assert selectivity <= 0.001
        request = planted_query(store, ground_truth, "class_2", "dbranch", seed=21)

        totals, infers = [], []
        for _ in range(5):
            results, stats = execute_search(request, store, catalog, config)
            totals.append(stats.total_ms)
            infers.append(stats.infer_ms)
        augmented = augment_negatives(request, store)
        model = train_branch_model(
            _labeled_from(augmented), store, catalog, config.n_candidate_subsets, request.seed
        )
        scans = []
        for _ in range(5):
            t0 = time.perf_counter()
            scan_ids = predict_scan(model, store)
            scans.append((time.perf_counter() - t0) * 1000.0)
        assert set(int(i) for i in scan_ids) == {r.id for r in results}

        total_med = statistics.median(totals)
        infer_med = statistics.median(infers)
        scan_med = statistics.median(scans)
        print(
            f"\n[speed] end-to-end={total_med:.0f}ms indexed-infer={infer_med:.2f}ms "
            f"scan={scan_med:.0f}ms ratio={scan_med / infer_med:.0f}x "
            f"(selectivity {selectivity:.4%}, {len(results)} hits)"
        )
        assert total_med <= 2000.0, f"end-to-end median {total_med:.0f}ms"
        assert scan_med >= 10.0 * infer_med, (
            f"indexed {infer_med:.2f}ms vs scan {scan_med:.2f}ms: ratio "
            f"{scan_med / infer_med:.1f}x"
        )


@pytest.fixture(scope="module")
def quality_corpus(tmp_path_factory):
    # one rare target class against large background clusters, mirroring
    # the rare-object search setting: every box side a member learns gets
    # bounded by some background negative, so the any-member union stays
    # precise
    root = tmp_path_factory.mktemp("quality")
    config = SynthConfig(
        n_patches=40_000,
        n_dims=48,
        n_clusters=8,
        planted_classes=1,
        planted_size=400,
        seed=77,
        write_images=False,
    )
    _, ground_truth = generate_corpus(config, root / "store")
    store = open_store(root / "store")
    build_catalog(store, n_indexes=24, subset_size=6, seed=3, leaf_size=64, out_dir=root / "cat")
    return store, load_catalog(root / "cat"), ground_truth


def test_retrieval_quality_ensemble(quality_corpus):
    """dbranch_ens (25 members) on 20 pos + 100 neg + 200 random negatives:
    recall >= 95% and precision >= 95% on the margin-guaranteed generator."""
    with criterion("retrieval quality (>=95% recall & precision)"):
        store, catalog, ground_truth = quality_corpus
        config = EngineConfig(ensemble_size=25, n_candidate_subsets=10)
        for seed in (13, 14, 15):
            request = planted_query(store, ground_truth, "class_0", "dbranch_ens", seed=seed)
            results, _ = execute_search(request, store, catalog, config)
            got = {r.id for r in results}
            planted = set(ground_truth["class_0"])
            recall = len(got & planted) / len(planted)
            precision = len(got & planted) / len(got)
            print(f"\n[quality seed={seed}] recall={recall:.4f} precision={precision:.4f}")
            assert recall >= 0.95
            assert precision >= 0.95


def test_session_round_trip_hundred(small_corpus):
    """import(export(s)) == s for 100 random sessions, exact."""
    with criterion("session round-trip (100 sessions)"):
        store, _, _ = small_corpus
        rng = np.random.default_rng(2024)
        kinds = ("dbranch", "dbranch_ens", "dtree", "rforest", "knn")
        for _ in range(100):
            ids = rng.choice(store.n_rows, size=20, replace=False)
            n_pos = int(rng.integers(1, 10))
            request = SearchRequest(
                positives=tuple(int(i) for i in ids[:n_pos]),
                negatives=tuple(int(i) for i in ids[n_pos:]),
                model_kind=str(rng.choice(kinds)),
                n_random_negatives=int(rng.integers(0, 300)),
                seed=int(rng.integers(0, 2**63)),
            )
            session = session_from_request(request, store.fingerprint)
            back, warnings = import_session(export_session(session), store)
            assert back == session
            assert warnings == []
