"""One user query end-to-end: augment labels, train, infer, rank, report stats.

The indexed models (dbranch, dbranch_ens) answer through range queries on
the catalog; dtree/rforest run a full scan; knn asks the first catalog
index. All paths produce the same ranked-result schema, ordered by
(confidence desc, id asc). Re-running an identical request returns
identical results.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Sequence

import numpy as np

from .classifier import (
    LabeledSample,
    knn_baseline,
    predict_scan_counts,
    train_branch_model,
    train_ensemble,
    train_scan_model,
)
from .errors import FormatError, NotFoundError, TrainError
from .feature_store import RecordTable, StoreHandle, sample_ids
from .range_index import IndexCatalog, range_query

MODEL_KINDS = ("dbranch", "dbranch_ens", "dtree", "rforest", "knn")

SESSION_VERSION = 1


@dataclass(frozen=True)
class SearchRequest:
    positives: tuple[int, ...]
    negatives: tuple[int, ...] = ()
    model_kind: str = "dbranch"
    n_random_negatives: int = 0
    seed: int = 0


@dataclass(frozen=True)
class EngineConfig:
    knn_k: int = 1000
    ensemble_size: int = 25
    n_candidate_subsets: int = 10


@dataclass(frozen=True)
class RankedResult:
    id: int
    confidence: int
    geo: tuple[float, float]
    in_training: bool


@dataclass
class QueryStats:
    n_results: int = 0
    train_ms: float = 0.0
    infer_ms: float = 0.0
    total_ms: float = 0.0
    n_boxes: int = 0
    n_range_queries: int = 0


def validate_request(request: SearchRequest, n_rows: int | None = None) -> None:
    """Structural violations raise FormatError; an untrainable label set
    (no positives) raises TrainError so callers can distinguish the two."""
    if not request.positives:
        raise TrainError("request must label at least one positive patch")
    if request.model_kind not in MODEL_KINDS:
        raise FormatError(f"unknown model kind {request.model_kind!r}")
    pos = set(request.positives)
    neg = set(request.negatives)
    if len(pos) != len(request.positives) or len(neg) != len(request.negatives):
        raise FormatError("labeled ids must be distinct")
    if pos & neg:
        raise FormatError(f"ids labeled both positive and negative: {sorted(pos & neg)[:5]}")
    if request.n_random_negatives < 0:
        raise FormatError("n_random_negatives must be >= 0")
    if n_rows is not None:
        for i in list(pos | neg):
            if not 0 <= i < n_rows:
                raise FormatError(f"labeled id {i} out of range for {n_rows} rows")


def augment_negatives(request: SearchRequest, store: StoreHandle) -> SearchRequest:
    """Extend the negatives with seed-deterministic random draws, disjoint
    from every labeled id."""
    if request.n_random_negatives == 0:
        return request
    exclude = set(request.positives) | set(request.negatives)
    drawn = sample_ids(store, request.n_random_negatives, exclude, request.seed)
    return replace(
        request,
        negatives=tuple(request.negatives) + tuple(int(i) for i in drawn),
        n_random_negatives=0,
    )


def _labeled_from(request: SearchRequest) -> list[LabeledSample]:
    samples = [LabeledSample(int(i), True) for i in request.positives]
    samples += [LabeledSample(int(i), False) for i in request.negatives]
    return samples


def rank_results(
    hits: Sequence[tuple[int, int]],
    records: RecordTable,
    training_ids: set[int] = frozenset(),
) -> list[RankedResult]:
    """Sort hits by (confidence desc, id asc) and attach geo / training flags."""
    if not len(hits):
        return []
    ids = np.asarray([h[0] for h in hits], dtype=np.int64)
    counts = np.asarray([h[1] for h in hits], dtype=np.int64)
    bad = (ids < 0) | (ids >= len(records))
    if bad.any():
        raise NotFoundError(int(ids[bad][0]))
    order = np.lexsort((ids, -counts))
    geo_x = records.geo_x[ids]
    geo_y = records.geo_y[ids]
    return [
        RankedResult(
            id=int(ids[i]),
            confidence=int(counts[i]),
            geo=(float(geo_x[i]), float(geo_y[i])),
            in_training=int(ids[i]) in training_ids,
        )
        for i in order
    ]


def execute_search(
    request: SearchRequest,
    store: StoreHandle,
    catalog: IndexCatalog,
    config: EngineConfig = EngineConfig(),
) -> tuple[list[RankedResult], QueryStats]:
    """Train the requested model and answer it, reporting per-stage timings.

    Exceptions are re-raised with a ``stage`` attribute naming the failing
    phase.
    """
    t_start = time.perf_counter()
    stats = QueryStats()
    validate_request(request, store.n_rows)

    stage = "augment"
    try:
        request = augment_negatives(request, store)
        labeled = _labeled_from(request)
        kind = request.model_kind

        stage = "train"
        t0 = time.perf_counter()
        if kind == "dbranch":
            model = train_branch_model(
                labeled, store, catalog, config.n_candidate_subsets, request.seed
            )
            members = [model]
        elif kind == "dbranch_ens":
            ensemble = train_ensemble(
                labeled,
                store,
                catalog,
                n_members=config.ensemble_size,
                seed=request.seed,
                n_candidate_subsets=config.n_candidate_subsets,
            )
            members = ensemble.members
        elif kind in ("dtree", "rforest"):
            scan_kind = "decision_tree" if kind == "dtree" else "random_forest"
            scan_model = train_scan_model(labeled, store, scan_kind, seed=request.seed)
            members = []
        else:
            members = []
        stats.train_ms = (time.perf_counter() - t0) * 1000.0

        stage = "infer"
        t0 = time.perf_counter()
        if kind in ("dbranch", "dbranch_ens"):
            # one range query per box; boxes within a member are disjoint,
            # so per-id counts equal the number of members that hit it
            hit_chunks: list[np.ndarray] = []
            for member in members:
                index = catalog.index_for_subset(member.subset)
                for box in member.boxes:
                    hit_chunks.append(range_query(index, box))
                stats.n_boxes += len(member.boxes)
                stats.n_range_queries += len(member.boxes)
            if hit_chunks:
                all_ids = np.concatenate(hit_chunks)
                ids, counts = np.unique(all_ids, return_counts=True)
            else:
                ids = np.empty(0, dtype=np.uint64)
                counts = np.empty(0, dtype=np.int64)
        elif kind in ("dtree", "rforest"):
            ids, counts = predict_scan_counts(scan_model, store)
        else:
            ranked = knn_baseline(labeled, catalog, config.knn_k)
            ids = np.asarray(ranked, dtype=np.int64)
            counts = config.knn_k - np.arange(len(ranked), dtype=np.int64)
        stats.infer_ms = (time.perf_counter() - t0) * 1000.0

        stage = "rank"
        training_ids = {int(i) for i in request.positives} | {int(i) for i in request.negatives}
        results = rank_results(
            list(zip(ids.tolist(), counts.tolist())), store.records, training_ids
        )
    except Exception as exc:
        if not hasattr(exc, "stage"):
            try:
                exc.stage = stage
            except AttributeError:
                pass
        raise
    stats.n_results = len(results)
    stats.total_ms = (time.perf_counter() - t_start) * 1000.0
    return results, stats


# ---------------------------------------------------------------------------
# sessions

@dataclass(frozen=True)
class QuerySession:
    """The import/export unit: one request plus the dataset it targets."""

    positives: tuple[int, ...]
    negatives: tuple[int, ...]
    model_kind: str
    n_random_negatives: int
    seed: int
    dataset_fingerprint: int = 0
    version: int = SESSION_VERSION
    created_at: str = field(default="", compare=False)

    @property
    def request(self) -> SearchRequest:
        return SearchRequest(
            positives=self.positives,
            negatives=self.negatives,
            model_kind=self.model_kind,
            n_random_negatives=self.n_random_negatives,
            seed=self.seed,
        )


def session_from_request(request: SearchRequest, fingerprint: int) -> QuerySession:
    return QuerySession(
        positives=tuple(request.positives),
        negatives=tuple(request.negatives),
        model_kind=request.model_kind,
        n_random_negatives=request.n_random_negatives,
        seed=request.seed,
        dataset_fingerprint=fingerprint,
        created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


def export_session(session: QuerySession) -> str:
    """Serialize to the interchange document (JSON, fixed field names)."""
    doc = {
        "version": session.version,
        "dataset_fingerprint": f"{session.dataset_fingerprint:#018x}",
        "positives": list(session.positives),
        "negatives": list(session.negatives),
        "model_kind": session.model_kind,
        "n_random_negatives": session.n_random_negatives,
        "seed": session.seed,
    }
    return json.dumps(doc, indent=2) + "\n"


def _as_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise FormatError(f"field {name!r} must be an integer, got {value!r}")
    try:
        return int(value, 0) if isinstance(value, str) else int(value)
    except ValueError as exc:
        raise FormatError(f"field {name!r} is not a valid integer: {value!r}") from exc


def _as_id_list(value, name: str) -> tuple[int, ...]:
    if not isinstance(value, list):
        raise FormatError(f"field {name!r} must be an array of ids")
    for v in value:
        if isinstance(v, bool) or not isinstance(v, int):
            raise FormatError(f"field {name!r} must contain integers, got {v!r}")
    return tuple(int(v) for v in value)


def import_session(
    document: str,
    store: StoreHandle | None = None,
) -> tuple[QuerySession, list[str]]:
    """Parse and validate a session document.

    Malformed structure or out-of-range ids raise FormatError; a dataset
    fingerprint mismatch only adds a warning, so sessions can be shared
    across rebuilt stores at the caller's risk.
    """
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise FormatError(f"session document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError("session document must be a JSON object")

    warnings: list[str] = []
    positives = _as_id_list(doc.get("positives", None), "positives")
    negatives = _as_id_list(doc.get("negatives", []), "negatives")
    if "model_kind" in doc:
        model_kind = doc["model_kind"]
    elif "model" in doc:  # tolerated shorthand
        model_kind = doc["model"]
    else:
        raise FormatError("session document is missing 'model_kind'")
    if model_kind not in MODEL_KINDS:
        raise FormatError(f"unknown model kind {model_kind!r}")
    n_random = _as_int(doc.get("n_random_negatives", 0), "n_random_negatives")
    seed = _as_int(doc.get("seed", 0), "seed")
    version = _as_int(doc.get("version", SESSION_VERSION), "version")
    fingerprint = _as_int(doc.get("dataset_fingerprint", 0), "dataset_fingerprint")

    session = QuerySession(
        positives=positives,
        negatives=negatives,
        model_kind=model_kind,
        n_random_negatives=n_random,
        seed=seed,
        dataset_fingerprint=fingerprint,
        version=version,
    )
    try:
        validate_request(session.request, store.n_rows if store else None)
    except TrainError as exc:
        raise FormatError(str(exc)) from exc
    if store is not None and fingerprint and fingerprint != store.fingerprint:
        warnings.append(
            f"session fingerprint {fingerprint:#x} does not match the open "
            f"store ({store.fingerprint:#x}); results may not correspond"
        )
    return session, warnings
