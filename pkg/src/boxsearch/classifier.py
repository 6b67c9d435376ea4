"""The five search models, and the translation of tree paths into query boxes.

Decision branches are CART-style trees constrained to one catalog feature
subset; every positive leaf becomes an axis-aligned box answerable as a
range query against the pre-built index for that subset. The same tree
induction backs the scan-based decision tree and random forest baselines.
All training is a pure function of (inputs, seed).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ModelError, SubsetError, TrainError
from .feature_store import StoreHandle, get_rows
from .range_index import IndexCatalog, QueryBox, knn_query

SCAN_CHUNK_ROWS = 1 << 16


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from a mixed tuple of ints/strings."""
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        h.update(repr(p).encode())
        h.update(b"\x00")
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True)
class LabeledSample:
    id: int
    label: bool  # True = positive


def split_labeled(labeled: Sequence[LabeledSample]) -> tuple[np.ndarray, np.ndarray]:
    """(ids, labels) arrays; requires distinct ids and both classes present."""
    ids = np.asarray([s.id for s in labeled], dtype=np.int64)
    y = np.asarray([s.label for s in labeled], dtype=bool)
    if len(np.unique(ids)) != len(ids):
        raise TrainError("labeled ids must be distinct within a query")
    if not y.any() or y.all():
        raise TrainError("training requires at least one positive and one negative sample")
    return ids, y


# ---------------------------------------------------------------------------
# tree induction

@dataclass
class TreeModel:
    """Binary decision tree in parallel-array form.

    ``node_dim`` holds global column indexes. Internal node i sends
    x[dim] <= value left. Leaves are ``node_left[i] == -1`` with the class
    label (0/1) in ``node_right[i]``. Thresholds are midpoints between
    adjacent distinct float32 values; they are kept in float64, where such
    midpoints are exact.
    """

    node_dim: np.ndarray
    node_value: np.ndarray
    node_left: np.ndarray
    node_right: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.node_dim)

    @property
    def n_leaves(self) -> int:
        return int((self.node_left == -1).sum())

    def remap_dims(self, columns: Sequence[int]) -> "TreeModel":
        """Reinterpret local split dims as the given global column indexes."""
        cols = np.asarray(columns, dtype=np.int64)
        node_dim = self.node_dim.copy()
        internal = self.node_left != -1
        node_dim[internal] = cols[node_dim[internal]]
        return TreeModel(node_dim, self.node_value.copy(), self.node_left.copy(), self.node_right.copy())


def _gini(n_pos: np.ndarray, n_tot: np.ndarray) -> np.ndarray:
    p = n_pos / n_tot
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


def _best_split_for_dim(vals: np.ndarray, y: np.ndarray) -> tuple[float, float] | None:
    """(gain, threshold) of the best boundary on one dimension, or None.

    Threshold candidates are midpoints between adjacent distinct sorted
    values; among equal gains the smallest threshold wins.
    """
    order = np.argsort(vals, kind="stable")
    sv = vals[order]
    sy = y[order]
    boundaries = np.nonzero(sv[:-1] < sv[1:])[0]
    if len(boundaries) == 0:
        return None
    m = len(vals)
    pos_prefix = np.cumsum(sy)
    total_pos = pos_prefix[-1]
    n_left = boundaries + 1
    n_right = m - n_left
    pos_left = pos_prefix[boundaries]
    pos_right = total_pos - pos_left
    parent = _gini(np.array([total_pos]), np.array([m]))[0]
    weighted = (n_left * _gini(pos_left, n_left) + n_right * _gini(pos_right, n_right)) / m
    gains = parent - weighted
    best = int(np.argmax(gains))
    # argmax takes the first maximum; boundaries are in ascending-value
    # order, so this is already the smallest threshold among ties
    thr = (float(sv[boundaries[best]]) + float(sv[boundaries[best] + 1])) / 2.0
    return float(gains[best]), thr


def train_tree(
    X: np.ndarray,
    y: np.ndarray,
    rng_seed: int = 0,
    max_features: int | None = None,
) -> TreeModel:
    """Grow a full CART tree: Gini gain splits, midpoint thresholds, no pruning.

    Leaves are pure unless their points are identical across all dims with
    mixed labels, in which case the majority label wins (ties negative).
    ``max_features`` samples that many candidate dims per node (used by the
    forest); the fallback is all dims whenever the sample has no valid split.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=bool)
    if X.ndim != 2 or len(X) != len(y):
        raise TrainError(f"X shape {X.shape} incompatible with {len(y)} labels")
    if len(X) < 2 or not y.any() or y.all():
        raise TrainError("training requires at least one sample of each class")
    d = X.shape[1]
    rng = np.random.default_rng(rng_seed)

    node_dim: list[int] = []
    node_value: list[float] = []
    node_left: list[int] = []
    node_right: list[int] = []

    def new_node() -> int:
        node_dim.append(0)
        node_value.append(0.0)
        node_left.append(-1)
        node_right.append(-1)
        return len(node_dim) - 1

    def make_leaf(slot: int, labels: np.ndarray) -> None:
        n_pos = int(labels.sum())
        n_neg = len(labels) - n_pos
        node_left[slot] = -1
        node_right[slot] = 1 if n_pos > n_neg else 0

    def grow(slot: int, idx: np.ndarray) -> None:
        labels = y[idx]
        if labels.all() or not labels.any():
            make_leaf(slot, labels)
            return
        block = X[idx]
        if max_features is not None and max_features < d:
            dims = np.sort(rng.choice(d, size=max_features, replace=False))
        else:
            dims = np.arange(d)
        best: tuple[float, int, float] | None = None  # (gain, dim, threshold)
        for dim in dims:
            found = _best_split_for_dim(block[:, dim], labels)
            if found is None:
                continue
            gain, thr = found
            if best is None or gain > best[0]:
                best = (gain, int(dim), thr)
        if best is None and max_features is not None:
            for dim in range(d):
                found = _best_split_for_dim(block[:, dim], labels)
                if found is None:
                    continue
                gain, thr = found
                if best is None or gain > best[0]:
                    best = (gain, int(dim), thr)
        if best is None:
            # identical points with mixed labels
            make_leaf(slot, labels)
            return
        _, dim, thr = best
        mask = block[:, dim] <= thr
        node_dim[slot] = dim
        node_value[slot] = thr
        left = new_node()
        right = new_node()
        node_left[slot] = left
        node_right[slot] = right
        grow(left, idx[mask])
        grow(right, idx[~mask])

    grow(new_node(), np.arange(len(X)))
    return TreeModel(
        node_dim=np.asarray(node_dim, dtype=np.int64),
        node_value=np.asarray(node_value, dtype=np.float64),
        node_left=np.asarray(node_left, dtype=np.int32),
        node_right=np.asarray(node_right, dtype=np.int32),
    )


def predict_tree(tree: TreeModel, X: np.ndarray, columns: Sequence[int] | None = None) -> np.ndarray:
    """Boolean predictions for an (n, d) block; ``columns`` maps X's columns
    to global dims when X is a projection."""
    X = np.asarray(X)
    out = np.empty(len(X), dtype=bool)
    if columns is not None:
        col_of = {int(g): i for i, g in enumerate(columns)}
    else:
        col_of = None

    def walk(node: int, idx: np.ndarray) -> None:
        if tree.node_left[node] == -1:
            out[idx] = bool(tree.node_right[node])
            return
        dim = int(tree.node_dim[node])
        col = col_of[dim] if col_of is not None else dim
        mask = X[idx, col] <= tree.node_value[node]
        walk(int(tree.node_left[node]), idx[mask])
        walk(int(tree.node_right[node]), idx[~mask])

    walk(0, np.arange(len(X)))
    return out


def f1_score(pred: np.ndarray, y: np.ndarray) -> float:
    tp = int((pred & y).sum())
    fp = int((pred & ~y).sum())
    fn = int((~pred & y).sum())
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


# ---------------------------------------------------------------------------
# boxes

def extract_boxes(tree: TreeModel, subset: Sequence[int]) -> list[QueryBox]:
    """One box per positive leaf, from the root-to-leaf path predicates.

    Left turns (x <= v) tighten the upper bound, right turns (x > v) the
    lower; dims untouched on the path stay unbounded.
    """
    subset = tuple(int(c) for c in subset)
    local = {g: j for j, g in enumerate(subset)}
    d = len(subset)
    boxes: list[QueryBox] = []

    def walk(node: int, lower: list[float], upper: list[float]) -> None:
        if tree.node_left[node] == -1:
            if tree.node_right[node] == 1:
                boxes.append(QueryBox(subset, tuple(lower), tuple(upper)))
            return
        dim = int(tree.node_dim[node])
        if dim not in local:
            raise SubsetError(f"tree splits on dim {dim} outside subset {subset}")
        j = local[dim]
        value = float(tree.node_value[node])
        saved = upper[j]
        upper[j] = min(upper[j], value)
        walk(int(tree.node_left[node]), lower, upper)
        upper[j] = saved
        saved = lower[j]
        lower[j] = max(lower[j], value)
        walk(int(tree.node_right[node]), lower, upper)
        lower[j] = saved

    walk(0, [-math.inf] * d, [math.inf] * d)
    return boxes


def boxes_contain(boxes: Sequence[QueryBox], points: np.ndarray) -> np.ndarray:
    """Number of boxes containing each point of an (n, d') block."""
    counts = np.zeros(len(points), dtype=np.int64)
    for box in boxes:
        counts += box.contains(points)
    return counts


# ---------------------------------------------------------------------------
# search models

@dataclass
class BranchModel:
    """Decision tree bound to one catalog subset, with its positive-leaf boxes."""

    subset: tuple[int, ...]
    tree: TreeModel  # split dims are global column indexes
    boxes: list[QueryBox]
    train_f1: float = 1.0


@dataclass
class EnsembleModel:
    members: list[BranchModel]
    seed: int = 0


@dataclass
class ScanModel:
    kind: str  # "decision_tree" | "random_forest"
    trees: list[TreeModel]


def _train_branch_core(
    X_lab: np.ndarray,
    y: np.ndarray,
    catalog: IndexCatalog,
    n_candidate_subsets: int,
    seed: int,
) -> BranchModel:
    """Pick the catalog subset whose tree maximizes training F1.

    Ties fall to fewer boxes, then to catalog order. X_lab holds the full
    labeled rows (m, D); candidates evaluate on its column projections.
    """
    if len(catalog) == 0:
        raise TrainError("catalog is empty")
    rng = np.random.default_rng(derive_seed(seed, "candidates"))
    n_cand = min(n_candidate_subsets, len(catalog))
    positions = np.sort(rng.choice(len(catalog), size=n_cand, replace=False))

    best: tuple[float, int, BranchModel] | None = None  # (f1, n_boxes, model)
    for pos in positions:
        subset = catalog.entries[int(pos)].subset
        cols = list(subset)
        X_sub = X_lab[:, cols]
        tree = train_tree(X_sub, y, rng_seed=derive_seed(seed, "tree", int(pos)))
        pred = predict_tree(tree, X_sub)
        f1 = f1_score(pred, y)
        global_tree = tree.remap_dims(subset)
        boxes = extract_boxes(global_tree, subset)
        if best is None or f1 > best[0] or (f1 == best[0] and len(boxes) < best[1]):
            best = (f1, len(boxes), BranchModel(subset, global_tree, boxes, train_f1=f1))
    return best[2]


def train_branch_model(
    labeled: Sequence[LabeledSample],
    store: StoreHandle,
    catalog: IndexCatalog,
    n_candidate_subsets: int = 10,
    seed: int = 0,
) -> BranchModel:
    ids, y = split_labeled(labeled)
    X_lab = get_rows(store, ids)
    return _train_branch_core(X_lab, y, catalog, n_candidate_subsets, seed)


def train_ensemble(
    labeled: Sequence[LabeledSample],
    store: StoreHandle,
    catalog: IndexCatalog,
    n_members: int = 25,
    seed: int = 0,
    n_candidate_subsets: int = 10,
) -> EnsembleModel:
    """Bootstrap-diversified branch models; member i is seeded from (seed, i)."""
    if n_members < 1:
        raise TrainError(f"n_members must be >= 1, got {n_members}")
    ids, y = split_labeled(labeled)
    X_lab = get_rows(store, ids)
    m = len(ids)
    members: list[BranchModel] = []
    for i in range(n_members):
        member_seed = derive_seed(seed, i)
        rng = np.random.default_rng(member_seed)
        while True:
            boot = rng.integers(0, m, size=m)
            yb = y[boot]
            if yb.any() and not yb.all():
                break
        members.append(
            _train_branch_core(X_lab[boot], yb, catalog, n_candidate_subsets, member_seed)
        )
    return EnsembleModel(members=members, seed=seed)


def train_scan_model(
    labeled: Sequence[LabeledSample],
    store: StoreHandle,
    kind: str,
    n_trees: int = 25,
    seed: int = 0,
) -> ScanModel:
    """Plain decision tree, or a bagged forest with sqrt(D) dims per split."""
    ids, y = split_labeled(labeled)
    X_lab = get_rows(store, ids)
    if kind == "decision_tree":
        return ScanModel(kind, [train_tree(X_lab, y, rng_seed=derive_seed(seed, "tree"))])
    if kind != "random_forest":
        raise ModelError(f"unknown scan model kind {kind!r}")
    d = X_lab.shape[1]
    max_features = max(1, int(math.isqrt(d)))
    trees = []
    m = len(ids)
    for i in range(n_trees):
        tree_seed = derive_seed(seed, "forest", i)
        rng = np.random.default_rng(tree_seed)
        while True:
            boot = rng.integers(0, m, size=m)
            yb = y[boot]
            if yb.any() and not yb.all():
                break
        trees.append(train_tree(X_lab[boot], yb, rng_seed=tree_seed, max_features=max_features))
    return ScanModel(kind, trees)


def _max_model_dim(model) -> int:
    if isinstance(model, BranchModel):
        return max(model.subset)
    if isinstance(model, EnsembleModel):
        return max(max(m.subset) for m in model.members)
    top = 0
    for tree in model.trees:
        internal = tree.node_left != -1
        if internal.any():
            top = max(top, int(tree.node_dim[internal].max()))
    return top


def predict_scan_counts(
    model: BranchModel | EnsembleModel | ScanModel,
    store: StoreHandle,
    chunk_rows: int = SCAN_CHUNK_ROWS,
) -> tuple[np.ndarray, np.ndarray]:
    """Full linear pass over the store: (positive ids ascending, votes per id).

    Votes are box-membership counts for branch models / ensembles, tree
    votes for the forest (positives need a strict majority), 1 for the
    single tree.
    """
    if _max_model_dim(model) >= store.n_dims:
        raise ModelError(
            f"model references dim {_max_model_dim(model)}, store has {store.n_dims}"
        )
    matrix = store.matrix
    id_chunks: list[np.ndarray] = []
    count_chunks: list[np.ndarray] = []
    for start in range(0, store.n_rows, chunk_rows):
        chunk = np.asarray(matrix[start : start + chunk_rows])
        if isinstance(model, BranchModel):
            counts = boxes_contain(model.boxes, chunk[:, list(model.subset)])
        elif isinstance(model, EnsembleModel):
            counts = np.zeros(len(chunk), dtype=np.int64)
            for member in model.members:
                counts += boxes_contain(member.boxes, chunk[:, list(member.subset)]) > 0
        elif model.kind == "decision_tree":
            counts = predict_tree(model.trees[0], chunk).astype(np.int64)
        else:
            votes = np.zeros(len(chunk), dtype=np.int64)
            for tree in model.trees:
                votes += predict_tree(tree, chunk)
            counts = np.where(2 * votes > len(model.trees), votes, 0)
        hit = counts > 0
        if hit.any():
            id_chunks.append(np.nonzero(hit)[0].astype(np.uint64) + np.uint64(start))
            count_chunks.append(counts[hit])
    if not id_chunks:
        return np.empty(0, dtype=np.uint64), np.empty(0, dtype=np.int64)
    return np.concatenate(id_chunks), np.concatenate(count_chunks)


def predict_scan(
    model: BranchModel | EnsembleModel | ScanModel,
    store: StoreHandle,
) -> np.ndarray:
    """Ids predicted positive by a full scan, ascending."""
    ids, _ = predict_scan_counts(model, store)
    return ids


def knn_baseline(
    labeled: Sequence[LabeledSample],
    catalog: IndexCatalog,
    k: int = 1000,
) -> list[int]:
    """Indexed nearest-neighbor baseline on the first catalog subset.

    The query point is the centroid of the positive samples projected to
    that subset; labeled ids are excluded from the ranking.
    """
    pos_ids = [int(s.id) for s in labeled if s.label]
    if not pos_ids:
        raise TrainError("knn baseline requires at least one positive sample")
    index = catalog.index(0)
    centroid = index.get_points(pos_ids).astype(np.float64).mean(axis=0)
    excluded = {int(s.id) for s in labeled}
    found = knn_query(index, centroid, min(k + len(excluded), index.n_points))
    out = [nid for nid, _ in found if nid not in excluded]
    return out[:k]


# ---------------------------------------------------------------------------
# human-readable descriptors

def box_sql(box: QueryBox) -> str:
    """Render one box as SQL-style WHERE predicates over f<dim> columns."""
    clauses: list[str] = []
    for dim, lo, up in zip(box.subset, box.lower, box.upper):
        name = f"f{dim}"
        if math.isfinite(lo) and math.isfinite(up):
            clauses.append(f"{lo!r} < {name} AND {name} <= {up!r}")
        elif math.isfinite(lo):
            clauses.append(f"{name} > {lo!r}")
        elif math.isfinite(up):
            clauses.append(f"{name} <= {up!r}")
    return "WHERE " + (" AND ".join(clauses) if clauses else "TRUE")


def describe_model(model: BranchModel | EnsembleModel) -> str:
    """Human-readable descriptor: bound subset plus per-box bounds and SQL."""
    members = model.members if isinstance(model, EnsembleModel) else [model]
    lines: list[str] = []
    for i, member in enumerate(members):
        prefix = f"member {i}: " if len(members) > 1 else ""
        dims = ",".join(str(c) for c in member.subset)
        lines.append(f"{prefix}subset [{dims}] ({len(member.boxes)} boxes)")
        for b, box in enumerate(member.boxes):
            bounds = "; ".join(
                f"f{dim} in ({lo!r}, {up!r}]"
                for dim, lo, up in zip(box.subset, box.lower, box.upper)
            )
            lines.append(f"  box {b}: {bounds}")
            lines.append(f"    {box_sql(box)}")
    return "\n".join(lines)
