"""Exact k-d tree indexes over feature subsets, and the pre-built index catalog.

Each index covers one strictly-increasing column subset of the store. Trees
are built by median splits on the widest-spread dimension; leaves hold id
buckets. Range queries use half-open per-dimension intervals
``lower < x <= upper``, matching tree splits of the form ``x <= v`` exactly,
so boxes extracted from decision-tree paths need no epsilon adjustment.

Indexes are immutable after build; concurrent queries on a shared index are
safe.
"""

from __future__ import annotations

import heapq
import math
import struct
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import CatalogError, FormatError, IndexMismatchError
from .feature_store import StoreHandle, check_subset

INDEX_MAGIC = b"BSKDIDX\0"
INDEX_VERSION = 1
DEFAULT_LEAF_SIZE = 64

CATALOG_FILE = "catalog.txt"


@dataclass(frozen=True)
class QueryBox:
    """Axis-aligned region over a feature subset; interval semantics lower < x <= upper.

    Unbounded sides are plain ``-inf`` / ``+inf``; a box with any
    ``lower[j] >= upper[j]`` is empty.
    """

    subset: tuple[int, ...]
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        if not (len(self.subset) == len(self.lower) == len(self.upper)):
            raise IndexMismatchError(
                f"box bound lengths {len(self.lower)}/{len(self.upper)} "
                f"do not match subset size {len(self.subset)}"
            )

    @property
    def is_empty(self) -> bool:
        return any(lo >= up for lo, up in zip(self.lower, self.upper))

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Vectorized membership test for an (n, d') point block."""
        lo = np.asarray(self.lower, dtype=np.float64)
        up = np.asarray(self.upper, dtype=np.float64)
        return ((points > lo) & (points <= up)).all(axis=1)


def universal_box(subset: Sequence[int]) -> QueryBox:
    d = len(subset)
    return QueryBox(tuple(int(s) for s in subset), (-math.inf,) * d, (math.inf,) * d)


@dataclass
class KdIndex:
    """Balanced k-d tree over one feature subset, with leaf id buckets.

    Nodes live in parallel arrays; an internal node ``i`` splits on local
    dimension ``node_dim[i]`` at ``node_value[i]`` (left: x <= v, right:
    x > v). Leaves are encoded as ``node_left[i] == -1`` with
    ``node_right[i]`` holding the leaf bucket number. ``leaf_ids`` holds the
    bucket contents back to back in ``leaf_offsets`` order, and ``points``
    stores the indexed coordinates in the same order, so the index answers
    queries without the store.
    """

    subset: tuple[int, ...]
    fingerprint: int
    leaf_size: int
    node_dim: np.ndarray
    node_value: np.ndarray
    node_left: np.ndarray
    node_right: np.ndarray
    node_min: np.ndarray  # per-node data bounds, for subtree pruning
    node_max: np.ndarray
    node_start: np.ndarray  # per-node slice into the leaf-ordered arrays
    node_end: np.ndarray
    leaf_offsets: np.ndarray
    leaf_ids: np.ndarray
    points: np.ndarray
    bounds: np.ndarray
    _inverse: np.ndarray | None = field(default=None, repr=False, compare=False)

    _flat: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def n_points(self) -> int:
        return len(self.leaf_ids)

    @property
    def n_nodes(self) -> int:
        return len(self.node_dim)

    @property
    def n_leaves(self) -> int:
        return len(self.leaf_offsets) - 1

    def flat_nodes(self) -> tuple:
        """Node arrays as plain Python lists (built once, cached).

        The range traversal touches a handful of scalars per node; plain
        lists make that loop an order of magnitude cheaper than per-node
        numpy indexing.
        """
        if self._flat is None:
            self._flat = (
                self.node_dim.tolist(),
                self.node_value.astype(np.float64).tolist(),
                self.node_left.tolist(),
                self.node_right.tolist(),
                self.node_min.astype(np.float64).tolist(),
                self.node_max.astype(np.float64).tolist(),
                self.node_start.tolist(),
                self.node_end.tolist(),
            )
        return self._flat

    def get_points(self, ids: Sequence[int]) -> np.ndarray:
        """Indexed coordinates for the given store ids (subset columns)."""
        if self._inverse is None:
            inv = np.empty(self.n_points, dtype=np.int64)
            inv[self.leaf_ids.astype(np.int64)] = np.arange(self.n_points)
            self._inverse = inv
        return self.points[self._inverse[np.asarray(ids, dtype=np.int64)]]


def build_kd_index(
    store: StoreHandle,
    subset: Sequence[int],
    leaf_size: int = DEFAULT_LEAF_SIZE,
) -> KdIndex:
    """Index every store row, projected to the subset columns."""
    sub = check_subset(subset, store.n_dims)
    points = np.array(store.matrix[:, sub], dtype=np.float32)
    return build_kd_index_from_points(points, sub, leaf_size, store.fingerprint)


def build_kd_index_from_points(
    points: np.ndarray,
    subset: Sequence[int],
    leaf_size: int = DEFAULT_LEAF_SIZE,
    fingerprint: int = 0,
) -> KdIndex:
    """Build over an explicit (n, d') float32 matrix whose row index is the id."""
    if leaf_size < 1:
        raise ValueError(f"leaf_size must be >= 1, got {leaf_size}")
    points = np.ascontiguousarray(points, dtype=np.float32)
    n, d = points.shape
    perm = np.arange(n, dtype=np.int64)

    node_dim: list[int] = []
    node_value: list[float] = []
    node_left: list[int] = []
    node_right: list[int] = []
    node_min: list[np.ndarray] = []
    node_max: list[np.ndarray] = []
    node_span: list[tuple[int, int]] = []
    leaf_slices: list[tuple[int, int]] = []

    def new_node() -> int:
        node_dim.append(0)
        node_value.append(0.0)
        node_left.append(-1)
        node_right.append(-1)
        node_min.append(np.empty(0))
        node_max.append(np.empty(0))
        node_span.append((0, 0))
        return len(node_dim) - 1

    # (slot, start, end) work items over perm segments; segments are
    # partitioned in place so the final perm is leaf-contiguous.
    stack: list[tuple[int, int, int]] = [(new_node(), 0, n)]
    while stack:
        slot, s, e = stack.pop()
        seg = perm[s:e]
        block = points[seg]
        mins = block.min(axis=0)
        maxs = block.max(axis=0)
        node_min[slot] = mins
        node_max[slot] = maxs
        node_span[slot] = (s, e)
        spread = maxs - mins
        if (e - s) <= leaf_size or float(spread.max()) <= 0.0:
            node_left[slot] = -1
            node_right[slot] = len(leaf_slices)
            leaf_slices.append((s, e))
            continue
        dim = int(np.argmax(spread))
        vals = block[:, dim]
        mid = (len(vals) - 1) // 2
        value = float(np.partition(vals, mid)[mid])
        if value == float(maxs[dim]):
            # lower median hit the maximum; step down to keep the right side
            # non-empty (ties go left)
            value = float(vals[vals < value].max())
        mask = vals <= value
        n_left = int(mask.sum())
        left_part = seg[mask]  # copy before writing: seg aliases perm[s:e]
        right_part = seg[~mask]
        perm[s : s + n_left] = left_part
        perm[s + n_left : e] = right_part
        node_dim[slot] = dim
        node_value[slot] = value
        left_slot = new_node()
        right_slot = new_node()
        node_left[slot] = left_slot
        node_right[slot] = right_slot
        stack.append((left_slot, s, s + n_left))
        stack.append((right_slot, s + n_left, e))

    # number leaves in storage order so offsets are monotonic
    order = np.argsort([s for s, _ in leaf_slices], kind="stable")
    renumber = np.empty(len(order), dtype=np.int64)
    renumber[order] = np.arange(len(order))
    offsets = np.zeros(len(order) + 1, dtype=np.uint64)
    for new_i, old_i in enumerate(order):
        offsets[new_i + 1] = leaf_slices[old_i][1]
    left_arr = np.asarray(node_left, dtype=np.int32)
    right_arr = np.asarray(node_right, dtype=np.int32)
    is_leaf = left_arr == -1
    right_arr[is_leaf] = renumber[right_arr[is_leaf]].astype(np.int32)

    bounds = np.stack([points.min(axis=0), points.max(axis=0)], axis=1).astype(np.float32)
    return KdIndex(
        subset=tuple(int(c) for c in np.asarray(subset)),
        fingerprint=fingerprint,
        leaf_size=leaf_size,
        node_dim=np.asarray(node_dim, dtype=np.uint32),
        node_value=np.asarray(node_value, dtype=np.float32),
        node_left=left_arr,
        node_right=right_arr,
        node_min=np.stack(node_min).astype(np.float32),
        node_max=np.stack(node_max).astype(np.float32),
        node_start=np.asarray([span[0] for span in node_span], dtype=np.uint64),
        node_end=np.asarray([span[1] for span in node_span], dtype=np.uint64),
        leaf_offsets=offsets,
        leaf_ids=perm.astype(np.uint64),
        points=points[perm],
        bounds=bounds,
    )


def _check_box(index: KdIndex, box: QueryBox) -> tuple[np.ndarray, np.ndarray]:
    if box.subset != index.subset:
        raise IndexMismatchError(f"box subset {box.subset} != index subset {index.subset}")
    lower = np.asarray(box.lower, dtype=np.float64)
    upper = np.asarray(box.upper, dtype=np.float64)
    return lower, upper


def range_query(index: KdIndex, box: QueryBox) -> np.ndarray:
    """All ids with lower[j] < x[j] <= upper[j] for every j, ascending."""
    ids, _, _ = range_query_stats(index, box)
    return ids


def range_query_stats(index: KdIndex, box: QueryBox) -> tuple[np.ndarray, int, int]:
    """Like :func:`range_query`, also reporting (leaves visited, ids inspected)."""
    lower_arr, upper_arr = _check_box(index, box)
    if box.is_empty:
        return np.empty(0, dtype=np.uint64), 0, 0
    node_dim, node_value, node_left, node_right, node_min, node_max, node_start, node_end = (
        index.flat_nodes()
    )
    offsets = index.leaf_offsets
    pts = index.points
    leaf_ids = index.leaf_ids
    lower = lower_arr.tolist()
    upper = upper_arr.tolist()
    dims = range(len(lower))

    hits: list[np.ndarray] = []
    leaves_visited = 0
    ids_inspected = 0
    stack = [0]
    while stack:
        node = stack.pop()
        bmin = node_min[node]
        bmax = node_max[node]
        disjoint = False
        contained = True
        for d in dims:
            lo = lower[d]
            up = upper[d]
            mn = bmin[d]
            mx = bmax[d]
            if mx <= lo or mn > up:
                disjoint = True  # no point of this subtree can fall in the box
                break
            if contained and (mn <= lo or mx > up):
                contained = False
        if disjoint:
            continue
        if contained:
            # whole subtree inside the box: emit its id slice uninspected
            hits.append(leaf_ids[node_start[node] : node_end[node]])
            continue
        left = node_left[node]
        if left < 0:
            bucket = node_right[node]
            s = int(offsets[bucket])
            e = int(offsets[bucket + 1])
            block = pts[s:e]
            mask = ((block > lower_arr) & (block <= upper_arr)).all(axis=1)
            leaves_visited += 1
            ids_inspected += e - s
            if mask.any():
                hits.append(leaf_ids[s:e][mask])
            continue
        dim = node_dim[node]
        value = node_value[node]
        if lower[dim] < value:
            stack.append(left)
        if upper[dim] > value:
            stack.append(node_right[node])
    if not hits:
        return np.empty(0, dtype=np.uint64), leaves_visited, ids_inspected
    out = np.concatenate(hits)
    out.sort()
    return out, leaves_visited, ids_inspected


def knn_query(index: KdIndex, point: Sequence[float], k: int) -> list[tuple[int, float]]:
    """The k nearest ids by Euclidean distance on the subset dimensions.

    Ascending by (distance, id); with k > N all N points are returned.
    Best-first traversal: node regions are visited in order of their
    lower-bound distance, so the search stops as soon as the next region
    cannot beat the current k-th candidate.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    q = np.asarray(point, dtype=np.float64)
    if q.shape != (len(index.subset),):
        raise IndexMismatchError(
            f"query point has shape {q.shape}, index subset has {len(index.subset)} dims"
        )
    node_dim = index.node_dim
    node_value = index.node_value
    node_left = index.node_left
    node_right = index.node_right
    offsets = index.leaf_offsets
    pts = index.points
    leaf_ids = index.leaf_ids

    # max-heap of the best k (dist_sq, id) pairs, stored negated
    best: list[tuple[float, int]] = []

    def kth() -> tuple[float, int]:
        d2, nid = best[0]
        return -d2, -nid

    counter = 0
    # frontier entries: (region lower-bound dist_sq, tiebreak, node, per-dim offsets)
    frontier: list[tuple[float, int, int, np.ndarray]] = [(0.0, 0, 0, np.zeros(len(q)))]
    while frontier:
        bound, _, node, off = heapq.heappop(frontier)
        if len(best) >= k:
            kd, _ = kth()
            if bound > kd:
                break
        left = node_left[node]
        if left < 0:
            bucket = node_right[node]
            s = int(offsets[bucket])
            e = int(offsets[bucket + 1])
            diffs = pts[s:e].astype(np.float64) - q
            d2 = (diffs * diffs).sum(axis=1)
            for j in np.argsort(d2, kind="stable"):
                cand = (float(d2[j]), int(leaf_ids[s + j]))
                if len(best) < k:
                    heapq.heappush(best, (-cand[0], -cand[1]))
                elif cand < kth():
                    heapq.heapreplace(best, (-cand[0], -cand[1]))
            continue
        dim = int(node_dim[node])
        value = float(node_value[node])
        delta = q[dim] - value
        near, far = (left, node_right[node]) if delta <= 0 else (node_right[node], left)
        counter += 1
        heapq.heappush(frontier, (bound, counter, int(near), off))
        far_off = off.copy()
        far_off[dim] = delta * delta
        far_bound = bound - off[dim] + far_off[dim]
        if len(best) < k or far_bound <= kth()[0]:
            counter += 1
            heapq.heappush(frontier, (far_bound, counter, int(far), far_off))

    out = sorted((-d2, -nid) for d2, nid in best)
    return [(nid, math.sqrt(d2)) for d2, nid in out]


# ---------------------------------------------------------------------------
# serialization

def save_index(index: KdIndex, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    d = len(index.subset)
    with open(path, "wb") as f:
        head = INDEX_MAGIC + struct.pack(
            "<IQIIQII",
            INDEX_VERSION,
            index.fingerprint,
            d,
            index.leaf_size,
            index.n_points,
            index.n_nodes,
            index.n_leaves,
        )
        f.write(head + b"\0" * (64 - len(head)))
        f.write(np.asarray(index.subset, dtype="<u4").tobytes())
        f.write(np.ascontiguousarray(index.bounds, dtype="<f4").tobytes())
        f.write(np.ascontiguousarray(index.node_dim, dtype="<u4").tobytes())
        f.write(np.ascontiguousarray(index.node_value, dtype="<f4").tobytes())
        f.write(np.ascontiguousarray(index.node_left, dtype="<i4").tobytes())
        f.write(np.ascontiguousarray(index.node_right, dtype="<i4").tobytes())
        f.write(np.ascontiguousarray(index.node_min, dtype="<f4").tobytes())
        f.write(np.ascontiguousarray(index.node_max, dtype="<f4").tobytes())
        f.write(np.ascontiguousarray(index.node_start, dtype="<u8").tobytes())
        f.write(np.ascontiguousarray(index.node_end, dtype="<u8").tobytes())
        f.write(np.ascontiguousarray(index.leaf_offsets, dtype="<u8").tobytes())
        f.write(np.ascontiguousarray(index.leaf_ids, dtype="<u8").tobytes())
        f.write(np.ascontiguousarray(index.points, dtype="<f4").tobytes())


def load_index(path: str | Path, expected_fingerprint: int | None = None) -> KdIndex:
    path = Path(path)
    if not path.is_file():
        raise FormatError(f"no index file at {path}")
    with open(path, "rb") as f:
        head = f.read(64)
        if len(head) < 64 or head[:8] != INDEX_MAGIC:
            raise FormatError(f"bad index magic in {path}")
        version, fingerprint, d, leaf_size, n_points, n_nodes, n_leaves = struct.unpack(
            "<IQIIQII", head[8:44]
        )
        if version != INDEX_VERSION:
            raise FormatError(f"unsupported index version {version}")
        if expected_fingerprint is not None and fingerprint != expected_fingerprint:
            raise FormatError(
                f"index fingerprint {fingerprint:#x} does not match store "
                f"{expected_fingerprint:#x}"
            )

        def read(dtype: str, count: int) -> np.ndarray:
            arr = np.frombuffer(f.read(np.dtype(dtype).itemsize * count), dtype=dtype)
            if len(arr) != count:
                raise FormatError(f"truncated index file {path}")
            return arr

        subset = tuple(int(c) for c in read("<u4", d))
        bounds = read("<f4", 2 * d).reshape(d, 2).copy()
        node_dim = read("<u4", n_nodes).copy()
        node_value = read("<f4", n_nodes).copy()
        node_left = read("<i4", n_nodes).copy()
        node_right = read("<i4", n_nodes).copy()
        node_min = read("<f4", n_nodes * d).reshape(n_nodes, d).copy()
        node_max = read("<f4", n_nodes * d).reshape(n_nodes, d).copy()
        node_start = read("<u8", n_nodes).copy()
        node_end = read("<u8", n_nodes).copy()
        leaf_offsets = read("<u8", n_leaves + 1).copy()
        leaf_ids = read("<u8", n_points).copy()
        points = read("<f4", n_points * d).reshape(n_points, d).copy()
    return KdIndex(
        subset=subset,
        fingerprint=fingerprint,
        leaf_size=leaf_size,
        node_dim=node_dim,
        node_value=node_value,
        node_left=node_left,
        node_right=node_right,
        node_min=node_min,
        node_max=node_max,
        node_start=node_start,
        node_end=node_end,
        leaf_offsets=leaf_offsets,
        leaf_ids=leaf_ids,
        points=points,
        bounds=bounds,
    )


# ---------------------------------------------------------------------------
# catalog

@dataclass(frozen=True)
class CatalogEntry:
    subset: tuple[int, ...]
    path: Path


class IndexCatalog:
    """The set of pre-built indexes over distinct random feature subsets.

    Member indexes load lazily on first use and are cached; loading is
    idempotent, so concurrent readers only duplicate work, never state.
    """

    def __init__(
        self,
        directory: Path,
        entries: list[CatalogEntry],
        seed: int,
        fingerprint: int,
        subset_size: int,
        leaf_size: int,
    ):
        self.directory = directory
        self.entries = entries
        self.seed = seed
        self.fingerprint = fingerprint
        self.subset_size = subset_size
        self.leaf_size = leaf_size
        self._cache: dict[int, KdIndex] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def subsets(self) -> list[tuple[int, ...]]:
        return [e.subset for e in self.entries]

    def index(self, position: int) -> KdIndex:
        with self._lock:
            cached = self._cache.get(position)
        if cached is not None:
            return cached
        loaded = load_index(self.entries[position].path, self.fingerprint)
        if loaded.subset != self.entries[position].subset:
            raise FormatError(
                f"index file {self.entries[position].path} carries subset "
                f"{loaded.subset}, manifest says {self.entries[position].subset}"
            )
        with self._lock:
            self._cache[position] = loaded
        return loaded

    def index_for_subset(self, subset: tuple[int, ...]) -> KdIndex:
        for i, entry in enumerate(self.entries):
            if entry.subset == subset:
                return self.index(i)
        raise IndexMismatchError(f"subset {subset} is not in the catalog")


def _n_subsets(n_dims: int, subset_size: int) -> int:
    return math.comb(n_dims, subset_size)


def draw_subsets(
    n_dims: int, subset_size: int, n_indexes: int, seed: int
) -> list[tuple[int, ...]]:
    """n_indexes pairwise-distinct sorted subsets, deterministic per seed."""
    if subset_size < 1 or subset_size > n_dims:
        raise CatalogError(f"subset_size {subset_size} invalid for {n_dims} dims")
    total = _n_subsets(n_dims, subset_size)
    if n_indexes < 1:
        raise CatalogError(f"n_indexes must be >= 1, got {n_indexes}")
    if n_indexes > total:
        raise CatalogError(
            f"requested {n_indexes} distinct subsets but only {total} exist "
            f"(D={n_dims}, d'={subset_size})"
        )
    rng = np.random.default_rng(seed)
    seen: set[tuple[int, ...]] = set()
    out: list[tuple[int, ...]] = []
    while len(out) < n_indexes:
        cand = tuple(sorted(int(c) for c in rng.choice(n_dims, size=subset_size, replace=False)))
        if cand not in seen:
            seen.add(cand)
            out.append(cand)
    return out


def build_catalog(
    store: StoreHandle,
    n_indexes: int,
    subset_size: int,
    seed: int,
    leaf_size: int = DEFAULT_LEAF_SIZE,
    out_dir: str | Path = "catalog",
    on_built=None,
) -> IndexCatalog:
    """Build and persist n_indexes k-d trees over distinct random subsets.

    The whole store matrix is read once; each index projects from it in
    memory. ``on_built(position, subset, index, seconds)`` is invoked after
    each member for progress reporting.
    """
    import time

    subsets = draw_subsets(store.n_dims, subset_size, n_indexes, seed)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    matrix = np.asarray(store.matrix)

    entries: list[CatalogEntry] = []
    for pos, subset in enumerate(subsets):
        t0 = time.perf_counter()
        pts = np.ascontiguousarray(matrix[:, list(subset)], dtype=np.float32)
        index = build_kd_index_from_points(pts, subset, leaf_size, store.fingerprint)
        path = out_dir / f"idx_{pos:05d}.kdx"
        save_index(index, path)
        if on_built is not None:
            on_built(pos, subset, index, time.perf_counter() - t0)
        entries.append(CatalogEntry(subset=subset, path=path))

    with open(out_dir / CATALOG_FILE, "w", encoding="utf-8") as f:
        f.write("format = boxsearch-index-catalog\n")
        f.write(f"version = {INDEX_VERSION}\n")
        f.write(f"fingerprint = {store.fingerprint:#018x}\n")
        f.write(f"seed = {seed}\n")
        f.write(f"n_indexes = {n_indexes}\n")
        f.write(f"subset_size = {subset_size}\n")
        f.write(f"leaf_size = {leaf_size}\n")
        for entry in entries:
            dims = ",".join(str(c) for c in entry.subset)
            f.write(f"index = {entry.path.name} : {dims}\n")
    return IndexCatalog(
        directory=out_dir,
        entries=entries,
        seed=seed,
        fingerprint=store.fingerprint,
        subset_size=subset_size,
        leaf_size=leaf_size,
    )


def load_catalog(path: str | Path) -> IndexCatalog:
    """Open a persisted catalog; member indexes load lazily."""
    directory = Path(path)
    manifest = directory / CATALOG_FILE
    if not manifest.is_file():
        raise FormatError(f"no catalog manifest at {manifest}")
    fields: dict[str, str] = {}
    entries: list[CatalogEntry] = []
    for line in manifest.read_text(encoding="utf-8").splitlines():
        if "=" not in line:
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "index":
            name, dims = (part.strip() for part in value.split(":", 1))
            subset = tuple(int(c) for c in dims.split(","))
            entries.append(CatalogEntry(subset=subset, path=directory / name))
        else:
            fields[key] = value
    if fields.get("format") != "boxsearch-index-catalog":
        raise FormatError(f"{manifest} is not a catalog manifest")
    if not entries:
        raise FormatError(f"catalog manifest {manifest} lists no indexes")
    subsets = [e.subset for e in entries]
    if len(set(subsets)) != len(subsets):
        raise FormatError(f"catalog manifest {manifest} lists duplicate subsets")
    return IndexCatalog(
        directory=directory,
        entries=entries,
        seed=int(fields.get("seed", "0")),
        fingerprint=int(fields.get("fingerprint", "0"), 0),
        subset_size=int(fields.get("subset_size", str(len(entries[0].subset)))),
        leaf_size=int(fields.get("leaf_size", str(DEFAULT_LEAF_SIZE))),
    )
