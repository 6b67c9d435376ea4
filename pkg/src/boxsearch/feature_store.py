"""Row-addressable on-disk store for patch feature vectors and patch metadata.

Layout of a store directory:

* ``features.bin`` -- 64-byte header (magic ``BSFEATS\\0``, version u32,
  n_rows u64, n_dims u32, zero padding) followed by the row-major
  float32 little-endian payload.
* ``records.tsv`` -- one patch per line, tab-separated:
  id, grid_row, grid_col, geo_x, geo_y, image_ref.
* ``manifest.txt`` -- human-readable key-value summary incl. the payload
  fingerprint.

The store is immutable after :func:`write_store`; handles are safe to share
across threads.
"""

from __future__ import annotations

import csv
import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    CorruptStoreError,
    FormatError,
    IngestError,
    NotFoundError,
    SampleError,
    SubsetError,
)

MAGIC = b"BSFEATS\0"
VERSION = 1
HEADER_SIZE = 64

FEATURES_FILE = "features.bin"
RECORDS_FILE = "records.tsv"
MANIFEST_FILE = "manifest.txt"

_HASH_CHUNK_ROWS = 1 << 18


@dataclass(frozen=True, slots=True)
class PatchRecord:
    """Metadata for one patch: grid position, projected geolocation, image path."""

    id: int
    grid_row: int
    grid_col: int
    geo_x: float
    geo_y: float
    image_ref: str


@dataclass(frozen=True)
class StoreManifest:
    path: Path
    n_rows: int
    n_dims: int
    version: int
    fingerprint: int


class RecordTable:
    """Column-oriented view of the patch records (ids are dense 0..n-1)."""

    def __init__(
        self,
        grid_row: np.ndarray,
        grid_col: np.ndarray,
        geo_x: np.ndarray,
        geo_y: np.ndarray,
        image_refs: list[str],
    ):
        self.grid_row = grid_row
        self.grid_col = grid_col
        self.geo_x = geo_x
        self.geo_y = geo_y
        self.image_refs = image_refs

    def __len__(self) -> int:
        return len(self.image_refs)

    def record(self, id: int) -> PatchRecord:
        if not 0 <= id < len(self):
            raise NotFoundError(id)
        return PatchRecord(
            id=id,
            grid_row=int(self.grid_row[id]),
            grid_col=int(self.grid_col[id]),
            geo_x=float(self.geo_x[id]),
            geo_y=float(self.geo_y[id]),
            image_ref=self.image_refs[id],
        )

    def grid_extent(self) -> tuple[int, int, int, int]:
        """(min_row, max_row, min_col, max_col) over all records."""
        return (
            int(self.grid_row.min()),
            int(self.grid_row.max()),
            int(self.grid_col.min()),
            int(self.grid_col.max()),
        )


class StoreHandle:
    """Open store: header fields plus a read-only memmap over the payload.

    Records are parsed lazily on first access; feature rows are served by
    offset without loading the payload into memory.
    """

    def __init__(self, path: Path, n_rows: int, n_dims: int, version: int, fingerprint: int):
        self.path = path
        self.n_rows = n_rows
        self.n_dims = n_dims
        self.version = version
        self.fingerprint = fingerprint
        self._matrix = np.memmap(
            path / FEATURES_FILE,
            dtype="<f4",
            mode="r",
            offset=HEADER_SIZE,
            shape=(n_rows, n_dims),
        )
        self._records: RecordTable | None = None

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def records(self) -> RecordTable:
        if self._records is None:
            self._records = _load_records(self.path / RECORDS_FILE, self.n_rows)
        return self._records


def _pack_header(n_rows: int, n_dims: int) -> bytes:
    head = MAGIC + struct.pack("<IQI", VERSION, n_rows, n_dims)
    return head + b"\0" * (HEADER_SIZE - len(head))


def _fingerprint_file(path: Path) -> int:
    h = hashlib.blake2b(digest_size=8)
    with open(path, "rb") as f:
        while True:
            chunk = f.read(1 << 24)
            if not chunk:
                break
            h.update(chunk)
    return int.from_bytes(h.digest(), "little")


def write_store(
    matrix: np.ndarray,
    records: Sequence[PatchRecord],
    path: str | Path,
) -> StoreManifest:
    """Materialize a feature matrix plus its patch records as a store directory.

    Rejects non-finite values and row-count mismatches; the written store
    round-trips bit-exactly through :func:`open_store` / :func:`get_rows`.
    """
    matrix = np.ascontiguousarray(matrix, dtype="<f4")
    if matrix.ndim != 2:
        raise IngestError(f"matrix must be 2-D, got shape {matrix.shape}")
    n_rows, n_dims = matrix.shape
    if n_rows < 1 or n_dims < 1:
        raise IngestError(f"store must have at least one row and one column, got {matrix.shape}")
    if len(records) != n_rows:
        raise IngestError(f"matrix has {n_rows} rows but {len(records)} records given")
    bad = ~np.isfinite(matrix)
    if bad.any():
        row, col = map(int, np.argwhere(bad)[0])
        raise IngestError(f"non-finite value at row {row}, col {col}", row=row, col=col)

    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)

    feat_path = path / FEATURES_FILE
    with open(feat_path, "wb") as f:
        f.write(_pack_header(n_rows, n_dims))
        for start in range(0, n_rows, _HASH_CHUNK_ROWS):
            f.write(matrix[start : start + _HASH_CHUNK_ROWS].tobytes())
    fingerprint = _fingerprint_file(feat_path)

    with open(path / RECORDS_FILE, "w", encoding="utf-8", newline="") as f:
        for i, r in enumerate(records):
            if r.id != i:
                raise IngestError(f"record ids must be dense row indexes; got id {r.id} at row {i}")
            f.write(f"{r.id}\t{r.grid_row}\t{r.grid_col}\t{r.geo_x!r}\t{r.geo_y!r}\t{r.image_ref}\n")

    manifest = StoreManifest(
        path=path, n_rows=n_rows, n_dims=n_dims, version=VERSION, fingerprint=fingerprint
    )
    with open(path / MANIFEST_FILE, "w", encoding="utf-8") as f:
        f.write("format = boxsearch-feature-store\n")
        f.write(f"version = {VERSION}\n")
        f.write(f"n_rows = {n_rows}\n")
        f.write(f"n_dims = {n_dims}\n")
        f.write(f"fingerprint = {fingerprint:#018x}\n")
    return manifest


def _read_manifest(path: Path) -> dict[str, str]:
    fields: dict[str, str] = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if "=" in line:
            key, value = line.split("=", 1)
            fields[key.strip()] = value.strip()
    return fields


def open_store(path: str | Path) -> StoreHandle:
    """Open an existing store, validating header and payload length."""
    path = Path(path)
    feat_path = path / FEATURES_FILE
    if not feat_path.exists():
        raise FormatError(f"no feature file at {feat_path}")
    size = feat_path.stat().st_size
    if size < HEADER_SIZE:
        raise FormatError(f"feature file shorter than the {HEADER_SIZE}-byte header")
    with open(feat_path, "rb") as f:
        head = f.read(HEADER_SIZE)
    if head[:8] != MAGIC:
        raise FormatError(f"bad magic {head[:8]!r}")
    version, n_rows, n_dims = struct.unpack("<IQI", head[8:24])
    if version != VERSION:
        raise FormatError(f"unsupported store version {version}")
    if n_rows < 1 or n_dims < 1:
        raise FormatError(f"header declares empty store ({n_rows}x{n_dims})")
    expected = HEADER_SIZE + n_rows * n_dims * 4
    if size != expected:
        raise CorruptStoreError(
            f"payload length mismatch: file is {size} bytes, header implies {expected}"
        )

    manifest_path = path / MANIFEST_FILE
    if manifest_path.exists():
        fields = _read_manifest(manifest_path)
        fingerprint = int(fields.get("fingerprint", "0"), 0)
    else:
        fingerprint = _fingerprint_file(feat_path)
    return StoreHandle(path, int(n_rows), int(n_dims), int(version), fingerprint)


def _load_records(path: Path, n_rows: int) -> RecordTable:
    if not path.exists():
        raise FormatError(f"no record table at {path}")
    grid_row = np.empty(n_rows, dtype=np.int64)
    grid_col = np.empty(n_rows, dtype=np.int64)
    geo_x = np.empty(n_rows, dtype=np.float64)
    geo_y = np.empty(n_rows, dtype=np.float64)
    image_refs: list[str] = [""] * n_rows
    count = 0
    with open(path, encoding="utf-8", newline="") as f:
        for parts in csv.reader(f, delimiter="\t"):
            if not parts:
                continue
            if count >= n_rows:
                raise CorruptStoreError(f"record table has more than {n_rows} rows")
            if len(parts) != 6:
                raise CorruptStoreError(f"record line {count} has {len(parts)} fields, expected 6")
            if int(parts[0]) != count:
                raise CorruptStoreError(f"record ids not dense: got {parts[0]} at line {count}")
            grid_row[count] = int(parts[1])
            grid_col[count] = int(parts[2])
            geo_x[count] = float(parts[3])
            geo_y[count] = float(parts[4])
            image_refs[count] = parts[5]
            count += 1
    if count != n_rows:
        raise CorruptStoreError(f"record table has {count} rows, store has {n_rows}")
    return RecordTable(grid_row, grid_col, geo_x, geo_y, image_refs)


def _check_ids(ids: np.ndarray, n_rows: int) -> np.ndarray:
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size:
        bad = (ids < 0) | (ids >= n_rows)
        if bad.any():
            raise NotFoundError(int(ids[bad][0]))
    return ids


def get_rows(handle: StoreHandle, ids: Iterable[int]) -> np.ndarray:
    """Fetch feature vectors by id, order preserved, bit-identical to ingest."""
    ids = _check_ids(np.fromiter(ids, dtype=np.int64), handle.n_rows)
    return np.array(handle.matrix[ids], dtype=np.float32)


def check_subset(subset: Sequence[int], n_dims: int) -> np.ndarray:
    """Validate a strictly increasing column subset; returns it as an array."""
    sub = np.asarray(subset, dtype=np.int64)
    if sub.ndim != 1 or sub.size < 1:
        raise SubsetError(f"subset must be a non-empty 1-D sequence, got {subset!r}")
    if (sub < 0).any() or (sub >= n_dims).any():
        raise SubsetError(f"subset {subset!r} out of range for {n_dims} dims")
    if not (np.diff(sub) > 0).all():
        raise SubsetError(f"subset {subset!r} must be strictly increasing")
    return sub


def project_columns(
    handle: StoreHandle,
    subset: Sequence[int],
    ids: Sequence[int] | None = None,
) -> np.ndarray:
    """Restrict the store matrix (or the given rows) to the subset columns."""
    sub = check_subset(subset, handle.n_dims)
    if ids is None:
        return np.array(handle.matrix[:, sub], dtype=np.float32)
    rows = _check_ids(np.asarray(ids), handle.n_rows)
    return np.array(handle.matrix[np.ix_(rows, sub)], dtype=np.float32)


def sample_ids(
    handle: StoreHandle,
    n: int,
    exclude: set[int] | Sequence[int] = (),
    seed: int = 0,
) -> np.ndarray:
    """Draw n distinct ids uniformly from [0, n_rows) minus exclude; deterministic per seed."""
    exclude_arr = np.fromiter(exclude, dtype=np.int64) if len(exclude) else np.empty(0, np.int64)
    exclude_arr = np.unique(exclude_arr[(exclude_arr >= 0) & (exclude_arr < handle.n_rows)])
    available = handle.n_rows - exclude_arr.size
    if n > available:
        raise SampleError(f"cannot draw {n} ids, only {available} available")
    rng = np.random.default_rng(seed)
    if exclude_arr.size == 0:
        picked = rng.choice(handle.n_rows, size=n, replace=False)
    else:
        mask = np.ones(handle.n_rows, dtype=bool)
        mask[exclude_arr] = False
        picked = rng.choice(np.nonzero(mask)[0], size=n, replace=False)
    return np.sort(picked.astype(np.uint64))
