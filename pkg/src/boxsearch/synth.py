"""Desk-scale synthetic corpus: clustered features, patch images, ground truth.

Features are Gaussian clusters with a hard separation guarantee: on every
informative dimension, cluster intervals (clipped noise of half-width
RADIUS around the cluster mean) are separated by at least GAP, and
GAP >= 2 * RADIUS. Under that inequality, any CART midpoint threshold
between a labeled positive and a labeled negative lands outside the
positive cluster's interval, so learned boxes cover whole planted classes.
Remaining dimensions are shared noise with no class signal.

Each planted class also gets a distinct visual motif in its patch PNGs so
a human can label meaningfully in the UI.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .classifier import derive_seed
from .feature_store import PatchRecord, StoreManifest, write_store

RADIUS = 1.0  # clipped noise half-width on informative dims
GAP = 3.0  # minimum distance between adjacent cluster intervals
SPACING = 2 * RADIUS + GAP  # distance between adjacent cluster means
NOISE_SIGMA = 2.0  # shared-noise dims

GROUND_TRUTH_FILE = "ground_truth.json"
IMAGE_DIR = "images"

MOTIFS = ("disc", "square", "triangle", "cross", "ring", "stripes", "dots", "diamond")

PALETTE = (
    (220, 70, 60),
    (60, 120, 220),
    (240, 180, 40),
    (150, 60, 200),
    (40, 180, 120),
    (230, 110, 30),
    (90, 200, 220),
    (200, 80, 150),
)


@dataclass(frozen=True)
class SynthConfig:
    n_patches: int
    n_dims: int = 384
    grid_cols: int | None = None
    n_clusters: int = 8
    planted_classes: int = 4
    planted_size: int | None = None
    noise_dim_fraction: float = 0.25
    seed: int = 0
    patch_px: int = 64
    geo_step: float = 25.0
    write_images: bool = True

    def resolved_grid_cols(self) -> int:
        if self.grid_cols is not None:
            return self.grid_cols
        return max(1, math.ceil(math.sqrt(self.n_patches)))


def _cluster_sizes(config: SynthConfig) -> np.ndarray:
    n, k, p = config.n_patches, config.n_clusters, config.planted_classes
    if not 1 <= p <= k:
        raise ValueError(f"planted_classes {p} must be within [1, n_clusters={k}]")
    sizes = np.zeros(k, dtype=np.int64)
    if config.planted_size is None:
        base, extra = divmod(n, k)
        sizes[:] = base
        sizes[:extra] += 1
    else:
        if config.planted_size * p > n:
            raise ValueError(
                f"{p} planted classes of {config.planted_size} points exceed {n} patches"
            )
        if p == k and config.planted_size * p != n:
            raise ValueError("with no distractor clusters, planted sizes must cover all patches")
        sizes[:p] = config.planted_size
        rest = n - config.planted_size * p
        if k > p:
            base, extra = divmod(rest, k - p)
            sizes[p:] = base
            sizes[p : p + extra] += 1
    if (sizes[: max(p, 1)] < 1).any():
        raise ValueError(f"cluster sizes {sizes.tolist()} leave a planted class empty")
    return sizes


def generate_features(config: SynthConfig) -> tuple[np.ndarray, np.ndarray]:
    """(features (n, D) float32, cluster assignment (n,)) for the corpus.

    Deterministic per config.seed; assignment values < planted_classes mark
    ground-truth classes.
    """
    rng = np.random.default_rng(derive_seed(config.seed, "features"))
    n, d = config.n_patches, config.n_dims
    sizes = _cluster_sizes(config)

    assignment = np.repeat(np.arange(config.n_clusters), sizes)
    assignment = assignment[rng.permutation(n)]

    n_noise = int(round(d * config.noise_dim_fraction))
    n_noise = min(n_noise, d - 1)  # keep at least one informative dim
    noise_dims = np.sort(rng.choice(d, size=n_noise, replace=False)) if n_noise else np.empty(0, np.int64)
    informative = np.setdiff1d(np.arange(d), noise_dims)

    # cluster order is shuffled per dimension, so dims are decorrelated but
    # every informative dim separates every pair of clusters
    means = np.empty((config.n_clusters, len(informative)), dtype=np.float64)
    for j in range(len(informative)):
        means[:, j] = rng.permutation(config.n_clusters) * SPACING

    X = np.empty((n, d), dtype=np.float32)
    noise = rng.standard_normal((n, len(informative)), dtype=np.float32)
    np.clip(noise * (RADIUS / 3.0), -RADIUS, RADIUS, out=noise)
    X[:, informative] = means[assignment] + noise
    if len(noise_dims):
        shared = rng.standard_normal((n, len(noise_dims)), dtype=np.float32)
        X[:, noise_dims] = np.clip(shared * NOISE_SIGMA, -3 * NOISE_SIGMA, 3 * NOISE_SIGMA)
    return X, assignment


def _motif_mask(kind: str, px: int) -> np.ndarray:
    yy, xx = np.mgrid[0:px, 0:px]
    cy = cx = (px - 1) / 2.0
    r = px * 0.30
    if kind == "disc":
        return (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r
    if kind == "square":
        return (np.abs(yy - cy) <= r) & (np.abs(xx - cx) <= r)
    if kind == "triangle":
        return (yy - cy >= -r) & (yy - cy <= r) & (np.abs(xx - cx) <= (yy - cy + r) / 2)
    if kind == "cross":
        bar = px * 0.12
        return ((np.abs(yy - cy) <= bar) | (np.abs(xx - cx) <= bar)) & (
            (np.abs(yy - cy) <= r) & (np.abs(xx - cx) <= r)
        )
    if kind == "ring":
        d2 = (yy - cy) ** 2 + (xx - cx) ** 2
        return (d2 <= r * r) & (d2 >= (r * 0.55) ** 2)
    if kind == "stripes":
        return ((yy // max(2, px // 8)) % 2 == 0) & (np.abs(xx - cx) <= r * 1.2)
    if kind == "dots":
        step = max(4, px // 6)
        return ((yy % step) < step // 2) & ((xx % step) < step // 2) & (
            (np.abs(yy - cy) <= r * 1.2) & (np.abs(xx - cx) <= r * 1.2)
        )
    if kind == "diamond":
        return np.abs(yy - cy) + np.abs(xx - cx) <= r * 1.3
    raise ValueError(f"unknown motif {kind!r}")


def render_patch(patch_id: int, cluster: int, planted_classes: int, px: int, seed: int) -> np.ndarray:
    """RGB uint8 image: speckled terrain plus a class motif for planted patches."""
    rng = np.random.default_rng(derive_seed(seed, "img", patch_id))
    base = rng.integers(90, 130, size=(px, px, 1), dtype=np.uint8)
    img = np.repeat(base, 3, axis=2)
    img[:, :, 1] = np.clip(img[:, :, 1].astype(np.int16) + rng.integers(0, 30), 0, 255).astype(np.uint8)
    if cluster < planted_classes:
        motif = MOTIFS[cluster % len(MOTIFS)]
        color = PALETTE[cluster % len(PALETTE)]
        mask = _motif_mask(motif, px)
        img[mask] = color
    return img


def generate_corpus(config: SynthConfig, out_dir: str | Path) -> tuple[StoreManifest, dict[str, list[int]]]:
    """Write store, record table, ground truth, and (optionally) patch PNGs."""
    out_dir = Path(out_dir)
    X, assignment = generate_features(config)
    cols = config.resolved_grid_cols()
    step = config.geo_step

    records = []
    for i in range(config.n_patches):
        row, col = divmod(i, cols)
        records.append(
            PatchRecord(
                id=i,
                grid_row=row,
                grid_col=col,
                geo_x=col * step,
                geo_y=-row * step,
                image_ref=f"{IMAGE_DIR}/patch_{i:08d}.png",
            )
        )
    manifest = write_store(X, records, out_dir)

    ground_truth = {
        f"class_{c}": np.nonzero(assignment == c)[0].tolist()
        for c in range(config.planted_classes)
    }
    with open(out_dir / GROUND_TRUTH_FILE, "w", encoding="utf-8") as f:
        json.dump(ground_truth, f)
        f.write("\n")

    if config.write_images:
        img_dir = out_dir / IMAGE_DIR
        img_dir.mkdir(exist_ok=True)
        for i in range(config.n_patches):
            arr = render_patch(i, int(assignment[i]), config.planted_classes, config.patch_px, config.seed)
            Image.fromarray(arr).save(img_dir / f"patch_{i:08d}.png")
    return manifest, ground_truth


def load_ground_truth(store_dir: str | Path) -> dict[str, list[int]]:
    path = Path(store_dir) / GROUND_TRUTH_FILE
    with open(path, encoding="utf-8") as f:
        return {k: [int(i) for i in v] for k, v in json.load(f).items()}
