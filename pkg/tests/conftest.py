import numpy as np
import pytest

from boxsearch.feature_store import PatchRecord, open_store, write_store
from boxsearch.range_index import build_catalog, load_catalog
from boxsearch.synth import SynthConfig, generate_corpus


def make_records(n: int, grid_cols: int = 10):
    return [
        PatchRecord(
            id=i,
            grid_row=i // grid_cols,
            grid_col=i % grid_cols,
            geo_x=(i % grid_cols) * 25.0,
            geo_y=-(i // grid_cols) * 25.0,
            image_ref=f"images/patch_{i:08d}.png",
        )
        for i in range(n)
    ]


@pytest.fixture()
def tiny_store(tmp_path):
    """The 3x2 store used by the ingest examples."""
    matrix = np.array([[0, 0], [1, 1], [2, 2]], dtype=np.float32)
    write_store(matrix, make_records(3), tmp_path / "store")
    return open_store(tmp_path / "store")


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """Labeled synthetic corpus with a rare planted class, plus a catalog."""
    root = tmp_path_factory.mktemp("small_corpus")
    config = SynthConfig(
        n_patches=4000,
        n_dims=24,
        n_clusters=6,
        planted_classes=3,
        planted_size=60,
        seed=42,
        write_images=False,
    )
    _, ground_truth = generate_corpus(config, root / "store")
    store = open_store(root / "store")
    build_catalog(store, n_indexes=12, subset_size=4, seed=7, leaf_size=32, out_dir=root / "catalog")
    catalog = load_catalog(root / "catalog")
    return store, catalog, ground_truth


@pytest.fixture(scope="session")
def demo_corpus(tmp_path_factory):
    """Small corpus with rendered patch images, for service tests."""
    root = tmp_path_factory.mktemp("demo_corpus")
    config = SynthConfig(
        n_patches=300,
        n_dims=16,
        grid_cols=20,
        n_clusters=5,
        planted_classes=4,
        seed=9,
        patch_px=32,
        write_images=True,
    )
    _, ground_truth = generate_corpus(config, root / "store")
    store = open_store(root / "store")
    build_catalog(store, n_indexes=8, subset_size=3, seed=5, leaf_size=16, out_dir=root / "catalog")
    catalog = load_catalog(root / "catalog")
    return root, store, catalog, ground_truth
