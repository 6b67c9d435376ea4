"""Search-by-classification over feature-vector catalogs.

Label a few positive/negative patches, train an index-aware box classifier,
and answer it in sub-scan time through pre-built k-d tree indexes.
"""

from .classifier import (
    BranchModel,
    EnsembleModel,
    LabeledSample,
    ScanModel,
    TreeModel,
    extract_boxes,
    knn_baseline,
    predict_scan,
    train_branch_model,
    train_ensemble,
    train_tree,
)
from .errors import (
    BoxSearchError,
    CatalogError,
    CorruptStoreError,
    FormatError,
    IndexMismatchError,
    IngestError,
    ModelError,
    NotFoundError,
    SampleError,
    SubsetError,
    TrainError,
)
from .feature_store import (
    PatchRecord,
    StoreHandle,
    StoreManifest,
    get_rows,
    open_store,
    project_columns,
    sample_ids,
    write_store,
)
from .query_engine import (
    EngineConfig,
    QuerySession,
    QueryStats,
    RankedResult,
    SearchRequest,
    augment_negatives,
    execute_search,
    export_session,
    import_session,
    rank_results,
)
from .range_index import (
    IndexCatalog,
    KdIndex,
    QueryBox,
    build_catalog,
    build_kd_index,
    knn_query,
    load_catalog,
    load_index,
    range_query,
    save_index,
)

__version__ = "0.1.0"
