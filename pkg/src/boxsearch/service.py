"""HTTP service: search routes plus patch-data routes in one process.

The two route groups mirror the engine's architectural seam: the search
application trains models and answers queries, the data application serves
patch images and grid metadata. All state (store, catalog, config) is
read-only after startup; concurrent requests are safe.

Every non-2xx response body is ``{code, message, stage}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from fastapi import APIRouter, FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .errors import (
    BoxSearchError,
    FormatError,
    SampleError,
    TrainError,
)
from .feature_store import StoreHandle, open_store
from .query_engine import (
    MODEL_KINDS,
    EngineConfig,
    SearchRequest,
    execute_search,
    import_session,
)
from .range_index import IndexCatalog, load_catalog

DEFAULT_AREA_CAP = 10_000


@dataclass
class ServiceConfig:
    store_path: Path
    catalog_path: Path
    data_root: Path | None = None  # defaults to the store directory
    host: str = "127.0.0.1"
    port: int = 8000
    knn_k: int = 1000
    ensemble_size: int = 25
    n_candidate_subsets: int = 10
    area_cap: int = DEFAULT_AREA_CAP
    frontend_dir: Path | None = None

    def engine_config(self) -> EngineConfig:
        return EngineConfig(
            knn_k=self.knn_k,
            ensemble_size=self.ensemble_size,
            n_candidate_subsets=self.n_candidate_subsets,
        )


class SearchBody(BaseModel):
    positives: list[int]
    negatives: list[int] = Field(default_factory=list)
    model_kind: str = "dbranch"
    n_random_negatives: int = 0
    seed: int = 0


def _error(status: int, code: str, message: str, stage: str = "request") -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "stage": stage},
    )


def create_app(
    config: ServiceConfig,
    store: StoreHandle | None = None,
    catalog: IndexCatalog | None = None,
) -> FastAPI:
    """Build the application; store and catalog may be injected pre-opened."""
    if config.knn_k < 1:
        raise ValueError("knn_k must be >= 1")
    store = store if store is not None else open_store(config.store_path)
    catalog = catalog if catalog is not None else load_catalog(config.catalog_path)
    data_root = Path(config.data_root) if config.data_root else Path(config.store_path)
    engine_config = config.engine_config()

    app = FastAPI(title="boxsearch")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        return _error(400, "bad_request", str(exc.errors()[:3]), "parse")

    @app.exception_handler(BoxSearchError)
    async def on_engine_error(request: Request, exc: BoxSearchError):
        stage = getattr(exc, "stage", "request")
        if isinstance(exc, TrainError):
            return _error(422, "train_error", str(exc), stage)
        if isinstance(exc, (FormatError, SampleError)):
            code = "sample_error" if isinstance(exc, SampleError) else "bad_request"
            return _error(400, code, str(exc), stage)
        return _error(500, type(exc).__name__.lower(), str(exc), stage)

    search_api = APIRouter()  # query handling: train + answer
    data_api = APIRouter()  # patch bytes + grid metadata

    @search_api.post("/api/search")
    def search(body: SearchBody):
        request = SearchRequest(
            positives=tuple(body.positives),
            negatives=tuple(body.negatives),
            model_kind=body.model_kind,
            n_random_negatives=body.n_random_negatives,
            seed=body.seed,
        )
        results, stats = execute_search(request, store, catalog, engine_config)
        return {
            "results": [
                {
                    "id": r.id,
                    "confidence": r.confidence,
                    "geo_x": r.geo[0],
                    "geo_y": r.geo[1],
                    "in_training": r.in_training,
                }
                for r in results
            ],
            "stats": {
                "n_results": stats.n_results,
                "train_ms": stats.train_ms,
                "infer_ms": stats.infer_ms,
                "total_ms": stats.total_ms,
                "n_boxes": stats.n_boxes,
                "n_range_queries": stats.n_range_queries,
            },
        }

    @search_api.get("/api/meta")
    def meta():
        extent = store.records.grid_extent()
        return {
            "n_rows": store.n_rows,
            "n_dims": store.n_dims,
            "grid_extent": {
                "min_row": extent[0],
                "max_row": extent[1],
                "min_col": extent[2],
                "max_col": extent[3],
            },
            "dataset_fingerprint": f"{store.fingerprint:#018x}",
            "models": list(MODEL_KINDS),
            "defaults": {"knn_k": config.knn_k, "ensemble_size": config.ensemble_size},
        }

    @search_api.post("/api/session/validate")
    async def session_validate(request: Request):
        raw = await request.body()
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError:
            return _error(400, "bad_request", "body is not UTF-8", "parse")
        try:
            parsed = json.loads(text)
        except json.JSONDecodeError as exc:
            return _error(400, "bad_request", f"body is not valid JSON: {exc}", "parse")
        if not isinstance(parsed, dict):
            return _error(400, "bad_request", "session document must be a JSON object", "parse")
        try:
            _, warnings = import_session(text, store)
        except FormatError as exc:
            return {"valid": False, "warnings": [str(exc)]}
        return {"valid": True, "warnings": warnings}

    @data_api.get("/api/patch/{patch_id}")
    def patch_image(patch_id: int):
        if not 0 <= patch_id < store.n_rows:
            return _error(404, "not_found", f"no patch with id {patch_id}", "data")
        record = store.records.record(patch_id)
        path = data_root / record.image_ref
        if not path.is_file():
            return _error(500, "missing_image", f"image file {record.image_ref} is missing", "data")
        return Response(content=path.read_bytes(), media_type="image/png")

    @data_api.get("/api/patches")
    def patches(min_row: int, max_row: int, min_col: int, max_col: int):
        if min_row > max_row or min_col > max_col:
            return _error(400, "bad_request", "bounds must satisfy min <= max", "data")
        area = (max_row - min_row + 1) * (max_col - min_col + 1)
        if area > config.area_cap:
            return _error(
                413, "area_too_large", f"requested {area} cells, cap is {config.area_cap}", "data"
            )
        records = store.records
        mask = (
            (records.grid_row >= min_row)
            & (records.grid_row <= max_row)
            & (records.grid_col >= min_col)
            & (records.grid_col <= max_col)
        )
        ids = mask.nonzero()[0]
        return [
            {
                "id": int(i),
                "grid_row": int(records.grid_row[i]),
                "grid_col": int(records.grid_col[i]),
                "geo_x": float(records.geo_x[i]),
                "geo_y": float(records.geo_y[i]),
            }
            for i in ids
        ]

    app.include_router(search_api)
    app.include_router(data_api)

    if config.frontend_dir and Path(config.frontend_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.frontend_dir, html=True), name="ui")

    return app
