// Wire types for the search service endpoints.

export type ModelKind = "dbranch" | "dbranch_ens" | "dtree" | "rforest" | "knn";

export interface SearchBody {
  positives: number[];
  negatives: number[];
  model_kind: ModelKind;
  n_random_negatives: number;
  seed: number;
}

export interface ResultRow {
  id: number;
  confidence: number;
  geo_x: number;
  geo_y: number;
  in_training: boolean;
}

export interface QueryStats {
  n_results: number;
  train_ms: number;
  infer_ms: number;
  total_ms: number;
  n_boxes: number;
  n_range_queries: number;
}

export interface SearchResponse {
  results: ResultRow[];
  stats: QueryStats;
}

export interface GridExtent {
  min_row: number;
  max_row: number;
  min_col: number;
  max_col: number;
}

export interface Meta {
  n_rows: number;
  n_dims: number;
  grid_extent: GridExtent;
  dataset_fingerprint: string;
  models: ModelKind[];
  defaults: { knn_k: number; ensemble_size: number };
}

export interface PatchInfo {
  id: number;
  grid_row: number;
  grid_col: number;
  geo_x: number;
  geo_y: number;
}

export interface SessionDoc {
  version: number;
  dataset_fingerprint: string;
  positives: number[];
  negatives: number[];
  model_kind: ModelKind;
  n_random_negatives: number;
  seed: number;
}

export interface ValidateResponse {
  valid: boolean;
  warnings: string[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
  stage: string;
}
