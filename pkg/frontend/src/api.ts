// Client for the search + data service.

import type { LabelState } from "./labels.js";
import type {
  ApiErrorBody,
  Meta,
  ModelKind,
  PatchInfo,
  SearchBody,
  SearchResponse,
  ValidateResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: ApiErrorBody,
  ) {
    super(body.message);
  }
}

/** The request body sent by the search button; field names match the
 * session document schema (version/fingerprint come from /api/meta). */
export function buildSearchBody(
  labels: LabelState,
  modelKind: ModelKind,
  nRandomNegatives: number,
  seed: number,
): SearchBody {
  return {
    positives: [...labels.positives].sort((a, b) => a - b),
    negatives: [...labels.negatives].sort((a, b) => a - b),
    model_kind: modelKind,
    n_random_negatives: nRandomNegatives,
    seed: seed,
  };
}

async function unwrap<T>(resp: Response): Promise<T> {
  if (resp.ok) return (await resp.json()) as T;
  let body: ApiErrorBody;
  try {
    body = (await resp.json()) as ApiErrorBody;
  } catch {
    body = { code: "http_error", message: `HTTP ${resp.status}`, stage: "transport" };
  }
  throw new ApiError(resp.status, body);
}

export class ApiClient {
  constructor(private base: string = "") {}

  meta(): Promise<Meta> {
    return fetch(`${this.base}/api/meta`).then((r) => unwrap<Meta>(r));
  }

  search(body: SearchBody): Promise<SearchResponse> {
    return fetch(`${this.base}/api/search`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    }).then((r) => unwrap<SearchResponse>(r));
  }

  patches(minRow: number, maxRow: number, minCol: number, maxCol: number): Promise<PatchInfo[]> {
    const params = new URLSearchParams({
      min_row: String(minRow),
      max_row: String(maxRow),
      min_col: String(minCol),
      max_col: String(maxCol),
    });
    return fetch(`${this.base}/api/patches?${params}`).then((r) => unwrap<PatchInfo[]>(r));
  }

  validateSession(doc: string): Promise<ValidateResponse> {
    return fetch(`${this.base}/api/session/validate`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: doc,
    }).then((r) => unwrap<ValidateResponse>(r));
  }

  patchUrl(id: number): string {
    return `${this.base}/api/patch/${id}`;
  }
}
