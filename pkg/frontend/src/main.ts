import { ApiClient, ApiError, buildSearchBody } from "./api.js";
import { LabelState } from "./labels.js";
import { MapView } from "./map.js";
import { buildSessionDoc, parseSessionDoc } from "./session.js";
import { Sidebar } from "./sidebar.js";
import type { Meta, ModelKind, PatchInfo, ResultRow } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

async function boot(): Promise<void> {
  const api = new ApiClient("");
  const banner = el<HTMLDivElement>("banner");
  const showError = (text: string) => {
    banner.textContent = text;
    banner.classList.add("visible");
  };
  const clearError = () => banner.classList.remove("visible");

  let meta: Meta;
  try {
    meta = await api.meta();
  } catch (err) {
    showError(`cannot reach the search service: ${(err as Error).message}`);
    return;
  }

  const labels = new LabelState();
  const modelSelect = el<HTMLSelectElement>("model");
  for (const kind of meta.models) {
    const opt = document.createElement("option");
    opt.value = kind;
    opt.textContent = kind;
    modelSelect.appendChild(opt);
  }
  const negativesInput = el<HTMLInputElement>("negatives");
  const areaToggle = el<HTMLInputElement>("area-toggle");
  const searchButton = el<HTMLButtonElement>("search");
  const statusEl = el<HTMLSpanElement>("label-status");

  const canvas = el<HTMLCanvasElement>("map");
  const fitCanvas = () => {
    const host = canvas.parentElement!;
    canvas.width = host.clientWidth;
    canvas.height = host.clientHeight;
  };
  fitCanvas();

  const resultById = new Map<number, ResultRow>();

  const updateStatus = () => {
    statusEl.textContent = `${labels.positives.size} positive / ${labels.negatives.size} negative`;
  };

  const map = new MapView(canvas, api, meta.grid_extent, labels, {
    onLabel(id, button) {
      labels.labelPatch(id, button);
      updateStatus();
      map.invalidate();
    },
    onAreaSelect(ids) {
      labels.areaSelect(ids);
      updateStatus();
      map.invalidate();
    },
    onCursor() {},
  });
  window.addEventListener("resize", () => {
    fitCanvas();
    map.invalidate();
  });

  const sidebar = new Sidebar(el("results"), el("stats"), api, (row) => {
    // jump the map to the clicked result's patch
    const info: PatchInfo = {
      id: row.id,
      grid_row: 0,
      grid_col: 0,
      geo_x: row.geo_x,
      geo_y: row.geo_y,
    };
    const cols = meta.grid_extent.max_col - meta.grid_extent.min_col + 1;
    info.grid_row = Math.floor(row.id / cols);
    info.grid_col = row.id % cols;
    map.focusPatch(info);
  });

  areaToggle.addEventListener("change", () => {
    map.areaSelectMode = areaToggle.checked;
  });

  searchButton.addEventListener("click", async () => {
    clearError();
    if (labels.positives.size === 0) {
      showError("label at least one positive patch (left click) first");
      return;
    }
    const body = buildSearchBody(
      labels,
      modelSelect.value as ModelKind,
      Number(negativesInput.value) || 0,
      1,
    );
    searchButton.disabled = true;
    try {
      const resp = await api.search(body);
      resultById.clear();
      for (const row of resp.results) resultById.set(row.id, row);
      map.setResults(resultById.keys());
      sidebar.render(resp.results, resp.stats);
    } catch (err) {
      if (err instanceof ApiError) {
        showError(`${err.body.code}: ${err.body.message}`);
      } else {
        showError(String(err));
      }
    } finally {
      searchButton.disabled = false;
    }
  });

  el<HTMLButtonElement>("reset").addEventListener("click", () => {
    labels.reset();
    resultById.clear();
    map.setResults([]);
    sidebar.clear();
    clearError();
    updateStatus();
    map.invalidate();
  });

  el<HTMLButtonElement>("export").addEventListener("click", () => {
    const doc = buildSessionDoc(
      labels,
      modelSelect.value as ModelKind,
      Number(negativesInput.value) || 0,
      1,
      meta.dataset_fingerprint,
    );
    const blob = new Blob([doc], { type: "application/json" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = "boxsearch-session.json";
    link.click();
    URL.revokeObjectURL(link.href);
  });

  const importInput = el<HTMLInputElement>("import-file");
  el<HTMLButtonElement>("import").addEventListener("click", () => importInput.click());
  importInput.addEventListener("change", async () => {
    const file = importInput.files?.[0];
    importInput.value = "";
    if (!file) return;
    clearError();
    const text = await file.text();
    let doc;
    try {
      doc = parseSessionDoc(text);
    } catch (err) {
      showError(`invalid session file: ${(err as Error).message}`);
      return;
    }
    try {
      const verdict = await api.validateSession(text);
      if (!verdict.valid) {
        showError(`session rejected: ${verdict.warnings.join("; ")}`);
        return;
      }
      if (verdict.warnings.length > 0) showError(verdict.warnings.join("; "));
    } catch (err) {
      showError(`validation failed: ${(err as Error).message}`);
      return;
    }
    labels.reset();
    for (const id of doc.positives) labels.positives.add(id);
    for (const id of doc.negatives) labels.negatives.add(id);
    modelSelect.value = doc.model_kind;
    negativesInput.value = String(doc.n_random_negatives);
    map.setResults([]);
    sidebar.clear();
    updateStatus();
    map.invalidate();
  });

  updateStatus();
  map.invalidate();
}

void boot();
