// Interactive patch-grid map: pan/zoom canvas, patch tiles, label clicks,
// rectangle area selection.

import type { ApiClient } from "./api.js";
import { COLOR_CURSOR, patchColor } from "./colors.js";
import type { LabelState, MouseButton } from "./labels.js";
import type { GridExtent, PatchInfo } from "./types.js";
import { Viewport, cellsInRect } from "./view.js";

const TILE_MIN_SCALE = 24; // draw patch images at this zoom and beyond
const GRID_MIN_SCALE = 7;
const DRAG_THRESHOLD = 4;
const FETCH_CAP = 9_000; // stay under the service's patch-window cap
const MAX_INFLIGHT_TILES = 16;

export interface MapCallbacks {
  onLabel(id: number, button: MouseButton): void;
  onAreaSelect(ids: number[]): void;
  onCursor(id: number | null): void;
}

export class MapView {
  private ctx: CanvasRenderingContext2D;
  readonly view = new Viewport();
  private patches = new Map<string, PatchInfo>();
  private patchById = new Map<number, PatchInfo>();
  private fetched = new Set<string>();
  private tiles = new Map<number, HTMLImageElement | "loading">();
  private inflightTiles = 0;
  private tileQueue: number[] = [];

  private dragStart: { x: number; y: number } | null = null;
  private dragging = false;
  private rubber: { x0: number; y0: number; x1: number; y1: number } | null = null;
  areaSelectMode = false;

  private results = new Set<number>();
  private renderQueued = false;

  constructor(
    private canvas: HTMLCanvasElement,
    private api: ApiClient,
    private extent: GridExtent,
    private labels: LabelState,
    private callbacks: MapCallbacks,
  ) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("no 2d canvas context");
    this.ctx = ctx;
    this.bindEvents();
    this.view.centerOn(
      (extent.min_col + extent.max_col) / 2,
      (extent.min_row + extent.max_row) / 2,
      canvas.width,
      canvas.height,
    );
  }

  setResults(ids: Iterable<number>): void {
    this.results = new Set(ids);
    this.invalidate();
  }

  /** True grid location of a patch, when its metadata has been fetched. */
  knownPatch(id: number): PatchInfo | null {
    return this.patchById.get(id) ?? null;
  }

  focusPatch(info: PatchInfo): void {
    const known = this.patchById.get(info.id) ?? info;
    this.view.scale = Math.max(this.view.scale, 48);
    this.view.centerOn(known.grid_col, known.grid_row, this.canvas.width, this.canvas.height);
    this.invalidate();
  }

  invalidate(): void {
    if (this.renderQueued) return;
    this.renderQueued = true;
    requestAnimationFrame(() => {
      this.renderQueued = false;
      this.render();
    });
  }

  // ---- data windows ------------------------------------------------------

  private key(row: number, col: number): string {
    return `${row}:${col}`;
  }

  private async ensureVisiblePatches(): Promise<void> {
    let win = this.view.visibleCells(
      this.canvas.width,
      this.canvas.height,
      this.extent.max_row,
      this.extent.max_col,
    );
    let area = (win.maxRow - win.minRow + 1) * (win.maxCol - win.minCol + 1);
    if (area <= 0) return;
    if (area > FETCH_CAP) {
      // zoomed far out: fetch a centered window under the cap
      const side = Math.floor(Math.sqrt(FETCH_CAP));
      const midRow = Math.floor((win.minRow + win.maxRow) / 2);
      const midCol = Math.floor((win.minCol + win.maxCol) / 2);
      win = {
        minRow: Math.max(0, midRow - side / 2),
        maxRow: Math.min(this.extent.max_row, midRow + side / 2),
        minCol: Math.max(0, midCol - side / 2),
        maxCol: Math.min(this.extent.max_col, midCol + side / 2),
      };
    }
    const windowKey = `${win.minRow}:${win.maxRow}:${win.minCol}:${win.maxCol}`;
    if (this.fetched.has(windowKey)) return;
    this.fetched.add(windowKey);
    try {
      const rows = await this.api.patches(win.minRow, win.maxRow, win.minCol, win.maxCol);
      for (const p of rows) {
        this.patches.set(this.key(p.grid_row, p.grid_col), p);
        this.patchById.set(p.id, p);
      }
      this.invalidate();
    } catch {
      this.fetched.delete(windowKey); // retry on the next render
    }
  }

  private tileFor(id: number): HTMLImageElement | null {
    const hit = this.tiles.get(id);
    if (hit instanceof HTMLImageElement) return hit.complete ? hit : null;
    if (hit === "loading") return null;
    this.tiles.set(id, "loading");
    this.tileQueue.push(id);
    this.pumpTiles();
    return null;
  }

  private pumpTiles(): void {
    while (this.inflightTiles < MAX_INFLIGHT_TILES && this.tileQueue.length > 0) {
      const id = this.tileQueue.shift()!;
      const img = new Image();
      this.inflightTiles++;
      img.onload = () => {
        this.inflightTiles--;
        this.tiles.set(id, img);
        this.invalidate();
        this.pumpTiles();
      };
      img.onerror = () => {
        this.inflightTiles--;
        this.pumpTiles();
      };
      img.src = this.api.patchUrl(id);
    }
  }

  // ---- rendering ---------------------------------------------------------

  render(): void {
    const { ctx, canvas, view } = this;
    ctx.fillStyle = "#11151c";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    void this.ensureVisiblePatches();

    const win = view.visibleCells(
      canvas.width,
      canvas.height,
      this.extent.max_row,
      this.extent.max_col,
    );
    const scale = view.scale;
    for (let row = win.minRow; row <= win.maxRow; row++) {
      for (let col = win.minCol; col <= win.maxCol; col++) {
        const info = this.patches.get(this.key(row, col));
        if (!info) continue;
        const { x, y } = view.worldToScreen(col, row);
        if (scale >= TILE_MIN_SCALE) {
          const tile = this.tileFor(info.id);
          if (tile) {
            ctx.drawImage(tile, x, y, scale, scale);
          } else {
            ctx.fillStyle = "#222a35";
            ctx.fillRect(x, y, scale - 1, scale - 1);
          }
        } else {
          ctx.fillStyle = "#1a2029";
          ctx.fillRect(x, y, Math.max(1, scale - 1), Math.max(1, scale - 1));
        }
        const fill = patchColor(
          this.labels.positives.has(info.id),
          this.labels.negatives.has(info.id),
          this.results.has(info.id),
        );
        if (fill) {
          ctx.globalAlpha = 0.45;
          ctx.fillStyle = fill;
          ctx.fillRect(x, y, scale, scale);
          ctx.globalAlpha = 1.0;
          ctx.strokeStyle = fill;
          ctx.lineWidth = 2;
          ctx.strokeRect(x + 1, y + 1, scale - 2, scale - 2);
        }
      }
    }

    if (scale >= GRID_MIN_SCALE) this.drawGrid(win);
    if (this.labels.cursor !== null) this.drawCursor(this.labels.cursor);
    if (this.rubber) {
      const r = this.rubber;
      ctx.strokeStyle = "#7fd1ff";
      ctx.setLineDash([6, 4]);
      ctx.lineWidth = 1.5;
      ctx.strokeRect(
        Math.min(r.x0, r.x1),
        Math.min(r.y0, r.y1),
        Math.abs(r.x1 - r.x0),
        Math.abs(r.y1 - r.y0),
      );
      ctx.setLineDash([]);
    }
  }

  private drawGrid(win: { minRow: number; maxRow: number; minCol: number; maxCol: number }): void {
    const { ctx, view } = this;
    ctx.strokeStyle = "rgba(120, 135, 160, 0.25)";
    ctx.lineWidth = 1;
    ctx.beginPath();
    for (let row = win.minRow; row <= win.maxRow + 1; row++) {
      const a = view.worldToScreen(win.minCol, row);
      const b = view.worldToScreen(win.maxCol + 1, row);
      ctx.moveTo(a.x, a.y);
      ctx.lineTo(b.x, b.y);
    }
    for (let col = win.minCol; col <= win.maxCol + 1; col++) {
      const a = view.worldToScreen(col, win.minRow);
      const b = view.worldToScreen(col, win.maxRow + 1);
      ctx.moveTo(a.x, a.y);
      ctx.lineTo(b.x, b.y);
    }
    ctx.stroke();
  }

  private drawCursor(id: number): void {
    const info = this.patchById.get(id);
    if (!info) return;
    const { x, y } = this.view.worldToScreen(info.grid_col, info.grid_row);
    this.ctx.strokeStyle = COLOR_CURSOR;
    this.ctx.lineWidth = 2.5;
    this.ctx.strokeRect(x + 1, y + 1, this.view.scale - 2, this.view.scale - 2);
  }

  // ---- interaction -------------------------------------------------------

  private patchAt(x: number, y: number): PatchInfo | null {
    const cell = this.view.cellAt(x, y);
    return this.patches.get(this.key(cell.row, cell.col)) ?? null;
  }

  private bindEvents(): void {
    const pos = (ev: MouseEvent) => {
      const rect = this.canvas.getBoundingClientRect();
      return { x: ev.clientX - rect.left, y: ev.clientY - rect.top };
    };

    this.canvas.addEventListener("contextmenu", (ev) => ev.preventDefault());

    this.canvas.addEventListener("mousedown", (ev) => {
      const { x, y } = pos(ev);
      this.dragStart = { x, y };
      this.dragging = false;
      if (ev.button === 0 && this.areaSelectMode) {
        this.rubber = { x0: x, y0: y, x1: x, y1: y };
      }
    });

    this.canvas.addEventListener("mousemove", (ev) => {
      const { x, y } = pos(ev);
      if (this.dragStart && this.rubber) {
        this.rubber.x1 = x;
        this.rubber.y1 = y;
        this.invalidate();
        return;
      }
      if (this.dragStart && (ev.buttons & 1) !== 0) {
        const dx = x - this.dragStart.x;
        const dy = y - this.dragStart.y;
        if (this.dragging || Math.hypot(dx, dy) > DRAG_THRESHOLD) {
          this.dragging = true;
          this.view.panBy(dx, dy);
          this.dragStart = { x, y };
          this.invalidate();
        }
        return;
      }
      const info = this.patchAt(x, y);
      const id = info ? info.id : null;
      if (id !== this.labels.cursor) {
        this.labels.cursor = id;
        this.callbacks.onCursor(id);
        this.invalidate();
      }
    });

    this.canvas.addEventListener("mouseup", (ev) => {
      const { x, y } = pos(ev);
      if (this.rubber) {
        const r = this.rubber;
        this.rubber = null;
        this.dragStart = null;
        const cells = cellsInRect(
          this.view, r.x0, r.y0, r.x1, r.y1, this.extent.max_row, this.extent.max_col,
        );
        const ids: number[] = [];
        for (const cell of cells) {
          const info = this.patches.get(this.key(cell.row, cell.col));
          if (info) ids.push(info.id);
        }
        if (ids.length > 0) this.callbacks.onAreaSelect(ids);
        this.invalidate();
        return;
      }
      const wasDragging = this.dragging;
      this.dragStart = null;
      this.dragging = false;
      if (wasDragging) return;
      const info = this.patchAt(x, y);
      if (!info) return;
      if (ev.button === 0) this.callbacks.onLabel(info.id, "left");
      if (ev.button === 2) this.callbacks.onLabel(info.id, "right");
      this.invalidate();
    });

    this.canvas.addEventListener("mouseleave", () => {
      this.dragStart = null;
      this.dragging = false;
      this.rubber = null;
      if (this.labels.cursor !== null) {
        this.labels.cursor = null;
        this.callbacks.onCursor(null);
        this.invalidate();
      }
    });

    this.canvas.addEventListener("wheel", (ev) => {
      ev.preventDefault();
      const { x, y } = pos(ev);
      this.view.zoomAt(x, y, ev.deltaY < 0 ? 1.2 : 1 / 1.2);
      this.invalidate();
    });
  }
}
