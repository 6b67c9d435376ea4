// Pan/zoom transform between grid coordinates (one cell per patch) and
// screen pixels.

export class Viewport {
  scale = 32; // pixels per grid cell
  offsetX = 0; // screen position of grid (0, 0)
  offsetY = 0;

  constructor(
    public minScale = 2,
    public maxScale = 256,
  ) {}

  worldToScreen(col: number, row: number): { x: number; y: number } {
    return { x: col * this.scale + this.offsetX, y: row * this.scale + this.offsetY };
  }

  screenToWorld(x: number, y: number): { col: number; row: number } {
    return { col: (x - this.offsetX) / this.scale, row: (y - this.offsetY) / this.scale };
  }

  /** Grid cell under a screen point. */
  cellAt(x: number, y: number): { col: number; row: number } {
    const w = this.screenToWorld(x, y);
    return { col: Math.floor(w.col), row: Math.floor(w.row) };
  }

  panBy(dx: number, dy: number): void {
    this.offsetX += dx;
    this.offsetY += dy;
  }

  /** Zoom by a factor keeping the screen point (px, py) fixed. */
  zoomAt(px: number, py: number, factor: number): void {
    const next = Math.min(this.maxScale, Math.max(this.minScale, this.scale * factor));
    const actual = next / this.scale;
    if (actual === 1) return;
    this.offsetX = px - (px - this.offsetX) * actual;
    this.offsetY = py - (py - this.offsetY) * actual;
    this.scale = next;
  }

  centerOn(col: number, row: number, width: number, height: number): void {
    this.offsetX = width / 2 - (col + 0.5) * this.scale;
    this.offsetY = height / 2 - (row + 0.5) * this.scale;
  }

  /** Visible cell window (inclusive bounds), clamped to the grid extent. */
  visibleCells(
    width: number,
    height: number,
    maxRow: number,
    maxCol: number,
  ): { minRow: number; maxRow: number; minCol: number; maxCol: number } {
    const tl = this.screenToWorld(0, 0);
    const br = this.screenToWorld(width, height);
    return {
      minRow: Math.max(0, Math.floor(tl.row)),
      maxRow: Math.min(maxRow, Math.ceil(br.row)),
      minCol: Math.max(0, Math.floor(tl.col)),
      maxCol: Math.min(maxCol, Math.ceil(br.col)),
    };
  }
}

/** Cells intersecting a screen-space rectangle (for area selection). */
export function cellsInRect(
  view: Viewport,
  x0: number,
  y0: number,
  x1: number,
  y1: number,
  maxRow: number,
  maxCol: number,
): { row: number; col: number }[] {
  const a = view.screenToWorld(Math.min(x0, x1), Math.min(y0, y1));
  const b = view.screenToWorld(Math.max(x0, x1), Math.max(y0, y1));
  const cells: { row: number; col: number }[] = [];
  const rowLo = Math.max(0, Math.floor(a.row));
  const rowHi = Math.min(maxRow, Math.floor(b.row));
  const colLo = Math.max(0, Math.floor(a.col));
  const colHi = Math.min(maxCol, Math.floor(b.col));
  for (let row = rowLo; row <= rowHi; row++) {
    for (let col = colLo; col <= colHi; col++) {
      cells.push({ row, col });
    }
  }
  return cells;
}
