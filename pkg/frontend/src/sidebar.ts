// Results sidebar: thumbnails in response order (the service already
// sorts by confidence), lazy-loaded as entries scroll into view.

import type { ApiClient } from "./api.js";
import type { QueryStats, ResultRow } from "./types.js";

/** Sidebar order is exactly the response order; no client-side re-sort. */
export function sidebarOrder(results: ResultRow[]): ResultRow[] {
  return results;
}

export function statsLine(stats: QueryStats): string {
  return `${stats.n_results} objects in ${stats.total_ms.toFixed(0)} ms`;
}

export class Sidebar {
  private observer: IntersectionObserver | null = null;

  constructor(
    private listEl: HTMLElement,
    private statsEl: HTMLElement,
    private api: ApiClient,
    private onFocus: (row: ResultRow) => void,
  ) {}

  clear(): void {
    this.observer?.disconnect();
    this.observer = null;
    this.listEl.replaceChildren();
    this.statsEl.textContent = "";
  }

  render(results: ResultRow[], stats: QueryStats): void {
    this.clear();
    this.statsEl.textContent = statsLine(stats);
    this.observer = new IntersectionObserver((entries) => {
      for (const entry of entries) {
        if (!entry.isIntersecting) continue;
        const img = entry.target as HTMLImageElement;
        const src = img.dataset.src;
        if (src) {
          img.src = src;
          delete img.dataset.src;
        }
        this.observer?.unobserve(img);
      }
    });
    for (const row of sidebarOrder(results)) {
      const item = document.createElement("div");
      item.className = "result" + (row.in_training ? " training" : "");
      const img = document.createElement("img");
      img.width = 64;
      img.height = 64;
      img.dataset.src = this.api.patchUrl(row.id);
      img.alt = `patch ${row.id}`;
      const label = document.createElement("div");
      label.className = "result-meta";
      label.textContent = `#${row.id} · confidence ${row.confidence}`;
      item.append(img, label);
      item.addEventListener("click", () => this.onFocus(row));
      this.listEl.appendChild(item);
      this.observer.observe(img);
    }
  }
}
