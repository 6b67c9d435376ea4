// Label bookkeeping: positive/negative sets stay disjoint, clicks toggle.

export type MouseButton = "left" | "right";

export class LabelState {
  positives = new Set<number>();
  negatives = new Set<number>();
  cursor: number | null = null;

  /** Left click marks positive, right click negative; the sets stay
   * disjoint and a repeat click removes the label. */
  labelPatch(id: number, button: MouseButton): void {
    const target = button === "left" ? this.positives : this.negatives;
    const other = button === "left" ? this.negatives : this.positives;
    if (target.has(id)) {
      target.delete(id);
      return;
    }
    other.delete(id);
    target.add(id);
  }

  /** Area selection labels every given patch negative, demoting any
   * positives caught in the rectangle. */
  areaSelect(ids: Iterable<number>): void {
    for (const id of ids) {
      this.positives.delete(id);
      this.negatives.add(id);
    }
  }

  reset(): void {
    this.positives.clear();
    this.negatives.clear();
  }

  isDisjoint(): boolean {
    for (const id of this.positives) {
      if (this.negatives.has(id)) return false;
    }
    return true;
  }
}
