import { describe, expect, it } from "vitest";

import { LabelState } from "../src/labels.js";

describe("label toggling", () => {
  it("left click marks positive, repeat click unlabels", () => {
    const s = new LabelState();
    s.labelPatch(7, "left");
    expect(s.positives.has(7)).toBe(true);
    s.labelPatch(7, "left");
    expect(s.positives.has(7)).toBe(false);
    expect(s.negatives.has(7)).toBe(false);
  });

  it("right click on a positive moves it to negatives", () => {
    const s = new LabelState();
    s.labelPatch(3, "left");
    s.labelPatch(3, "right");
    expect(s.positives.has(3)).toBe(false);
    expect(s.negatives.has(3)).toBe(true);
  });

  it("left click on a negative moves it to positives", () => {
    const s = new LabelState();
    s.labelPatch(3, "right");
    s.labelPatch(3, "left");
    expect(s.negatives.has(3)).toBe(false);
    expect(s.positives.has(3)).toBe(true);
  });

  it("stays disjoint under random click sequences", () => {
    const s = new LabelState();
    let seed = 42;
    const rand = () => (seed = (seed * 1103515245 + 12345) % 2 ** 31) / 2 ** 31;
    for (let i = 0; i < 2000; i++) {
      const id = Math.floor(rand() * 30);
      s.labelPatch(id, rand() < 0.5 ? "left" : "right");
      expect(s.isDisjoint()).toBe(true);
    }
  });

  it("area select marks negatives and demotes positives", () => {
    const s = new LabelState();
    s.labelPatch(1, "left");
    s.labelPatch(2, "left");
    s.areaSelect([2, 3, 4]);
    expect([...s.positives]).toEqual([1]);
    expect([...s.negatives].sort()).toEqual([2, 3, 4]);
    expect(s.isDisjoint()).toBe(true);
  });

  it("area select on nothing changes nothing", () => {
    const s = new LabelState();
    s.labelPatch(1, "left");
    s.areaSelect([]);
    expect(s.positives.size).toBe(1);
    expect(s.negatives.size).toBe(0);
  });

  it("reset clears both sets", () => {
    const s = new LabelState();
    s.labelPatch(1, "left");
    s.labelPatch(2, "right");
    s.reset();
    expect(s.positives.size).toBe(0);
    expect(s.negatives.size).toBe(0);
  });
});
