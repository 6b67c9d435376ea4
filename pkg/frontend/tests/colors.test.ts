import { describe, expect, it } from "vitest";

import {
  COLOR_CURSOR,
  COLOR_NEGATIVE,
  COLOR_POSITIVE,
  COLOR_RESULT,
  COLOR_RESULT_SELECTED,
  patchColor,
} from "../src/colors.js";

describe("legend colors", () => {
  it("covers the five legend states", () => {
    expect(patchColor(true, false, false)).toBe(COLOR_POSITIVE); // red
    expect(patchColor(false, true, false)).toBe(COLOR_NEGATIVE); // blue
    expect(patchColor(false, false, true)).toBe(COLOR_RESULT); // yellow
    expect(patchColor(true, false, true)).toBe(COLOR_RESULT_SELECTED); // green
    expect(COLOR_CURSOR).toMatch(/^#/); // orange outline color exists
  });

  it("a result that is also labeled renders green, result-only yellow", () => {
    expect(patchColor(true, false, true)).toBe(COLOR_RESULT_SELECTED);
    expect(patchColor(false, true, true)).toBe(COLOR_RESULT_SELECTED);
    expect(patchColor(false, false, true)).toBe(COLOR_RESULT);
  });

  it("unlabeled non-results have no fill", () => {
    expect(patchColor(false, false, false)).toBeNull();
  });

  it("is a pure function of its inputs", () => {
    for (const pos of [true, false]) {
      for (const neg of [true, false]) {
        for (const res of [true, false]) {
          expect(patchColor(pos, neg, res)).toBe(patchColor(pos, neg, res));
        }
      }
    }
  });
});
