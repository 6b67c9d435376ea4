// The map legend: label state x result state -> rectangle color.

export const COLOR_POSITIVE = "#e53935"; // red: positive selected
export const COLOR_NEGATIVE = "#1e63d0"; // blue: negative selected
export const COLOR_CURSOR = "#fb8c00"; // orange: cursor location
export const COLOR_RESULT = "#fdd835"; // yellow: result
export const COLOR_RESULT_SELECTED = "#43a047"; // green: result + selected

/** Fill color for a patch, or null when unlabeled and not a result.
 * The cursor renders as an outline on top and does not change the fill. */
export function patchColor(
  isPositive: boolean,
  isNegative: boolean,
  isResult: boolean,
): string | null {
  if (isResult && (isPositive || isNegative)) return COLOR_RESULT_SELECTED;
  if (isResult) return COLOR_RESULT;
  if (isPositive) return COLOR_POSITIVE;
  if (isNegative) return COLOR_NEGATIVE;
  return null;
}
