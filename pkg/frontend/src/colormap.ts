/** Monotone log-amplitude -> color mapping (dark blue to bright yellow). */

export function matrixRange(matrix: number[][]): { lo: number; hi: number } {
  let lo = Infinity;
  let hi = -Infinity;
  for (const row of matrix) {
    for (const v of row) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  return hi > lo ? { lo, hi } : { lo, hi: lo + 1 };
}

/** Normalized value in [0, 1] -> RGB; every channel is nondecreasing, so
 * perceived brightness rises monotonically with log-amplitude. */
export function heat(u: number): [number, number, number] {
  const v = Math.min(1, Math.max(0, u));
  const r = Math.round(255 * Math.min(1, 1.6 * v));
  const g = Math.round(255 * Math.min(1, Math.max(0, 1.6 * v - 0.35)));
  const b = Math.round(255 * Math.max(0, (v - 0.65) / 0.35) * 0.9);
  return [r, g, b];
}
