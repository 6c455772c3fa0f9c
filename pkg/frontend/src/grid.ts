/** Pure coordinate logic between canvas pixels, grid cells and requests.
 *
 * Convention: frequency ascends UPWARD on screen, so pixel row 0 (the
 * canvas top) is the highest band; cell (f, t) covers an equal-sized
 * tile of the canvas. All rectangles are end-exclusive in grid space.
 */

import type { CellRect, GridShape, InpaintRequestBody, Level } from "./types.js";

const clamp = (v: number, lo: number, hi: number) => Math.min(hi, Math.max(lo, v));

/** Cell under a canvas pixel. */
export function pixelToCell(
  x: number,
  y: number,
  width: number,
  height: number,
  shape: GridShape,
): { f: number; t: number } {
  const t = clamp(Math.floor((x / width) * shape.frames), 0, shape.frames - 1);
  const rowFromTop = clamp(Math.floor((y / height) * shape.bands), 0, shape.bands - 1);
  return { f: shape.bands - 1 - rowFromTop, t };
}

/** Normalize a drag between two cells into an inclusive->exclusive rect. */
export function cellsToRect(a: { f: number; t: number }, b: { f: number; t: number }): CellRect {
  return {
    freqStart: Math.min(a.f, b.f),
    freqEnd: Math.max(a.f, b.f) + 1,
    timeStart: Math.min(a.t, b.t),
    timeEnd: Math.max(a.t, b.t) + 1,
  };
}

export function dragToRect(
  x0: number,
  y0: number,
  x1: number,
  y1: number,
  width: number,
  height: number,
  shape: GridShape,
): CellRect {
  return cellsToRect(pixelToCell(x0, y0, width, height, shape), pixelToCell(x1, y1, width, height, shape));
}

/** The selection goes onto the wire verbatim: same cells, same bounds. */
export function selectionToRequest(
  level: Level,
  rect: CellRect,
  pitch: number,
  instrument: number,
  seed?: number,
): InpaintRequestBody {
  const body: InpaintRequestBody = {
    level,
    freq_start: rect.freqStart,
    freq_end: rect.freqEnd,
    time_start: rect.timeStart,
    time_end: rect.timeEnd,
    pitch,
    instrument,
  };
  if (seed !== undefined) body.seed = seed;
  return body;
}

export function rectInsideGrid(rect: CellRect, shape: GridShape): boolean {
  return (
    rect.freqStart >= 0 &&
    rect.timeStart >= 0 &&
    rect.freqStart < rect.freqEnd &&
    rect.timeStart < rect.timeEnd &&
    rect.freqEnd <= shape.bands &&
    rect.timeEnd <= shape.frames
  );
}

/** Pixel edges of the grid overlay lines for a canvas of width x height. */
export function overlayLines(shape: GridShape, width: number, height: number): { xs: number[]; ys: number[] } {
  const xs = Array.from({ length: shape.frames + 1 }, (_, i) => (i * width) / shape.frames);
  const ys = Array.from({ length: shape.bands + 1 }, (_, i) => (i * height) / shape.bands);
  return { xs, ys };
}

/** Canvas rectangle (y measured from the top) covering a cell rect. */
export function rectToPixels(
  rect: CellRect,
  width: number,
  height: number,
  shape: GridShape,
): { x: number; y: number; w: number; h: number } {
  const cellW = width / shape.frames;
  const cellH = height / shape.bands;
  return {
    x: rect.timeStart * cellW,
    y: (shape.bands - rect.freqEnd) * cellH,
    w: (rect.timeEnd - rect.timeStart) * cellW,
    h: (rect.freqEnd - rect.freqStart) * cellH,
  };
}
