/** Canvas painting: spectrogram image, grid overlay, selection highlight.
 *
 * The matrix arrives row-major with frequency-ascending rows; pixel row 0
 * is the top of the canvas, so matrix row (bands-1) paints first.
 */

import { heat, matrixRange } from "./colormap.js";
import { overlayLines, rectToPixels } from "./grid.js";
import type { CellRect, GridShape } from "./types.js";

/** Matrix row painted at a given pixel row: frequency ascends upward, so
 * pixel row 0 (canvas top) shows the last (highest) matrix row. */
export function sourceRowForPixelRow(pixelRow: number, bands: number): number {
  return bands - 1 - pixelRow;
}

export function drawSpectrogram(ctx: CanvasRenderingContext2D, matrix: number[][]): void {
  const bands = matrix.length;
  const frames = matrix[0]?.length ?? 0;
  const { width, height } = ctx.canvas;
  if (!bands || !frames) {
    ctx.fillStyle = "#222";
    ctx.fillRect(0, 0, width, height);
    return;
  }
  const { lo, hi } = matrixRange(matrix);
  const image = ctx.createImageData(frames, bands);
  for (let f = 0; f < bands; f++) {
    const row = matrix[sourceRowForPixelRow(f, bands)];
    for (let t = 0; t < frames; t++) {
      const [r, g, b] = heat((row[t] - lo) / (hi - lo));
      const o = 4 * (f * frames + t);
      image.data[o] = r;
      image.data[o + 1] = g;
      image.data[o + 2] = b;
      image.data[o + 3] = 255;
    }
  }
  // paint at matrix resolution, then scale up without smoothing
  const off = new OffscreenCanvas(frames, bands);
  const offCtx = off.getContext("2d") as OffscreenCanvasRenderingContext2D;
  offCtx.putImageData(image, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, width, height);
}

export function drawGrid(ctx: CanvasRenderingContext2D, shape: GridShape): void {
  const { width, height } = ctx.canvas;
  const { xs, ys } = overlayLines(shape, width, height);
  ctx.strokeStyle = "rgba(255,255,255,0.35)";
  ctx.lineWidth = 1;
  ctx.beginPath();
  for (const x of xs) {
    ctx.moveTo(x, 0);
    ctx.lineTo(x, height);
  }
  for (const y of ys) {
    ctx.moveTo(0, y);
    ctx.lineTo(width, y);
  }
  ctx.stroke();
}

export function drawSelection(
  ctx: CanvasRenderingContext2D,
  rect: CellRect,
  shape: GridShape,
  pending: boolean,
): void {
  const { x, y, w, h } = rectToPixels(rect, ctx.canvas.width, ctx.canvas.height, shape);
  ctx.fillStyle = pending ? "rgba(255,170,0,0.35)" : "rgba(80,170,255,0.30)";
  ctx.fillRect(x, y, w, h);
  ctx.strokeStyle = pending ? "#ffaa00" : "#50aaff";
  ctx.lineWidth = 2;
  ctx.strokeRect(x, y, w, h);
}
