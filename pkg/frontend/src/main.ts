/** DOM wiring: one canvas, label controls, upload/sample/playback. */

import { ApiClient, ApiError } from "./api.js";
import { dragToRect, rectInsideGrid, selectionToRequest } from "./grid.js";
import { drawGrid, drawSelection, drawSpectrogram } from "./render.js";
import {
  applySession,
  applyStatus,
  beginMutation,
  dismissBanner,
  failRequest,
  initialState,
  overlayShape,
  setLabels,
  setLevel,
  setSelection,
  type UiSessionState,
} from "./state.js";
import type { Level } from "./types.js";

const api = new ApiClient("");
let state: UiSessionState = initialState();

const canvas = document.getElementById("spectrogram") as HTMLCanvasElement;
const ctx = canvas.getContext("2d") as CanvasRenderingContext2D;
const banner = document.getElementById("banner") as HTMLDivElement;
const pitchSelect = document.getElementById("pitch") as HTMLSelectElement;
const instrumentSelect = document.getElementById("instrument") as HTMLSelectElement;
const levelSelect = document.getElementById("level") as HTMLSelectElement;
const sampleButton = document.getElementById("sample") as HTMLButtonElement;
const uploadInput = document.getElementById("upload") as HTMLInputElement;
const player = document.getElementById("player") as HTMLAudioElement;
const busyIndicator = document.getElementById("busy") as HTMLSpanElement;

function setState(next: UiSessionState): void {
  state = next;
  redraw();
}

function redraw(): void {
  busyIndicator.style.visibility = state.busy ? "visible" : "hidden";
  banner.style.display = state.banner ? "block" : "none";
  banner.textContent = state.banner ?? "";
  if (state.spectrogram) drawSpectrogram(ctx, state.spectrogram);
  const shape = overlayShape(state);
  if (shape) drawGrid(ctx, shape);
  if (state.selection && shape) drawSelection(ctx, state.selection.rect, shape, state.selection.pending);
  if (state.sessionId && !state.busy) {
    player.src = api.audioUrl(state.sessionId, state.revision);
  }
}

function fail(err: unknown): void {
  const status = err instanceof ApiError ? err.status : 0;
  const detail = err instanceof Error ? err.message : String(err);
  setState(failRequest(state, status, detail));
}

async function refreshStatus(): Promise<void> {
  const status = await api.status();
  setState(applyStatus(state, status));
  pitchSelect.replaceChildren(
    ...Array.from({ length: status.pitch_range[1] - status.pitch_range[0] + 1 }, (_, i) => {
      const option = document.createElement("option");
      option.value = String(status.pitch_range[0] + i);
      option.textContent = `MIDI ${status.pitch_range[0] + i}`;
      return option;
    }),
  );
  pitchSelect.value = String(state.pitch);
  instrumentSelect.replaceChildren(
    ...status.families.map((name, i) => {
      const option = document.createElement("option");
      option.value = String(i);
      option.textContent = name;
      return option;
    }),
  );
}

async function run(action: () => Promise<void>): Promise<void> {
  const started = beginMutation(state);
  if (started === null) return; // one in-flight mutation per session
  setState(started);
  try {
    await action();
  } catch (err) {
    fail(err);
  }
}

sampleButton.addEventListener("click", () =>
  run(async () => {
    const payload = await api.sample(state.pitch, state.instrument);
    setState(applySession(state, payload));
  }),
);

uploadInput.addEventListener("change", () => {
  const file = uploadInput.files?.[0];
  if (!file) return;
  run(async () => {
    const payload = await api.analyze(file, state.pitch, state.instrument);
    setState(applySession(state, payload));
  });
});

document.body.addEventListener("dragover", (e) => e.preventDefault());
document.body.addEventListener("drop", (e) => {
  e.preventDefault();
  const file = e.dataTransfer?.files?.[0];
  if (!file) return;
  run(async () => {
    const payload = await api.analyze(file, state.pitch, state.instrument);
    setState(applySession(state, payload));
  });
});

levelSelect.addEventListener("change", () => setState(setLevel(state, levelSelect.value as Level)));
pitchSelect.addEventListener("change", () =>
  setState(setLabels(state, Number(pitchSelect.value), state.instrument)),
);
instrumentSelect.addEventListener("change", () =>
  setState(setLabels(state, state.pitch, Number(instrumentSelect.value))),
);
banner.addEventListener("click", () => setState(dismissBanner(state)));

let dragStart: { x: number; y: number } | null = null;

canvas.addEventListener("mousedown", (e) => {
  if (!state.sessionId || state.busy) return;
  dragStart = { x: e.offsetX, y: e.offsetY };
});

canvas.addEventListener("mousemove", (e) => {
  const shape = overlayShape(state);
  if (!dragStart || !shape) return;
  const rect = dragToRect(dragStart.x, dragStart.y, e.offsetX, e.offsetY, canvas.width, canvas.height, shape);
  setState(setSelection(state, { level: state.level, rect, pending: false }));
});

canvas.addEventListener("mouseup", (e) => {
  const shape = overlayShape(state);
  if (!dragStart || !shape || !state.sessionId) return;
  const rect = dragToRect(dragStart.x, dragStart.y, e.offsetX, e.offsetY, canvas.width, canvas.height, shape);
  dragStart = null;
  if (!rectInsideGrid(rect, shape)) return;
  const sessionId = state.sessionId;
  const body = selectionToRequest(state.level, rect, state.pitch, state.instrument);
  run(async () => {
    setState(setSelection(state, { level: state.level, rect, pending: true }));
    const payload = await api.inpaint(sessionId, body);
    setState(applySession(state, payload));
  });
});

refreshStatus().catch(fail);
