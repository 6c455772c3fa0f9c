/** UI session state and its transitions, kept pure for testability.
 *
 * One in-flight mutation per session: beginMutation() refuses while busy,
 * mirroring the backend's 409 contract. 4xx/5xx responses surface as a
 * dismissible banner; a stale-session 404 clears the session so the user
 * can sample a fresh sound.
 */

import type { GridSelection, GridShape, Level, ServiceStatus, SessionPayload } from "./types.js";

export interface UiSessionState {
  sessionId: string | null;
  spectrogram: number[][] | null;
  top: number[][] | null;
  bottom: number[][] | null;
  topShape: GridShape | null;
  bottomShape: GridShape | null;
  pitchRange: [number, number];
  families: string[];
  level: Level;
  pitch: number;
  instrument: number;
  selection: GridSelection | null;
  busy: boolean;
  banner: string | null;
  staleSession: boolean;
  revision: number;
}

export function initialState(): UiSessionState {
  return {
    sessionId: null,
    spectrogram: null,
    top: null,
    bottom: null,
    topShape: null,
    bottomShape: null,
    pitchRange: [24, 84],
    families: [],
    level: "top",
    pitch: 60,
    instrument: 0,
    selection: null,
    busy: false,
    banner: null,
    staleSession: false,
    revision: 0,
  };
}

export function applyStatus(state: UiSessionState, status: ServiceStatus): UiSessionState {
  return {
    ...state,
    topShape: { bands: status.top_shape[0], frames: status.top_shape[1] },
    bottomShape: { bands: status.bottom_shape[0], frames: status.bottom_shape[1] },
    pitchRange: status.pitch_range,
    families: status.families,
    pitch: Math.min(Math.max(state.pitch, status.pitch_range[0]), status.pitch_range[1]),
  };
}

export function applySession(state: UiSessionState, payload: SessionPayload): UiSessionState {
  return {
    ...state,
    sessionId: payload.session_id,
    spectrogram: payload.spectrogram,
    top: payload.top,
    bottom: payload.bottom,
    selection: null,
    busy: false,
    banner: null,
    staleSession: false,
    revision: state.revision + 1,
  };
}

/** The overlay always shows the active level's codemap geometry. */
export function overlayShape(state: UiSessionState): GridShape | null {
  return state.level === "top" ? state.topShape : state.bottomShape;
}

/** Returns the busy state to render, or null when a mutation is already
 * in flight (the caller must not send a request). */
export function beginMutation(state: UiSessionState): UiSessionState | null {
  if (state.busy) return null;
  return { ...state, busy: true, banner: null };
}

export function failRequest(state: UiSessionState, status: number, detail: string): UiSessionState {
  const stale = status === 404;
  return {
    ...state,
    busy: false,
    banner: `request failed (${status}): ${detail}`,
    staleSession: stale,
    sessionId: stale ? null : state.sessionId,
  };
}

export function dismissBanner(state: UiSessionState): UiSessionState {
  return { ...state, banner: null };
}

export function setLevel(state: UiSessionState, level: Level): UiSessionState {
  return { ...state, level, selection: null };
}

export function setSelection(state: UiSessionState, selection: GridSelection | null): UiSessionState {
  return { ...state, selection };
}

export function setLabels(state: UiSessionState, pitch: number, instrument: number): UiSessionState {
  return { ...state, pitch, instrument };
}
