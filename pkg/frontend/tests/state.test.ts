import { describe, expect, it } from "vitest";

import {
  applySession,
  applyStatus,
  beginMutation,
  dismissBanner,
  failRequest,
  initialState,
  overlayShape,
  setLevel,
} from "../src/state.js";
import type { ServiceStatus, SessionPayload } from "../src/types.js";

const STATUS: ServiceStatus = {
  top_shape: [8, 2],
  bottom_shape: [16, 4],
  codebook_size: 64,
  pitch_range: [24, 84],
  families: ["brassy", "noisy", "plucked", "sustained"],
  model_version: "1",
};

const PAYLOAD: SessionPayload = {
  session_id: "abc",
  top: [[1, 2]],
  bottom: [[3, 4]],
  spectrogram: [[0.1, 0.2]],
  pitch: 60,
  instrument: 1,
};

describe("status handling", () => {
  it("overlay dims equal the advertised codemap shapes", () => {
    let state = applyStatus(initialState(), STATUS);
    expect(overlayShape(state)).toEqual({ bands: 8, frames: 2 }); // default level: top
    state = setLevel(state, "bottom");
    expect(overlayShape(state)).toEqual({ bands: 16, frames: 4 });
  });

  it("populates the label vocabularies verbatim", () => {
    const state = applyStatus(initialState(), STATUS);
    expect(state.families).toEqual(STATUS.families);
    expect(state.pitchRange).toEqual([24, 84]);
  });
});

describe("busy-state blocking", () => {
  it("refuses a second mutation while one is in flight", () => {
    const state = beginMutation(initialState());
    expect(state).not.toBeNull();
    expect(state!.busy).toBe(true);
    expect(beginMutation(state!)).toBeNull();
  });

  it("clears busy when a session payload lands", () => {
    const busy = beginMutation(initialState())!;
    const after = applySession(busy, PAYLOAD);
    expect(after.busy).toBe(false);
    expect(after.sessionId).toBe("abc");
    expect(beginMutation(after)).not.toBeNull();
  });

  it("clears busy on failure too", () => {
    const busy = beginMutation(initialState())!;
    const after = failRequest(busy, 400, "bad region");
    expect(after.busy).toBe(false);
  });
});

describe("error banners", () => {
  it("4xx responses surface as a dismissible banner", () => {
    const state = failRequest(initialState(), 400, "region exceeds top grid");
    expect(state.banner).toContain("400");
    expect(state.banner).toContain("region exceeds top grid");
    expect(dismissBanner(state).banner).toBeNull();
  });

  it("a stale-session 404 clears the session and offers a fresh start", () => {
    const withSession = applySession(initialState(), PAYLOAD);
    const state = failRequest(withSession, 404, "unknown session");
    expect(state.staleSession).toBe(true);
    expect(state.sessionId).toBeNull();
  });

  it("non-404 failures keep the session", () => {
    const withSession = applySession(initialState(), PAYLOAD);
    const state = failRequest(withSession, 409, "busy");
    expect(state.sessionId).toBe("abc");
    expect(state.staleSession).toBe(false);
  });
});

describe("session payloads", () => {
  it("stores backend matrices unmodified", () => {
    const state = applySession(initialState(), PAYLOAD);
    expect(state.spectrogram).toBe(PAYLOAD.spectrogram);
    expect(state.top).toBe(PAYLOAD.top);
    expect(state.bottom).toBe(PAYLOAD.bottom);
  });

  it("bumps the audio revision on every new payload", () => {
    let state = applySession(initialState(), PAYLOAD);
    const first = state.revision;
    state = applySession(state, PAYLOAD);
    expect(state.revision).toBe(first + 1);
  });

  it("level toggle resets the selection", () => {
    let state = applySession(initialState(), PAYLOAD);
    state = {
      ...state,
      selection: { level: "top", rect: { freqStart: 0, freqEnd: 1, timeStart: 0, timeEnd: 1 }, pending: false },
    };
    expect(setLevel(state, "bottom").selection).toBeNull();
  });
});
