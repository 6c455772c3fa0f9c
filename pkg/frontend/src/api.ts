/** Thin typed client over the backend JSON/HTTP contract. */

import type { InpaintRequestBody, ServiceStatus, SessionPayload } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parseOrThrow<T>(res: Response): Promise<T> {
  if (!res.ok) {
    let detail = res.statusText;
    try {
      const body = await res.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(res.status, detail);
  }
  return (await res.json()) as T;
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  status(): Promise<ServiceStatus> {
    return this.fetchImpl(`${this.base}/status`).then((r) => parseOrThrow<ServiceStatus>(r));
  }

  sample(pitch: number, instrument: number, seed?: number): Promise<SessionPayload> {
    return this.fetchImpl(`${this.base}/sessions/sample`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(seed === undefined ? { pitch, instrument } : { pitch, instrument, seed }),
    }).then((r) => parseOrThrow<SessionPayload>(r));
  }

  analyze(file: Blob, pitch: number, instrument: number): Promise<SessionPayload> {
    const form = new FormData();
    form.append("file", file, "upload.wav");
    const params = new URLSearchParams({ pitch: String(pitch), instrument: String(instrument) });
    return this.fetchImpl(`${this.base}/sessions/analyze?${params}`, {
      method: "POST",
      body: form,
    }).then((r) => parseOrThrow<SessionPayload>(r));
  }

  inpaint(sessionId: string, body: InpaintRequestBody): Promise<SessionPayload> {
    return this.fetchImpl(`${this.base}/sessions/${sessionId}/inpaint`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    }).then((r) => parseOrThrow<SessionPayload>(r));
  }

  /** Cache-busted so replayed sessions fetch fresh audio. */
  audioUrl(sessionId: string, revision: number): string {
    return `${this.base}/sessions/${sessionId}/audio?rev=${revision}`;
  }

  async delete(sessionId: string): Promise<void> {
    const res = await this.fetchImpl(`${this.base}/sessions/${sessionId}`, { method: "DELETE" });
    if (!res.ok) throw new ApiError(res.status, res.statusText);
  }
}
