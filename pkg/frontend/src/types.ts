/** Wire types mirroring the backend JSON contract. */

export type Level = "top" | "bottom";

export interface GridShape {
  bands: number; // frequency rows
  frames: number; // time columns
}

export interface ServiceStatus {
  top_shape: [number, number];
  bottom_shape: [number, number];
  codebook_size: number;
  pitch_range: [number, number];
  families: string[];
  model_version: string;
}

export interface SessionPayload {
  session_id: string;
  top: number[][];
  bottom: number[][];
  spectrogram: number[][];
  pitch: number;
  instrument: number;
  seed?: number;
}

export interface InpaintRequestBody {
  level: Level;
  freq_start: number;
  freq_end: number;
  time_start: number;
  time_end: number;
  pitch: number;
  instrument: number;
  seed?: number;
  top_p?: number;
  temperature?: number;
}

/** A rectangle of codemap cells; end indices are exclusive. */
export interface CellRect {
  freqStart: number;
  freqEnd: number;
  timeStart: number;
  timeEnd: number;
}

export interface GridSelection {
  level: Level;
  rect: CellRect;
  pending: boolean;
}
