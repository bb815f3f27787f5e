/**
 * Wire message types shared with the sandbox server, plus strict parsing.
 * The client never recomputes pipeline math: everything rendered comes
 * verbatim from the last TickMessage.
 */

export const ANGLES = [0, 45, 90, 135] as const;
export const POSITIONS = ["center", "left", "right"] as const;
export const MODES = ["direct", "masked"] as const;

export type AngleDeg = (typeof ANGLES)[number];
export type Position = (typeof POSITIONS)[number];
export type RenderMode = (typeof MODES)[number];

export interface PoseCommand {
  type: "set_pose";
  angle_deg: AngleDeg;
  position: Position;
  grip_step: number;
  mode: RenderMode;
}

export interface Prediction {
  angle_deg: AngleDeg;
  position: Position;
  pattern_id: number;
}

export interface Contact {
  x_mm: number;
  y_mm: number;
  tau_a: number;
  tau_e: number;
  active: boolean;
}

export interface TickMessage {
  type: "tick";
  tick: number;
  merged: number[][];
  downsized: number[][];
  prediction: Prediction | null;
  mask: boolean[][] | null;
  stimulus: number[][];
  contacts: Contact[];
  latency_ms: number;
}

export interface ErrorMessage {
  type: "error";
  message: string;
}

export type ServerMessage = TickMessage | ErrorMessage;

export function buildPoseCommand(
  angle: AngleDeg,
  position: Position,
  grip: number,
  mode: RenderMode,
): PoseCommand {
  if (!Number.isInteger(grip) || grip < 0 || grip > 30) {
    throw new Error(`grip_step must be an integer in [0, 30], got ${grip}`);
  }
  return { type: "set_pose", angle_deg: angle, position, grip_step: grip, mode };
}

function isNumberGrid(value: unknown, rows: number, cols: number): value is number[][] {
  return (
    Array.isArray(value) &&
    value.length === rows &&
    value.every(
      (row) =>
        Array.isArray(row) &&
        row.length === cols &&
        row.every((v) => typeof v === "number" && Number.isFinite(v)),
    )
  );
}

function isBoolGrid(value: unknown, n: number): value is boolean[][] {
  return (
    Array.isArray(value) &&
    value.length === n &&
    value.every(
      (row) =>
        Array.isArray(row) && row.length === n && row.every((v) => typeof v === "boolean"),
    )
  );
}

function isContact(value: unknown): value is Contact {
  if (typeof value !== "object" || value === null) return false;
  const c = value as Record<string, unknown>;
  return (
    typeof c.x_mm === "number" &&
    typeof c.y_mm === "number" &&
    typeof c.tau_a === "number" &&
    typeof c.tau_e === "number" &&
    typeof c.active === "boolean"
  );
}

function isPrediction(value: unknown): value is Prediction {
  if (typeof value !== "object" || value === null) return false;
  const p = value as Record<string, unknown>;
  return (
    ANGLES.includes(p.angle_deg as AngleDeg) &&
    POSITIONS.includes(p.position as Position) &&
    typeof p.pattern_id === "number" &&
    Number.isInteger(p.pattern_id) &&
    (p.pattern_id as number) >= 0 &&
    (p.pattern_id as number) <= 11
  );
}

/**
 * Parse one server frame. Returns null for anything malformed: a live
 * stream should skip bad frames, not crash the view.
 */
export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const msg = data as Record<string, unknown>;

  if (msg.type === "error") {
    return typeof msg.message === "string" ? { type: "error", message: msg.message } : null;
  }
  if (msg.type !== "tick") return null;

  if (
    typeof msg.tick !== "number" ||
    !isNumberGrid(msg.merged, 10, 10) ||
    !isNumberGrid(msg.downsized, 3, 3) ||
    !isNumberGrid(msg.stimulus, 3, 3) ||
    typeof msg.latency_ms !== "number" ||
    !Array.isArray(msg.contacts) ||
    msg.contacts.length !== 3 ||
    !msg.contacts.every(isContact)
  ) {
    return null;
  }
  const prediction = msg.prediction === null ? null : msg.prediction;
  const mask = msg.mask === null ? null : msg.mask;
  if (prediction !== null && !isPrediction(prediction)) return null;
  if (mask !== null && !isBoolGrid(mask, 3)) return null;
  // direct mode carries null for both; masked mode carries both
  if ((prediction === null) !== (mask === null)) return null;

  return {
    type: "tick",
    tick: msg.tick,
    merged: msg.merged,
    downsized: msg.downsized,
    prediction: prediction as Prediction | null,
    mask: mask as boolean[][] | null,
    stimulus: msg.stimulus,
    contacts: msg.contacts as Contact[],
    latency_ms: msg.latency_ms,
  };
}
