import { describe, expect, it } from "vitest";

import {
  buildPoseCommand,
  parseServerMessage,
  type TickMessage,
} from "../src/messages.js";

function grid(n: number, v = 0): number[][] {
  return Array.from({ length: n }, () => Array.from({ length: n }, () => v));
}

function tickPayload(overrides: Partial<Record<keyof TickMessage, unknown>> = {}) {
  return {
    type: "tick",
    tick: 7,
    merged: grid(10, 1.5),
    downsized: grid(3, 0.4),
    prediction: { angle_deg: 45, position: "right", pattern_id: 5 },
    mask: [
      [false, true, false],
      [false, false, true],
      [false, false, false],
    ],
    stimulus: grid(3, 0.2),
    contacts: [
      { x_mm: 8, y_mm: 45, tau_a: 2.1, tau_e: 1.0, active: false },
      { x_mm: 20, y_mm: 30, tau_a: 2.3, tau_e: 0.8, active: true },
      { x_mm: 32, y_mm: 45, tau_a: 1.7, tau_e: 0.7, active: false },
    ],
    latency_ms: 1.25,
    ...overrides,
  };
}

describe("buildPoseCommand", () => {
  it("builds the exact wire shape", () => {
    expect(buildPoseCommand(45, "right", 30, "masked")).toEqual({
      type: "set_pose",
      angle_deg: 45,
      position: "right",
      grip_step: 30,
      mode: "masked",
    });
  });

  it("rejects out-of-range grips", () => {
    expect(() => buildPoseCommand(0, "center", 31, "direct")).toThrow(/grip_step/);
    expect(() => buildPoseCommand(0, "center", -1, "direct")).toThrow(/grip_step/);
    expect(() => buildPoseCommand(0, "center", 2.5, "direct")).toThrow(/grip_step/);
  });
});

describe("parseServerMessage", () => {
  it("accepts a full masked tick", () => {
    const msg = parseServerMessage(JSON.stringify(tickPayload()));
    expect(msg?.type).toBe("tick");
    const tick = msg as TickMessage;
    expect(tick.prediction?.pattern_id).toBe(5);
    expect(tick.mask?.[0][1]).toBe(true);
    expect(tick.contacts).toHaveLength(3);
  });

  it("accepts a direct tick with null prediction and mask", () => {
    const msg = parseServerMessage(
      JSON.stringify(tickPayload({ prediction: null, mask: null })),
    ) as TickMessage;
    expect(msg.prediction).toBeNull();
    expect(msg.mask).toBeNull();
  });

  it("rejects a tick where only one of prediction/mask is null", () => {
    expect(parseServerMessage(JSON.stringify(tickPayload({ mask: null })))).toBeNull();
    expect(
      parseServerMessage(JSON.stringify(tickPayload({ prediction: null }))),
    ).toBeNull();
  });

  it("rejects malformed grids and enums", () => {
    expect(parseServerMessage(JSON.stringify(tickPayload({ merged: grid(9) })))).toBeNull();
    expect(
      parseServerMessage(
        JSON.stringify(
          tickPayload({ prediction: { angle_deg: 30, position: "right", pattern_id: 5 } }),
        ),
      ),
    ).toBeNull();
    expect(
      parseServerMessage(
        JSON.stringify(
          tickPayload({ prediction: { angle_deg: 45, position: "right", pattern_id: 12 } }),
        ),
      ),
    ).toBeNull();
  });

  it("passes error messages through and drops garbage", () => {
    expect(parseServerMessage('{"type":"error","message":"bad pose"}')).toEqual({
      type: "error",
      message: "bad pose",
    });
    expect(parseServerMessage("{not json")).toBeNull();
    expect(parseServerMessage('{"type":"mystery"}')).toBeNull();
  });
});
