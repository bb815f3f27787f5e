/**
 * Sandbox client wiring: controls -> throttled pose commands; server
 * ticks -> view state -> one render per animation frame (latest wins, so
 * bursts of messages never queue work).
 */
import {
  ANGLES,
  MODES,
  POSITIONS,
  buildPoseCommand,
  parseServerMessage,
  type AngleDeg,
  type Position,
  type RenderMode,
} from "./messages.js";
import { drawGrid, drawMask, drawPalm, describePrediction } from "./render.js";
import { ReconnectingSocket } from "./socket.js";
import { applyMessage, applyStatus, initialState } from "./state.js";
import { POSE_THROTTLE_MS, throttle } from "./throttle.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

let state = initialState();
let pose = {
  angle: 90 as AngleDeg,
  position: "center" as Position,
  grip: 0,
  mode: "masked" as RenderMode,
};

const banner = $("banner");
const socket = new ReconnectingSocket(
  `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`,
  {
    onMessage(raw) {
      const message = parseServerMessage(raw);
      if (message) state = applyMessage(state, message);
    },
    onStatus(status) {
      state = applyStatus(state, status);
      banner.textContent =
        status === "open" ? "" : status === "connecting" ? "connecting..." : "connection lost, retrying...";
      banner.style.display = status === "open" ? "none" : "block";
    },
  },
);

const sendPose = throttle<string>((msg) => socket.send(msg), POSE_THROTTLE_MS);

function pushPose(): void {
  sendPose.push(
    JSON.stringify(buildPoseCommand(pose.angle, pose.position, pose.grip, pose.mode)),
  );
}

function makeButtons<T extends string | number>(
  containerId: string,
  values: readonly T[],
  label: (v: T) => string,
  onPick: (v: T) => void,
  initial: T,
): void {
  const container = $(containerId);
  values.forEach((value) => {
    const button = document.createElement("button");
    button.textContent = label(value);
    button.dataset.value = String(value);
    if (value === initial) button.classList.add("active");
    button.addEventListener("click", () => {
      container.querySelectorAll("button").forEach((b) => b.classList.remove("active"));
      button.classList.add("active");
      onPick(value);
      pushPose();
    });
    container.appendChild(button);
  });
}

makeButtons("angles", ANGLES, (v) => `${v} deg`, (v) => (pose.angle = v), pose.angle);
makeButtons(
  "positions",
  POSITIONS,
  (v) => v,
  (v) => (pose.position = v),
  pose.position,
);
makeButtons("modes", MODES, (v) => v, (v) => (pose.mode = v), pose.mode);

const grip = $("grip") as unknown as HTMLInputElement;
const gripLabel = $("grip-label");
grip.addEventListener("input", () => {
  pose.grip = Number(grip.value);
  gripLabel.textContent = String(pose.grip);
  pushPose();
});

const mergedCanvas = $("merged") as unknown as HTMLCanvasElement;
const downsizedCanvas = $("downsized") as unknown as HTMLCanvasElement;
const maskCanvas = $("mask") as unknown as HTMLCanvasElement;
const stimulusCanvas = $("stimulus") as unknown as HTMLCanvasElement;
const palmCanvas = $("palm") as unknown as HTMLCanvasElement;
const maskPanel = $("mask-panel");
const predictionLabel = $("prediction");
const statsLabel = $("stats");

function render(): void {
  const tick = state.latest;
  if (tick) {
    drawGrid(mergedCanvas, tick.merged, 9.0);
    drawGrid(downsizedCanvas, tick.downsized, 1.0);
    drawGrid(stimulusCanvas, tick.stimulus, 1.0, tick.mask);
    if (tick.mask) {
      maskPanel.style.display = "";
      drawMask(maskCanvas, tick.mask);
    } else {
      maskPanel.style.display = "none";
    }
    drawPalm(palmCanvas, tick.contacts);
    predictionLabel.textContent = describePrediction(tick);
    statsLabel.textContent =
      `tick ${tick.tick} | ${tick.latency_ms.toFixed(2)} ms | ` +
      `${state.ticksSeen} msgs` +
      (state.lastError ? ` | last error: ${state.lastError}` : "");
  }
  requestAnimationFrame(render);
}
requestAnimationFrame(render);
pushPose();
