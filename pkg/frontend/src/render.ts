/**
 * Canvas rendering: color-mapped grids with fixed scales (0-9 N for the
 * sensor, 0-1 for stimulus intensities) so brightness is comparable
 * across ticks, plus the palm outline with the three contact markers.
 */
import type { Contact, TickMessage } from "./messages.js";

function heatColor(t: number): string {
  // dark blue -> cyan -> yellow -> warm white
  const x = Math.min(Math.max(t, 0), 1);
  const r = Math.round(255 * Math.min(1, Math.max(0, 2.2 * x - 0.6)));
  const g = Math.round(255 * Math.min(1, 1.6 * x));
  const b = Math.round(255 * Math.min(1, Math.max(0.18, 1.1 - 1.4 * x)));
  return `rgb(${r},${g},${b})`;
}

export function drawGrid(
  canvas: HTMLCanvasElement,
  values: number[][],
  maxValue: number,
  highlight?: boolean[][] | null,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const rows = values.length;
  const cols = values[0].length;
  const cw = canvas.width / cols;
  const ch = canvas.height / rows;
  for (let r = 0; r < rows; r++) {
    for (let c = 0; c < cols; c++) {
      ctx.fillStyle = heatColor(values[r][c] / maxValue);
      ctx.fillRect(c * cw, r * ch, cw - 1, ch - 1);
      if (highlight && highlight[r][c]) {
        ctx.strokeStyle = "#ff5577";
        ctx.lineWidth = 2;
        ctx.strokeRect(c * cw + 1.5, r * ch + 1.5, cw - 4, ch - 4);
      }
    }
  }
}

export function drawMask(canvas: HTMLCanvasElement, mask: boolean[][]): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const n = mask.length;
  const cw = canvas.width / n;
  const ch = canvas.height / n;
  for (let r = 0; r < n; r++) {
    for (let c = 0; c < n; c++) {
      ctx.fillStyle = mask[r][c] ? "#3fa34d" : "#20242c";
      ctx.fillRect(c * cw, r * ch, cw - 1, ch - 1);
    }
  }
}

/**
 * Palm overlay: rows of the stimulus grid map to three linkage planes
 * stacked down the palm; each contact is drawn at its column preset,
 * filled when engaged and hollow when retracted.
 */
export function drawPalm(canvas: HTMLCanvasElement, contacts: Contact[]): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const w = canvas.width;
  const h = canvas.height;
  ctx.clearRect(0, 0, w, h);

  ctx.strokeStyle = "#8899aa";
  ctx.lineWidth = 2;
  ctx.beginPath();
  // stylized palm outline: rounded square with a thumb notch
  ctx.moveTo(w * 0.2, h * 0.08);
  ctx.quadraticCurveTo(w * 0.5, h * -0.02, w * 0.8, h * 0.08);
  ctx.quadraticCurveTo(w * 0.97, h * 0.35, w * 0.88, h * 0.75);
  ctx.quadraticCurveTo(w * 0.8, h * 0.97, w * 0.5, h * 0.97);
  ctx.quadraticCurveTo(w * 0.18, h * 0.97, w * 0.1, h * 0.7);
  ctx.quadraticCurveTo(w * 0.03, h * 0.4, w * 0.2, h * 0.08);
  ctx.stroke();

  // x preset range 8..32 mm maps across the palm width
  const xs = [0.3, 0.5, 0.7];
  contacts.forEach((contact, row) => {
    const col = Math.min(Math.max((contact.x_mm - 8) / 24, 0), 1);
    const cx = w * (0.26 + 0.48 * col);
    const cy = h * xs[row] * 1.2 - h * 0.12;
    // engagement: y 45 (retracted) .. 30 (full) -> marker size
    const depth = Math.min(Math.max((45 - contact.y_mm) / 15, 0), 1);
    const radius = 6 + 9 * depth;
    ctx.beginPath();
    ctx.arc(cx, cy, radius, 0, Math.PI * 2);
    if (contact.active) {
      ctx.fillStyle = "#ffb454";
      ctx.fill();
    }
    ctx.strokeStyle = contact.active ? "#ffb454" : "#667788";
    ctx.lineWidth = 2;
    ctx.stroke();
  });
}

export function describePrediction(tick: TickMessage): string {
  if (tick.prediction === null) return "direct mode (no classification)";
  const p = tick.prediction;
  return `pattern ${p.pattern_id}: ${p.angle_deg} deg, ${p.position}`;
}
