/** Canvas scatter renderer: one glyph per sentence, sense color when labeled,
 * cluster hue otherwise; selection ring; drag rectangle; hover tooltip with
 * the target word highlighted. */

import { clusterColor, senseColor } from "./colors.js";
import { fitTransform, toScreen, type Transform } from "./geometry.js";
import type { ViewStore } from "./store.js";
import type { Rect } from "./types.js";

export interface RenderOptions {
  hoverIndex: number;
  dragRect: Rect | null;
}

export function computeTransform(store: ViewStore, canvas: HTMLCanvasElement): Transform {
  return fitTransform(store.points, canvas.width, canvas.height);
}

export function drawScatter(
  store: ViewStore,
  canvas: HTMLCanvasElement,
  transform: Transform,
  options: RenderOptions,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const senseIds = store.inventory.map((s) => s.sense_id);

  for (let i = 0; i < store.points.length; i++) {
    const p = store.points[i];
    const [sx, sy] = toScreen(transform, p.x, p.y);
    ctx.beginPath();
    ctx.arc(sx, sy, i === options.hoverIndex ? 7 : 5, 0, Math.PI * 2);
    ctx.fillStyle = p.sense !== null ? senseColor(senseIds, p.sense) : clusterColor(p.cluster);
    ctx.fill();
    if (store.selection.has(i)) {
      ctx.lineWidth = 2;
      ctx.strokeStyle = "#111";
      ctx.stroke();
    }
  }

  if (options.dragRect) {
    const [ax, ay] = toScreen(transform, options.dragRect.x0, options.dragRect.y0);
    const [bx, by] = toScreen(transform, options.dragRect.x1, options.dragRect.y1);
    ctx.strokeStyle = "#3366cc";
    ctx.lineWidth = 1;
    ctx.setLineDash([4, 3]);
    ctx.strokeRect(Math.min(ax, bx), Math.min(ay, by), Math.abs(bx - ax), Math.abs(by - ay));
    ctx.setLineDash([]);
  }
}

/** Sentence text with the target word wrapped for emphasis. */
export function hoverHtml(store: ViewStore, index: number): string {
  const point = store.points[index];
  if (!point || !point.sentence) return "";
  const { text, target_span } = point.sentence;
  const [start, end] = target_span;
  return (
    escapeHtml(text.slice(0, start)) +
    "<mark>" +
    escapeHtml(text.slice(start, end)) +
    "</mark>" +
    escapeHtml(text.slice(end))
  );
}

export function legendHtml(store: ViewStore): string {
  const counts = store.legendCounts();
  const senseIds = store.inventory.map((s) => s.sense_id);
  const items = store.inventory.map((sense) => {
    const color = senseColor(senseIds, sense.sense_id);
    const active = store.currentSense === sense.sense_id ? " active" : "";
    return (
      `<li class="legend-item${active}" data-sense="${escapeHtml(sense.sense_id)}">` +
      `<span class="swatch" style="background:${color}"></span>` +
      `${escapeHtml(sense.sense_id)} — ${escapeHtml(sense.gloss)} ` +
      `<b>(${counts[sense.sense_id] ?? 0})</b></li>`
    );
  });
  return items.join("");
}

function escapeHtml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}
