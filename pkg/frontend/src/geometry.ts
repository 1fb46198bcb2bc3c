/** Coordinate transforms and rectangle hit-testing for the scatter view. */

import type { PointState, Rect } from "./types.js";

export interface Transform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

/** Fit data bounds into a width x height viewport, preserving aspect ratio. */
export function fitTransform(
  points: { x: number; y: number }[],
  width: number,
  height: number,
  padding = 24,
): Transform {
  if (points.length === 0) return { scale: 1, offsetX: width / 2, offsetY: height / 2 };
  let minX = Infinity;
  let maxX = -Infinity;
  let minY = Infinity;
  let maxY = -Infinity;
  for (const p of points) {
    minX = Math.min(minX, p.x);
    maxX = Math.max(maxX, p.x);
    minY = Math.min(minY, p.y);
    maxY = Math.max(maxY, p.y);
  }
  const spanX = maxX - minX || 1;
  const spanY = maxY - minY || 1;
  const scale = Math.min((width - 2 * padding) / spanX, (height - 2 * padding) / spanY);
  return {
    scale,
    offsetX: padding - minX * scale + (width - 2 * padding - spanX * scale) / 2,
    offsetY: padding + maxY * scale + (height - 2 * padding - spanY * scale) / 2,
  };
}

export function toScreen(t: Transform, x: number, y: number): [number, number] {
  return [x * t.scale + t.offsetX, -y * t.scale + t.offsetY];
}

export function toData(t: Transform, sx: number, sy: number): [number, number] {
  return [(sx - t.offsetX) / t.scale, (t.offsetY - sy) / t.scale];
}

export function normalizeRect(r: Rect): Rect {
  return {
    x0: Math.min(r.x0, r.x1),
    y0: Math.min(r.y0, r.y1),
    x1: Math.max(r.x0, r.x1),
    y1: Math.max(r.y0, r.y1),
  };
}

/** Indices of points inside a data-space rectangle (inclusive bounds). */
export function pointsInRect(points: PointState[], rect: Rect): number[] {
  const r = normalizeRect(rect);
  const hits: number[] = [];
  for (let i = 0; i < points.length; i++) {
    const p = points[i];
    if (p.x >= r.x0 && p.x <= r.x1 && p.y >= r.y0 && p.y <= r.y1) hits.push(i);
  }
  return hits;
}

/** Index of the nearest point within maxDistance (data units), or -1. */
export function nearestPoint(
  points: PointState[],
  x: number,
  y: number,
  maxDistance: number,
): number {
  let best = -1;
  let bestDist = maxDistance;
  for (let i = 0; i < points.length; i++) {
    const dx = points[i].x - x;
    const dy = points[i].y - y;
    const d = Math.hypot(dx, dy);
    if (d <= bestDist) {
      best = i;
      bestDist = d;
    }
  }
  return best;
}
