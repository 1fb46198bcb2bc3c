import { describe, expect, it } from "vitest";

import { fitTransform, nearestPoint, normalizeRect, pointsInRect, toData, toScreen } from "../src/geometry.js";
import type { PointState } from "../src/types.js";

function pts(coords: [number, number][]): PointState[] {
  return coords.map(([x, y], i) => ({
    id: `s${i}`,
    x,
    y,
    cluster: 0,
    sense: null,
    sentence: null,
  }));
}

describe("transforms", () => {
  it("round-trips screen and data coordinates", () => {
    const t = fitTransform(pts([[-2, -1], [3, 4]]), 800, 600);
    const [sx, sy] = toScreen(t, 1.5, 2.5);
    const [x, y] = toData(t, sx, sy);
    expect(x).toBeCloseTo(1.5, 9);
    expect(y).toBeCloseTo(2.5, 9);
  });

  it("keeps all points inside the padded viewport", () => {
    const points = pts([[-5, 0], [7, 3], [0, -9], [2, 8]]);
    const t = fitTransform(points, 640, 480, 20);
    for (const p of points) {
      const [sx, sy] = toScreen(t, p.x, p.y);
      expect(sx).toBeGreaterThanOrEqual(19.9);
      expect(sx).toBeLessThanOrEqual(620.1);
      expect(sy).toBeGreaterThanOrEqual(19.9);
      expect(sy).toBeLessThanOrEqual(460.1);
    }
  });
});

describe("rectangle selection", () => {
  it("normalizes inverted rectangles", () => {
    expect(normalizeRect({ x0: 5, y0: 6, x1: 1, y1: 2 })).toEqual({ x0: 1, y0: 2, x1: 5, y1: 6 });
  });

  it("selects exactly the points inside", () => {
    const points = pts([[0, 0], [1, 1], [2, 2], [5, 5]]);
    expect(pointsInRect(points, { x0: 0.5, y0: 0.5, x1: 2.5, y1: 2.5 })).toEqual([1, 2]);
    expect(pointsInRect(points, { x0: 2.5, y0: 2.5, x1: 0.5, y1: 0.5 })).toEqual([1, 2]);
    expect(pointsInRect(points, { x0: 8, y0: 8, x1: 9, y1: 9 })).toEqual([]);
  });

  it("includes boundary points", () => {
    const points = pts([[1, 1]]);
    expect(pointsInRect(points, { x0: 1, y0: 1, x1: 2, y1: 2 })).toEqual([0]);
  });
});

describe("nearestPoint", () => {
  it("finds the closest point within the radius", () => {
    const points = pts([[0, 0], [1, 0], [10, 10]]);
    expect(nearestPoint(points, 0.9, 0.1, 0.5)).toBe(1);
    expect(nearestPoint(points, 5, 5, 1)).toBe(-1);
  });
});
