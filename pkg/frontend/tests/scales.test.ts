import { describe, expect, it } from "vitest";

import {
  denormalizeAccuracy,
  denormalizeEpsilon,
  epsilonTicks,
  nearestPointIndex,
  scaleValue,
  type LinearScale,
} from "../src/scales.js";
import type { AxisConfig, ServedPoint } from "../src/types.js";

const AXIS: AxisConfig = { epsMin: 0.01, epsMax: 0.5, alphaMin: 0.5, alphaMax: 1.0 };
const SX: LinearScale = { domain: [0, 1], range: [0, 600] };
const SY: LinearScale = { domain: [0, 1], range: [300, 0] };

describe("scaleValue", () => {
  it("maps domain endpoints to range endpoints", () => {
    expect(scaleValue(SX, 0)).toBe(0);
    expect(scaleValue(SX, 1)).toBe(600);
    expect(scaleValue(SY, 0)).toBe(300);
    expect(scaleValue(SY, 1)).toBe(0);
  });
});

describe("nearestPointIndex", () => {
  const points: ServedPoint[] = [
    { p: 0.0, alpha: 1.0 },
    { p: 0.5, alpha: 0.6 },
    { p: 1.0, alpha: 0.1 },
  ];

  it("snaps a click between two points to the nearer one", () => {
    // pixel position 55% of the way from point 0 to point 1
    const x = 0.55 * scaleValue(SX, 0.5);
    const y = scaleValue(SY, 0.8);
    expect(nearestPointIndex(points, x, y, SX, SY)).toBe(1);
    const closerToFirst = 0.4 * scaleValue(SX, 0.5);
    expect(nearestPointIndex(points, closerToFirst, scaleValue(SY, 0.9), SX, SY)).toBe(0);
  });

  it("always returns a served index, never a coordinate", () => {
    for (const [x, y] of [
      [-50, -50],
      [1000, 900],
      [300, 150],
    ]) {
      const idx = nearestPointIndex(points, x, y, SX, SY);
      expect(Number.isInteger(idx)).toBe(true);
      expect(idx).toBeGreaterThanOrEqual(0);
      expect(idx).toBeLessThan(points.length);
    }
  });

  it("breaks exact ties toward the smaller index", () => {
    const twins: ServedPoint[] = [
      { p: 0.4, alpha: 0.5 },
      { p: 0.6, alpha: 0.5 },
    ];
    const mid = (scaleValue(SX, 0.4) + scaleValue(SX, 0.6)) / 2;
    expect(nearestPointIndex(twins, mid, scaleValue(SY, 0.5), SX, SY)).toBe(0);
  });
});

describe("axis conversions", () => {
  it("denormalizes privacy endpoints to the configured budget range", () => {
    expect(denormalizeEpsilon(AXIS, 0)).toBeCloseTo(0.5, 12);
    expect(denormalizeEpsilon(AXIS, 1)).toBeCloseTo(0.01, 12);
  });

  it("denormalizes accuracy affinely", () => {
    expect(denormalizeAccuracy(AXIS, 0)).toBeCloseTo(0.5);
    expect(denormalizeAccuracy(AXIS, 1)).toBeCloseTo(1.0);
    expect(denormalizeAccuracy(AXIS, 0.5)).toBeCloseTo(0.75);
  });

  it("tick endpoints equal the configured eps bounds", () => {
    const ticks = epsilonTicks(AXIS);
    expect(ticks[0].epsilon).toBeCloseTo(AXIS.epsMax, 12);
    expect(ticks[ticks.length - 1].epsilon).toBeCloseTo(AXIS.epsMin, 12);
    // log-spaced: geometric midpoint at p = 0.5
    const mid = ticks.find((t) => Math.abs(t.p - 0.5) < 1e-9);
    expect(mid?.epsilon).toBeCloseTo(Math.sqrt(0.01 * 0.5), 12);
  });
});
