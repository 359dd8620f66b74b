/** Pure geometry: axis scales, hit testing, and axis label values.
 *
 * Kept free of DOM types so the snap-to-point behavior is unit-testable:
 * a click never yields a free coordinate, only the index of the nearest
 * served point.
 */

import type { AxisConfig, ServedPoint } from "./types.js";

export interface LinearScale {
  domain: [number, number];
  range: [number, number];
}

export function scaleValue(scale: LinearScale, v: number): number {
  const [d0, d1] = scale.domain;
  const [r0, r1] = scale.range;
  return r0 + ((v - d0) / (d1 - d0)) * (r1 - r0);
}

/**
 * Index of the served point nearest to a pixel position, in pixel space.
 * Ties resolve to the smaller index.
 */
export function nearestPointIndex(
  points: readonly ServedPoint[],
  px: number,
  py: number,
  sx: LinearScale,
  sy: LinearScale,
): number {
  let best = 0;
  let bestDist = Infinity;
  points.forEach((pt, i) => {
    const dx = scaleValue(sx, pt.p) - px;
    const dy = scaleValue(sy, pt.alpha) - py;
    const dist = dx * dx + dy * dy;
    if (dist < bestDist) {
      bestDist = dist;
      best = i;
    }
  });
  return best;
}

/** Raw privacy budget corresponding to a normalized privacy level. */
export function denormalizeEpsilon(axis: AxisConfig, p: number): number {
  const pMin = -Math.log(axis.epsMax);
  const pMax = -Math.log(axis.epsMin);
  return Math.exp(-(pMin + p * (pMax - pMin)));
}

/** Raw accuracy corresponding to a normalized accuracy. */
export function denormalizeAccuracy(axis: AxisConfig, a: number): number {
  return axis.alphaMin + a * (axis.alphaMax - axis.alphaMin);
}

export interface AxisTick {
  /** normalized position along the privacy axis */
  p: number;
  /** raw epsilon label value (log-spaced along the axis) */
  epsilon: number;
}

/**
 * Log-spaced budget labels for the secondary axis. The endpoints are exactly
 * the configured range: eps_max sits at p = 0, eps_min at p = 1.
 */
export function epsilonTicks(axis: AxisConfig, count = 5): AxisTick[] {
  const ticks: AxisTick[] = [];
  for (let i = 0; i < count; i += 1) {
    const p = i / (count - 1);
    ticks.push({ p, epsilon: denormalizeEpsilon(axis, p) });
  }
  return ticks;
}

export function formatEpsilon(eps: number): string {
  if (eps >= 0.01) {
    return parseFloat(eps.toPrecision(3)).toString();
  }
  return eps.toExponential(1);
}
