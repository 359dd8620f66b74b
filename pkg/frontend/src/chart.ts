/** SVG rendering of the trade-off views.
 *
 * Two invariants drive everything here:
 *
 * 1. What you click is what you send: the chart keeps the served points
 *    array untouched, every click snaps to the nearest served point, and the
 *    dispatched value is that point's index, never a coordinate.
 * 2. The UI computes nothing statistical: curves, bands and weights are
 *    drawn exactly as the server sent them; only axis labels convert the
 *    normalized scale back to raw budget units for readability.
 */

import {
  denormalizeAccuracy,
  denormalizeEpsilon,
  epsilonTicks,
  formatEpsilon,
  nearestPointIndex,
  scaleValue,
  type LinearScale,
} from "./scales.js";
import type { AxisConfig, MetricEntry, QueryPayload, StatePayload, ServedPoint } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export const WIDTH = 640;
export const HEIGHT = 360;
export const MARGIN = { top: 28, right: 16, bottom: 34, left: 44 };

export function privacyScale(): LinearScale {
  return { domain: [0, 1], range: [MARGIN.left, WIDTH - MARGIN.right] };
}

export function accuracyScale(): LinearScale {
  return { domain: [0, 1], range: [HEIGHT - MARGIN.bottom, MARGIN.top] };
}

function el<K extends keyof SVGElementTagNameMap>(
  name: K,
  attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, name);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, String(value));
  }
  return node;
}

function pathFrom(xs: number[], ys: number[]): string {
  return xs.map((x, i) => `${i === 0 ? "M" : "L"}${x.toFixed(2)},${ys[i].toFixed(2)}`).join(" ");
}

function drawAxes(svg: SVGSVGElement, axis: AxisConfig): void {
  const sx = privacyScale();
  const sy = accuracyScale();
  const x0 = scaleValue(sx, 0);
  const x1 = scaleValue(sx, 1);
  const y0 = scaleValue(sy, 0);
  const yTop = scaleValue(sy, 1);
  svg.appendChild(el("line", { x1: x0, y1: y0, x2: x1, y2: y0, stroke: "#444" }));
  svg.appendChild(el("line", { x1: x0, y1: y0, x2: x0, y2: yTop, stroke: "#444" }));

  for (const t of [0, 0.25, 0.5, 0.75, 1]) {
    const x = scaleValue(sx, t);
    const label = el("text", { x, y: y0 + 16, "text-anchor": "middle", class: "tick" });
    label.textContent = t.toFixed(2);
    svg.appendChild(label);
    const y = scaleValue(sy, t);
    const alabel = el("text", { x: x0 - 6, y: y + 3, "text-anchor": "end", class: "tick" });
    alabel.textContent = t.toFixed(2);
    svg.appendChild(alabel);
  }
  // secondary axis: raw privacy budget, log-spaced along the top edge
  for (const tick of epsilonTicks(axis)) {
    const x = scaleValue(sx, tick.p);
    const label = el("text", {
      x,
      y: yTop - 8,
      "text-anchor": "middle",
      class: "tick eps-tick",
    });
    label.textContent = formatEpsilon(tick.epsilon);
    svg.appendChild(label);
  }
  const caption = el("text", {
    x: (x0 + x1) / 2,
    y: y0 + 30,
    "text-anchor": "middle",
    class: "axis-caption",
  });
  caption.textContent = "privacy level (normalized) / budget ε (top, log scale)";
  svg.appendChild(caption);
}

export interface QueryChart {
  svg: SVGSVGElement;
  /** the served points, exactly as received */
  points: ServedPoint[];
  /** pixel-space snap; exposed for scripted interaction and tests */
  hitTest(px: number, py: number): number;
}

/**
 * Render a hypothetical trade-off curve with one selectable marker per
 * served point. Clicking anywhere snaps to the nearest point and invokes
 * `onChoose` with its index.
 */
export function renderQuery(
  payload: QueryPayload,
  axis: AxisConfig,
  onChoose: (index: number) => void,
): QueryChart {
  const svg = el("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    width: WIDTH,
    height: HEIGHT,
    class: "query-chart",
  });
  drawAxes(svg, axis);
  const sx = privacyScale();
  const sy = accuracyScale();
  const points = payload.points;
  const xs = points.map((pt) => scaleValue(sx, pt.p));
  const ys = points.map((pt) => scaleValue(sy, pt.alpha));
  svg.appendChild(
    el("path", { d: pathFrom(xs, ys), fill: "none", stroke: "#2462c4", "stroke-width": 2 }),
  );
  points.forEach((pt, i) => {
    const circle = el("circle", {
      cx: xs[i],
      cy: ys[i],
      r: 3.5,
      class: "query-point",
      "data-index": i,
      fill: "#2462c4",
    });
    const eps = denormalizeEpsilon(axis, pt.p);
    const acc = denormalizeAccuracy(axis, pt.alpha);
    const tip = el("title");
    tip.textContent = `ε = ${formatEpsilon(eps)}, accuracy = ${acc.toFixed(4)}`;
    circle.appendChild(tip);
    svg.appendChild(circle);
  });

  const hitTest = (px: number, py: number) => nearestPointIndex(points, px, py, sx, sy);
  svg.addEventListener("click", (ev: MouseEvent) => {
    const rect = svg.getBoundingClientRect();
    onChoose(hitTest(ev.clientX - rect.left, ev.clientY - rect.top));
  });
  return { svg, points, hitTest };
}

/** Estimated front with credible band plus observation markers. */
export function renderFrontPanel(state: StatePayload, axis: AxisConfig): SVGSVGElement {
  const svg = el("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    width: WIDTH,
    height: HEIGHT,
    class: "front-chart",
  });
  drawAxes(svg, axis);
  const sx = privacyScale();
  const sy = accuracyScale();
  const grid = state.posterior_mean_curve.p_grid;
  const xs = grid.map((p) => scaleValue(sx, p));
  const clamp01 = (v: number) => Math.min(1, Math.max(0, v));

  const lower = state.credible_band.lower.map((v) => scaleValue(sy, clamp01(v)));
  const upper = state.credible_band.upper.map((v) => scaleValue(sy, clamp01(v)));
  const bandPath =
    pathFrom(xs, upper) +
    " " +
    pathFrom([...xs].reverse(), [...lower].reverse()).replace(/^M/, "L") +
    " Z";
  svg.appendChild(
    el("path", { d: bandPath, fill: "#d0627a", opacity: 0.25, stroke: "none", class: "band" }),
  );
  const mean = state.posterior_mean_curve.mean.map((v) => scaleValue(sy, clamp01(v)));
  svg.appendChild(
    el("path", {
      d: pathFrom(xs, mean),
      fill: "none",
      stroke: "#c03050",
      "stroke-width": 2,
      class: "mean-curve",
    }),
  );
  for (const obs of state.obs_history) {
    svg.appendChild(
      el("circle", {
        cx: scaleValue(sx, obs.p),
        cy: scaleValue(sy, clamp01(obs.alpha)),
        r: 4,
        fill: "#7d3ac1",
        class: "observation",
      }),
    );
  }
  const star = el("text", {
    x: scaleValue(sx, state.p_star),
    y: MARGIN.top + 12,
    "text-anchor": "middle",
    class: "p-star",
  });
  star.textContent = `p* (ε ≈ ${formatEpsilon(denormalizeEpsilon(axis, state.p_star))})`;
  svg.appendChild(star);
  return svg;
}

/** Horizontal bar showing the posterior-mean preference weights. */
export function renderWeightBar(meanW: number[]): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "weight-bar";
  const [w1, w2] = meanW;
  const privacy = document.createElement("span");
  privacy.className = "weight-privacy";
  privacy.style.width = `${(w1 * 100).toFixed(1)}%`;
  privacy.textContent = `privacy ${w1.toFixed(3)}`;
  const accuracy = document.createElement("span");
  accuracy.className = "weight-accuracy";
  accuracy.style.width = `${(w2 * 100).toFixed(1)}%`;
  accuracy.textContent = `accuracy ${w2.toFixed(3)}`;
  wrap.append(privacy, accuracy);
  return wrap;
}

/** Compact log of the completed steps. */
export function renderStepLog(trace: MetricEntry[], axis: AxisConfig): HTMLElement {
  const list = document.createElement("ol");
  list.className = "step-log";
  for (const entry of trace) {
    const item = document.createElement("li");
    const eps = formatEpsilon(denormalizeEpsilon(axis, entry.p_star));
    item.textContent = `${entry.kind}: recommendation ε ≈ ${eps}, U* = ${entry.u_star.toFixed(4)}`;
    list.appendChild(item);
  }
  return list;
}
