// @vitest-environment jsdom
import { describe, expect, it } from "vitest";

import { accuracyScale, privacyScale, renderFrontPanel, renderQuery, renderWeightBar } from "../src/chart.js";
import { scaleValue } from "../src/scales.js";
import type { AxisConfig, QueryPayload, StatePayload } from "../src/types.js";

const AXIS: AxisConfig = { epsMin: 0.01, epsMax: 0.5, alphaMin: 0.5, alphaMax: 1.0 };

function queryPayload(q: number): QueryPayload {
  const points = Array.from({ length: q }, (_, i) => {
    const p = i / (q - 1);
    return { p, alpha: 1 / (1 + Math.exp(10 * (p - 0.5))) };
  });
  return { curve: { kind: "sigmoid", L: 1, k: 10, b: 0, c: 0.5 }, points, step: 1 };
}

function statePayload(): StatePayload {
  const grid = Array.from({ length: 21 }, (_, i) => i / 20);
  const mean = grid.map((p) => 1 - p * 0.9);
  return {
    step: 1,
    status: "AwaitingChoice",
    obs_history: [{ p: 0.25, alpha: 0.8 }],
    choice_count: 0,
    posterior_mean_curve: { p_grid: grid, mean },
    credible_band: {
      lower: mean.map((v) => v - 0.05),
      upper: mean.map((v) => v + 0.05),
      degenerate: false,
    },
    mean_w: [0.48, 0.52],
    p_star: 0.4,
    p_star_denormalized: 0.1,
    u_star: 0.9,
    metric_trace: [{ step: 1, kind: "evaluate", p_star: 0.4, u_star: 0.9 }],
  };
}

describe("renderQuery", () => {
  it("renders one selectable marker per served point", () => {
    const chart = renderQuery(queryPayload(101), AXIS, () => {});
    expect(chart.svg.querySelectorAll(".query-point")).toHaveLength(101);
  });

  it("keeps the served points untouched (what you click is what you send)", () => {
    const payload = queryPayload(31);
    const chart = renderQuery(payload, AXIS, () => {});
    expect(chart.points).toBe(payload.points);
    payload.points.forEach((pt, i) => {
      expect(chart.points[i].p).toBe(pt.p);
      expect(chart.points[i].alpha).toBe(pt.alpha);
    });
  });

  it("dispatches the nearer index for a click between two points", () => {
    const payload = queryPayload(11);
    let chosen = -1;
    const chart = renderQuery(payload, AXIS, (i) => {
      chosen = i;
    });
    document.body.appendChild(chart.svg);
    const sx = privacyScale();
    const sy = accuracyScale();
    // 60% of the way from point 4 to point 5: point 5 is nearer
    const x4 = scaleValue(sx, payload.points[4].p);
    const x5 = scaleValue(sx, payload.points[5].p);
    const y = scaleValue(sy, (payload.points[4].alpha + payload.points[5].alpha) / 2);
    chart.svg.dispatchEvent(
      new MouseEvent("click", { clientX: x4 + 0.6 * (x5 - x4), clientY: y, bubbles: true }),
    );
    expect(chosen).toBe(5);
  });

  it("hit testing matches the dispatched index exactly", () => {
    const payload = queryPayload(21);
    const chart = renderQuery(payload, AXIS, () => {});
    const sx = privacyScale();
    const sy = accuracyScale();
    payload.points.forEach((pt, i) => {
      expect(chart.hitTest(scaleValue(sx, pt.p), scaleValue(sy, pt.alpha))).toBe(i);
    });
  });

  it("labels the budget axis with the configured endpoints", () => {
    const chart = renderQuery(queryPayload(5), AXIS, () => {});
    const labels = Array.from(chart.svg.querySelectorAll(".eps-tick")).map(
      (node) => node.textContent,
    );
    expect(labels[0]).toBe("0.5");
    expect(labels[labels.length - 1]).toBe("0.01");
  });

  it("hover titles show raw units", () => {
    const chart = renderQuery(queryPayload(3), AXIS, () => {});
    const first = chart.svg.querySelector(".query-point title");
    expect(first?.textContent).toContain("ε = 0.5");
    expect(first?.textContent).toContain("accuracy =");
  });
});

describe("renderFrontPanel", () => {
  it("draws the band, the mean curve and one marker per observation", () => {
    const svg = renderFrontPanel(statePayload(), AXIS);
    expect(svg.querySelectorAll(".band")).toHaveLength(1);
    expect(svg.querySelectorAll(".mean-curve")).toHaveLength(1);
    expect(svg.querySelectorAll(".observation")).toHaveLength(1);
  });

  it("zero observations still renders the prior band", () => {
    const state = statePayload();
    state.obs_history = [];
    const svg = renderFrontPanel(state, AXIS);
    expect(svg.querySelectorAll(".observation")).toHaveLength(0);
    expect(svg.querySelectorAll(".band")).toHaveLength(1);
  });
});

describe("renderWeightBar", () => {
  it("displays weights that sum to one", () => {
    const bar = renderWeightBar([0.37, 0.63]);
    const widths = Array.from(bar.children).map((c) =>
      parseFloat((c as HTMLElement).style.width),
    );
    expect(widths[0] + widths[1]).toBeCloseTo(100, 6);
    expect(bar.textContent).toContain("0.370");
    expect(bar.textContent).toContain("0.630");
  });
});
