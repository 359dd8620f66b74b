/** Payload shapes of the session HTTP API, mirrored field for field. */

export interface ServedPoint {
  p: number;
  alpha: number;
}

export interface CurveParams {
  kind: string;
  L: number;
  k: number;
  b: number;
  c: number;
}

export interface QueryPayload {
  curve: CurveParams | null;
  points: ServedPoint[];
  step: number;
}

export interface Observation {
  p: number;
  alpha: number;
  epsilon?: number;
}

export interface EvaluatePayload {
  status: string;
  observation: Observation;
  front_summary: { ess: number; observations: number };
}

export interface ChoicePayload {
  status: string;
  pref_summary: { mean_w: number[]; ess: number };
}

export interface MetricEntry {
  step: number;
  kind: string;
  p_star: number;
  u_star: number;
  pref_error?: number;
  regret?: number;
}

export interface StatePayload {
  step: number;
  status: string;
  obs_history: Observation[];
  choice_count: number;
  posterior_mean_curve: { p_grid: number[]; mean: number[] };
  credible_band: { lower: number[]; upper: number[]; degenerate: boolean };
  mean_w: number[];
  p_star: number;
  p_star_denormalized: number;
  u_star: number;
  metric_trace: MetricEntry[];
}

export interface SessionInfo {
  id: string;
  status: string;
}

/** Raw-axis bounds needed to label the privacy axis in budget units. */
export interface AxisConfig {
  epsMin: number;
  epsMax: number;
  alphaMin: number;
  alphaMax: number;
}
