/** Session controller: wires the API to the charts.
 *
 * The controller enforces the client-side concurrency rule -- at most one
 * in-flight mutating request per session -- and owns the view state. All
 * inference lives on the server; this file only moves payloads around.
 */

import { ApiClient, ApiError } from "./api.js";
import { renderFrontPanel, renderQuery, renderStepLog, renderWeightBar } from "./chart.js";
import type { AxisConfig, QueryPayload, StatePayload } from "./types.js";

export interface ViewState {
  sessionId: string | null;
  status: string;
  step: number;
  query: QueryPayload | null;
  state: StatePayload | null;
  meanW: number[];
}

export interface ControllerHooks {
  /** invoked when the session disappears server-side (404): back to the list */
  onSessionLost?: () => void;
  /** invoked with a human-readable message for surfaced server errors */
  onError?: (message: string) => void;
}

export class SessionController {
  readonly view: ViewState = {
    sessionId: null,
    status: "NoSession",
    step: 0,
    query: null,
    state: null,
    meanW: [0.5, 0.5],
  };

  private busy = false;

  constructor(
    private readonly client: ApiClient,
    readonly axis: AxisConfig,
    private readonly root: HTMLElement,
    private readonly hooks: ControllerHooks = {},
  ) {}

  get isBusy(): boolean {
    return this.busy;
  }

  async start(overrides: Record<string, unknown> = {}): Promise<void> {
    const info = await this.client.createSession(overrides);
    this.view.sessionId = info.id;
    this.view.status = info.status;
    this.view.query = null;
    await this.refreshState();
  }

  /** POST /evaluate, then refresh; no-op while another mutation is in flight. */
  async evaluate(): Promise<boolean> {
    if (this.busy || this.view.sessionId === null) return false;
    this.busy = true;
    this.render();
    try {
      const result = await this.client.evaluate(this.view.sessionId);
      this.view.status = result.status;
      this.view.query = await this.client.getQuery(this.view.sessionId);
      await this.refreshState();
      return true;
    } catch (err) {
      this.handleError(err);
      return false;
    } finally {
      this.busy = false;
      this.render();
    }
  }

  /** POST the chosen index; the index always identifies a served point. */
  async choose(index: number): Promise<boolean> {
    if (this.busy || this.view.sessionId === null || this.view.query === null) return false;
    this.busy = true;
    this.render();
    try {
      const result = await this.client.postChoice(this.view.sessionId, index);
      this.view.status = result.status;
      this.view.meanW = result.pref_summary.mean_w;
      this.view.query = null;
      await this.refreshState();
      return true;
    } catch (err) {
      this.handleError(err);
      return false;
    } finally {
      this.busy = false;
      this.render();
    }
  }

  async refreshState(): Promise<void> {
    if (this.view.sessionId === null) return;
    try {
      const state = await this.client.getState(this.view.sessionId);
      this.view.state = state;
      this.view.status = state.status;
      this.view.step = state.step;
      this.view.meanW = state.mean_w;
    } catch (err) {
      this.handleError(err);
      return;
    }
    this.render();
  }

  private handleError(err: unknown): void {
    if (err instanceof ApiError && err.status === 404) {
      this.view.sessionId = null;
      this.view.status = "NoSession";
      this.hooks.onSessionLost?.();
      return;
    }
    const message = err instanceof Error ? err.message : String(err);
    this.hooks.onError?.(message);
  }

  render(): void {
    this.root.textContent = "";
    const header = document.createElement("div");
    header.className = "session-header";
    header.textContent =
      this.view.sessionId === null
        ? "no active session"
        : `session ${this.view.sessionId.slice(0, 8)} | step ${this.view.step} | ${this.view.status}`;
    this.root.appendChild(header);

    const evalButton = document.createElement("button");
    evalButton.className = "evaluate-button";
    evalButton.textContent = "Run one evaluation";
    evalButton.disabled =
      this.busy || this.view.status !== "AwaitingEvaluation" || this.view.sessionId === null;
    evalButton.addEventListener("click", () => void this.evaluate());
    this.root.appendChild(evalButton);

    if (this.view.query !== null && this.view.status === "AwaitingChoice") {
      const prompt = document.createElement("p");
      prompt.className = "choice-prompt";
      prompt.textContent =
        "Hypothetical trade-off: click the point you would deploy if this were the real frontier.";
      this.root.appendChild(prompt);
      const chart = renderQuery(this.view.query, this.axis, (index) => void this.choose(index));
      this.root.appendChild(chart.svg);
    }

    if (this.view.state !== null) {
      this.root.appendChild(renderFrontPanel(this.view.state, this.axis));
      this.root.appendChild(renderWeightBar(this.view.meanW));
      this.root.appendChild(renderStepLog(this.view.state.metric_trace, this.axis));
    }
  }
}
