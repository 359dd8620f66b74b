/** Thin typed client over the session HTTP API.
 *
 * The UI is a pure view/controller: every number it shows comes from these
 * endpoints, and the only numbers it sends back are chosen point indices.
 */

import type {
  ChoicePayload,
  EvaluatePayload,
  QueryPayload,
  SessionInfo,
  StatePayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "content-type": "application/json" } };
    if (body !== undefined) init.body = JSON.stringify(body);
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const text = await resp.text();
    if (!resp.ok) {
      let detail = text;
      try {
        const parsed = JSON.parse(text);
        if (parsed && typeof parsed.error === "string") detail = parsed.error;
      } catch {
        /* keep raw body */
      }
      throw new ApiError(resp.status, detail || `HTTP ${resp.status}`);
    }
    return JSON.parse(text) as T;
  }

  healthz(): Promise<{ ok: boolean }> {
    return this.request("GET", "/healthz");
  }

  createSession(overrides: Record<string, unknown> = {}): Promise<SessionInfo> {
    return this.request("POST", "/sessions", overrides);
  }

  evaluate(sessionId: string): Promise<EvaluatePayload> {
    return this.request("POST", `/sessions/${sessionId}/evaluate`);
  }

  getQuery(sessionId: string): Promise<QueryPayload> {
    return this.request("GET", `/sessions/${sessionId}/query`);
  }

  postChoice(sessionId: string, chosenIndex: number): Promise<ChoicePayload> {
    return this.request("POST", `/sessions/${sessionId}/choice`, {
      chosen_index: chosenIndex,
    });
  }

  getState(sessionId: string): Promise<StatePayload> {
    return this.request("GET", `/sessions/${sessionId}/state`);
  }
}
