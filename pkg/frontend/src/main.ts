/** Browser entry point: session list + controller bootstrap.
 *
 * Server and axis bounds come from query parameters so the static bundle
 * needs no build-time configuration:
 *   index.html?api=http://127.0.0.1:8765&eps_min=0.01&eps_max=0.5
 */

import { ApiClient } from "./api.js";
import { SessionController } from "./app.js";
import type { AxisConfig } from "./types.js";

function axisFromParams(params: URLSearchParams): AxisConfig {
  return {
    epsMin: Number(params.get("eps_min") ?? "0.01"),
    epsMax: Number(params.get("eps_max") ?? "0.5"),
    alphaMin: Number(params.get("alpha_min") ?? "0.5"),
    alphaMax: Number(params.get("alpha_max") ?? "1.0"),
  };
}

export function bootstrap(doc: Document = document): SessionController {
  const params = new URLSearchParams(doc.defaultView?.location.search ?? "");
  const base = params.get("api") ?? "";
  const client = new ApiClient(base);
  const axis = axisFromParams(params);

  const root = doc.getElementById("app");
  if (root === null) throw new Error("missing #app element");
  const toolbar = doc.createElement("div");
  toolbar.className = "toolbar";
  const sessionRoot = doc.createElement("div");
  sessionRoot.className = "session-root";
  root.append(toolbar, sessionRoot);

  const toast = doc.createElement("div");
  toast.className = "toast";
  root.appendChild(toast);

  const controller = new SessionController(client, axis, sessionRoot, {
    onSessionLost: () => {
      toast.textContent = "session no longer exists; start a new one";
    },
    onError: (message) => {
      toast.textContent = `server error: ${message}`;
    },
  });

  const newButton = doc.createElement("button");
  newButton.textContent = "New session";
  newButton.addEventListener("click", () => {
    toast.textContent = "";
    void controller.start();
  });
  toolbar.appendChild(newButton);

  controller.render();
  return controller;
}

if (typeof window !== "undefined" && typeof document !== "undefined") {
  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", () => bootstrap());
  } else {
    bootstrap();
  }
}
