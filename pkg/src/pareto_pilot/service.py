"""HTTP session API for live human-in-the-loop elicitation.

One server process hosts many independent sessions.  Each session walks the
same alternation the simulated loop uses -- evaluate, choose, evaluate,
choose -- except the human paces evaluations explicitly and supplies the
choices.  The points served for a query are exactly the points the
likelihood update conditions on, value for value.

In live mode there is no ground truth, so preference error and regret are
omitted from the state payload rather than fabricated.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from contextlib import asynccontextmanager
from dataclasses import replace
from pathlib import Path
from typing import Any

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .acquisition import UtilityLandscape
from .config import ConfigError, SessionConfig, config_to_dict, merge_overrides, parse_config
from .front import effective_sample_size, posterior_mean_curve
from .preference import CurveQuery
from .session import SessionState, StepKind, init_session, next_query, run_step

__all__ = ["create_app", "LiveSession"]

STATE_GRID_SIZE = 101


class ApiError(Exception):
    def __init__(self, status_code: int, message: str):
        super().__init__(message)
        self.status_code = status_code
        self.message = message


class LiveSession:
    """One human-paced session: state machine plus its lock."""

    def __init__(self, session_id: str, config: SessionConfig, seed: int):
        self.id = session_id
        self.created_at = time.time()
        self.lock = threading.Lock()
        self.seed = seed
        self.state: SessionState = init_session(config, np.random.default_rng(seed))
        self.status = "AwaitingEvaluation"

    # -- steps -------------------------------------------------------------

    def evaluate(self) -> SessionState:
        if self.status != "AwaitingEvaluation":
            raise ApiError(409, f"session is {self.status}, not AwaitingEvaluation")
        self.status = "Running"
        try:
            state = run_step(self.state, StepKind.EVALUATE, _reject_choice)
            # Pre-compute the query the next interaction will show, so the
            # /query payload is a pure read of what /choice will condition on.
            state = replace(state, pending_query=next_query(state))
            self.state = state
        except Exception:
            self.status = "AwaitingEvaluation"
            raise
        self.status = "AwaitingChoice"
        return self.state

    def choose(self, chosen_index: int) -> SessionState:
        if self.status != "AwaitingChoice":
            raise ApiError(409, f"session is {self.status}, not AwaitingChoice")
        query = self.state.pending_query
        if not isinstance(chosen_index, int) or isinstance(chosen_index, bool):
            raise ApiError(400, "chosen_index must be an integer")
        if not (0 <= chosen_index < query.q):
            raise ApiError(400, f"chosen_index {chosen_index} out of range [0, {query.q})")
        self.status = "Running"
        try:
            self.state = run_step(
                self.state, StepKind.INTERACT, lambda _query, _rng: chosen_index
            )
        except Exception:
            self.status = "AwaitingChoice"
            raise
        if self.state.step >= self.state.config.loop.num_steps:
            self.status = "Done"
        else:
            self.status = "AwaitingEvaluation"
        return self.state

    # -- payload builders ----------------------------------------------------

    def query_payload(self) -> dict[str, Any]:
        if self.status != "AwaitingChoice" or self.state.pending_query is None:
            raise ApiError(409, f"session is {self.status}; no query is pending")
        query = self.state.pending_query
        if isinstance(query, CurveQuery):
            pars = query.params
            curve = {"kind": pars.kind.value, "L": pars.L, "k": pars.k, "b": pars.b, "c": pars.c}
        else:
            curve = None
        return {
            "curve": curve,
            "points": [{"p": pt.p, "alpha": pt.alpha} for pt in query.points],
            "step": self.state.step,
        }

    def pref_summary(self) -> dict[str, Any]:
        post = self.state.pref_post
        return {
            "mean_w": [float(x) for x in post.mean()],
            "ess": post.particles.effective_sample_size(),
        }

    def front_summary(self) -> dict[str, Any]:
        return {
            "ess": effective_sample_size(self.state.front_post),
            "observations": len(self.state.obs_history),
        }

    def state_payload(self) -> dict[str, Any]:
        state = self.state
        norm = state.config.normalization
        grid = np.linspace(0.0, 1.0, STATE_GRID_SIZE)
        band = posterior_mean_curve(state.front_post, grid)
        land = UtilityLandscape(
            state.front_post, state.pref_post, state.config.acquisition.p_grid_size
        )
        p_star, u_star = land.u_star()
        trace = []
        for m in state.metric_trace:
            entry = {"step": m.step, "kind": m.kind, "p_star": m.p_star, "u_star": m.u_star}
            if m.pref_error is not None:
                entry["pref_error"] = m.pref_error
            if m.regret is not None:
                entry["regret"] = m.regret
            trace.append(entry)
        return {
            "step": state.step,
            "status": self.status,
            "obs_history": [{"p": o.p, "alpha": o.alpha} for o in state.obs_history],
            "choice_count": len(state.choice_history),
            "posterior_mean_curve": {
                "p_grid": [float(p) for p in band.p_grid],
                "mean": [float(v) for v in band.mean],
            },
            "credible_band": {
                "lower": [float(v) for v in band.lower],
                "upper": [float(v) for v in band.upper],
                "degenerate": band.degenerate,
            },
            "mean_w": self.pref_summary()["mean_w"],
            "p_star": p_star,
            "p_star_denormalized": norm.denormalize_privacy(p_star),
            "u_star": u_star,
            "metric_trace": trace,
        }

    def snapshot(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "seed": self.seed,
            "created_at": self.created_at,
            "status": self.status,
            "config": config_to_dict(self.state.config),
            "state": self.state_payload(),
        }


def _reject_choice(_query, _rng) -> int:  # pragma: no cover - never called
    raise AssertionError("evaluate steps must not request a choice")


def create_app(base_config: SessionConfig, snapshot_dir: str | None = None) -> FastAPI:
    sessions: dict[str, LiveSession] = {}
    registry_lock = threading.Lock()
    entropy = np.random.SeedSequence()

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        if snapshot_dir:
            out = Path(snapshot_dir)
            out.mkdir(parents=True, exist_ok=True)
            with registry_lock:
                for session in sessions.values():
                    with session.lock:
                        path = out / f"session_{session.id}.json"
                        path.write_text(
                            json.dumps(session.snapshot(), indent=2, sort_keys=True),
                            encoding="utf-8",
                        )

    app = FastAPI(title="pareto-pilot session API", lifespan=lifespan)
    app.state.sessions = sessions

    @app.exception_handler(ApiError)
    async def handle_api_error(_request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status_code, content={"error": exc.message})

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(_request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(ValueError)
    async def handle_value_error(_request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    def get_session(session_id: str) -> LiveSession:
        with registry_lock:
            session = sessions.get(session_id)
        if session is None:
            raise ApiError(404, f"unknown session {session_id}")
        return session

    @app.get("/healthz")
    def healthz():
        return {"ok": True}

    @app.post("/sessions")
    def create_session(body: dict | None = None):
        body = body or {}
        if not isinstance(body, dict):
            raise ApiError(400, "request body must be a JSON object")
        seed = body.pop("seed", None)
        if seed is None:
            seed = int(entropy.spawn(1)[0].generate_state(1)[0])
        elif not isinstance(seed, int) or isinstance(seed, bool):
            raise ApiError(400, "seed must be an integer")
        try:
            merged = merge_overrides(config_to_dict(base_config), body)
            config = parse_config(merged)
        except ConfigError as exc:
            raise ApiError(400, f"invalid config override: {exc}") from exc
        session = LiveSession(uuid.uuid4().hex, config, seed)
        with registry_lock:
            sessions[session.id] = session
        return {"id": session.id, "status": session.status}

    @app.post("/sessions/{session_id}/evaluate")
    def evaluate(session_id: str):
        session = get_session(session_id)
        with session.lock:
            state = session.evaluate()
            obs = state.obs_history[-1]
            return {
                "status": session.status,
                "observation": {
                    "p": obs.p,
                    "alpha": obs.alpha,
                    "epsilon": state.config.normalization.denormalize_privacy(obs.p),
                },
                "front_summary": session.front_summary(),
            }

    @app.get("/sessions/{session_id}/query")
    def get_query(session_id: str):
        session = get_session(session_id)
        with session.lock:
            return session.query_payload()

    @app.post("/sessions/{session_id}/choice")
    def post_choice(session_id: str, body: dict):
        session = get_session(session_id)
        if "chosen_index" not in body:
            raise ApiError(400, "body must contain chosen_index")
        with session.lock:
            session.choose(body["chosen_index"])
            return {"status": session.status, "pref_summary": session.pref_summary()}

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        session = get_session(session_id)
        with session.lock:
            return session.state_payload()

    return app
