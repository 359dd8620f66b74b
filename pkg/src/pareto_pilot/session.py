"""The interleaved elicitation loop, its metrics, and batch experiments.

A session alternates two step kinds, starting with an evaluation:

* Evaluate: pick the next privacy level (KG or random), ask the oracle for
  the best accuracy there, reweight the front posterior.
* Interact: pick the next query (KG curve, random curve, KG pair or random
  pair), observe the decision-maker's choice, reweight the preference
  posterior.

After every step the current recommendation (p*, U*) is recorded, plus
preference error and regret whenever ground truth is available (simulation
only).  States are immutable; a step returns a new state sharing the
advanced random generator, so one session is strictly single-writer while
distinct sessions are independent.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .acquisition import (
    UtilityLandscape,
    random_curve,
    random_pair,
    select_next_curve,
    select_next_pair,
    select_next_privacy,
)
from .config import SessionConfig, config_to_dict
from .front import (
    FrontObservation,
    FrontParams,
    FrontPosterior,
    curve_values,
    init_posterior,
    maybe_resample,
    update_front_posterior,
)
from .oracles import ClosedFormLogisticOracle, OracleSpec, TabulatedOracle, oracle_eval
from .preference import (
    ChoiceRecord,
    PrefPosterior,
    PreferenceWeights,
    Query,
    init_pref_posterior,
    pref_error,
    sample_weight_prior,
    simulate_choice,
    update_pref_posterior,
)
from .scaling import NormalizationSpec

__all__ = [
    "StepKind",
    "TruthSpec",
    "MetricPoint",
    "SessionState",
    "RunRecord",
    "BatchReport",
    "UserAbort",
    "SessionSuspended",
    "init_session",
    "run_step",
    "run_step_adaptive",
    "run_loop",
    "run_batch",
    "compute_regret",
    "make_simulated_user",
    "truth_front_from_oracle",
    "run_preference_study",
]


class StepKind(str, enum.Enum):
    EVALUATE = "evaluate"
    INTERACT = "interact"


class UserAbort(Exception):
    """Raised by a choice provider that cannot answer (timeout, cancel)."""


class SessionSuspended(Exception):
    """A step could not complete; the session state is unchanged."""


UserProvider = Callable[[Query, np.random.Generator], int]


@dataclass(frozen=True)
class TruthSpec:
    """Ground truth for simulation metrics: true weights and true front."""

    w_true: PreferenceWeights
    front: Callable[[np.ndarray], np.ndarray]  # normalized p -> normalized accuracy


def truth_front_from_oracle(
    oracle: OracleSpec, norm: NormalizationSpec
) -> Callable[[np.ndarray], np.ndarray] | None:
    """Noise-free normalized trade-off curve of an oracle, if it has one."""
    if isinstance(oracle, (ClosedFormLogisticOracle, TabulatedOracle)):

        def front(p: np.ndarray) -> np.ndarray:
            p_arr = np.atleast_1d(np.asarray(p, dtype=float))
            eps = norm.denormalize_privacy(p_arr)
            raw = np.array([oracle.raw_accuracy(float(e)) for e in eps])
            return norm.normalize_accuracy(raw)

        return front
    return None


def truth_front_from_params(params: FrontParams) -> Callable[[np.ndarray], np.ndarray]:
    def front(p: np.ndarray) -> np.ndarray:
        p_arr = np.atleast_1d(np.asarray(p, dtype=float))
        return curve_values(p_arr, params.kind, params.as_array()[None, :])[:, 0]

    return front


@dataclass(frozen=True)
class MetricPoint:
    step: int
    kind: str
    p_star: float
    u_star: float
    pref_error: float | None
    regret: float | None

    def to_json_dict(self) -> dict:
        return {
            "step": self.step,
            "kind": self.kind,
            "p_star": self.p_star,
            "u_star": self.u_star,
            "pref_error": self.pref_error,
            "regret": self.regret,
        }


@dataclass(frozen=True)
class SessionState:
    config: SessionConfig
    front_post: FrontPosterior
    pref_post: PrefPosterior
    obs_history: tuple[FrontObservation, ...]
    choice_history: tuple[ChoiceRecord, ...]
    metric_trace: tuple[MetricPoint, ...]
    step: int
    rng: np.random.Generator
    truth: TruthSpec | None = None
    pending_query: Query | None = None

    @property
    def next_step_kind(self) -> StepKind:
        return StepKind.EVALUATE if self.step % 2 == 0 else StepKind.INTERACT


def init_session(
    config: SessionConfig,
    rng: np.random.Generator,
    truth: TruthSpec | None = None,
) -> SessionState:
    front_post = init_posterior(config.kind, config.loop.front_particles, rng, config.prior)
    pref_post = init_pref_posterior(config.loop.pref_particles, rng, config.loop.dirichlet)
    return SessionState(
        config=config,
        front_post=front_post,
        pref_post=pref_post,
        obs_history=(),
        choice_history=(),
        metric_trace=(),
        step=0,
        rng=rng,
        truth=truth,
    )


def make_simulated_user(w_true: PreferenceWeights, T: float) -> UserProvider:
    """Boltzmann-rational simulated decision-maker with true weights."""

    def choose(query: Query, rng: np.random.Generator) -> int:
        return simulate_choice(query, w_true, T, rng)

    return choose


# ---------------------------------------------------------------------------
# Metrics


def _true_utilities(
    truth: TruthSpec, p_grid: np.ndarray
) -> np.ndarray:
    alpha = np.clip(truth.front(p_grid), 0.0, 1.0)
    w = truth.w_true
    return np.minimum(p_grid / w.w1, alpha / w.w2)


def _regret_at(p_star: float, truth: TruthSpec, p_grid: np.ndarray) -> float:
    utilities = _true_utilities(truth, p_grid)
    best = float(utilities.max())
    i = int(np.argmin(np.abs(p_grid - p_star)))
    return best - float(utilities[i])


def compute_regret(state: SessionState, truth: TruthSpec | None = None) -> float:
    """True-utility gap between the genuine optimum and the recommendation.

    Needs ground truth; live sessions have none and get an error.
    """
    truth = truth if truth is not None else state.truth
    if truth is None:
        raise ValueError("regret is unavailable without ground truth (live mode)")
    land = UtilityLandscape(state.front_post, state.pref_post, state.config.acquisition.p_grid_size)
    p_star, _ = land.u_star()
    return _regret_at(p_star, truth, land.p_grid)


def _metric_point(
    state: SessionState, kind: StepKind, front_post: FrontPosterior, pref_post: PrefPosterior
) -> MetricPoint:
    cfg = state.config
    land = UtilityLandscape(front_post, pref_post, cfg.acquisition.p_grid_size)
    p_star, u_star = land.u_star()
    err = reg = None
    if state.truth is not None:
        err = pref_error(pref_post, state.truth.w_true)
        reg = _regret_at(p_star, state.truth, land.p_grid)
    return MetricPoint(
        step=state.step + 1,
        kind=kind.value,
        p_star=p_star,
        u_star=u_star,
        pref_error=err,
        regret=reg,
    )


# ---------------------------------------------------------------------------
# Stepping


def next_query(state: SessionState) -> Query:
    """The query an Interact step will present, chosen by the configured strategy."""
    cfg = state.config
    strategy = cfg.loop.curve_strategy
    if strategy == "kg":
        return select_next_curve(
            state.front_post,
            state.pref_post,
            cfg.acquisition,
            state.rng,
            q=cfg.user_model.q,
            prior=cfg.prior,
        ).choice
    if strategy == "random":
        return random_curve(cfg.kind, state.rng, q=cfg.user_model.q, prior=cfg.prior)
    if strategy == "pair_kg":
        return select_next_pair(
            state.front_post, state.pref_post, cfg.acquisition, state.rng, q=cfg.user_model.q
        ).choice
    if strategy == "random_pair":
        return random_pair(state.front_post, state.rng, q=cfg.user_model.q)
    raise ValueError(f"unknown curve strategy {strategy!r}")  # pragma: no cover


def _next_privacy(state: SessionState) -> float:
    cfg = state.config
    if cfg.loop.privacy_strategy == "kg":
        return float(
            select_next_privacy(state.front_post, state.pref_post, cfg.acquisition, state.rng).choice
        )
    return float(state.rng.uniform(0.0, 1.0))


def _evaluate_with(state: SessionState, p_next: float) -> SessionState:
    cfg = state.config
    obs = oracle_eval(cfg.oracle, cfg.normalization, p_next, state.rng)
    front_post = update_front_posterior(state.front_post, obs)
    front_post = maybe_resample(front_post, state.rng, cfg.loop.resample_fraction)
    point = _metric_point(state, StepKind.EVALUATE, front_post, state.pref_post)
    return replace(
        state,
        front_post=front_post,
        obs_history=state.obs_history + (obs,),
        metric_trace=state.metric_trace + (point,),
        step=state.step + 1,
        pending_query=None,
    )


def _interact_with(state: SessionState, query: Query, user: UserProvider) -> SessionState:
    cfg = state.config
    try:
        idx = user(query, state.rng)
    except UserAbort as exc:
        raise SessionSuspended(str(exc) or "choice provider aborted") from exc
    record = ChoiceRecord(query=query, chosen_index=int(idx))
    pref_post = update_pref_posterior(state.pref_post, record, cfg.user_model.T)
    point = _metric_point(state, StepKind.INTERACT, state.front_post, pref_post)
    return replace(
        state,
        pref_post=pref_post,
        choice_history=state.choice_history + (record,),
        metric_trace=state.metric_trace + (point,),
        step=state.step + 1,
        pending_query=None,
    )


def run_step(state: SessionState, step_kind: StepKind, user: UserProvider) -> SessionState:
    """Advance the session by one step of the given kind.

    Exactly one posterior is updated.  If the choice provider aborts, the
    step raises :class:`SessionSuspended` and the caller's state is unchanged.
    """
    if step_kind == StepKind.EVALUATE:
        return _evaluate_with(state, _next_privacy(state))
    query = state.pending_query if state.pending_query is not None else next_query(state)
    return _interact_with(state, query, user)


def run_step_adaptive(state: SessionState, user: UserProvider) -> SessionState:
    """One step of adaptive interleaving: take whichever action has larger KG.

    Both acquisition sides are evaluated; the evaluation is taken on ties so
    early steps (flat preference KG) still build the front model.
    """
    cfg = state.config
    sel_p = select_next_privacy(state.front_post, state.pref_post, cfg.acquisition, state.rng)
    sel_c = select_next_curve(
        state.front_post,
        state.pref_post,
        cfg.acquisition,
        state.rng,
        q=cfg.user_model.q,
        prior=cfg.prior,
    )
    if sel_p.best_kg >= sel_c.best_kg:
        return _evaluate_with(state, float(sel_p.choice))
    return _interact_with(state, sel_c.choice, user)


# ---------------------------------------------------------------------------
# Full runs


@dataclass(frozen=True)
class RunRecord:
    """Everything needed to reproduce and report one session run."""

    seed: int
    config: dict
    w_true: tuple[float, float] | None
    final_p_star: float
    final_u_star: float
    final_eps_star: float
    final_alpha_star: float
    metric_trace: tuple[MetricPoint, ...]

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "config": self.config,
            "w_true": list(self.w_true) if self.w_true is not None else None,
            "final": {
                "p_star": self.final_p_star,
                "u_star": self.final_u_star,
                "eps_star": self.final_eps_star,
                "alpha_star": self.final_alpha_star,
            },
            "metric_trace": [m.to_json_dict() for m in self.metric_trace],
        }

    @classmethod
    def from_json_dict(cls, raw: dict) -> "RunRecord":
        trace = tuple(
            MetricPoint(
                step=m["step"],
                kind=m["kind"],
                p_star=m["p_star"],
                u_star=m["u_star"],
                pref_error=m["pref_error"],
                regret=m["regret"],
            )
            for m in raw["metric_trace"]
        )
        return cls(
            seed=raw["seed"],
            config=raw["config"],
            w_true=tuple(raw["w_true"]) if raw["w_true"] is not None else None,
            final_p_star=raw["final"]["p_star"],
            final_u_star=raw["final"]["u_star"],
            final_eps_star=raw["final"]["eps_star"],
            final_alpha_star=raw["final"]["alpha_star"],
            metric_trace=trace,
        )


def run_loop(
    config: SessionConfig,
    seed: int,
    user: UserProvider | None = None,
    num_steps: int | None = None,
) -> RunRecord:
    """Run the full interleaved loop with a (simulated by default) user.

    Steps alternate Evaluate, Interact, Evaluate, ... for ``num_steps`` total
    steps.  With no explicit user, true preference weights are drawn from the
    Dirichlet prior and a Boltzmann-rational simulator answers queries; known
    oracles then make preference error and regret available in the trace.
    """
    num_steps = num_steps if num_steps is not None else config.loop.num_steps
    if num_steps < 1:
        raise ValueError(f"num_steps must be >= 1, got {num_steps}")
    rng = np.random.default_rng(seed)

    w_true: PreferenceWeights | None = None
    truth: TruthSpec | None = None
    if user is None:
        w_true = sample_weight_prior(rng, config.loop.dirichlet)
        user = make_simulated_user(w_true, config.simulator_T)
        front = truth_front_from_oracle(config.oracle, config.normalization)
        if front is not None:
            truth = TruthSpec(w_true=w_true, front=front)

    state = init_session(config, rng, truth=truth)
    for t in range(num_steps):
        if config.loop.adaptive_interleaving:
            state = run_step_adaptive(state, user)
        else:
            kind = StepKind.EVALUATE if t % 2 == 0 else StepKind.INTERACT
            state = run_step(state, kind, user)

    land = UtilityLandscape(state.front_post, state.pref_post, config.acquisition.p_grid_size)
    p_star, u_star = land.u_star()
    mean_alpha = float(
        np.clip(land.alpha[int(np.argmin(np.abs(land.p_grid - p_star)))] @ land.front_w, 0, 1)
    )
    return RunRecord(
        seed=seed,
        config=config_to_dict(config),
        w_true=(w_true.w1, w_true.w2) if w_true is not None else None,
        final_p_star=p_star,
        final_u_star=u_star,
        final_eps_star=config.normalization.denormalize_privacy(p_star),
        final_alpha_star=config.normalization.denormalize_accuracy(mean_alpha),
        metric_trace=state.metric_trace,
    )


@dataclass(frozen=True)
class BatchReport:
    """Per-step aggregates over seeds: mean and standard error per metric."""

    records: tuple[RunRecord, ...]
    failures: tuple[tuple[int, str], ...]
    rows: tuple[tuple[int, str, float, float, int], ...]  # (step, metric, mean, stderr, n)

    def csv_lines(self) -> list[str]:
        lines = ["step,metric,mean,stderr,n"]
        for step, metric, mean, stderr, n in self.rows:
            lines.append(f"{step},{metric},{mean:.10g},{stderr:.10g},{n}")
        return lines


def _aggregate(records: Sequence[RunRecord]) -> list[tuple[int, str, float, float, int]]:
    rows = []
    if not records:
        return rows
    num_steps = max(len(r.metric_trace) for r in records)
    for step in range(1, num_steps + 1):
        for metric in ("pref_error", "regret"):
            vals = [
                getattr(r.metric_trace[step - 1], metric)
                for r in records
                if len(r.metric_trace) >= step
                and getattr(r.metric_trace[step - 1], metric) is not None
            ]
            if not vals:
                continue
            arr = np.asarray(vals)
            n = len(arr)
            stderr = float(arr.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
            rows.append((step, metric, float(arr.mean()), stderr, n))
    return rows


def run_batch(config: SessionConfig, seeds: Sequence[int]) -> BatchReport:
    """Independent runs for every seed, aggregated per step.

    A failing seed is excluded from the aggregate and reported in
    ``failures`` rather than sinking the whole batch.
    """
    if len(seeds) == 0:
        raise ValueError("seed list must not be empty")
    records: list[RunRecord] = []
    failures: list[tuple[int, str]] = []
    for seed in seeds:
        try:
            records.append(run_loop(config, int(seed)))
        except Exception as exc:  # noqa: BLE001 - seed isolation is the point
            failures.append((int(seed), f"{type(exc).__name__}: {exc}"))
    return BatchReport(
        records=tuple(records),
        failures=tuple(failures),
        rows=tuple(_aggregate(records)),
    )


# ---------------------------------------------------------------------------
# Preference-only study (known front)


def run_preference_study(
    true_front: FrontParams,
    strategy: str,
    seeds: Sequence[int],
    n_interactions: int,
    config: SessionConfig,
    learner_T: float | None = None,
) -> np.ndarray:
    """Interaction-only sessions against a known front; returns error curves.

    The front posterior is fixed at the true curve (evaluation steps would be
    pointless), each interaction updates only the preference posterior, and
    the per-step expected weight error is recorded.

    Returns an array of shape ``(len(seeds), n_interactions)``.
    """
    learner_T = learner_T if learner_T is not None else config.user_model.T
    errors = np.empty((len(seeds), n_interactions))
    for row, seed in enumerate(seeds):
        rng = np.random.default_rng(int(seed))
        w_true = sample_weight_prior(rng, config.loop.dirichlet)
        truth = TruthSpec(w_true=w_true, front=truth_front_from_params(true_front))
        front_post = FrontPosterior.point_mass(true_front)
        cfg = replace(
            config,
            user_model=replace(config.user_model, T=learner_T),
            acquisition=replace(config.acquisition, T=learner_T),
            loop=replace(config.loop, curve_strategy=strategy),
        )
        state = SessionState(
            config=cfg,
            front_post=front_post,
            pref_post=init_pref_posterior(cfg.loop.pref_particles, rng, cfg.loop.dirichlet),
            obs_history=(),
            choice_history=(),
            metric_trace=(),
            step=1,  # odd step counter: every step is an interaction
            rng=rng,
            truth=truth,
        )
        user = make_simulated_user(w_true, config.simulator_T)
        for t in range(n_interactions):
            state = run_step(state, StepKind.INTERACT, user)
            errors[row, t] = state.metric_trace[-1].pref_error
    return errors
