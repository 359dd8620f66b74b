"""Knowledge-gradient acquisition over the joint posteriors.

The quantity being improved is U* = max_p E[U(p, h(p); w)], the best expected
Chebyshev utility achievable on a privacy grid under the current front and
preference posteriors.  The knowledge gradient of a candidate action (show a
hypothetical curve, compare a pair, or evaluate a privacy level) is the
expected increase in U* after conditioning on the action's simulated outcome.

Because posterior updates only reweight fixed particles, U* under any
reweighting is a matrix-vector product against matrices precomputed once per
acquisition round:

* ``M[i, r]`` = front-averaged utility of grid point i under pref particle r,
* ``N[i, b]`` = pref-averaged utility of grid point i under front particle b.

Both are assembled in O(grid * particles * log) time by exploiting that
min(p / w1, alpha / w2) is piecewise linear in alpha with a single knot.

Choice-outcome KG is computed by exact enumeration when the query has few
options and by Monte-Carlo simulation of the Boltzmann user otherwise;
single-simulation deltas may be negative even though the exact KG never is.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .front import (
    CurveKind,
    FrontParams,
    FrontPosterior,
    FrontPrior,
    curve_values,
    default_prior,
    posterior_mean_curve,
)
from .preference import (
    CurveQuery,
    PairQuery,
    PrefPosterior,
    Query,
    TradeOffPoint,
    choice_log_prob_matrix,
    make_curve_query,
)

__all__ = [
    "AcquisitionConfig",
    "KgResult",
    "UtilityLandscape",
    "expected_utility",
    "max_expected_utility",
    "kg_curve",
    "kg_pair",
    "kg_privacy",
    "kg_choice_exact",
    "kg_choice_simulated",
    "select_next_curve",
    "select_next_privacy",
    "select_next_pair",
    "random_curve",
    "random_pair",
    "Selection",
]

LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class AcquisitionConfig:
    """Grid sizes, simulation counts and the learner's choice temperature."""

    p_grid_size: int = 201
    num_sims: int = 64
    num_curve_candidates: int = 16
    num_p_candidates: int = 33
    num_pair_candidates: int = 16
    exact_enumeration_max_q: int = 4
    T: float = 0.2

    def __post_init__(self):
        for name in (
            "p_grid_size",
            "num_sims",
            "num_curve_candidates",
            "num_p_candidates",
            "num_pair_candidates",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.p_grid_size < 2:
            raise ValueError("p_grid_size must be >= 2")
        if self.T <= 0:
            raise ValueError("temperature must be > 0")


@dataclass(frozen=True)
class KgResult:
    """KG estimate for one candidate, with its per-outcome diagnostics.

    For simulated estimates ``kg_value`` is the plain mean of ``deltas``.
    For exact enumeration ``deltas`` holds one entry per possible outcome and
    ``outcome_probs`` their predictive probabilities; ``kg_value`` is their
    dot product.
    """

    candidate: object
    kg_value: float
    deltas: np.ndarray
    outcome_probs: np.ndarray | None = None


@dataclass(frozen=True)
class Selection:
    """Argmax-KG choice among evaluated candidates."""

    choice: object
    results: tuple[KgResult, ...]

    @property
    def best_kg(self) -> float:
        return max(r.kg_value for r in self.results)


class UtilityLandscape:
    """Expected-utility grid machinery shared by one acquisition round.

    Immutable with respect to the posteriors it was built from; reweighted
    copies are evaluated by matrix products, so the real posteriors are never
    touched during KG simulation.
    """

    def __init__(
        self,
        front_post: FrontPosterior,
        pref_post: PrefPosterior,
        p_grid_size: int,
    ):
        self.front_post = front_post
        self.pref_post = pref_post
        self.p_grid = np.linspace(0.0, 1.0, p_grid_size)
        self.alpha = np.clip(
            curve_values(self.p_grid, front_post.kind, front_post.params_matrix), 0.0, 1.0
        )  # (G, B)
        self.front_w = front_post.weights
        self.pref_vals = pref_post.weights_matrix
        self.pref_w = pref_post.weights
        self._pref_matrix: np.ndarray | None = None
        self._front_matrix: np.ndarray | None = None

    # -- matrices ----------------------------------------------------------

    @property
    def pref_matrix(self) -> np.ndarray:
        """M[i, r]: utility at grid point i under pref particle r, front-averaged."""
        if self._pref_matrix is None:
            G, _ = self.alpha.shape
            w1 = self.pref_vals[:, 0]
            w2 = self.pref_vals[:, 1]
            ratio = w2 / w1
            M = np.empty((G, len(w1)))
            for i in range(G):
                a = self.alpha[i]
                order = np.argsort(a)
                a_sorted = a[order]
                wb = self.front_w[order]
                cum_w = np.concatenate(([0.0], np.cumsum(wb)))
                cum_wa = np.concatenate(([0.0], np.cumsum(wb * a_sorted)))
                # min(t, a) averaged over front particles, t = p * w2 / w1
                t = self.p_grid[i] * ratio
                idx = np.searchsorted(a_sorted, t, side="right")
                M[i] = (cum_wa[idx] + t * (cum_w[-1] - cum_w[idx])) / w2
            self._pref_matrix = M
        return self._pref_matrix

    @property
    def front_matrix(self) -> np.ndarray:
        """N[i, b]: utility at grid point i under front particle b, pref-averaged."""
        if self._front_matrix is None:
            G, B = self.alpha.shape
            w1 = self.pref_vals[:, 0]
            w2 = self.pref_vals[:, 1]
            N = np.empty((G, B))
            for i in range(G):
                # Each pref particle contributes min(c_r, d_r * a): a plateau
                # once a passes the knot t_r = c_r / d_r, a line before it.
                t = self.p_grid[i] * w2 / w1
                order = np.argsort(t)
                t_sorted = t[order]
                plateau = (self.pref_w * self.p_grid[i] / w1)[order]
                slope = (self.pref_w / w2)[order]
                cum_plateau = np.concatenate(([0.0], np.cumsum(plateau)))
                cum_slope = np.concatenate(([0.0], np.cumsum(slope)))
                a = self.alpha[i]
                idx = np.searchsorted(t_sorted, a, side="right")
                N[i] = cum_plateau[idx] + (cum_slope[-1] - cum_slope[idx]) * a
            self._front_matrix = N
        return self._front_matrix

    # -- maximizations -----------------------------------------------------

    def u_star(self) -> tuple[float, float]:
        """(p*, U*) under the current posterior weights; ties go to smaller p."""
        expected = self.pref_matrix @ self.pref_w
        i = int(np.argmax(expected))
        return float(self.p_grid[i]), float(expected[i])

    def u_star_for_pref(self, pref_weights: np.ndarray) -> np.ndarray:
        """Max expected utility for each column of reweighted pref posteriors.

        ``pref_weights`` may be (R,) or (R, S) for S reweightings at once.
        """
        expected = self.pref_matrix @ pref_weights
        return expected.max(axis=0)

    def u_star_for_front(self, front_weights: np.ndarray) -> np.ndarray:
        expected = self.front_matrix @ front_weights
        return expected.max(axis=0)


def expected_utility(p: float, front_post: FrontPosterior, pref_post: PrefPosterior) -> float:
    """E[U(p, h(p); w)] under independent front and preference posteriors.

    Direct double sum over particles; the utility of each point uses the
    clamped curve value, so hypothetical accuracies outside [0, 1] score as
    their nearest attainable value.
    """
    alpha = np.clip(
        curve_values(np.array([p]), front_post.kind, front_post.params_matrix)[0], 0.0, 1.0
    )  # (B,)
    w = pref_post.weights_matrix
    u = np.minimum(p / w[:, 0][None, :], alpha[:, None] / w[:, 1][None, :])  # (B, R)
    return float(front_post.weights @ u @ pref_post.weights)


def max_expected_utility(
    front_post: FrontPosterior, pref_post: PrefPosterior, cfg: AcquisitionConfig
) -> tuple[float, float]:
    """Grid argmax of expected utility; returns (p*, U*)."""
    return UtilityLandscape(front_post, pref_post, cfg.p_grid_size).u_star()


# ---------------------------------------------------------------------------
# Choice-outcome KG (curves and pairs)


def _kg_choice_exact(
    query: Query, landscape: UtilityLandscape, T: float
) -> tuple[float, np.ndarray, np.ndarray]:
    log_probs = choice_log_prob_matrix(query, landscape.pref_vals, T)  # (R, q)
    log_w = landscape.pref_post.log_weights
    log_pred = logsumexp(log_w[:, None] + log_probs, axis=0)  # (q,)
    base = landscape.u_star_for_pref(landscape.pref_w)
    # Outcomes with zero predictive probability contribute nothing; give them
    # the unchanged weights so the division below stays finite.
    safe_log_pred = np.where(np.isfinite(log_pred), log_pred, 0.0)
    reweighted = np.exp(log_w[:, None] + log_probs - safe_log_pred[None, :])  # (R, q)
    reweighted[:, ~np.isfinite(log_pred)] = np.exp(log_w)[:, None]
    u_after = landscape.u_star_for_pref(reweighted)  # (q,)
    pred = np.exp(log_pred)
    pred /= pred.sum()
    deltas = u_after - float(base)
    return float(pred @ deltas), deltas, pred


def _kg_choice_simulated(
    query: Query,
    landscape: UtilityLandscape,
    T: float,
    num_sims: int,
    rng: np.random.Generator,
) -> tuple[float, np.ndarray]:
    log_probs = choice_log_prob_matrix(query, landscape.pref_vals, T)  # (R, q)
    probs_cum = np.cumsum(np.exp(log_probs), axis=1)
    base = float(landscape.u_star_for_pref(landscape.pref_w))
    # One simulation: draw w from the pref posterior, let the simulated user
    # answer, reweight a copy by that answer's likelihood, re-maximize.
    r_idx = landscape.pref_post.particles.sample_index(rng, size=num_sims)
    u = rng.random(num_sims)
    rows = probs_cum[r_idx]  # (S, q)
    choices = np.minimum((rows < u[:, None] * rows[:, -1:]).sum(axis=1), query.q - 1)
    log_w = landscape.pref_post.log_weights
    new_lw = log_w[:, None] + log_probs[:, choices]  # (R, S)
    new_w = np.exp(new_lw - logsumexp(new_lw, axis=0)[None, :])
    u_after = landscape.u_star_for_pref(new_w)  # (S,)
    deltas = u_after - base
    return float(deltas.mean()), deltas


def _kg_choice(
    query: Query,
    front_post: FrontPosterior,
    pref_post: PrefPosterior,
    cfg: AcquisitionConfig,
    rng: np.random.Generator,
    landscape: UtilityLandscape | None = None,
) -> KgResult:
    land = landscape or UtilityLandscape(front_post, pref_post, cfg.p_grid_size)
    if query.q <= cfg.exact_enumeration_max_q:
        kg, deltas, pred = _kg_choice_exact(query, land, cfg.T)
        return KgResult(candidate=query, kg_value=kg, deltas=deltas, outcome_probs=pred)
    kg, deltas = _kg_choice_simulated(query, land, cfg.T, cfg.num_sims, rng)
    return KgResult(candidate=query, kg_value=kg, deltas=deltas)


def kg_choice_exact(
    query: Query,
    front_post: FrontPosterior,
    pref_post: PrefPosterior,
    cfg: AcquisitionConfig,
    landscape: UtilityLandscape | None = None,
) -> KgResult:
    """KG by exact enumeration over the query's possible outcomes."""
    land = landscape or UtilityLandscape(front_post, pref_post, cfg.p_grid_size)
    kg, deltas, pred = _kg_choice_exact(query, land, cfg.T)
    return KgResult(candidate=query, kg_value=kg, deltas=deltas, outcome_probs=pred)


def kg_choice_simulated(
    query: Query,
    front_post: FrontPosterior,
    pref_post: PrefPosterior,
    cfg: AcquisitionConfig,
    rng: np.random.Generator,
    landscape: UtilityLandscape | None = None,
) -> KgResult:
    """KG by Monte-Carlo simulation of the Boltzmann user (num_sims draws)."""
    land = landscape or UtilityLandscape(front_post, pref_post, cfg.p_grid_size)
    kg, deltas = _kg_choice_simulated(query, land, cfg.T, cfg.num_sims, rng)
    return KgResult(candidate=query, kg_value=kg, deltas=deltas)


def kg_curve(
    candidate: CurveQuery,
    front_post: FrontPosterior,
    pref_post: PrefPosterior,
    cfg: AcquisitionConfig,
    rng: np.random.Generator,
    landscape: UtilityLandscape | None = None,
) -> KgResult:
    """Expected U* improvement from showing ``candidate`` to the user."""
    return _kg_choice(candidate, front_post, pref_post, cfg, rng, landscape)


def kg_pair(
    y_a: TradeOffPoint,
    y_b: TradeOffPoint,
    front_post: FrontPosterior,
    pref_post: PrefPosterior,
    cfg: AcquisitionConfig,
    rng: np.random.Generator,
    landscape: UtilityLandscape | None = None,
) -> KgResult:
    """Expected U* improvement from a two-option comparison."""
    return _kg_choice(PairQuery(points=(y_a, y_b)), front_post, pref_post, cfg, rng, landscape)


# ---------------------------------------------------------------------------
# Privacy-evaluation KG


def kg_privacy(
    candidate_p: float,
    front_post: FrontPosterior,
    pref_post: PrefPosterior,
    cfg: AcquisitionConfig,
    rng: np.random.Generator,
    landscape: UtilityLandscape | None = None,
) -> KgResult:
    """Expected U* improvement from one oracle evaluation at ``candidate_p``.

    Each simulation draws a front particle, fantasizes a noisy accuracy from
    it, reweights a copy of the front posterior by that observation and
    re-maximizes expected utility.
    """
    if not (0.0 <= candidate_p <= 1.0):
        raise ValueError(f"candidate privacy level must lie in [0, 1], got {candidate_p}")
    land = landscape or UtilityLandscape(front_post, pref_post, cfg.p_grid_size)
    mu = curve_values(np.array([candidate_p]), front_post.kind, front_post.params_matrix)[0]
    sig = front_post.sigmas
    base = float(land.u_star_for_front(land.front_w))
    b_idx = front_post.particles.sample_index(rng, size=cfg.num_sims)
    alpha_sim = mu[b_idx] + sig[b_idx] * rng.standard_normal(cfg.num_sims)  # (S,)
    z = (alpha_sim[None, :] - mu[:, None]) / sig[:, None]  # (B, S)
    loglik = -0.5 * z * z - np.log(sig)[:, None] - 0.5 * LOG_2PI
    new_lw = front_post.log_weights[:, None] + loglik
    new_w = np.exp(new_lw - logsumexp(new_lw, axis=0)[None, :])
    deltas = land.u_star_for_front(new_w) - base
    return KgResult(candidate=float(candidate_p), kg_value=float(deltas.mean()), deltas=deltas)


# ---------------------------------------------------------------------------
# Candidate generation and argmax selectors


def _child_rngs(rng: np.random.Generator, n: int) -> list[np.random.Generator]:
    # Independently seeded streams so candidate evaluations are reproducible
    # regardless of evaluation order or parallel scheduling.
    seed = int(rng.integers(0, 2**63 - 1))
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(n)]


def _candidate_params(
    front_post: FrontPosterior,
    n: int,
    rng: np.random.Generator,
    prior: FrontPrior | None,
) -> list[FrontParams]:
    """Half posterior resamples (exploit), half fresh prior draws (explore)."""
    prior = prior if prior is not None else default_prior(front_post.kind)
    n_post = n // 2
    out: list[FrontParams] = []
    for i in front_post.particles.sample_index(rng, size=n_post):
        out.append(front_post.particle_at(int(i))[0])
    for row in prior.sample(rng, n - n_post):
        out.append(FrontParams(kind=front_post.kind, L=row[0], k=row[1], b=row[2], c=row[3]))
    return out


def select_next_curve(
    front_post: FrontPosterior,
    pref_post: PrefPosterior,
    cfg: AcquisitionConfig,
    rng: np.random.Generator,
    q: int = 101,
    prior: FrontPrior | None = None,
) -> Selection:
    """Evaluate KG on candidate hypothetical curves, return the argmax.

    Ties (including the all-zero KG of a point-mass preference posterior)
    resolve to the first candidate evaluated.
    """
    land = UtilityLandscape(front_post, pref_post, cfg.p_grid_size)
    params = _candidate_params(front_post, cfg.num_curve_candidates, rng, prior)
    rngs = _child_rngs(rng, len(params))
    results = tuple(
        kg_curve(make_curve_query(par, q), front_post, pref_post, cfg, r, landscape=land)
        for par, r in zip(params, rngs)
    )
    best = int(np.argmax([res.kg_value for res in results]))
    return Selection(choice=results[best].candidate, results=results)


def select_next_privacy(
    front_post: FrontPosterior,
    pref_post: PrefPosterior,
    cfg: AcquisitionConfig,
    rng: np.random.Generator,
) -> Selection:
    """Evaluate KG on a uniform grid of privacy levels, return the argmax."""
    land = UtilityLandscape(front_post, pref_post, cfg.p_grid_size)
    grid = np.linspace(0.0, 1.0, cfg.num_p_candidates)
    rngs = _child_rngs(rng, len(grid))
    results = tuple(
        kg_privacy(float(p), front_post, pref_post, cfg, r, landscape=land)
        for p, r in zip(grid, rngs)
    )
    best = int(np.argmax([res.kg_value for res in results]))
    return Selection(choice=results[best].candidate, results=results)


def _mean_front_points(front_post: FrontPosterior, q: int) -> list[TradeOffPoint]:
    band = posterior_mean_curve(front_post, np.linspace(0.0, 1.0, q))
    alpha = np.clip(band.mean, 0.0, 1.0)
    return [TradeOffPoint(p=float(p), alpha=float(a)) for p, a in zip(band.p_grid, alpha)]


def random_pair(front_post: FrontPosterior, rng: np.random.Generator, q: int = 101) -> PairQuery:
    """Uniformly random distinct pair from the discretized posterior-mean front."""
    points = _mean_front_points(front_post, q)
    i, j = rng.choice(q, size=2, replace=False)
    i, j = (int(min(i, j)), int(max(i, j)))
    return PairQuery(points=(points[i], points[j]))


def random_curve(
    kind: CurveKind,
    rng: np.random.Generator,
    q: int = 101,
    prior: FrontPrior | None = None,
) -> CurveQuery:
    """A hypothetical curve drawn from the prior, discretized for display."""
    prior = prior if prior is not None else default_prior(kind)
    row = prior.sample(rng, 1)[0]
    params = FrontParams(kind=kind, L=row[0], k=row[1], b=row[2], c=row[3])
    return make_curve_query(params, q)


def select_next_pair(
    front_post: FrontPosterior,
    pref_post: PrefPosterior,
    cfg: AcquisitionConfig,
    rng: np.random.Generator,
    q: int = 101,
) -> Selection:
    """KG-argmax over random candidate pairs from the posterior-mean front."""
    land = UtilityLandscape(front_post, pref_post, cfg.p_grid_size)
    points = _mean_front_points(front_post, q)
    rngs = _child_rngs(rng, cfg.num_pair_candidates)
    results = []
    for child in rngs:
        i, j = rng.choice(q, size=2, replace=False)
        i, j = (int(min(i, j)), int(max(i, j)))
        results.append(
            kg_pair(points[i], points[j], front_post, pref_post, cfg, child, landscape=land)
        )
    best = int(np.argmax([res.kg_value for res in results]))
    return Selection(choice=results[best].candidate, results=tuple(results))
