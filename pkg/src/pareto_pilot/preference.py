"""Utilities over trade-offs and Boltzmann-rational choice modeling.

The decision-maker's satisfaction with a normalized trade-off y = (p, alpha)
is scored by a Chebyshev scalarization U(y; w) = min(p / w1, alpha / w2) with
positive weights summing to one.  Choices among the q discretized points of a
presented curve follow a Boltzmann-rational model: pick probability
proportional to exp(U / T).  The posterior over weights is importance
sampling from a Dirichlet prior, reweighted by choice likelihoods.

Linear and exponential-linear utilities are included for comparison; on
S-shaped fronts their argmax hugs the endpoints, which is exactly why the
Chebyshev form is the one used for elicitation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import log_softmax

from .front import FrontParams, eval_front
from .particles import WeightedParticles

__all__ = [
    "PreferenceWeights",
    "TradeOffPoint",
    "CurveQuery",
    "PairQuery",
    "ChoiceRecord",
    "UserModelConfig",
    "PrefPosterior",
    "chebyshev_utility",
    "linear_utility",
    "exp_linear_utility",
    "chebyshev_utilities",
    "choice_log_probs",
    "simulate_choice",
    "sample_weight_prior",
    "init_pref_posterior",
    "update_pref_posterior",
    "pref_error",
    "make_curve_query",
]


@dataclass(frozen=True)
class PreferenceWeights:
    """Strictly positive weights (privacy, accuracy) summing to one."""

    w1: float
    w2: float

    def __post_init__(self):
        if not (self.w1 > 0 and self.w2 > 0):
            raise ValueError(f"weights must be strictly positive, got ({self.w1}, {self.w2})")
        if abs(self.w1 + self.w2 - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {self.w1 + self.w2}")

    def as_array(self) -> np.ndarray:
        return np.array([self.w1, self.w2])

    @classmethod
    def of(cls, w1: float) -> "PreferenceWeights":
        return cls(w1=w1, w2=1.0 - w1)


@dataclass(frozen=True)
class TradeOffPoint:
    """A normalized (privacy, accuracy) pair in the unit square."""

    p: float
    alpha: float

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0 and 0.0 <= self.alpha <= 1.0):
            raise ValueError(f"trade-off point must lie in [0,1]^2, got ({self.p}, {self.alpha})")

    def as_array(self) -> np.ndarray:
        return np.array([self.p, self.alpha])


@dataclass(frozen=True)
class CurveQuery:
    """A hypothetical front discretized into q selectable points."""

    params: FrontParams
    points: tuple[TradeOffPoint, ...]

    def __post_init__(self):
        if len(self.points) < 2:
            raise ValueError("a curve query needs at least 2 points")
        ps = [pt.p for pt in self.points]
        if any(b < a for a, b in zip(ps, ps[1:])):
            raise ValueError("curve query points must be sorted by privacy level")

    @property
    def q(self) -> int:
        return len(self.points)

    def points_array(self) -> np.ndarray:
        return np.array([[pt.p, pt.alpha] for pt in self.points])


@dataclass(frozen=True)
class PairQuery:
    """A plain two-option comparison (the classic pairwise ablation)."""

    points: tuple[TradeOffPoint, TradeOffPoint]

    @property
    def q(self) -> int:
        return 2

    def points_array(self) -> np.ndarray:
        return np.array([[pt.p, pt.alpha] for pt in self.points])


Query = Union[CurveQuery, PairQuery]


@dataclass(frozen=True)
class ChoiceRecord:
    """A presented query and the option index the decision-maker picked."""

    query: Query
    chosen_index: int

    def __post_init__(self):
        if not (0 <= self.chosen_index < self.query.q):
            raise ValueError(
                f"chosen_index {self.chosen_index} out of range for q={self.query.q}"
            )


@dataclass(frozen=True)
class UserModelConfig:
    """Boltzmann rationality temperature and curve discretization density."""

    T: float = 0.2
    q: int = 101

    def __post_init__(self):
        if not (self.T > 0):
            raise ValueError(f"temperature must be > 0, got {self.T}")
        if self.q < 2:
            raise ValueError(f"discretization q must be >= 2, got {self.q}")


def make_curve_query(params: FrontParams, q: int) -> CurveQuery:
    """Discretize a curve into q points on a uniform privacy grid.

    Accuracies are clamped to [0, 1] so hypothetical curves always render
    inside the normalized square; the likelihood uses these exact clamped
    values, so what is displayed is what is conditioned on.
    """
    if q < 2:
        raise ValueError(f"q must be >= 2, got {q}")
    grid = np.linspace(0.0, 1.0, q)
    alpha = np.clip(eval_front(grid, params), 0.0, 1.0)
    points = tuple(TradeOffPoint(p=float(g), alpha=float(a)) for g, a in zip(grid, alpha))
    return CurveQuery(params=params, points=points)


# ---------------------------------------------------------------------------
# Utility functions


def chebyshev_utility(y: TradeOffPoint, w: PreferenceWeights) -> float:
    """min(p / w1, alpha / w2); scales linearly with both coordinates."""
    return min(y.p / w.w1, y.alpha / w.w2)


def linear_utility(y: TradeOffPoint, w: PreferenceWeights) -> float:
    return w.w1 * y.p + w.w2 * y.alpha


def exp_linear_utility(eps: float, alpha: float, w: PreferenceWeights) -> float:
    """w1 * exp(-eps) + w2 * exp(alpha - 1), on the raw privacy-budget scale."""
    if not (math.isfinite(eps) and math.isfinite(alpha)):
        raise ValueError("eps and alpha must be finite")
    return w.w1 * math.exp(-eps) + w.w2 * math.exp(alpha - 1.0)


def chebyshev_utilities(points: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Chebyshev utility of every point under every weight vector.

    Parameters
    ----------
    points : ndarray, shape (q, 2)
        Columns (p, alpha).
    weights : ndarray, shape (R, 2)

    Returns
    -------
    ndarray, shape (R, q)
    """
    p = points[:, 0][None, :]
    a = points[:, 1][None, :]
    w1 = weights[:, 0][:, None]
    w2 = weights[:, 1][:, None]
    return np.minimum(p / w1, a / w2)


# ---------------------------------------------------------------------------
# Choice model


def _query_points(query: Query) -> np.ndarray:
    return query.points_array()


def choice_log_probs(query: Query, w: PreferenceWeights, T: float) -> np.ndarray:
    """Log-probabilities of each option under the Boltzmann-rational model.

    exp of the result sums to 1; adding a constant to every option's utility
    leaves the distribution unchanged.
    """
    if not (T > 0):
        raise ValueError(f"temperature must be > 0, got {T}")
    u = chebyshev_utilities(_query_points(query), w.as_array()[None, :])[0]
    return log_softmax(u / T)


def choice_log_prob_matrix(query: Query, weights: np.ndarray, T: float) -> np.ndarray:
    """(R, q) log choice probabilities for a batch of weight vectors."""
    u = chebyshev_utilities(_query_points(query), weights)
    return log_softmax(u / T, axis=1)


def simulate_choice(
    query: Query, w_true: PreferenceWeights, T: float, rng: np.random.Generator
) -> int:
    """Sample one choice from the Boltzmann distribution over the options."""
    probs = np.exp(choice_log_probs(query, w_true, T))
    probs /= probs.sum()
    return int(rng.choice(query.q, p=probs))


# ---------------------------------------------------------------------------
# Posterior over preference weights


def sample_weight_prior(
    rng: np.random.Generator, alpha: tuple[float, float] = (2.0, 2.0)
) -> PreferenceWeights:
    """One draw from the Dirichlet prior over (w1, w2)."""
    w = rng.dirichlet(alpha)
    return PreferenceWeights(w1=float(w[0]), w2=float(w[1]))


@dataclass(frozen=True)
class PrefPosterior:
    """Importance-sampling posterior over preference weights."""

    particles: WeightedParticles

    def __post_init__(self):
        vals = self.particles.values
        if vals.ndim != 2 or vals.shape[1] != 2:
            raise ValueError("preference particles must have payload shape (n, 2)")

    @property
    def particle_count(self) -> int:
        return len(self.particles)

    @property
    def weights_matrix(self) -> np.ndarray:
        """(n, 2) particle weight vectors (the particle values, not the IS weights)."""
        return self.particles.values

    @property
    def log_weights(self) -> np.ndarray:
        return self.particles.log_weights

    @property
    def weights(self) -> np.ndarray:
        return self.particles.weights

    def mean(self) -> np.ndarray:
        return self.weights @ self.weights_matrix

    def particle_at(self, i: int) -> PreferenceWeights:
        w1, w2 = self.particles.values[i]
        return PreferenceWeights(w1=float(w1), w2=float(w2))

    @classmethod
    def point_mass(cls, w: PreferenceWeights) -> "PrefPosterior":
        return cls(particles=WeightedParticles.uniform(w.as_array()[None, :]))


def init_pref_posterior(
    particle_count: int,
    rng: np.random.Generator,
    alpha: tuple[float, float] = (2.0, 2.0),
) -> PrefPosterior:
    if particle_count < 1:
        raise ValueError(f"particle_count must be >= 1, got {particle_count}")
    values = rng.dirichlet(alpha, size=particle_count)
    return PrefPosterior(particles=WeightedParticles.uniform(values))


def update_pref_posterior(post: PrefPosterior, record: ChoiceRecord, T: float) -> PrefPosterior:
    """Reweight particles by the Boltzmann likelihood of the observed choice."""
    log_probs = choice_log_prob_matrix(record.query, post.weights_matrix, T)
    return PrefPosterior(particles=post.particles.reweighted(log_probs[:, record.chosen_index]))


def pref_error(post: PrefPosterior, w_true: PreferenceWeights) -> float:
    """Posterior-expected Euclidean distance to the true weights."""
    diff = post.weights_matrix - w_true.as_array()[None, :]
    return float(post.weights @ np.sqrt(np.sum(diff * diff, axis=1)))
