"""S-shaped Pareto-front surrogates over the normalized privacy axis.

Two curve families map a normalized privacy level p in [0, 1] to accuracy:

* sigmoid:  h(p) = L / (1 + exp(k (p - c))) + b
* gompertz: h(p) = b - L exp(-k exp(-c p))

Both are strictly decreasing for positive shape parameters: stronger privacy
never buys accuracy.  The gompertz form is the closed-form trade-off of
output-perturbed logistic regression (see :mod:`pareto_pilot.oracles`), the
sigmoid its symmetric general-purpose cousin.

Inference over curve parameters plus observation noise is pure importance
sampling: particles are drawn once from the prior and every new observation
multiplies each particle's weight by a Gaussian likelihood.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

from .particles import WeightedParticles

__all__ = [
    "CurveKind",
    "FrontParams",
    "NoiseScale",
    "FrontObservation",
    "FrontPosterior",
    "SigmoidPrior",
    "GompertzPrior",
    "FrontPrior",
    "default_prior",
    "eval_front",
    "curve_values",
    "sample_prior",
    "log_likelihood",
    "init_posterior",
    "update_front_posterior",
    "posterior_mean_curve",
    "effective_sample_size",
    "map_fit",
    "FitResult",
    "CurveBand",
]

LOG_2PI = math.log(2.0 * math.pi)


class CurveKind(str, enum.Enum):
    SIGMOID = "sigmoid"
    GOMPERTZ = "gompertz"


@dataclass(frozen=True)
class FrontParams:
    """Parameters of one S-shaped trade-off curve.

    ``L`` is the accuracy span, ``k`` the steepness, ``b`` the offset
    (upper asymptote for gompertz, lower for sigmoid) and ``c`` locates the
    transition on the privacy axis.
    """

    kind: CurveKind
    L: float
    k: float
    b: float
    c: float

    def __post_init__(self):
        vals = (self.L, self.k, self.b, self.c)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"curve parameters must be finite, got {vals}")
        if self.L <= 0:
            raise ValueError(f"accuracy span L must be > 0, got {self.L}")
        if self.k <= 0:
            raise ValueError(f"steepness k must be > 0, got {self.k}")

    def as_array(self) -> np.ndarray:
        return np.array([self.L, self.k, self.b, self.c])


@dataclass(frozen=True)
class NoiseScale:
    """Standard deviation of accuracy observations."""

    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"observation noise sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True)
class FrontObservation:
    """One (normalized privacy, noisy normalized accuracy) measurement."""

    p: float
    alpha: float

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0):
            raise ValueError(f"normalized privacy must lie in [0, 1], got {self.p}")
        if not math.isfinite(self.alpha):
            raise ValueError(f"observed accuracy must be finite, got {self.alpha}")


def curve_values(p: np.ndarray, kind: CurveKind, params: np.ndarray) -> np.ndarray:
    """Evaluate many curves on many privacy levels.

    Parameters
    ----------
    p : ndarray, shape (G,)
    kind : CurveKind
    params : ndarray, shape (n, 4)
        Columns (L, k, b, c).

    Returns
    -------
    ndarray, shape (G, n)
    """
    p = np.asarray(p, dtype=float)[:, None]
    L, k, b, c = (params[:, i][None, :] for i in range(4))
    with np.errstate(over="ignore", under="ignore"):
        if kind == CurveKind.SIGMOID:
            # expit form keeps exp from overflowing for large k (p - c)
            z = -k * (p - c)
            out = L / (1.0 + np.exp(-z)) + b
        elif kind == CurveKind.GOMPERTZ:
            out = b - L * np.exp(-k * np.exp(-c * p))
        else:  # pragma: no cover - enum is exhaustive
            raise ValueError(f"unknown curve kind {kind!r}")
    return out


def eval_front(p, params: FrontParams):
    """Accuracy of the curve ``params`` at normalized privacy ``p``.

    ``p`` may be a scalar or an array; the result matches its shape.
    Strictly decreasing in ``p`` for valid parameters.
    """
    arr = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("privacy level must be finite")
    vals = curve_values(np.atleast_1d(arr).ravel(), params.kind, params.as_array()[None, :])
    vals = vals[:, 0].reshape(np.atleast_1d(arr).shape)
    if arr.ndim == 0:
        return float(vals[0])
    return vals


# ---------------------------------------------------------------------------
# Priors


@dataclass(frozen=True)
class SigmoidPrior:
    """Prior over sigmoid parameters and observation noise.

    L ~ Beta, k ~ LogNormal, c ~ Beta, b ~ Normal, sigma ~ Gamma(shape, scale).
    """

    L_beta: tuple[float, float] = (40.0, 2.0)
    k_lognormal: tuple[float, float] = (math.log(10.0), 0.2)
    c_beta: tuple[float, float] = (2.0, 2.0)
    b_normal: tuple[float, float] = (0.0, 0.1)
    sigma_gamma: tuple[float, float] = (0.5, 0.1)

    kind: CurveKind = CurveKind.SIGMOID

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        cols = np.empty((size, 5))
        cols[:, 0] = rng.beta(*self.L_beta, size=size)
        cols[:, 1] = rng.lognormal(*self.k_lognormal, size=size)
        cols[:, 2] = rng.normal(*self.b_normal, size=size)
        cols[:, 3] = rng.beta(*self.c_beta, size=size)
        cols[:, 4] = _positive_gamma(rng, self.sigma_gamma, size)
        return cols

    def mean_params(self) -> FrontParams:
        aL, bL = self.L_beta
        mu, s = self.k_lognormal
        ac, bc = self.c_beta
        return FrontParams(
            kind=CurveKind.SIGMOID,
            L=aL / (aL + bL),
            k=math.exp(mu + 0.5 * s * s),
            b=self.b_normal[0],
            c=ac / (ac + bc),
        )


@dataclass(frozen=True)
class GompertzPrior:
    """Prior over gompertz parameters and observation noise.

    All curve parameters are uniform.  The default ``c`` range is rescaled so
    that the transition point ln(k)/c of every draw lands inside the
    normalized privacy window [0, 1]; ``raw_scale()`` restores the wider
    range appropriate when inference runs on the unnormalized -log(eps) axis.
    """

    L_uniform: tuple[float, float] = (0.8, 4.0)
    k_uniform: tuple[float, float] = (10.0, 100.0)
    c_uniform: tuple[float, float] = (math.log(100.0), 10.0)
    b_uniform: tuple[float, float] = (0.8, 1.1)
    sigma_gamma: tuple[float, float] = (0.5, 0.1)

    kind: CurveKind = CurveKind.GOMPERTZ

    @classmethod
    def raw_scale(cls) -> "GompertzPrior":
        return cls(c_uniform=(1.0, 10.0))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        cols = np.empty((size, 5))
        cols[:, 0] = rng.uniform(*self.L_uniform, size=size)
        cols[:, 1] = rng.uniform(*self.k_uniform, size=size)
        cols[:, 2] = rng.uniform(*self.b_uniform, size=size)
        cols[:, 3] = rng.uniform(*self.c_uniform, size=size)
        cols[:, 4] = _positive_gamma(rng, self.sigma_gamma, size)
        return cols

    def mean_params(self) -> FrontParams:
        return FrontParams(
            kind=CurveKind.GOMPERTZ,
            L=sum(self.L_uniform) / 2,
            k=sum(self.k_uniform) / 2,
            b=sum(self.b_uniform) / 2,
            c=sum(self.c_uniform) / 2,
        )


FrontPrior = SigmoidPrior | GompertzPrior


def _positive_gamma(rng, shape_scale, size):
    shape, scale = shape_scale
    draws = rng.gamma(shape, scale, size=size)
    # Gamma(0.5, .) piles mass near zero; a floor keeps likelihoods finite.
    return np.maximum(draws, 1e-6)


def default_prior(kind: CurveKind) -> FrontPrior:
    if kind == CurveKind.SIGMOID:
        return SigmoidPrior()
    return GompertzPrior()


def sample_prior(
    kind: CurveKind, rng: np.random.Generator, prior: FrontPrior | None = None
) -> tuple[FrontParams, NoiseScale]:
    """Draw one (curve, noise) pair from the prior for ``kind``."""
    prior = prior if prior is not None else default_prior(kind)
    row = prior.sample(rng, 1)[0]
    return (
        FrontParams(kind=kind, L=row[0], k=row[1], b=row[2], c=row[3]),
        NoiseScale(sigma=row[4]),
    )


# ---------------------------------------------------------------------------
# Likelihood and posterior


def log_likelihood(
    params: FrontParams,
    sigma: NoiseScale | float,
    obs: Sequence[FrontObservation],
) -> float:
    """Gaussian log-likelihood of observations around the curve.

    alpha_n ~ N(h(p_n), sigma^2), independent across observations; an empty
    observation list gives 0.
    """
    sig = sigma.sigma if isinstance(sigma, NoiseScale) else float(sigma)
    if not (math.isfinite(sig) and sig > 0):
        raise ValueError(f"sigma must be > 0, got {sig}")
    if len(obs) == 0:
        return 0.0
    p = np.array([o.p for o in obs])
    alpha = np.array([o.alpha for o in obs])
    mu = curve_values(p, params.kind, params.as_array()[None, :])[:, 0]
    z = (alpha - mu) / sig
    return float(np.sum(-0.5 * z * z - math.log(sig) - 0.5 * LOG_2PI))


@dataclass(frozen=True)
class FrontPosterior:
    """Importance-sampling posterior over (curve params, noise).

    Particle payload columns: (L, k, b, c, sigma).
    """

    kind: CurveKind
    particles: WeightedParticles

    def __post_init__(self):
        if self.particles.values.ndim != 2 or self.particles.values.shape[1] != 5:
            raise ValueError("front particles must have payload shape (n, 5)")

    @property
    def particle_count(self) -> int:
        return len(self.particles)

    @property
    def params_matrix(self) -> np.ndarray:
        """(n, 4) matrix of curve parameters (L, k, b, c)."""
        return self.particles.values[:, :4]

    @property
    def sigmas(self) -> np.ndarray:
        return self.particles.values[:, 4]

    @property
    def log_weights(self) -> np.ndarray:
        return self.particles.log_weights

    @property
    def weights(self) -> np.ndarray:
        return self.particles.weights

    def particle_at(self, i: int) -> tuple[FrontParams, NoiseScale]:
        row = self.particles.values[i]
        return (
            FrontParams(kind=self.kind, L=row[0], k=row[1], b=row[2], c=row[3]),
            NoiseScale(sigma=row[4]),
        )

    @classmethod
    def point_mass(cls, params: FrontParams, sigma: float = 1e-3) -> "FrontPosterior":
        row = np.concatenate([params.as_array(), [sigma]])
        return cls(kind=params.kind, particles=WeightedParticles.uniform(row[None, :]))


def init_posterior(
    kind: CurveKind,
    particle_count: int,
    rng: np.random.Generator,
    prior: FrontPrior | None = None,
) -> FrontPosterior:
    """Prior particle cloud with uniform weights."""
    if particle_count < 1:
        raise ValueError(f"particle_count must be >= 1, got {particle_count}")
    prior = prior if prior is not None else default_prior(kind)
    values = prior.sample(rng, particle_count)
    return FrontPosterior(kind=kind, particles=WeightedParticles.uniform(values))


def _observation_loglik(post: FrontPosterior, obs: FrontObservation) -> np.ndarray:
    mu = curve_values(np.array([obs.p]), post.kind, post.params_matrix)[0]
    sig = post.sigmas
    z = (obs.alpha - mu) / sig
    return -0.5 * z * z - np.log(sig) - 0.5 * LOG_2PI


def update_front_posterior(
    post: FrontPosterior, new_obs: FrontObservation | Sequence[FrontObservation]
) -> FrontPosterior:
    """Reweight every particle by the likelihood of the new observation(s).

    The importance weight of a particle is exactly its likelihood for the
    arriving data; constant factors cancel in the normalization.
    """
    obs_list = [new_obs] if isinstance(new_obs, FrontObservation) else list(new_obs)
    ll = np.zeros(post.particle_count)
    for obs in obs_list:
        ll += _observation_loglik(post, obs)
    return FrontPosterior(kind=post.kind, particles=post.particles.reweighted(ll))


def effective_sample_size(post: FrontPosterior) -> float:
    return post.particles.effective_sample_size()


def maybe_resample(
    post: FrontPosterior, rng: np.random.Generator, threshold_fraction: float
) -> FrontPosterior:
    """Systematic resampling when ESS drops below a fraction of the count.

    Off unless a positive ``threshold_fraction`` is configured.
    """
    if threshold_fraction <= 0:
        return post
    if effective_sample_size(post) >= threshold_fraction * post.particle_count:
        return post
    return FrontPosterior(kind=post.kind, particles=post.particles.resampled_systematic(rng))


@dataclass(frozen=True)
class CurveBand:
    """Posterior mean curve with a central credible band on a grid."""

    p_grid: np.ndarray
    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    degenerate: bool


def _weighted_quantiles(values: np.ndarray, weights: np.ndarray, qs) -> np.ndarray:
    order = np.argsort(values)
    cum = np.cumsum(weights[order])
    idx = np.searchsorted(cum, np.asarray(qs) * cum[-1], side="left")
    idx = np.clip(idx, 0, len(values) - 1)
    return values[order][idx]


def posterior_mean_curve(post: FrontPosterior, p_grid: Sequence[float]) -> CurveBand:
    """Weighted mean and 5%/95% band of the curve family over a grid.

    A posterior collapsed onto a single particle is flagged ``degenerate``;
    its band coincides with the mean.
    """
    grid = np.asarray(p_grid, dtype=float)
    if np.any((grid < 0) | (grid > 1)):
        raise ValueError("grid values must lie in [0, 1]")
    vals = curve_values(grid, post.kind, post.params_matrix)  # (G, n)
    w = post.weights
    mean = vals @ w
    lower = np.empty_like(mean)
    upper = np.empty_like(mean)
    for i in range(len(grid)):
        lower[i], upper[i] = _weighted_quantiles(vals[i], w, (0.05, 0.95))
    degenerate = bool(np.max(w) > 1.0 - 1e-12)
    if degenerate:
        lower = mean.copy()
        upper = mean.copy()
    return CurveBand(p_grid=grid, mean=mean, lower=lower, upper=upper, degenerate=degenerate)


# ---------------------------------------------------------------------------
# Deterministic least-squares fit (reporting / plotting aid)

_FIT_BOUNDS = {
    # Wide structural boxes: fits must also work on the raw -log(eps) axis,
    # where transitions sit well outside the normalized priors' ranges.
    CurveKind.SIGMOID: (
        np.array([1e-6, 1e-3, -5.0, -20.0]),
        np.array([5.0, 1e3, 5.0, 20.0]),
    ),
    CurveKind.GOMPERTZ: (
        np.array([1e-6, 1e-3, -5.0, 1e-3]),
        np.array([10.0, 1e4, 5.0, 50.0]),
    ),
}


@dataclass(frozen=True)
class FitResult:
    params: FrontParams
    residual_norm: float
    converged: bool
    at_bound: bool
    flat: bool

    @property
    def flagged(self) -> bool:
        """True when the fit is degenerate: pressed against a bound or flat."""
        return self.at_bound or self.flat or not self.converged


def _fit_x0(kind: CurveKind, p: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    lo, hi = float(alpha.min()), float(alpha.max())
    span = max(hi - lo, 1e-3)
    p_range = max(float(p.max() - p.min()), 1e-6)
    mid = lo + 0.5 * (hi - lo)
    c0 = float(p[np.argmin(np.abs(alpha - mid))])
    if kind == CurveKind.SIGMOID:
        x0 = np.array([span, 8.0 / p_range, lo, c0])
    else:
        rate = 4.0 / p_range
        exponent = min(rate * max(c0, p.min() + 0.1 * p_range), math.log(1e4))
        x0 = np.array([span, math.exp(exponent), hi, rate])
    lo_b, hi_b = _FIT_BOUNDS[kind]
    return np.clip(x0, lo_b, hi_b)


def map_fit(obs: Sequence[FrontObservation], kind: CurveKind) -> FitResult:
    """Nonlinear least-squares fit of one curve to observations.

    Deterministic (no random restarts).  Needs at least 4 observations; on
    hitting the iteration cap the best parameters so far are returned with
    ``converged=False``.  Degenerate fits pressed against a parameter bound
    (e.g. flat data collapsing the steepness) are flagged ``at_bound``.
    """
    obs = list(obs)
    if len(obs) < 4:
        raise ValueError(f"need at least 4 observations to fit 4 parameters, got {len(obs)}")
    p = np.array([o.p for o in obs])
    alpha = np.array([o.alpha for o in obs])
    lo_b, hi_b = _FIT_BOUNDS[kind]

    def residuals(x):
        return curve_values(p, kind, x[None, :])[:, 0] - alpha

    starts = [_fit_x0(kind, p, alpha)]
    prior_mean = default_prior(kind).mean_params().as_array()
    starts.append(np.clip(prior_mean, lo_b, hi_b))

    best_x, best_cost, converged = None, np.inf, True
    for x0 in starts:
        res = least_squares(residuals, x0, bounds=(lo_b, hi_b), max_nfev=2000)
        if res.cost < best_cost:
            best_x, best_cost = res.x, res.cost
            converged = res.status > 0
    # Guarantee the fit is no worse than either starting point.
    for x0 in starts:
        cost0 = 0.5 * float(np.sum(residuals(x0) ** 2))
        if cost0 < best_cost:
            best_x, best_cost, converged = x0, cost0, False

    tol = 1e-6 * np.maximum(1.0, np.abs(hi_b - lo_b))
    at_bound = bool(np.any(best_x - lo_b <= tol) or np.any(hi_b - best_x <= tol))
    params = FrontParams(kind=kind, L=best_x[0], k=best_x[1], b=best_x[2], c=best_x[3])
    # A steepness or span collapse produces an all-but-constant curve: flag it.
    fitted_span = curve_values(np.array([p.min(), p.max()]), kind, best_x[None, :])[:, 0]
    flat = bool(abs(fitted_span[0] - fitted_span[1]) < 1e-3)
    return FitResult(
        params=params,
        residual_norm=float(math.sqrt(2.0 * best_cost)),
        converged=converged,
        at_bound=at_bound,
        flat=flat,
    )
