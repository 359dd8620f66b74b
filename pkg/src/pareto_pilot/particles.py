"""Weighted particle sets for importance-sampling posteriors.

A particle set holds an array of particle payloads (first axis indexes
particles) together with normalized log-weights.  Posterior updates never
move particles: arriving data only multiplies each particle's weight by its
likelihood, so an update is a pure reweighting.  All weight arithmetic is
done in log space with max-subtraction normalization to avoid underflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

__all__ = ["WeightedParticles"]


@dataclass(frozen=True)
class WeightedParticles:
    """Immutable set of (value, log-weight) pairs.

    Parameters
    ----------
    values : ndarray
        Particle payloads, shape ``(n, ...)``.
    log_weights : ndarray
        Log-weights, shape ``(n,)``.  Normalized on construction so that
        ``logsumexp(log_weights) == 0``.
    """

    values: np.ndarray
    log_weights: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        lw = np.asarray(self.log_weights, dtype=float)
        if values.shape[0] == 0:
            raise ValueError("particle set must contain at least one particle")
        if lw.shape != (values.shape[0],):
            raise ValueError(
                f"log_weights shape {lw.shape} does not match {values.shape[0]} particles"
            )
        if not np.all(np.isfinite(lw)):
            raise ValueError("log_weights must be finite")
        lw = lw - logsumexp(lw)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "log_weights", lw)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def weights(self) -> np.ndarray:
        """Normalized weights, summing to 1."""
        return np.exp(self.log_weights)

    @classmethod
    def uniform(cls, values: np.ndarray) -> "WeightedParticles":
        values = np.asarray(values, dtype=float)
        n = values.shape[0]
        return cls(values, np.zeros(n))

    def reweighted(self, log_likelihood: np.ndarray) -> "WeightedParticles":
        """Multiply each weight by a per-particle likelihood and renormalize.

        ``log_likelihood`` may contain ``-inf`` (zero likelihood) but at
        least one particle must keep positive weight.
        """
        ll = np.asarray(log_likelihood, dtype=float)
        if ll.shape != (len(self),):
            raise ValueError("log_likelihood must have one entry per particle")
        if np.any(np.isnan(ll)) or np.any(ll == np.inf):
            raise ValueError("log_likelihood entries must be < inf and not NaN")
        new_lw = self.log_weights + ll
        if np.all(np.isneginf(new_lw)):
            raise ValueError("update gives zero likelihood for every particle")
        # -inf entries are legal after an update; renormalize against the max
        # and drop them to the smallest representable weight.
        new_lw = np.where(np.isneginf(new_lw), -745.0 + new_lw.max(), new_lw)
        return WeightedParticles(self.values, new_lw)

    def effective_sample_size(self) -> float:
        """ESS = 1 / sum w_i^2, in [1, n]."""
        return float(1.0 / np.sum(self.weights**2))

    def sample_index(self, rng: np.random.Generator, size: int | None = None):
        """Draw particle indices with probability equal to the weights."""
        return rng.choice(len(self), size=size, p=self.weights)

    def resampled_systematic(self, rng: np.random.Generator) -> "WeightedParticles":
        """Systematic resampling to uniform weights (duplicates heavy particles)."""
        n = len(self)
        positions = (rng.random() + np.arange(n)) / n
        idx = np.searchsorted(np.cumsum(self.weights), positions)
        idx = np.clip(idx, 0, n - 1)
        return WeightedParticles.uniform(self.values[idx])
