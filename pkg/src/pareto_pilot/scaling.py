"""Min-max normalization between raw (epsilon, accuracy) and unit scales.

The privacy budget epsilon is first mapped to a privacy level -log(eps), so
larger means stronger privacy, then min-max scaled to [0, 1] over the
operator-chosen budget range.  Accuracy is min-max scaled over its own
range.  Both transforms are invertible, so any point in the unit square maps
back to raw units exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["NormalizationSpec"]


@dataclass(frozen=True)
class NormalizationSpec:
    eps_min: float
    eps_max: float
    alpha_min: float
    alpha_max: float

    def __post_init__(self):
        if not (0 < self.eps_min < self.eps_max):
            raise ValueError(
                f"need 0 < eps_min < eps_max, got ({self.eps_min}, {self.eps_max})"
            )
        if not (self.alpha_min < self.alpha_max):
            raise ValueError(
                f"need alpha_min < alpha_max, got ({self.alpha_min}, {self.alpha_max})"
            )

    @property
    def p_min(self) -> float:
        """Privacy level of the weakest-privacy endpoint (largest epsilon)."""
        return -math.log(self.eps_max)

    @property
    def p_max(self) -> float:
        return -math.log(self.eps_min)

    def normalize_privacy(self, eps):
        """eps -> p in [0, 1]; eps_max maps to 0, eps_min to 1."""
        arr = np.asarray(eps, dtype=float)
        if np.any(arr < self.eps_min * (1 - 1e-12)) or np.any(arr > self.eps_max * (1 + 1e-12)):
            raise ValueError(
                f"epsilon {eps} outside configured range [{self.eps_min}, {self.eps_max}]"
            )
        p = (-np.log(arr) - self.p_min) / (self.p_max - self.p_min)
        p = np.clip(p, 0.0, 1.0)
        return float(p) if np.isscalar(eps) else p

    def denormalize_privacy(self, p):
        arr = np.asarray(p, dtype=float)
        if np.any(arr < -1e-12) or np.any(arr > 1 + 1e-12):
            raise ValueError(f"normalized privacy {p} outside [0, 1]")
        raw = np.exp(-(self.p_min + arr * (self.p_max - self.p_min)))
        return float(raw) if np.isscalar(p) else raw

    def normalize_accuracy(self, alpha):
        arr = np.asarray(alpha, dtype=float)
        out = (arr - self.alpha_min) / (self.alpha_max - self.alpha_min)
        return float(out) if np.isscalar(alpha) else out

    def denormalize_accuracy(self, a):
        arr = np.asarray(a, dtype=float)
        out = self.alpha_min + arr * (self.alpha_max - self.alpha_min)
        return float(out) if np.isscalar(a) else out
