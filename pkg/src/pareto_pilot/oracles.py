"""Accuracy oracles: the expensive "train at this privacy level" step.

An oracle answers one question: given a raw privacy budget epsilon, what is
the best achievable raw accuracy?  Three implementations are provided:

* ``ClosedFormLogisticOracle`` -- output-perturbed regularized logistic
  regression on uniformly distributed 1-d data, whose expected accuracy has
  the closed form 1 - 0.5 exp(-C eps) with C = |coef| / sensitivity.  This is
  the desk-scale stand-in for a real training pipeline.
* ``TabulatedOracle`` -- piecewise-linear interpolation of a CSV table of
  (epsilon, accuracy) measurements, interpolating on the -log(eps) axis.
  No extrapolation.
* ``ExternalOracle`` -- shells out to a user-supplied command per evaluation;
  the command prints one accuracy in [0, 1] on its final output line.

``mc_logistic_accuracy`` is the brute-force Monte-Carlo counterpart of the
closed form: it draws the Laplace coefficient noise and the data point
explicitly and counts sign agreements.
"""

from __future__ import annotations

import csv
import math
import shlex
import subprocess
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .front import FrontObservation
from .scaling import NormalizationSpec

__all__ = [
    "OracleError",
    "ClosedFormLogisticOracle",
    "TabulatedOracle",
    "ExternalOracle",
    "OracleSpec",
    "oracle_eval",
    "mc_logistic_accuracy",
    "load_front_table",
]


class OracleError(RuntimeError):
    """Oracle evaluation failed; carries any captured output."""

    def __init__(self, message: str, output: str = ""):
        super().__init__(message)
        self.output = output


@dataclass(frozen=True)
class ClosedFormLogisticOracle:
    """Expected accuracy of output-perturbed logistic regression.

    ``C`` is the ratio |coefficient| / sensitivity; accuracy approaches 1 as
    eps grows and 0.5 (a coin flip) as eps -> 0.
    """

    C: float
    noise_sigma: float = 0.0
    delta: float = 1e-5  # recorded metadata; accounting is out of scope here

    def __post_init__(self):
        if not (self.C > 0):
            raise ValueError(f"C must be > 0, got {self.C}")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")

    def raw_accuracy(self, eps: float) -> float:
        return 1.0 - 0.5 * math.exp(-self.C * eps)


def load_front_table(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read an ``epsilon,accuracy`` CSV (raw values, ascending epsilon)."""
    path = Path(path)
    eps: list[float] = []
    acc: list[float] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["epsilon", "accuracy"]:
            raise OracleError(f"{path}: expected header 'epsilon,accuracy', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                eps.append(float(row[0]))
                acc.append(float(row[1]))
            except (ValueError, IndexError) as exc:
                raise OracleError(f"{path}: malformed row {lineno}: {row}") from exc
    if len(eps) < 2:
        raise OracleError(f"{path}: table needs at least 2 rows, got {len(eps)}")
    e = np.asarray(eps)
    a = np.asarray(acc)
    if np.any(np.diff(e) <= 0):
        raise OracleError(f"{path}: epsilon column must be strictly ascending")
    return e, a


@dataclass(frozen=True)
class TabulatedOracle:
    """Monotone piecewise-linear interpolation of tabulated trade-off data."""

    epsilons: np.ndarray
    accuracies: np.ndarray
    noise_sigma: float = 0.0
    delta: float = 1e-5

    @classmethod
    def from_csv(cls, path: str | Path, noise_sigma: float = 0.0, delta: float = 1e-5):
        e, a = load_front_table(path)
        return cls(epsilons=e, accuracies=a, noise_sigma=noise_sigma, delta=delta)

    def raw_accuracy(self, eps: float) -> float:
        lo, hi = float(self.epsilons[0]), float(self.epsilons[-1])
        if not (lo * (1 - 1e-12) <= eps <= hi * (1 + 1e-12)):
            raise OracleError(
                f"epsilon {eps} outside tabulated range [{lo}, {hi}]; refusing to extrapolate"
            )
        # Interpolate against the privacy level; ascending x for np.interp.
        p = -math.log(eps)
        p_table = -np.log(self.epsilons)[::-1]
        a_table = self.accuracies[::-1]
        return float(np.interp(p, p_table, a_table))


@dataclass(frozen=True)
class ExternalOracle:
    """Runs ``command_template`` with ``{epsilon}`` substituted per evaluation.

    The command must print exactly one decimal accuracy in [0, 1] on its
    final output line; a nonzero exit status is a failure.
    """

    command_template: str
    noise_sigma: float = 0.0
    delta: float = 1e-5
    timeout: float = 600.0

    def raw_accuracy(self, eps: float) -> float:
        cmd = shlex.split(self.command_template.replace("{epsilon}", repr(float(eps))))
        try:
            proc = subprocess.run(cmd, capture_output=True, text=True, timeout=self.timeout)
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise OracleError(f"oracle command failed to run: {exc}") from exc
        if proc.returncode != 0:
            raise OracleError(
                f"oracle command exited with status {proc.returncode}",
                output=proc.stdout + proc.stderr,
            )
        lines = [ln.strip() for ln in proc.stdout.splitlines() if ln.strip()]
        if not lines:
            raise OracleError("oracle command produced no output", output=proc.stderr)
        try:
            value = float(lines[-1])
        except ValueError as exc:
            raise OracleError(
                f"could not parse accuracy from final output line {lines[-1]!r}",
                output=proc.stdout,
            ) from exc
        if not (0.0 <= value <= 1.0):
            raise OracleError(f"oracle accuracy {value} outside [0, 1]", output=proc.stdout)
        return value


OracleSpec = ClosedFormLogisticOracle | TabulatedOracle | ExternalOracle


def oracle_eval(
    spec: OracleSpec,
    norm: NormalizationSpec,
    p_norm: float,
    rng: np.random.Generator,
) -> FrontObservation:
    """Evaluate the oracle at a normalized privacy level.

    The raw accuracy is normalized and then perturbed with Gaussian noise of
    scale ``noise_sigma`` (already on the normalized scale), matching the
    observation model used for front inference.
    """
    eps = norm.denormalize_privacy(p_norm)
    raw = spec.raw_accuracy(eps)
    alpha = norm.normalize_accuracy(raw)
    if spec.noise_sigma > 0:
        alpha += spec.noise_sigma * rng.standard_normal()
    return FrontObservation(p=float(p_norm), alpha=float(alpha))


def mc_logistic_accuracy(
    C: float,
    eps: float,
    n_noise: int,
    n_x: int,
    rng: np.random.Generator,
    coef_sign: int = 1,
) -> float:
    """Monte-Carlo accuracy of output-perturbed logistic regression.

    Draws ``n_noise * n_x`` independent trials, each with a fresh Laplace
    perturbation of the coefficient and a fresh data point x ~ Uniform[-1, 1];
    a trial succeeds when the perturbed coefficient classifies x the same way
    the clean coefficient does.  The trials are i.i.d. Bernoulli, so the
    estimate converges to 1 - 0.5 exp(-C eps) with binomial standard error.
    """
    if n_noise < 1 or n_x < 1:
        raise ValueError("n_noise and n_x must be >= 1")
    if not (C > 0 and eps > 0):
        raise ValueError("C and eps must be > 0")
    if coef_sign not in (-1, 1):
        raise ValueError("coef_sign must be +1 or -1")
    xi = coef_sign * C  # sensitivity fixed at 1, so |xi| / S_f = C
    scale = 1.0 / eps
    correct = 0
    total = n_noise * n_x
    # Chunked to bound memory for very large sample counts.
    chunk = 1_000_000
    remaining = total
    while remaining > 0:
        m = min(chunk, remaining)
        eta = rng.laplace(loc=0.0, scale=scale, size=m)
        x = rng.uniform(-1.0, 1.0, size=m)
        predicted = (xi + eta) * x >= 0.0
        truth = xi * x >= 0.0
        correct += int(np.count_nonzero(predicted == truth))
        remaining -= m
    return correct / total
