"""Symmetric two-component Gaussian mixture: model, sampling, risk metrics.

The generative family: labels Y are uniform on {-1, +1} and features follow
X | Y ~ N(Y * theta_star, I_d). The signal-to-noise ratio is s = ||theta_star||.
For a linear classifier x -> sign(<theta, x>) the misclassification rate has
the closed form Phi(-<theta, theta_star> / ||theta||), where Phi is the
standard normal CDF, so all error metrics here are exact rather than sampled:

- prediction_error: the closed-form misclassification rate, with the zero
  vector defined as the chance classifier (error 0.5);
- excess_risk: prediction error minus the Bayes error Phi(-s);
- estimation_error: the Euclidean distance ||theta_hat - theta_star||.

Sampling is fully determined by a 64-bit seed. Each call owns a fresh
numpy PCG64 generator (Gaussians via numpy's ziggurat standard_normal) and
draws in a fixed order: labels first, then the noise matrix. Nothing here
mutates shared state, so every function is safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .seeds import MASK64

_SQRT2 = math.sqrt(2.0)


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.setflags(write=False)
    return out


def _check_finite(a: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} must have finite entries")


def _as_vector(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError(f"{name} must be a nonempty 1-d vector")
    _check_finite(arr, name)
    return arr


def _normalize_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)):
        raise ValidationError("seed must be an integer")
    return int(seed) & MASK64


@dataclass(frozen=True, eq=False)
class MixtureModel:
    """The mixture N(+theta_star, I) / N(-theta_star, I) with uniform labels.

    `s` (the SNR, equal to ||theta_star||) and `d` are derived from
    theta_star and cached on construction.
    """

    theta_star: np.ndarray
    s: float = field(init=False)
    d: int = field(init=False)

    def __post_init__(self):
        theta = _as_vector(self.theta_star, "theta_star")
        object.__setattr__(self, "theta_star", _readonly(theta))
        object.__setattr__(self, "s", float(np.linalg.norm(theta)))
        object.__setattr__(self, "d", int(theta.size))


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Rows x[i] with labels y[i] in {-1, +1}."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 2:
            raise ValidationError("x must be a 2-d matrix")
        if x.shape[1] < 1:
            raise ValidationError("x must have at least one column")
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise ValidationError("y must be a vector with one entry per row of x")
        _check_finite(x, "x")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise ValidationError("labels must be exactly -1 or +1")
        object.__setattr__(self, "x", _readonly(x))
        object.__setattr__(self, "y", _readonly(y))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True, eq=False)
class UnlabeledDataset:
    """Rows x[j] with the labels discarded."""

    x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 2:
            raise ValidationError("x must be a 2-d matrix")
        if x.shape[1] < 1:
            raise ValidationError("x must have at least one column")
        _check_finite(x, "x")
        object.__setattr__(self, "x", _readonly(x))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]


#: Method tags an EstimatorOutput may carry.
METHOD_TAGS = (
    "sl",
    "ul",
    "ulplus",
    "ssls",
    "sslw",
    "em",
    "em_means",
    "logistic",
    "selftrain",
    "lda",
    "zero",
)


@dataclass(frozen=True, eq=False)
class EstimatorOutput:
    """A fitted direction estimate together with the method that produced it."""

    theta: np.ndarray
    method: str

    def __post_init__(self):
        theta = _as_vector(self.theta, "theta")
        if self.method not in METHOD_TAGS:
            raise ValidationError(f"unknown method tag {self.method!r}")
        object.__setattr__(self, "theta", _readonly(theta))

    @property
    def d(self) -> int:
        return self.theta.size


def sample_labeled(model: MixtureModel, n: int, seed: int) -> LabeledDataset:
    """Draw n labeled samples: y uniform on {-1,+1}, x = y*theta_star + noise.

    Determined entirely by (model, n, seed); draw order is labels first,
    then the n x d standard normal noise block.
    """
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise ValidationError("n must be a nonnegative integer")
    rng = np.random.default_rng(_normalize_seed(seed))
    y = 2.0 * rng.integers(0, 2, size=int(n)) - 1.0
    z = rng.standard_normal((int(n), model.d))
    x = y[:, None] * model.theta_star + z
    return LabeledDataset(x=x, y=y)


def sample_unlabeled(model: MixtureModel, n: int, seed: int) -> UnlabeledDataset:
    """Draw n samples from the x-marginal (same draw order, labels dropped)."""
    labeled = sample_labeled(model, n, seed)
    return UnlabeledDataset(x=labeled.x)


def std_normal_cdf(x: float) -> float:
    """Standard normal CDF via the complementary error function.

    Accurate to well under 1e-10 absolutely, including deep in the lower
    tail (erfc avoids the cancellation that 0.5*(1+erf) would suffer).
    """
    xf = float(x)
    if math.isnan(xf) or math.isinf(xf):
        raise ValidationError("std_normal_cdf requires finite x")
    return 0.5 * math.erfc(-xf / _SQRT2)


def prediction_error(theta_hat, theta_star) -> float:
    """Exact misclassification rate of sign(<theta_hat, x>) under the model.

    Returns Phi(-<theta_hat, theta_star>/||theta_hat||), or 0.5 for the zero
    vector (the chance classifier, by convention).
    """
    th = _as_vector(theta_hat, "theta_hat")
    ts = _as_vector(theta_star, "theta_star")
    if th.size != ts.size:
        raise ValidationError("theta_hat and theta_star must have equal length")
    norm = float(np.linalg.norm(th))
    if norm == 0.0:
        return 0.5
    return std_normal_cdf(-float(th @ ts) / norm)


def excess_risk(theta_hat, theta_star) -> float:
    """prediction_error minus the Bayes error Phi(-||theta_star||); >= 0."""
    ts = _as_vector(theta_star, "theta_star")
    bayes = std_normal_cdf(-float(np.linalg.norm(ts)))
    # The subtraction can round to a tiny negative for near-optimal inputs.
    return max(0.0, prediction_error(theta_hat, ts) - bayes)


def estimation_error(theta_hat, theta_star) -> float:
    """Euclidean distance ||theta_hat - theta_star||."""
    th = _as_vector(theta_hat, "theta_hat")
    ts = _as_vector(theta_star, "theta_star")
    if th.size != ts.size:
        raise ValidationError("theta_hat and theta_star must have equal length")
    return float(np.linalg.norm(th - ts))
