"""Closed-form rates, upper bounds, and regime classification.

Everything here is plain arithmetic on problem sizes (s, d, n_l, n_u):
minimax rates for excess risk and estimation error, upper bounds for the
sign-fixed spectral estimator, the labeled/unlabeled rate-improvement
split, a finite-sample regime classifier, and the oracle-weighting gap.

Asymptotic statements carry unspecified universal constants; they default
to 1 via BoundConstants and scale the corresponding terms, so only decay
exponents are meaningful, never absolute values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError
from .gmm import std_normal_cdf

REGIMES = ("SL-dominant", "UL-dominant", "Balanced", "LowSNR")


@dataclass(frozen=True)
class ProblemSize:
    """Problem-size tuple: SNR s, dimension d, labeled n_l, unlabeled n_u."""

    s: float
    d: int
    n_l: int
    n_u: int

    def __post_init__(self):
        if not (isinstance(self.s, (int, float)) and math.isfinite(self.s) and self.s >= 0):
            raise ValidationError("s must be a nonnegative real")
        if int(self.d) != self.d or self.d < 2:
            raise ValidationError("d must be an integer >= 2")
        if int(self.n_l) != self.n_l or self.n_l < 0:
            raise ValidationError("n_l must be a nonnegative integer")
        if int(self.n_u) != self.n_u or self.n_u < 0:
            raise ValidationError("n_u must be a nonnegative integer")
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "n_l", int(self.n_l))
        object.__setattr__(self, "n_u", int(self.n_u))


@dataclass(frozen=True)
class BoundConstants:
    """Universal constants in the bounds; unspecified upstream, default 1."""

    c0: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    c4: float = 1.0
    c_l: float = 1.0

    def __post_init__(self):
        for name in ("c0", "c1", "c2", "c3", "c4", "c_l"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be a positive real")


@dataclass(frozen=True)
class RateReport:
    """Bundle of every closed-form quantity for one problem size.

    Fields that do not apply (estimation rate for s > 1, the upper bounds
    outside their validity region) are None rather than extrapolated.
    """

    excess_rate: float | None
    estimation_rate: float | None
    ulp_excess_upper: float | None
    ulp_estimation_upper: float | None
    h_l: float | None
    h_u: float | None
    trivial_excess: float
    regime: str

    def __post_init__(self):
        for name in ("excess_rate", "estimation_rate", "ulp_excess_upper",
                     "ulp_estimation_upper", "trivial_excess"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValidationError(f"{name} must be nonnegative")
        for name in ("h_l", "h_u"):
            value = getattr(self, name)
            if value is not None and not (0.0 <= value <= 1.0):
                raise ValidationError(f"{name} must lie in [0, 1]")
        if self.regime not in REGIMES:
            raise ValidationError(f"unknown regime label {self.regime!r}")


def minimax_excess_rate(p: ProblemSize) -> float:
    """e^(-s^2/2) * min(s, d/(s*n_l + s^3*n_u)); 0 when s = 0."""
    if p.s == 0.0:
        return 0.0
    if p.n_l + p.n_u < 1:
        raise ValidationError("need at least one sample (n_l + n_u >= 1)")
    denom = p.s * p.n_l + p.s ** 3 * p.n_u
    return math.exp(-0.5 * p.s ** 2) * min(p.s, p.d / denom)


def minimax_estimation_rate(p: ProblemSize) -> float:
    """min(s, sqrt(d/(n_l + s^2*n_u))) for s in [0, 1]."""
    if p.s > 1.0:
        raise ValidationError("estimation rate is stated only for s in [0, 1]")
    if p.s == 0.0:
        return 0.0
    if p.n_l + p.n_u < 1:
        raise ValidationError("need at least one sample (n_l + n_u >= 1)")
    return min(p.s, math.sqrt(p.d / (p.n_l + p.s ** 2 * p.n_u)))


def _check_ulp_validity(p: ProblemSize) -> None:
    if not (0.0 < p.s <= 1.0):
        raise ValidationError("upper bounds are stated for s in (0, 1]")
    required = (160.0 / p.s) ** 2 * p.d
    if p.n_u < required:
        raise ValidationError(
            f"validity condition n_u >= (160/s)^2 * d fails: n_u={p.n_u} < {required:.6g}"
        )


def _clamped_exponent_factor(p: ProblemSize, c: BoundConstants) -> float:
    """(1 - (c0/min(s, s^2)) * sqrt(d*log(n_u)/(s^2*n_u))), clamped to [0,1]."""
    scale = c.c0 / min(p.s, p.s ** 2)
    inner = math.sqrt(p.d * math.log(p.n_u) / (p.s ** 2 * p.n_u))
    return min(1.0, max(0.0, 1.0 - scale * inner))


def ulplus_excess_upper(p: ProblemSize, c: BoundConstants = BoundConstants()) -> float:
    """Two-term excess-risk upper bound for the sign-fixed spectral fit.

    c3 * e^(-s^2/2) * d*log(d*n_u)/(s^3*n_u)
    + c4 * e^(-s^2*n_l*factor^2/2), factor as in _clamped_exponent_factor.
    Requires n_u >= (160/s)^2 * d.
    """
    _check_ulp_validity(p)
    first = c.c3 * math.exp(-0.5 * p.s ** 2) * p.d * math.log(p.d * p.n_u) / (p.s ** 3 * p.n_u)
    factor = _clamped_exponent_factor(p, c)
    second = c.c4 * math.exp(-0.5 * p.s ** 2 * p.n_l * factor ** 2)
    return first + second


def ulplus_estimation_upper(p: ProblemSize, c: BoundConstants = BoundConstants()) -> float:
    """c1 * sqrt(d/(s^2*n_u)) + c2 * s * e^(-s^2*n_l*factor^2/2)."""
    _check_ulp_validity(p)
    first = c.c1 * math.sqrt(p.d / (p.s ** 2 * p.n_u))
    factor = _clamped_exponent_factor(p, c)
    second = c.c2 * p.s * math.exp(-0.5 * p.s ** 2 * p.n_l * factor ** 2)
    return first + second


def rate_improvement(p: ProblemSize) -> tuple[float, float]:
    """(h_l, h_u) = (n_l, s^2*n_u) / (n_l + s^2*n_u); sums to 1 exactly."""
    denom = p.n_l + p.s ** 2 * p.n_u
    if denom <= 0.0:
        raise ValidationError("rate improvement needs n_l + s^2*n_u > 0")
    h_l = p.n_l / denom
    return h_l, 1.0 - h_l


def classify_regime(p: ProblemSize, ratio_threshold: float = 10.0) -> str:
    """Label the problem size by which data source carries the rate.

    LowSNR when s^2*n_u <= 1 (the s <= 1/sqrt(n_u) condition in a form
    that tolerates n_u = 0); otherwise whichever of n_l and s^2*n_u
    exceeds the other by ratio_threshold dominates; otherwise Balanced.
    """
    if not (isinstance(ratio_threshold, (int, float)) and ratio_threshold > 1.0):
        raise ValidationError("ratio_threshold must exceed 1")
    weight_u = p.s ** 2 * p.n_u
    if weight_u <= 1.0:
        return "LowSNR"
    if p.n_l > ratio_threshold * weight_u:
        return "SL-dominant"
    if weight_u > ratio_threshold * p.n_l:
        return "UL-dominant"
    return "Balanced"


def trivial_excess(s: float) -> float:
    """Excess risk of predicting with the zero vector: Phi(s) - 0.5."""
    if not (isinstance(s, (int, float)) and math.isfinite(s) and s >= 0):
        raise ValidationError("s must be a nonnegative real")
    return std_normal_cdf(float(s)) - 0.5


def oracle_gap(mse_sl: float, mse_ul: float) -> tuple[float, float]:
    """Gap between the better single estimator and the oracle combination.

    combined = harmonic form mse_sl*mse_ul/(mse_sl + mse_ul); the returned
    gap is min(mse_sl, mse_ul) - combined, which equals min(r, 1/r) *
    combined for the ratio r = mse_sl/mse_ul.
    """
    if not (mse_sl > 0.0 and mse_ul > 0.0):
        raise ValidationError("both mean squared errors must be positive")
    combined = (mse_sl * mse_ul) / (mse_sl + mse_ul)
    return min(mse_sl, mse_ul) - combined, combined


def rate_report(
    p: ProblemSize,
    c: BoundConstants = BoundConstants(),
    ratio_threshold: float = 10.0,
) -> RateReport:
    """Assemble every quantity that applies to p; inapplicable ones are None."""
    try:
        excess = minimax_excess_rate(p)
    except ValidationError:
        excess = None
    try:
        estimation = minimax_estimation_rate(p)
    except ValidationError:
        estimation = None
    try:
        ulp_excess = ulplus_excess_upper(p, c)
        ulp_estimation = ulplus_estimation_upper(p, c)
    except ValidationError:
        ulp_excess = None
        ulp_estimation = None
    try:
        h_l, h_u = rate_improvement(p)
    except ValidationError:
        h_l, h_u = None, None
    return RateReport(
        excess_rate=excess,
        estimation_rate=estimation,
        ulp_excess_upper=ulp_excess,
        ulp_estimation_upper=ulp_estimation,
        h_l=h_l,
        h_u=h_u,
        trivial_excess=trivial_excess(p.s),
        regime=classify_regime(p, ratio_threshold),
    )
