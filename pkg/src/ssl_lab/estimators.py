"""Estimators for the symmetric 2-GMM mean direction.

Supervised, unsupervised, and semi-supervised fits:

- fit_sl: label-weighted sample mean (1/n_l) sum y_i x_i.
- fit_ul: spectral estimate sqrt((lambda - 1)_+) * v from the leading
  eigenpair of the uncentered second moment (1/n_u) sum x_j x_j^T. The
  second moment is deliberately uncentered: the mixture is symmetric, so
  the population mean is zero and E[X X^T] = I + theta theta^T.
- fix_sign: resolves UL's inherent sign ambiguity with the labeled data,
  sign(<theta_sl, theta_ul>) * theta_ul, where sign(0) := +1.
- fit_ssl_s: the three-branch switch between the zero vector, fit_sl, and
  the sign-fixed fit_ul, driven by thresholds on (s, d, n_l, n_u).
- fit_ssl_w: the convex combination t*theta_sl + (1-t)*theta_ulplus with t
  picked by average margin on an unlabeled validation set.
- fit_em: EM specialized to this family, whose exact update is
  theta <- (1/n) sum tanh(<theta, x_i>) x_i.
- fit_em_means: EM with two free means (shared identity covariance, equal
  weights), the generic-mixture sibling of fit_em; returns half the mean
  difference. Used as an alternative unsupervised backend in experiments.
- fit_logistic: ridge-penalized logistic regression through the origin,
  full-batch gradient descent with backtracking; self_train builds on it.
- fit_spherical_lda: half the difference of class-conditional means.

Everything is a pure function of its arguments; iterative solvers keep all
state local and report non-convergence as ConvergenceError carrying the
last iterate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ValidationError
from .gmm import (
    EstimatorOutput,
    LabeledDataset,
    UnlabeledDataset,
    _as_vector,
    _normalize_seed,
    _readonly,
)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200_000
DEFAULT_T_GRID = tuple(round(0.05 * i, 2) for i in range(21))


@dataclass(frozen=True, eq=False)
class SecondMoment:
    """Uncentered second-moment matrix (1/n) sum x_j x_j^T and its n."""

    m: np.ndarray
    n: int

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError("m must be a square matrix")
        if not np.all(np.isfinite(m)):
            raise ValidationError("m must have finite entries")
        if not np.allclose(m, m.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(m).max()))):
            raise ValidationError("m must be symmetric")
        object.__setattr__(self, "m", _readonly(0.5 * (m + m.T)))
        object.__setattr__(self, "n", int(self.n))


@dataclass(frozen=True, eq=False)
class EigenPair:
    """Leading eigenvalue and unit eigenvector of a symmetric matrix."""

    value: float
    vector: np.ndarray

    def __post_init__(self):
        v = _as_vector(self.vector, "vector")
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "vector", _readonly(v))


@dataclass(frozen=True)
class WeightSelection:
    """Chosen mixing weight t and the average margin it achieved."""

    t: float
    criterion_value: float

    def __post_init__(self):
        if not (0.0 <= self.t <= 1.0):
            raise ValidationError("t must lie in [0, 1]")
        if not math.isfinite(self.criterion_value):
            raise ValidationError("criterion_value must be finite")


def _theta_of(est, name: str) -> np.ndarray:
    if isinstance(est, EstimatorOutput):
        return est.theta
    return _as_vector(est, name)


def fit_sl(data: LabeledDataset) -> EstimatorOutput:
    """Label-weighted mean (1/n) sum y_i x_i."""
    if data.n < 1:
        raise ValidationError("fit_sl needs at least one labeled sample")
    theta = (data.y @ data.x) / data.n
    return EstimatorOutput(theta=theta, method="sl")


def second_moment(data: UnlabeledDataset) -> SecondMoment:
    """Uncentered second moment (1/n) sum x_j x_j^T."""
    if data.n < 1:
        raise ValidationError("second_moment needs at least one sample")
    m = (data.x.T @ data.x) / data.n
    return SecondMoment(m=0.5 * (m + m.T), n=data.n)


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    """Flip v so its largest-|entry| coordinate is positive (ties: first)."""
    idx = int(np.argmax(np.abs(v)))
    return -v if v[idx] < 0 else v


def leading_eigenpair(
    m,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
) -> EigenPair:
    """Leading eigenpair by power iteration from a seeded random unit start.

    Accepts a SecondMoment or a plain symmetric matrix. Iterates until the
    iterates stabilize AND the residual ||Mv - lambda v|| is at most tol;
    the residual bound holds on every successful return. The returned
    vector's largest-|entry| coordinate is made positive.

    Raises ConvergenceError (carrying the last EigenPair) after max_iter.
    """
    matrix = m.m if isinstance(m, SecondMoment) else np.asarray(m, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValidationError("matrix must be square")
    if not np.all(np.isfinite(matrix)):
        raise ValidationError("matrix must have finite entries")
    if not (isinstance(tol, (int, float)) and tol > 0):
        raise ValidationError("tol must be positive")
    if max_iter < 1:
        raise ValidationError("max_iter must be at least 1")

    d = matrix.shape[0]
    rng = np.random.default_rng(_normalize_seed(seed))
    v = rng.standard_normal(d)
    v /= np.linalg.norm(v)

    lam = 0.0
    for _ in range(int(max_iter)):
        y = matrix @ v
        lam = float(v @ y)
        residual = float(np.linalg.norm(y - lam * v))
        norm_y = float(np.linalg.norm(y))
        if norm_y == 0.0:
            # v is in the null space; (0, v) is an exact eigenpair.
            return EigenPair(value=0.0, vector=_canonical_sign(v))
        v_next = y / norm_y
        if residual <= tol and float(np.linalg.norm(v_next - v)) < tol:
            return EigenPair(value=lam, vector=_canonical_sign(v))
        v = v_next
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations",
        last=EigenPair(value=lam, vector=_canonical_sign(v)),
    )


def fit_ul(
    data: UnlabeledDataset,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
) -> EstimatorOutput:
    """Spectral estimate sqrt((lambda - 1)_+) * v, zero when lambda <= 1.

    The sign of the output is the eigensolver's canonical one; the model's
    +-theta ambiguity is resolved only by fix_sign.
    """
    pair = leading_eigenpair(second_moment(data), tol=tol, max_iter=max_iter, seed=seed)
    magnitude = math.sqrt(max(pair.value - 1.0, 0.0))
    return EstimatorOutput(theta=magnitude * pair.vector, method="ul")


def fix_sign(theta_ul, theta_sl) -> EstimatorOutput:
    """Pick the sign of theta_ul that agrees with theta_sl; sign(0) := +1."""
    ul = _theta_of(theta_ul, "theta_ul")
    sl = _theta_of(theta_sl, "theta_sl")
    if ul.size != sl.size:
        raise ValidationError("theta_ul and theta_sl must have equal length")
    sign = -1.0 if float(sl @ ul) < 0.0 else 1.0
    return EstimatorOutput(theta=sign * ul, method="ulplus")


def plugin_snr(data: UnlabeledDataset, tol: float = DEFAULT_TOL,
               max_iter: int = DEFAULT_MAX_ITER, seed: int = 0) -> float:
    """Plug-in SNR estimate sqrt((lambda - 1)_+) from the second moment."""
    pair = leading_eigenpair(second_moment(data), tol=tol, max_iter=max_iter, seed=seed)
    return math.sqrt(max(pair.value - 1.0, 0.0))


def fit_ssl_s(
    labeled: LabeledDataset,
    unlabeled: UnlabeledDataset,
    s: float | None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
) -> tuple[EstimatorOutput, str]:
    """Three-branch switch between 0, fit_sl, and sign-fixed fit_ul.

    With d the data dimension and n_l, n_u the sample counts:

    - branch "zero"   if s <= min(sqrt(d/n_l), (d/n_u)^(1/4)),
    - branch "sl"     elif s <= sqrt(n_l/n_u),
    - branch "ulplus" otherwise.

    `s` is oracle knowledge of the SNR; passing None uses the plug-in
    estimate sqrt((lambda - 1)_+) from the unlabeled second moment instead.
    An empty unlabeled set is allowed: both n_u thresholds are then +inf,
    so the unlabeled data is never needed on the branch taken. Estimator
    errors propagate only from the branch actually taken.

    Returns (output, branch) with branch in {"zero", "sl", "ulplus"}. The
    output's method tag is "ssls"; its vector is bitwise equal to the
    chosen candidate's.
    """
    if labeled.n < 1:
        raise ValidationError("fit_ssl_s needs at least one labeled sample")
    if labeled.d != unlabeled.d and unlabeled.n > 0:
        raise ValidationError("labeled and unlabeled dimensions differ")
    if s is None:
        if unlabeled.n < 1:
            raise ValidationError("plug-in SNR needs a nonempty unlabeled set")
        s_val = plugin_snr(unlabeled, tol=tol, max_iter=max_iter, seed=seed)
    else:
        s_val = float(s)
        if not math.isfinite(s_val) or s_val < 0.0:
            raise ValidationError("s must be a nonnegative real")

    d = float(labeled.d)
    n_l = float(labeled.n)
    n_u = float(unlabeled.n)
    low_threshold = min(math.sqrt(d / n_l), (d / n_u) ** 0.25 if n_u > 0 else math.inf)
    if s_val <= low_threshold:
        theta = np.zeros(labeled.d)
        branch = "zero"
    elif s_val <= (math.sqrt(n_l / n_u) if n_u > 0 else math.inf):
        theta = fit_sl(labeled).theta
        branch = "sl"
    else:
        ul = fit_ul(unlabeled, tol=tol, max_iter=max_iter, seed=seed)
        theta = fix_sign(ul, fit_sl(labeled)).theta
        branch = "ulplus"
    return EstimatorOutput(theta=theta, method="ssls"), branch


def weighted(theta_sl, theta_ulp, t: float) -> EstimatorOutput:
    """Convex combination t*theta_sl + (1-t)*theta_ulplus."""
    if not (isinstance(t, (int, float)) and 0.0 <= t <= 1.0):
        raise ValidationError("t must lie in [0, 1]")
    sl = _theta_of(theta_sl, "theta_sl")
    ulp = _theta_of(theta_ulp, "theta_ulp")
    if sl.size != ulp.size:
        raise ValidationError("theta_sl and theta_ulp must have equal length")
    return EstimatorOutput(theta=float(t) * sl + (1.0 - float(t)) * ulp, method="sslw")


def avg_margin(theta, validation: UnlabeledDataset) -> float:
    """Mean absolute normalized margin (1/n) sum |<theta, x>| / ||theta||."""
    th = _theta_of(theta, "theta")
    if validation.n < 1:
        raise ValidationError("avg_margin needs a nonempty validation set")
    if th.size != validation.d:
        raise ValidationError("theta and validation dimensions differ")
    norm = float(np.linalg.norm(th))
    if norm == 0.0:
        raise ValidationError("avg_margin is undefined for the zero vector")
    return float(np.mean(np.abs(validation.x @ th))) / norm


def fit_ssl_w(
    labeled: LabeledDataset,
    unlabeled: UnlabeledDataset,
    validation: UnlabeledDataset,
    t_grid=DEFAULT_T_GRID,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
    theta_ulp: EstimatorOutput | None = None,
) -> tuple[EstimatorOutput, WeightSelection]:
    """Pick t from t_grid maximizing the validation margin of weighted(...).

    Ties break toward the smallest t; candidates whose combination is the
    zero vector are skipped (an error if that leaves none). `theta_ulp`
    substitutes a precomputed sign-fixed unsupervised estimate; by default
    it is fix_sign(fit_ul(unlabeled), fit_sl(labeled)).
    """
    grid = [float(t) for t in t_grid]
    if not grid:
        raise ValidationError("t_grid must be nonempty")
    if any(not (0.0 <= t <= 1.0) or not math.isfinite(t) for t in grid):
        raise ValidationError("t_grid values must lie in [0, 1]")

    sl = fit_sl(labeled)
    if theta_ulp is None:
        theta_ulp = fix_sign(fit_ul(unlabeled, tol=tol, max_iter=max_iter, seed=seed), sl)

    best: tuple[float, float, EstimatorOutput] | None = None
    for t in sorted(grid):
        candidate = weighted(sl, theta_ulp, t)
        if float(np.linalg.norm(candidate.theta)) == 0.0:
            continue
        margin = avg_margin(candidate, validation)
        if best is None or margin > best[1]:
            best = (t, margin, candidate)
    if best is None:
        raise ValidationError("every weighted candidate was the zero vector")
    t_star, margin, candidate = best
    return candidate, WeightSelection(t=t_star, criterion_value=margin)


def oracle_weight(mse_sl: float, mse_ul: float) -> WeightSelection:
    """MSE-proportional oracle weight t = mse_ul / (mse_sl + mse_ul)."""
    if mse_sl < 0.0 or mse_ul < 0.0:
        raise ValidationError("mean squared errors must be nonnegative")
    total = float(mse_sl) + float(mse_ul)
    if total == 0.0:
        raise ValidationError("at least one MSE must be positive")
    t = float(mse_ul) / total
    return WeightSelection(t=t, criterion_value=t)


def fit_em(
    data: UnlabeledDataset,
    theta_init,
    tol: float = 1e-8,
    max_iter: int = DEFAULT_MAX_ITER,
) -> EstimatorOutput:
    """Symmetric-mixture EM: iterate theta <- (1/n) sum tanh(<theta,x>) x.

    This is the exact EM step for the known-identity-covariance symmetric
    pair of components. Stops when successive iterates move less than tol.
    """
    if data.n < 1:
        raise ValidationError("fit_em needs at least one sample")
    theta = _as_vector(theta_init, "theta_init").copy()
    if theta.size != data.d:
        raise ValidationError("theta_init dimension differs from the data")
    if not (isinstance(tol, (int, float)) and tol > 0):
        raise ValidationError("tol must be positive")
    x = data.x
    for _ in range(int(max_iter)):
        theta_next = (np.tanh(x @ theta) @ x) / data.n
        if float(np.linalg.norm(theta_next - theta)) < tol:
            return EstimatorOutput(theta=theta_next, method="em")
        theta = theta_next
    raise ConvergenceError(
        f"EM did not converge in {max_iter} iterations",
        last=EstimatorOutput(theta=theta, method="em"),
    )


def fit_em_means(
    data: UnlabeledDataset,
    mu_init,
    tol: float = 1e-8,
    max_iter: int = DEFAULT_MAX_ITER,
) -> EstimatorOutput:
    """EM with two free means (identity covariance, equal weights).

    Unlike fit_em this does not tie the component means to +-theta; it
    alternates soft assignments r_i = sigma(<mu1 - mu2, x_i> - (||mu1||^2 -
    ||mu2||^2)/2) with weighted mean updates, and returns (mu1 - mu2)/2.
    `mu_init` seeds mu1 (mu2 starts at -mu_init).
    """
    if data.n < 1:
        raise ValidationError("fit_em_means needs at least one sample")
    mu1 = _as_vector(mu_init, "mu_init").copy()
    if mu1.size != data.d:
        raise ValidationError("mu_init dimension differs from the data")
    if not (isinstance(tol, (int, float)) and tol > 0):
        raise ValidationError("tol must be positive")
    mu2 = -mu1
    x = data.x
    n = data.n
    for _ in range(int(max_iter)):
        logit = x @ (mu1 - mu2) - 0.5 * (float(mu1 @ mu1) - float(mu2 @ mu2))
        r = _sigmoid(logit)
        w1 = float(np.sum(r))
        w2 = float(n) - w1
        # A component with no mass keeps its mean (degenerate but stable).
        mu1_next = (r @ x) / w1 if w1 > 0.0 else mu1
        mu2_next = ((1.0 - r) @ x) / w2 if w2 > 0.0 else mu2
        move = max(
            float(np.linalg.norm(mu1_next - mu1)),
            float(np.linalg.norm(mu2_next - mu2)),
        )
        mu1, mu2 = mu1_next, mu2_next
        if move < tol:
            return EstimatorOutput(theta=0.5 * (mu1 - mu2), method="em_means")
    raise ConvergenceError(
        f"free-means EM did not converge in {max_iter} iterations",
        last=EstimatorOutput(theta=0.5 * (mu1 - mu2), method="em_means"),
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_objective(theta: np.ndarray, data: LabeledDataset, ridge: float) -> float:
    """(1/n) sum log(1 + exp(-y <theta, x>)) + ridge * ||theta||^2."""
    margins = data.y * (data.x @ theta)
    return float(np.mean(np.logaddexp(0.0, -margins))) + float(ridge) * float(theta @ theta)


def logistic_gradient(theta: np.ndarray, data: LabeledDataset, ridge: float) -> np.ndarray:
    grad_loss = -((data.y * _sigmoid(-data.y * (data.x @ theta))) @ data.x) / data.n
    return grad_loss + 2.0 * float(ridge) * theta


def fit_logistic(
    data: LabeledDataset,
    ridge: float,
    tol: float = 1e-8,
    max_iter: int = 10_000,
) -> EstimatorOutput:
    """Ridge logistic regression through the origin (no intercept).

    Full-batch gradient descent with Armijo backtracking from theta = 0;
    returns once the gradient norm is at most tol. With ridge = 0 on
    separable data the infimum is not attained, so the solver can
    legitimately exhaust max_iter; the error carries the last iterate.
    """
    if data.n < 1:
        raise ValidationError("fit_logistic needs at least one sample")
    if not (isinstance(ridge, (int, float)) and math.isfinite(ridge) and ridge >= 0.0):
        raise ValidationError("ridge must be a nonnegative real")
    if not (isinstance(tol, (int, float)) and tol > 0):
        raise ValidationError("tol must be positive")

    theta = np.zeros(data.d)
    value = logistic_objective(theta, data, ridge)
    step = 1.0
    for _ in range(int(max_iter)):
        grad = logistic_gradient(theta, data, ridge)
        grad_sq = float(grad @ grad)
        if math.sqrt(grad_sq) <= tol:
            return EstimatorOutput(theta=theta, method="logistic")
        step = min(step * 2.0, 1e8)
        while True:
            candidate = theta - step * grad
            cand_value = logistic_objective(candidate, data, ridge)
            if cand_value <= value - 1e-4 * step * grad_sq:
                break
            step *= 0.5
            if step < 1e-18:
                raise ConvergenceError(
                    "backtracking line search stalled",
                    last=EstimatorOutput(theta=theta, method="logistic"),
                )
        theta, value = candidate, cand_value
    raise ConvergenceError(
        f"gradient descent did not reach tolerance in {max_iter} iterations",
        last=EstimatorOutput(theta=theta, method="logistic"),
    )


def self_train(
    labeled: LabeledDataset,
    unlabeled: UnlabeledDataset,
    threshold: float,
    ridge: float,
    tol: float = 1e-8,
    max_iter: int = 10_000,
) -> EstimatorOutput:
    """Two-stage self-training with logistic pseudolabeling.

    Stage 1 fits fit_logistic on the labeled data. Stage 2 pseudolabels
    every unlabeled x whose absolute normalized margin reaches `threshold`
    as sign(<theta_1, x>) (sign(0) := +1). Stage 3 refits fit_logistic on
    the union. threshold = +inf (or an empty unlabeled set, or a zero
    stage-1 estimate, whose margins are undefined) degenerates to plain
    fit_logistic on the labeled data.
    """
    if not (isinstance(threshold, (int, float)) and threshold >= 0.0):
        raise ValidationError("threshold must be nonnegative")
    stage1 = fit_logistic(labeled, ridge, tol=tol, max_iter=max_iter)
    theta1 = stage1.theta
    norm1 = float(np.linalg.norm(theta1))

    x, y = labeled.x, labeled.y
    if unlabeled.n > 0 and norm1 > 0.0:
        scores = unlabeled.x @ theta1
        keep = (np.abs(scores) / norm1) >= threshold
        if np.any(keep):
            pseudo_y = np.where(scores[keep] >= 0.0, 1.0, -1.0)
            x = np.concatenate([x, unlabeled.x[keep]])
            y = np.concatenate([y, pseudo_y])
    union = LabeledDataset(x=x, y=y)
    stage2 = fit_logistic(union, ridge, tol=tol, max_iter=max_iter)
    return EstimatorOutput(theta=stage2.theta, method="selftrain")


def fit_spherical_lda(data: LabeledDataset) -> EstimatorOutput:
    """Half the difference of class-conditional means, (mu_+ - mu_-)/2."""
    pos = data.y > 0
    neg = ~pos
    if not (np.any(pos) and np.any(neg)):
        raise ValidationError("fit_spherical_lda needs both classes present")
    mu_pos = data.x[pos].mean(axis=0)
    mu_neg = data.x[neg].mean(axis=0)
    return EstimatorOutput(theta=0.5 * (mu_pos - mu_neg), method="lda")
