"""Seeded Monte Carlo harness: replicated trials, sweeps, and gap studies.

A trial samples labeled/unlabeled/validation/test sets for one problem
size, fits the requested methods, and records closed-form metrics (excess
risk and estimation error against the true theta) plus the empirical
test-set error. A sweep repeats trials over a grid (SNR, n_l, n_u, or the
n_u/n_l ratio) with a fixed replicate count and aggregates mean/std per
cell with a hand-rolled Welford accumulator.

Determinism: the per-trial seed is a 64-bit mix of (base_seed, global
trial index) and every random stream inside the trial derives from it, so
a sweep is bit-identical across runs and across worker counts; worker
processes only change who computes a trial, never what it computes.

Hyperparameters are selected by average margin on the unlabeled
validation set: ridge for the logistic fit from a log-spaced grid, the
self-training threshold from quantiles of the stage-1 margins, and the
mixing weight t inside fit_ssl_w.

The unsupervised backend behind the sign-fixed estimate ("ulplus", and
through it "sslw") is configurable: "spectral" uses the second-moment
eigenpair, "em" runs the symmetric EM update from a deterministic
near-zero start under a hard iteration budget (em_budget) and reports the
zero vector (no estimate) whenever EM fails to settle within it. Near
zero the update is essentially multiplication by the sample second
moment, so EM converges inside the budget once the components separate
and keeps wandering at low SNR: the backend is sharp or silent, never a
half-escaped guess. The "ul", "em", and "ssls" method tags always use
their own fixed algorithms regardless of backend.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConvergenceError, SslLabError, ValidationError
from .estimators import (
    DEFAULT_T_GRID,
    avg_margin,
    fit_em,
    fit_em_means,
    fit_logistic,
    fit_sl,
    fit_spherical_lda,
    fit_ssl_s,
    fit_ssl_w,
    fit_ul,
    fix_sign,
    self_train,
)
from .gmm import (
    MixtureModel,
    estimation_error,
    excess_risk,
    sample_labeled,
    sample_unlabeled,
)
from .seeds import stream_seed, trial_seed

HARNESS_METHODS = (
    "zero", "sl", "ul", "ulplus", "ssls", "sslw",
    "em", "em_means", "logistic", "selftrain", "lda",
)
SWEEP_AXES = ("snr", "nl", "nu", "nu_over_nl")
UL_BACKENDS = ("spectral", "em")
DEFAULT_RIDGE_GRID = tuple(float(r) for r in np.logspace(-4.0, 1.0, 7))
METRIC_FIELDS = ("excess", "estimation", "test_error")

_POWER_TOL = 1e-10
_POWER_MAX_ITER = 200_000
_EM_TOL = 1e-8
_EM_MAX_ITER = 200_000
_LOGISTIC_TOL = 1e-6
_LOGISTIC_MAX_ITER = 5_000
EM_INIT_SCALE = 1e-3


@dataclass(frozen=True, eq=False)
class TrialConfig:
    """One problem size plus the fitting protocol.

    Sweeps place theta_star on the first basis vector; arbitrary
    directions are still accepted here. Metrics are rotation-equivariant,
    and so is every fitting routine except the "em" backend, whose
    deterministic near-zero start sits on the last basis axis: its escape
    transient depends on the angle between that axis and theta_star, and
    the sweep convention keeps the start signal-free.
    self_train_thresholds=None derives 7 quantiles of the stage-1 margins
    per trial instead of a fixed list.
    """

    model: MixtureModel
    n_l: int
    n_u: int
    n_val: int = 1000
    n_test: int = 1000
    methods: tuple = ("sl",)
    t_grid: tuple = DEFAULT_T_GRID
    self_train_thresholds: tuple | None = None
    ridge_grid: tuple = DEFAULT_RIDGE_GRID
    base_seed: int = 0
    ul_backend: str = "spectral"
    em_budget: int = 25

    def __post_init__(self):
        if not isinstance(self.model, MixtureModel):
            raise ValidationError("model must be a MixtureModel")
        for name in ("n_l", "n_u", "n_val", "n_test"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise ValidationError(f"{name} must be a nonnegative integer")
            object.__setattr__(self, name, int(value))
        if self.n_l < 1:
            raise ValidationError("n_l must be at least 1")
        methods = tuple(dict.fromkeys(self.methods))
        if not methods:
            raise ValidationError("methods must be nonempty")
        for tag in methods:
            if tag not in HARNESS_METHODS:
                raise ValidationError(f"unknown method tag {tag!r}")
        object.__setattr__(self, "methods", methods)
        object.__setattr__(self, "t_grid", tuple(float(t) for t in self.t_grid))
        if self.self_train_thresholds is not None:
            thresholds = tuple(float(t) for t in self.self_train_thresholds)
            if not thresholds or any(t < 0 for t in thresholds):
                raise ValidationError("self_train_thresholds must be nonnegative")
            object.__setattr__(self, "self_train_thresholds", thresholds)
        ridge_grid = tuple(float(r) for r in self.ridge_grid)
        if not ridge_grid or any(r < 0 or not math.isfinite(r) for r in ridge_grid):
            raise ValidationError("ridge_grid must be nonempty and nonnegative")
        object.__setattr__(self, "ridge_grid", ridge_grid)
        if not isinstance(self.base_seed, int):
            raise ValidationError("base_seed must be an integer")
        if self.ul_backend not in UL_BACKENDS:
            raise ValidationError(f"ul_backend must be one of {UL_BACKENDS}")
        if int(self.em_budget) != self.em_budget or self.em_budget < 1:
            raise ValidationError("em_budget must be a positive integer")
        object.__setattr__(self, "em_budget", int(self.em_budget))


@dataclass(frozen=True, eq=False)
class MethodMetrics:
    """Closed-form and empirical errors of one method in one trial."""

    excess: float
    estimation: float
    test_error: float
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.excess < 0:
            raise ValidationError("excess must be nonnegative")
        if not (0.0 <= self.test_error <= 1.0):
            raise ValidationError("test_error must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class TrialResult:
    trial_index: int
    seed: int
    metrics: dict
    failures: dict
    ssls_branch: str | None = None


@dataclass(frozen=True, eq=False)
class CellStats:
    """Aggregated statistics of one method at one grid cell."""

    method: str
    replicates: int
    mean_excess: float
    std_excess: float
    mean_estimation: float
    std_estimation: float
    mean_test_error: float
    std_test_error: float
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class SweepResult:
    axis_name: str
    grid: tuple
    replicates: int
    cells: tuple  # cells[i] is a tuple of CellStats for grid[i]

    def methods(self) -> tuple:
        return tuple(sorted({stats.method for row in self.cells for stats in row}))

    def cell(self, grid_index: int, method: str) -> CellStats:
        for stats in self.cells[grid_index]:
            if stats.method == method:
                return stats
        raise ValidationError(f"method {method!r} not present at grid index {grid_index}")

    def series(self, method: str, metric: str = "excess") -> tuple:
        if metric not in METRIC_FIELDS:
            raise ValidationError(f"metric must be one of {METRIC_FIELDS}")
        return tuple(
            getattr(self.cell(i, method), f"mean_{metric}") for i in range(len(self.grid))
        )

    def std_series(self, method: str, metric: str = "excess") -> tuple:
        if metric not in METRIC_FIELDS:
            raise ValidationError(f"metric must be one of {METRIC_FIELDS}")
        return tuple(
            getattr(self.cell(i, method), f"std_{metric}") for i in range(len(self.grid))
        )


def _test_error(theta: np.ndarray, test) -> float:
    predictions = np.where(test.x @ theta >= 0.0, 1.0, -1.0)
    return float(np.mean(predictions != test.y))


def _evaluate(theta: np.ndarray, model: MixtureModel, test, extra=None) -> MethodMetrics:
    return MethodMetrics(
        excess=excess_risk(theta, model.theta_star),
        estimation=estimation_error(theta, model.theta_star),
        test_error=_test_error(theta, test),
        extra=dict(extra or {}),
    )


def _select_ridge(labeled, validation, ridge_grid):
    """Pick the ridge whose logistic fit has the largest validation margin.

    Candidates that fail to converge or return the zero vector are
    skipped; if every candidate fails the last error is raised.
    """
    best = None
    last_error = None
    for ridge in ridge_grid:
        try:
            out = fit_logistic(labeled, ridge, tol=_LOGISTIC_TOL, max_iter=_LOGISTIC_MAX_ITER)
            margin = avg_margin(out, validation)
        except SslLabError as err:
            last_error = err
            continue
        if best is None or margin > best[0]:
            best = (margin, ridge, out)
    if best is None:
        raise last_error if last_error is not None else ValidationError("empty ridge grid")
    return best[1], best[2]


def _stage1_threshold_grid(stage1_theta, unlabeled):
    """Seven quantiles of the stage-1 absolute normalized margins."""
    norm = float(np.linalg.norm(stage1_theta))
    if unlabeled.n < 1 or norm == 0.0:
        return (0.0,)
    margins = np.abs(unlabeled.x @ stage1_theta) / norm
    qs = np.quantile(margins, [i / 8.0 for i in range(1, 8)])
    return tuple(float(q) for q in qs)


def _select_self_train(labeled, unlabeled, validation, ridge, thresholds):
    """Pick the pseudolabel threshold by validation margin of the refit."""
    best = None
    last_error = None
    for threshold in thresholds:
        try:
            out = self_train(
                labeled, unlabeled, threshold, ridge,
                tol=_LOGISTIC_TOL, max_iter=_LOGISTIC_MAX_ITER,
            )
            margin = avg_margin(out, validation)
        except SslLabError as err:
            last_error = err
            continue
        if best is None or margin > best[0]:
            best = (margin, threshold, out)
    if best is None:
        raise last_error if last_error is not None else ValidationError("no threshold candidates")
    return best[1], best[2]


def _budgeted_em(unlabeled, init, budget: int):
    """Symmetric EM with a hard iteration budget; unconverged means zero.

    Started near zero, the iterate escapes toward the component axis
    only once the per-step gain (roughly 1 + s^2) can amplify the sample
    signal within the budget, so EM settles quickly when the components
    are well separated and is still wandering at low SNR. A wandering
    iterate carries no trustworthy direction, so the backend reports no
    estimate: the zero vector, the pipeline's explicit null element
    (fix_sign passes it through and fit_ssl_w skips zero candidates).
    """
    try:
        return fit_em(unlabeled, init, tol=_EM_TOL, max_iter=budget)
    except ConvergenceError:
        return np.zeros(len(init))


def run_trial(cfg: TrialConfig, trial_index: int) -> TrialResult:
    """Run one seeded trial: sample, fit every method, measure.

    Per-method estimator failures are recorded in TrialResult.failures
    instead of aborting the whole trial.
    """
    if int(trial_index) != trial_index or trial_index < 0:
        raise ValidationError("trial_index must be a nonnegative integer")
    seed = trial_seed(cfg.base_seed, int(trial_index))
    model = cfg.model
    labeled = sample_labeled(model, cfg.n_l, stream_seed(seed, 0))
    unlabeled = sample_unlabeled(model, cfg.n_u, stream_seed(seed, 1))
    validation = sample_unlabeled(model, cfg.n_val, stream_seed(seed, 2))
    test = sample_labeled(model, cfg.n_test, stream_seed(seed, 3))
    solver_seed = stream_seed(seed, 4)
    # Deterministic, signal-free EM start: a near-zero vector on the last
    # basis axis, which the sweep convention (theta_star on the first
    # axis) keeps orthogonal to the true mean direction. EM must earn any
    # alignment from the data; below its escape SNR the iterate simply
    # stays near zero.
    em_init = np.zeros(model.d)
    em_init[-1] = EM_INIT_SCALE

    metrics: dict = {}
    failures: dict = {}
    ssls_branch = None

    sl_out = None

    def need_sl():
        nonlocal sl_out
        if sl_out is None:
            sl_out = fit_sl(labeled)
        return sl_out

    backend_ulp = None

    def need_backend_ulp():
        """Sign-fixed unsupervised estimate from the configured backend."""
        nonlocal backend_ulp
        if backend_ulp is None:
            if cfg.ul_backend == "spectral":
                raw = fit_ul(unlabeled, tol=_POWER_TOL, max_iter=_POWER_MAX_ITER, seed=solver_seed)
            else:
                raw = _budgeted_em(unlabeled, em_init, cfg.em_budget)
            backend_ulp = fix_sign(raw, need_sl())
        return backend_ulp

    ridge_selection = None

    def need_ridge():
        nonlocal ridge_selection
        if ridge_selection is None:
            ridge_selection = _select_ridge(labeled, validation, cfg.ridge_grid)
        return ridge_selection

    for tag in cfg.methods:
        try:
            if tag == "zero":
                metrics[tag] = _evaluate(np.zeros(model.d), model, test)
            elif tag == "sl":
                metrics[tag] = _evaluate(need_sl().theta, model, test)
            elif tag == "ul":
                out = fit_ul(unlabeled, tol=_POWER_TOL, max_iter=_POWER_MAX_ITER, seed=solver_seed)
                metrics[tag] = _evaluate(out.theta, model, test)
            elif tag == "ulplus":
                out = need_backend_ulp()
                wrong = 1.0 if float(out.theta @ model.theta_star) < 0.0 else 0.0
                metrics[tag] = _evaluate(out.theta, model, test, {"wrong_sign": wrong})
            elif tag == "ssls":
                out, branch = fit_ssl_s(
                    labeled, unlabeled, model.s,
                    tol=_POWER_TOL, max_iter=_POWER_MAX_ITER, seed=solver_seed,
                )
                ssls_branch = branch
                branch_extra = {f"branch_{name}": float(branch == name) for name in ("zero", "sl", "ulplus")}
                metrics[tag] = _evaluate(out.theta, model, test, branch_extra)
            elif tag == "sslw":
                out, selection = fit_ssl_w(
                    labeled, unlabeled, validation, t_grid=cfg.t_grid,
                    tol=_POWER_TOL, max_iter=_POWER_MAX_ITER, seed=solver_seed,
                    theta_ulp=need_backend_ulp(),
                )
                metrics[tag] = _evaluate(out.theta, model, test, {"t": selection.t})
            elif tag == "em":
                out = fit_em(unlabeled, em_init, tol=_EM_TOL, max_iter=_EM_MAX_ITER)
                metrics[tag] = _evaluate(out.theta, model, test)
            elif tag == "em_means":
                out = fit_em_means(unlabeled, em_init, tol=_EM_TOL, max_iter=_EM_MAX_ITER)
                metrics[tag] = _evaluate(out.theta, model, test)
            elif tag == "logistic":
                ridge, out = need_ridge()
                metrics[tag] = _evaluate(out.theta, model, test, {"ridge": ridge})
            elif tag == "selftrain":
                ridge, stage1 = need_ridge()
                thresholds = cfg.self_train_thresholds
                if thresholds is None:
                    thresholds = _stage1_threshold_grid(stage1.theta, unlabeled)
                threshold, out = _select_self_train(
                    labeled, unlabeled, validation, ridge, thresholds
                )
                metrics[tag] = _evaluate(
                    out.theta, model, test, {"threshold": threshold, "ridge": ridge}
                )
            elif tag == "lda":
                out = fit_spherical_lda(labeled)
                metrics[tag] = _evaluate(out.theta, model, test)
        except SslLabError as err:
            failures[tag] = f"{type(err).__name__}: {err}"

    return TrialResult(
        trial_index=int(trial_index),
        seed=seed,
        metrics=metrics,
        failures=failures,
        ssls_branch=ssls_branch,
    )


def _cell_config(cfg: TrialConfig, axis: str, value) -> TrialConfig:
    if axis == "snr":
        s = float(value)
        if s < 0:
            raise ValidationError("snr grid values must be nonnegative")
        theta = np.zeros(cfg.model.d)
        theta[0] = s
        return replace(cfg, model=MixtureModel(theta_star=theta))
    if axis == "nl":
        return replace(cfg, n_l=int(value))
    if axis == "nu":
        return replace(cfg, n_u=int(value))
    if axis == "nu_over_nl":
        ratio = float(value)
        if ratio <= 0:
            raise ValidationError("nu_over_nl grid values must be positive")
        return replace(cfg, n_l=max(1, round(cfg.n_u / ratio)))
    raise ValidationError(f"axis must be one of {SWEEP_AXES}")


class _Welford:
    """Streaming mean and population variance accumulator."""

    __slots__ = ("count", "mean", "m2")

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0

    def add(self, x: float):
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)

    def std(self) -> float:
        if self.count == 0:
            return math.nan
        return math.sqrt(max(self.m2, 0.0) / self.count)

    def result_mean(self) -> float:
        return self.mean if self.count else math.nan


def _aggregate_cell(results, methods, replicates) -> tuple:
    """Fold one cell's trial results into per-method statistics.

    Results are consumed in trial order, so the accumulated floats do not
    depend on who computed each trial.
    """
    stats = []
    for method in sorted(methods):
        accs = {name: _Welford() for name in METRIC_FIELDS}
        extras: dict = {}
        failed = 0
        for result in results:
            if method in result.failures:
                failed += 1
                continue
            if method not in result.metrics:
                continue
            mm = result.metrics[method]
            accs["excess"].add(mm.excess)
            accs["estimation"].add(mm.estimation)
            accs["test_error"].add(mm.test_error)
            for key, value in mm.extra.items():
                extras.setdefault(key, _Welford()).add(float(value))
        extra = {key: acc.result_mean() for key, acc in sorted(extras.items())}
        if failed:
            extra["failures"] = float(failed)
        stats.append(CellStats(
            method=method,
            replicates=replicates,
            mean_excess=accs["excess"].result_mean(),
            std_excess=accs["excess"].std(),
            mean_estimation=accs["estimation"].result_mean(),
            std_estimation=accs["estimation"].std(),
            mean_test_error=accs["test_error"].result_mean(),
            std_test_error=accs["test_error"].std(),
            extra=extra,
        ))
    return tuple(stats)


def _run_indexed_trial(args):
    cfg, trial_index = args
    return run_trial(cfg, trial_index)


def run_sweep(
    cfg: TrialConfig,
    axis: str,
    grid,
    replicates: int,
    threads: int = 1,
) -> SweepResult:
    """Run replicates x len(grid) trials and aggregate each cell.

    The global trial index of (cell i, replicate j) is i*replicates + j,
    which fully determines that trial's seed; scheduling across worker
    processes cannot change any number in the result.
    """
    if axis not in SWEEP_AXES:
        raise ValidationError(f"axis must be one of {SWEEP_AXES}")
    grid = tuple(grid)
    if not grid:
        raise ValidationError("grid must be nonempty")
    if int(replicates) != replicates or replicates < 1:
        raise ValidationError("replicates must be a positive integer")
    if int(threads) != threads or threads < 1:
        raise ValidationError("threads must be a positive integer")
    replicates = int(replicates)

    cell_configs = [_cell_config(cfg, axis, value) for value in grid]
    jobs = [
        (cell_configs[i], i * replicates + j)
        for i in range(len(grid))
        for j in range(replicates)
    ]
    if threads == 1:
        results = [run_trial(c, idx) for c, idx in jobs]
    else:
        with ProcessPoolExecutor(max_workers=int(threads)) as pool:
            chunk = max(1, len(jobs) // (4 * int(threads)))
            results = list(pool.map(_run_indexed_trial, jobs, chunksize=chunk))

    cells = []
    for i in range(len(grid)):
        cell_results = results[i * replicates:(i + 1) * replicates]
        cells.append(_aggregate_cell(cell_results, cfg.methods, replicates))
    return SweepResult(
        axis_name=axis,
        grid=grid,
        replicates=replicates,
        cells=tuple(cells),
    )


def _resolve_series(sweep: SweepResult, spec, metric: str):
    """A method tag, or a sequence of tags meaning their pointwise min."""
    if isinstance(spec, str):
        return sweep.series(spec, metric)
    parts = [sweep.series(tag, metric) for tag in spec]
    return tuple(min(column) for column in zip(*parts))


def error_gap(sweep: SweepResult, method_a, method_b, metric: str = "excess") -> tuple:
    """Per-cell mean(error_a) - mean(error_b); positive where b wins.

    Either side may be a single method tag or a sequence of tags, in which
    case the pointwise minimum of their mean errors is used.
    """
    series_a = _resolve_series(sweep, method_a, metric)
    series_b = _resolve_series(sweep, method_b, metric)
    return tuple(a - b for a, b in zip(series_a, series_b))


def switching_point_oracle(sweep: SweepResult, metric: str = "test_error") -> tuple:
    """Grid value where the better of {sl, ulplus} changes identity.

    Returns (grid_value, crossed). An exact tie counts as the change
    already having happened, so the switch lands on the smaller grid
    value. Without a crossing the last grid value is returned with
    crossed=False.
    """
    sl = _resolve_series(sweep, "sl", metric)
    ulp = _resolve_series(sweep, "ulplus", metric)
    identity = "sl" if sl[0] <= ulp[0] else "ulplus"
    for i in range(1, len(sweep.grid)):
        if sl[i] == ulp[i]:
            continue
        winner = "sl" if sl[i] < ulp[i] else "ulplus"
        if winner != identity:
            first = i
            while first > 0 and sl[first - 1] == ulp[first - 1]:
                first -= 1
            return sweep.grid[first], True
    return sweep.grid[-1], False


def compatibility_from_errors(err_bayes: float, err_ulp: float, d: int) -> tuple:
    """(rho, 1/rho) from the two training errors and the dimension.

    rho = (m + err_bayes)/(2*sqrt(d)) with m the relative error inflation
    (err_ulp - err_bayes)/err_bayes; when err_bayes <= 0.01 the data is
    treated as near separable and rho = err_bayes directly.
    """
    if not (0.0 <= err_bayes <= 1.0 and 0.0 <= err_ulp <= 1.0):
        raise ValidationError("training errors must lie in [0, 1]")
    if int(d) < 1:
        raise ValidationError("d must be a positive integer")
    if err_bayes <= 0.01:
        rho = err_bayes
    else:
        m = (err_ulp - err_bayes) / err_bayes
        rho = (m + err_bayes) / (2.0 * math.sqrt(d))
    inverse = math.inf if rho == 0.0 else 1.0 / rho
    return rho, inverse


def compatibility_score(labeled_full, ridge: float = 1e-3) -> tuple:
    """Compatibility of a labeled dataset: plug training errors into rho.

    The linear proxy for the Bayes rule is a ridge logistic fit on the
    full dataset; the unsupervised-style reference is the spherical LDA
    direction. Both are scored by training error.
    """
    bayes = fit_logistic(labeled_full, ridge, tol=_LOGISTIC_TOL, max_iter=_LOGISTIC_MAX_ITER)
    lda = fit_spherical_lda(labeled_full)
    err_bayes = _test_error(bayes.theta, labeled_full)
    err_ulp = _test_error(lda.theta, labeled_full)
    return compatibility_from_errors(err_bayes, err_ulp, labeled_full.d)


def scaling_fit(sweep: SweepResult, method: str, metric: str = "excess") -> float:
    """Least-squares slope of log(mean error) against log(axis value)."""
    if len(sweep.grid) < 3:
        raise ValidationError("scaling_fit needs at least 3 grid cells")
    xs = np.asarray(sweep.grid, dtype=float)
    ys = np.asarray(sweep.series(method, metric), dtype=float)
    if np.any(xs <= 0):
        raise ValidationError("axis values must be positive for a log-log fit")
    if np.any(~np.isfinite(ys)) or np.any(ys <= 0):
        raise ValidationError("errors must be positive for a log-log fit")
    lx = np.log(xs)
    ly = np.log(ys)
    lx_centered = lx - lx.mean()
    return float((lx_centered @ (ly - ly.mean())) / (lx_centered @ lx_centered))


@dataclass(frozen=True, eq=False)
class SweepSpec:
    """A named, fully pinned sweep: config plus axis, grid, replicates."""

    cfg: TrialConfig
    axis: str
    grid: tuple
    replicates: int


def _preset_model(s: float, d: int) -> MixtureModel:
    theta = np.zeros(d)
    theta[0] = s
    return MixtureModel(theta_star=theta)


PRESETS = {
    # SNR sweep at small fixed samples; the classic head-to-head picture.
    "fig1a": SweepSpec(
        cfg=TrialConfig(
            model=_preset_model(1.0, 2),
            n_l=20,
            n_u=2000,
            methods=("sl", "ulplus", "sslw", "selftrain"),
            ul_backend="em",
        ),
        axis="snr",
        grid=(0.5, 1.0, 1.5, 2.0, 2.5, 3.0),
        replicates=20,
    ),
    # ratio sweep at fixed unlabeled budget
    "fig1b": SweepSpec(
        cfg=TrialConfig(
            model=_preset_model(0.5, 2),
            n_l=10,
            n_u=7000,
            methods=("sl", "ulplus", "sslw", "selftrain"),
            ul_backend="em",
        ),
        axis="nu_over_nl",
        grid=(1.0, 4.0, 10.0, 40.0, 100.0, 200.0, 700.0),
        replicates=20,
    ),
    # labeled-size sweep across the switching point of the two baselines
    "fig3": SweepSpec(
        cfg=TrialConfig(
            model=_preset_model(0.5, 2),
            n_l=100,
            n_u=10_000,
            methods=("sl", "ulplus", "ssls", "sslw"),
            ul_backend="spectral",
        ),
        axis="nl",
        grid=(100, 500, 1000, 2500, 5000, 10_000),
        replicates=20,
    ),
}
