import math
from dataclasses import replace

import numpy as np
import pytest

from ssl_lab.errors import ValidationError
from ssl_lab.estimators import oracle_weight
from ssl_lab.experiments import (
    HARNESS_METHODS,
    PRESETS,
    CellStats,
    SweepResult,
    TrialConfig,
    compatibility_from_errors,
    compatibility_score,
    error_gap,
    run_sweep,
    run_trial,
    scaling_fit,
    switching_point_oracle,
)
from ssl_lab.gmm import MixtureModel, sample_labeled
from ssl_lab.theory import trivial_excess

STAT_FIELDS = (
    "mean_excess", "std_excess",
    "mean_estimation", "std_estimation",
    "mean_test_error", "std_test_error",
)


def model(s, d):
    theta = np.zeros(d)
    theta[0] = s
    return MixtureModel(theta_star=theta)


def config(**kwargs):
    """Small, quick-to-run TrialConfig with overridable fields."""
    fields = dict(model=model(1.0, 3), n_l=8, n_u=40, n_val=30, n_test=25)
    fields.update(kwargs)
    return TrialConfig(**fields)


def synthetic_sweep(grid, series_by_method, axis="nu"):
    """Hand-built SweepResult whose mean metrics all equal the given series."""
    cells = []
    for i in range(len(grid)):
        row = tuple(
            CellStats(
                method=method,
                replicates=1,
                mean_excess=float(series[i]),
                std_excess=0.0,
                mean_estimation=float(series[i]),
                std_estimation=0.0,
                mean_test_error=float(series[i]),
                std_test_error=0.0,
            )
            for method, series in series_by_method.items()
        )
        cells.append(row)
    return SweepResult(axis_name=axis, grid=tuple(grid), replicates=1, cells=tuple(cells))


def assert_sweeps_identical(a, b):
    assert a.axis_name == b.axis_name
    assert a.grid == b.grid
    assert a.replicates == b.replicates
    assert len(a.cells) == len(b.cells)
    for row_a, row_b in zip(a.cells, b.cells):
        assert len(row_a) == len(row_b)
        for sa, sb in zip(row_a, row_b):
            assert sa.method == sb.method
            assert sa.replicates == sb.replicates
            for name in STAT_FIELDS:
                va, vb = getattr(sa, name), getattr(sb, name)
                if math.isnan(va):
                    assert math.isnan(vb)
                else:
                    assert va == vb
            assert sa.extra == sb.extra


class TestTrialConfig:
    def test_defaults(self):
        cfg = TrialConfig(model=model(1.0, 2), n_l=5, n_u=10)
        assert cfg.n_val == 1000 and cfg.n_test == 1000
        assert cfg.methods == ("sl",)
        assert cfg.ul_backend == "spectral"
        assert cfg.em_budget == 25

    def test_deduplicates_methods_preserving_order(self):
        cfg = config(methods=("sslw", "sl", "sslw", "zero", "sl"))
        assert cfg.methods == ("sslw", "sl", "zero")

    def test_coerces_counts_and_grids(self):
        cfg = config(n_l=8.0, n_u=40.0, t_grid=(0, 1), em_budget=30.0)
        assert cfg.n_l == 8 and isinstance(cfg.n_l, int)
        assert cfg.t_grid == (0.0, 1.0)
        assert cfg.em_budget == 30 and isinstance(cfg.em_budget, int)

    @pytest.mark.parametrize("bad", [
        dict(model="not a model"),
        dict(n_l=0),
        dict(n_u=-1),
        dict(n_val=-2),
        dict(n_l=2.5),
        dict(methods=()),
        dict(methods=("sl", "nope")),
        dict(self_train_thresholds=(-0.1,)),
        dict(self_train_thresholds=()),
        dict(ridge_grid=()),
        dict(ridge_grid=(-1.0,)),
        dict(ridge_grid=(math.inf,)),
        dict(base_seed=1.5),
        dict(ul_backend="EM"),
        dict(ul_backend="jacobi"),
        dict(em_budget=0),
        dict(em_budget=2.5),
    ])
    def test_rejects_invalid_fields(self, bad):
        with pytest.raises(ValidationError):
            config(**bad)


class TestRunTrial:
    def test_repeated_call_is_bitwise_identical(self):
        cfg = config(methods=("sl", "ulplus", "sslw", "lda"))
        first = run_trial(cfg, 7)
        second = run_trial(cfg, 7)
        assert first.seed == second.seed
        assert sorted(first.metrics) == sorted(second.metrics)
        for tag, mm in first.metrics.items():
            other = second.metrics[tag]
            assert (mm.excess, mm.estimation, mm.test_error) == (
                other.excess, other.estimation, other.test_error
            )
            assert mm.extra == other.extra

    def test_distinct_indices_use_distinct_seeds(self):
        cfg = config()
        seeds = {run_trial(cfg, i).seed for i in range(6)}
        assert len(seeds) == 6

    @pytest.mark.parametrize("bad", [-1, 0.5])
    def test_rejects_bad_trial_index(self, bad):
        with pytest.raises(ValidationError):
            run_trial(config(), bad)

    def test_every_method_tag_runs(self):
        cfg = config(
            model=model(1.5, 3), n_l=25, n_u=80, n_val=40, n_test=30,
            methods=HARNESS_METHODS,
        )
        result = run_trial(cfg, 3)
        assert not result.failures
        assert sorted(result.metrics) == sorted(HARNESS_METHODS)
        for mm in result.metrics.values():
            assert math.isfinite(mm.excess) and mm.excess >= 0.0
            assert math.isfinite(mm.estimation) and mm.estimation >= 0.0
            assert 0.0 <= mm.test_error <= 1.0

    def test_extras_expose_selections(self):
        cfg = config(
            model=model(1.5, 3), n_l=25, n_u=80, n_val=40, n_test=30,
            methods=("ulplus", "ssls", "sslw", "logistic", "selftrain"),
        )
        result = run_trial(cfg, 5)
        assert result.metrics["ulplus"].extra["wrong_sign"] in (0.0, 1.0)
        assert result.metrics["sslw"].extra["t"] in cfg.t_grid
        assert result.metrics["logistic"].extra["ridge"] in cfg.ridge_grid
        assert result.metrics["selftrain"].extra["ridge"] in cfg.ridge_grid
        assert result.metrics["selftrain"].extra["threshold"] >= 0.0
        branches = [result.metrics["ssls"].extra[f"branch_{b}"]
                    for b in ("zero", "sl", "ulplus")]
        assert sorted(branches) == [0.0, 0.0, 1.0]
        assert result.ssls_branch in ("zero", "sl", "ulplus")

    def test_zero_method_matches_theory(self):
        cfg = config(model=model(0.8, 4), methods=("zero",))
        result = run_trial(cfg, 2)
        mm = result.metrics["zero"]
        assert mm.excess == pytest.approx(trivial_excess(0.8), abs=1e-15)
        assert mm.estimation == pytest.approx(0.8, abs=1e-15)

    def test_estimator_failure_is_recorded_not_raised(self):
        cfg = config(n_u=0, methods=("sl", "ul"))
        result = run_trial(cfg, 0)
        assert sorted(result.metrics) == ["sl"]
        assert "ul" in result.failures
        assert "ValidationError" in result.failures["ul"]

    def test_em_backend_below_escape_reports_no_estimate(self):
        cfg = config(
            model=model(0.5, 2), n_l=12, n_u=200, n_val=50, n_test=20,
            methods=("sl", "ulplus", "sslw"), ul_backend="em", em_budget=3,
        )
        result = run_trial(cfg, 1)
        ulp = result.metrics["ulplus"]
        assert ulp.estimation == 0.5  # zero vector: distance to theta* is s
        assert ulp.excess == pytest.approx(trivial_excess(0.5), abs=1e-15)
        assert result.metrics["sslw"].excess == pytest.approx(
            result.metrics["sl"].excess, abs=1e-12
        )

    def test_em_backend_above_escape_is_sharp_and_sign_fixed(self):
        cfg = config(
            model=model(3.0, 2), n_l=12, n_u=400, n_val=50, n_test=20,
            methods=("sl", "ulplus"), ul_backend="em", em_budget=25,
        )
        result = run_trial(cfg, 4)
        ulp = result.metrics["ulplus"]
        assert ulp.estimation < 0.2
        assert ulp.excess < 1e-3
        assert ulp.extra["wrong_sign"] == 0.0


class TestRunSweep:
    @pytest.mark.parametrize("kwargs", [
        dict(axis="bogus", grid=(1,), replicates=1),
        dict(axis="nl", grid=(), replicates=1),
        dict(axis="nl", grid=(5,), replicates=0),
        dict(axis="nl", grid=(5,), replicates=1, threads=0),
        dict(axis="snr", grid=(-1.0,), replicates=1),
        dict(axis="nu_over_nl", grid=(0.0,), replicates=1),
    ])
    def test_rejects_invalid_arguments(self, kwargs):
        with pytest.raises(ValidationError):
            run_sweep(config(), **kwargs)

    def test_snr_axis_places_theta_star_at_grid_value(self):
        cfg = config(methods=("zero",), n_val=2, n_test=2)
        sweep = run_sweep(cfg, "snr", (0.5, 1.0, 2.0), replicates=1)
        for i, s in enumerate(sweep.grid):
            cell = sweep.cell(i, "zero")
            assert cell.mean_excess == pytest.approx(trivial_excess(s), abs=1e-15)
            assert cell.mean_estimation == pytest.approx(s, abs=1e-15)
            assert cell.std_excess == 0.0

    def test_ratio_axis_matches_explicit_labeled_sizes(self):
        cfg = config(n_u=100, methods=("sl", "zero"))
        by_ratio = run_sweep(cfg, "nu_over_nl", (100.0, 10.0, 4.0), replicates=2)
        by_nl = run_sweep(cfg, "nl", (1, 10, 25), replicates=2)
        assert_sweeps_identical(
            replace(by_ratio, axis_name="nl", grid=by_nl.grid), by_nl
        )

    def test_aggregation_matches_direct_trials(self):
        cfg = config(methods=("sl", "zero"))
        replicates = 4
        sweep = run_sweep(cfg, "nu", (20, 60), replicates=replicates)
        for i, n_u in enumerate(sweep.grid):
            cell_cfg = replace(cfg, n_u=int(n_u))
            trials = [run_trial(cell_cfg, i * replicates + j) for j in range(replicates)]
            for method in ("sl", "zero"):
                values = np.array([t.metrics[method].excess for t in trials])
                cell = sweep.cell(i, method)
                assert cell.mean_excess == pytest.approx(values.mean(), rel=1e-12)
                assert cell.std_excess == pytest.approx(values.std(ddof=0), rel=1e-12, abs=1e-15)

    def test_worker_counts_give_bitwise_identical_results(self):
        cfg = config(
            model=model(1.0, 3), n_l=10, n_u=50, n_val=20, n_test=20,
            methods=("sl", "ulplus", "sslw"),
        )
        grid = (30, 50, 80)
        serial = run_sweep(cfg, "nu", grid, replicates=6, threads=1)
        parallel = run_sweep(cfg, "nu", grid, replicates=6, threads=4)
        assert_sweeps_identical(serial, parallel)

    def test_repeated_run_is_bitwise_identical(self):
        cfg = config(methods=("sl", "ulplus"))
        first = run_sweep(cfg, "snr", (0.5, 1.5), replicates=3)
        second = run_sweep(cfg, "snr", (0.5, 1.5), replicates=3)
        assert_sweeps_identical(first, second)

    def test_failed_cells_report_nan_stats_and_failure_count(self):
        cfg = config(methods=("sl", "ul"))
        sweep = run_sweep(cfg, "nu", (0, 40), replicates=3)
        broken = sweep.cell(0, "ul")
        assert math.isnan(broken.mean_excess)
        assert broken.extra["failures"] == 3.0
        healthy = sweep.cell(1, "ul")
        assert math.isfinite(healthy.mean_excess)
        assert "failures" not in healthy.extra

    def test_series_and_cell_lookup_errors(self):
        cfg = config(methods=("sl",))
        sweep = run_sweep(cfg, "nl", (5, 10), replicates=1)
        assert len(sweep.series("sl")) == 2
        with pytest.raises(ValidationError):
            sweep.cell(0, "sslw")
        with pytest.raises(ValidationError):
            sweep.series("sl", metric="bogus")


class TestSlErrorBound:
    def test_mean_estimation_error_matches_gaussian_theory(self):
        d, n_l = 20, 100
        cfg = TrialConfig(
            model=model(1.0, d), n_l=n_l, n_u=0, n_val=2, n_test=2,
            methods=("sl",),
        )
        sweep = run_sweep(cfg, "nl", (n_l,), replicates=200)
        mean_error = sweep.cell(0, "sl").mean_estimation
        expected = math.sqrt(2.0) * math.gamma((d + 1) / 2) / math.gamma(d / 2) / math.sqrt(n_l)
        assert mean_error == pytest.approx(expected, rel=0.05)
        assert mean_error < math.sqrt(d / n_l)


class TestCombinationIdentities:
    def combined_errors(self, rng, d, mse_one, mse_two, trials):
        noise_one = rng.standard_normal((trials, d)) * math.sqrt(mse_one / d)
        noise_two = rng.standard_normal((trials, d)) * math.sqrt(mse_two / d)
        t = oracle_weight(mse_one, mse_two).t
        combined = t * noise_one + (1.0 - t) * noise_two
        return (
            np.mean(np.sum(noise_one**2, axis=1)),
            np.mean(np.sum(noise_two**2, axis=1)),
            np.mean(np.sum(combined**2, axis=1)),
        )

    def test_equal_mse_combination_halves_the_error(self):
        rng = np.random.default_rng(20240817)
        d, n_l, trials = 8, 8, 100_000
        noise_sl = rng.standard_normal((trials, d)) / math.sqrt(n_l)
        synthetic = rng.standard_normal((trials, d)) / math.sqrt(d)
        t = oracle_weight(d / n_l, 1.0).t
        assert t == pytest.approx(0.5, abs=1e-12)
        combined = t * noise_sl + (1.0 - t) * synthetic
        mse = np.mean(np.sum(combined**2, axis=1))
        assert mse == pytest.approx(0.5, rel=0.05)

    @pytest.mark.parametrize("mse_pair", [(1.0, 1.0), (2.0, 6.0), (1.0, 4.0)])
    def test_harmonic_mean_and_gap_identities(self, mse_pair):
        mse_one, mse_two = mse_pair
        rng = np.random.default_rng(611)
        mse_a, mse_b, mse_combined = self.combined_errors(
            rng, d=16, mse_one=mse_one, mse_two=mse_two, trials=100_000
        )
        harmonic = mse_one * mse_two / (mse_one + mse_two)
        assert mse_combined == pytest.approx(harmonic, rel=0.05)
        ratio = mse_one / mse_two
        gap = min(mse_a, mse_b) - mse_combined
        assert gap == pytest.approx(min(ratio, 1.0 / ratio) * mse_combined, rel=0.05)


class TestMonotoneSignFixing:
    def test_wrong_sign_rate_nonincreasing_in_labels(self):
        cfg = TrialConfig(
            model=model(1.0, 5), n_l=5, n_u=5000, n_val=2, n_test=2,
            methods=("ulplus",),
        )
        sweep = run_sweep(cfg, "nl", (5, 20, 100), replicates=500, threads=4)
        rates = [sweep.cell(i, "ulplus").extra["wrong_sign"] for i in range(3)]
        for low, high in zip(rates[1:], rates[:-1]):
            spread = math.sqrt((low * (1 - low) + high * (1 - high)) / 500)
            assert low <= high + 2 * spread + 1e-12


class TestErrorGap:
    def test_gap_of_method_with_itself_is_zero(self):
        sweep = synthetic_sweep((1, 2, 3), {"sl": (0.3, 0.2, 0.1)})
        assert error_gap(sweep, "sl", "sl") == (0.0, 0.0, 0.0)

    def test_positive_gap_means_second_method_wins(self):
        sweep = synthetic_sweep((1, 2), {"sl": (0.3, 0.1), "sslw": (0.1, 0.2)})
        assert error_gap(sweep, "sl", "sslw") == pytest.approx((0.2, -0.1))

    def test_composite_side_uses_pointwise_minimum(self):
        sweep = synthetic_sweep(
            (1, 2), {"sl": (0.3, 0.1), "ulplus": (0.1, 0.4), "sslw": (0.05, 0.05)}
        )
        gap = error_gap(sweep, ("sl", "ulplus"), "sslw")
        assert gap == pytest.approx((0.05, 0.05))

    def test_missing_method_rejected(self):
        sweep = synthetic_sweep((1, 2), {"sl": (0.3, 0.1)})
        with pytest.raises(ValidationError):
            error_gap(sweep, "sl", "sslw")

    def test_metric_keyword_switches_series(self):
        cells = (
            (
                CellStats(
                    method="sl", replicates=1,
                    mean_excess=0.5, std_excess=0.0,
                    mean_estimation=2.0, std_estimation=0.0,
                    mean_test_error=0.1, std_test_error=0.0,
                ),
                CellStats(
                    method="zero", replicates=1,
                    mean_excess=0.25, std_excess=0.0,
                    mean_estimation=1.0, std_estimation=0.0,
                    mean_test_error=0.5, std_test_error=0.0,
                ),
            ),
        )
        sweep = SweepResult(axis_name="nl", grid=(10,), replicates=1, cells=cells)
        assert error_gap(sweep, "sl", "zero", metric="estimation") == (1.0,)
        assert error_gap(sweep, "sl", "zero", metric="test_error") == pytest.approx((-0.4,))


class TestSwitchingPointOracle:
    def test_single_crossing_is_located(self):
        sweep = synthetic_sweep(
            (10, 100, 1000),
            {"sl": (0.3, 0.2, 0.05), "ulplus": (0.1, 0.15, 0.2)},
        )
        assert switching_point_oracle(sweep, metric="excess") == (1000, True)

    def test_crossing_in_the_other_direction(self):
        sweep = synthetic_sweep(
            (10, 100, 1000),
            {"sl": (0.1, 0.2, 0.3), "ulplus": (0.2, 0.15, 0.1)},
        )
        assert switching_point_oracle(sweep, metric="excess") == (100, True)

    def test_no_crossing_returns_boundary_with_flag(self):
        sl_better = synthetic_sweep(
            (10, 100), {"sl": (0.1, 0.1), "ulplus": (0.2, 0.3)}
        )
        assert switching_point_oracle(sl_better, metric="excess") == (100, False)
        ul_better = synthetic_sweep(
            (10, 100), {"sl": (0.4, 0.3), "ulplus": (0.2, 0.2)}
        )
        assert switching_point_oracle(ul_better, metric="excess") == (100, False)

    def test_tie_resolves_to_smaller_grid_value(self):
        sweep = synthetic_sweep(
            (10, 100, 1000),
            {"sl": (0.1, 0.2, 0.3), "ulplus": (0.2, 0.2, 0.2)},
        )
        assert switching_point_oracle(sweep, metric="excess") == (100, True)

    def test_equal_series_never_cross(self):
        sweep = synthetic_sweep(
            (10, 100), {"sl": (0.2, 0.2), "ulplus": (0.2, 0.2)}
        )
        assert switching_point_oracle(sweep, metric="excess") == (100, False)

    def test_default_metric_is_test_error(self):
        sl_test = (0.1, 0.3)
        ul_test = (0.2, 0.2)
        rows = []
        for i in range(2):
            rows.append((
                CellStats(
                    method="sl", replicates=1,
                    mean_excess=0.1, std_excess=0.0,
                    mean_estimation=0.1, std_estimation=0.0,
                    mean_test_error=sl_test[i], std_test_error=0.0,
                ),
                CellStats(
                    method="ulplus", replicates=1,
                    mean_excess=0.2, std_excess=0.0,
                    mean_estimation=0.2, std_estimation=0.0,
                    mean_test_error=ul_test[i], std_test_error=0.0,
                ),
            ))
        sweep = SweepResult(axis_name="nl", grid=(10, 100), replicates=1, cells=tuple(rows))
        assert switching_point_oracle(sweep) == (100, True)
        assert switching_point_oracle(sweep, metric="excess") == (100, False)


class TestCompatibility:
    def test_worked_example(self):
        rho, inverse = compatibility_from_errors(0.1, 0.2, 4)
        assert rho == pytest.approx(0.275, abs=1e-12)
        assert inverse == pytest.approx(1.0 / 0.275, abs=1e-9)

    def test_equal_errors_reduce_to_bayes_term(self):
        rho, _ = compatibility_from_errors(0.2, 0.2, 4)
        assert rho == pytest.approx(0.2 / (2 * math.sqrt(4)), abs=1e-12)

    def test_near_separable_fallback(self):
        rho, inverse = compatibility_from_errors(0.005, 0.9, 7)
        assert rho == 0.005
        assert inverse == pytest.approx(200.0, abs=1e-9)

    def test_zero_error_gives_infinite_inverse(self):
        rho, inverse = compatibility_from_errors(0.0, 0.3, 2)
        assert rho == 0.0
        assert math.isinf(inverse)

    @pytest.mark.parametrize("args", [(-0.1, 0.2, 4), (0.1, 1.2, 4), (0.1, 0.2, 0)])
    def test_rejects_bad_inputs(self, args):
        with pytest.raises(ValidationError):
            compatibility_from_errors(*args)

    def test_score_on_separable_dataset_uses_fallback(self):
        data = sample_labeled(model(4.0, 3), 300, 97)
        rho, inverse = compatibility_score(data)
        assert rho <= 0.01
        assert inverse == (math.inf if rho == 0.0 else pytest.approx(1.0 / rho))

    def test_score_on_overlapping_dataset_is_positive_and_finite(self):
        data = sample_labeled(model(0.4, 3), 400, 53)
        rho, inverse = compatibility_score(data)
        assert 0.0 < rho < 1.0
        assert inverse == pytest.approx(1.0 / rho)


class TestScalingFit:
    def test_exact_inverse_law_has_slope_minus_one(self):
        grid = (10, 100, 1000, 10_000)
        sweep = synthetic_sweep(grid, {"sl": tuple(5.0 / n for n in grid)})
        assert scaling_fit(sweep, "sl") == pytest.approx(-1.0, abs=1e-9)

    def test_exact_inverse_root_law_has_slope_minus_half(self):
        grid = (16, 64, 256)
        sweep = synthetic_sweep(grid, {"sl": tuple(3.0 / math.sqrt(n) for n in grid)})
        assert scaling_fit(sweep, "sl") == pytest.approx(-0.5, abs=1e-9)

    def test_growing_law_has_positive_slope(self):
        grid = (2, 4, 8)
        sweep = synthetic_sweep(grid, {"sl": tuple(0.01 * n**0.7 for n in grid)})
        assert scaling_fit(sweep, "sl") == pytest.approx(0.7, abs=1e-9)

    def test_needs_three_cells(self):
        sweep = synthetic_sweep((10, 100), {"sl": (0.2, 0.1)})
        with pytest.raises(ValidationError):
            scaling_fit(sweep, "sl")

    def test_rejects_nonpositive_values(self):
        flat = synthetic_sweep((10, 100, 1000), {"sl": (0.1, 0.0, 0.01)})
        with pytest.raises(ValidationError):
            scaling_fit(flat, "sl")
        bad_axis = synthetic_sweep((0, 10, 100), {"sl": (0.3, 0.2, 0.1)})
        with pytest.raises(ValidationError):
            scaling_fit(bad_axis, "sl")


class TestPresets:
    def test_expected_presets_exist(self):
        assert {"fig1a", "fig1b", "fig3"} <= set(PRESETS)

    def test_fig1a_layout(self):
        spec = PRESETS["fig1a"]
        assert spec.axis == "snr"
        assert len(spec.grid) >= 6
        assert min(spec.grid) == 0.5 and max(spec.grid) == 3.0
        assert spec.replicates == 20
        assert spec.cfg.model.d == 2
        assert spec.cfg.n_l == 20 and spec.cfg.n_u == 2000
        assert spec.cfg.ul_backend == "em"
        assert {"sl", "ulplus", "sslw"} <= set(spec.cfg.methods)

    def test_fig1b_layout(self):
        spec = PRESETS["fig1b"]
        assert spec.axis == "nu_over_nl"
        assert spec.cfg.model.s == pytest.approx(0.5)
        assert spec.cfg.n_u == 7000
        assert spec.cfg.ul_backend == "em"

    def test_fig3_layout(self):
        spec = PRESETS["fig3"]
        assert spec.axis == "nl"
        assert spec.cfg.ul_backend == "spectral"
        assert "ssls" in spec.cfg.methods
