"""Command-line entry point: simulate, theory, fit, and report.

simulate runs a replicated sweep (a compiled-in preset or a custom
problem) and writes results.csv plus a manifest; theory prints the
closed-form rate report for one problem size as JSON; fit ingests a
user CSV, standardizes it, optionally PCA-projects it, splits it, and
scores the requested estimators on the held-out test rows; report
renders results CSVs as self-contained SVG line charts.

Configuration precedence for simulate is defaults < preset < config
file < flags, and the manifest records the fully resolved merge. A
manifest is itself a valid --config file, so re-running with it
reproduces results.csv byte-for-byte. Exit codes: 0 success, 2 a
usage or configuration problem (bad flags, unreadable inputs,
malformed files), 3 a runtime failure (solver non-convergence, empty
results, failed writes). The SSL_LAB_OUT_DIR environment variable
supplies the default output directory; --out wins when both are set.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .charts import render_gap_chart, render_series_chart
from .data_io import (
    SplitSpec,
    load_csv,
    pca_project,
    read_results,
    split,
    standardize,
    write_results,
)
from .errors import ConvergenceError, DataFormatError, SslLabError, ValidationError
from .estimators import (
    fit_em,
    fit_em_means,
    fit_spherical_lda,
    fit_sl,
    fit_ssl_w,
    fit_ul,
    fix_sign,
)
from .experiments import (
    DEFAULT_RIDGE_GRID,
    EM_INIT_SCALE,
    HARNESS_METHODS,
    METRIC_FIELDS,
    PRESETS,
    SWEEP_AXES,
    UL_BACKENDS,
    TrialConfig,
    _select_ridge,
    _select_self_train,
    _stage1_threshold_grid,
    _test_error,
    compatibility_score,
    run_sweep,
)
from .gmm import LabeledDataset, MixtureModel
from .theory import ProblemSize, rate_report

#: Accepted spellings of each method tag.
METHOD_ALIASES = {
    "zero": "zero",
    "sl": "sl",
    "supervised": "sl",
    "ul": "ul",
    "ulplus": "ulplus",
    "ul+": "ulplus",
    "ulp": "ulplus",
    "ssls": "ssls",
    "sls": "ssls",
    "ssl-s": "ssls",
    "sslw": "sslw",
    "slw": "sslw",
    "ssl-w": "sslw",
    "em": "em",
    "em_means": "em_means",
    "em-means": "em_means",
    "logistic": "logistic",
    "selftrain": "selftrain",
    "self-train": "selftrain",
    "lda": "lda",
    "sphericallda": "lda",
    "spherical-lda": "lda",
}

#: Methods cmd_fit can run on real data. "zero" is pointless there and
#: "ssls" needs the true separation s, which only simulations know.
FIT_METHODS = ("sl", "ul", "ulplus", "sslw", "em", "em_means", "logistic", "selftrain", "lda")
DEFAULT_FIT_METHODS = ("sl", "ulplus", "sslw", "logistic", "selftrain", "lda")

_SIMULATE_DEFAULTS = {
    "s": 1.0,
    "d": 2,
    "n_l": 20,
    "n_u": 2000,
    "n_val": 1000,
    "n_test": 1000,
    "methods": ("sl",),
    "t_grid": None,
    "self_train_thresholds": None,
    "ridge_grid": None,
    "base_seed": 0,
    "ul_backend": "spectral",
    "em_budget": 25,
    "axis": None,
    "grid": None,
    "replicates": 1,
}


@dataclass(frozen=True)
class RunManifest:
    """What a run was asked to do, written before it starts computing."""

    command: str
    config: dict
    config_path: str | None
    out_dir: str
    base_seed: int


def _jsonable(value):
    if isinstance(value, dict):
        return {key: _jsonable(entry) for key, entry in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(entry) for entry in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    return value


def _fail(code: int, message) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def _resolve_out_dir(args) -> str:
    out = args.out or os.environ.get("SSL_LAB_OUT_DIR") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    return os.cpu_count() or 1


def _base_seed(args) -> int:
    return args.seed if args.seed is not None else 0


def _normalize_method(name: str) -> str:
    key = str(name).strip().lower()
    if key not in METHOD_ALIASES:
        raise ValidationError(
            f"unknown method {name!r}; known tags are {', '.join(HARNESS_METHODS)}"
        )
    return METHOD_ALIASES[key]


def _parse_methods(text) -> tuple:
    names = [tok for tok in str(text).split(",") if tok.strip()]
    if not names:
        raise ValidationError("methods list is empty")
    return tuple(_normalize_method(name) for name in names)


def _parse_grid(text) -> tuple:
    tokens = [tok for tok in str(text).split(",") if tok.strip()]
    if not tokens:
        raise ValidationError("grid is empty")
    try:
        return tuple(float(tok) for tok in tokens)
    except ValueError:
        raise ValidationError(f"grid values must be numbers, got {text!r}") from None


def _write_manifest(manifest: RunManifest, filename: str) -> str:
    payload = {
        "command": manifest.command,
        "config": _jsonable(manifest.config),
        "config_path": manifest.config_path,
        "out_dir": manifest.out_dir,
        "base_seed": manifest.base_seed,
        "artifact_version": __version__,
        "started_at": datetime.now(timezone.utc).isoformat(),
    }
    path = os.path.join(manifest.out_dir, filename)
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")
    return path


def _load_config_file(path) -> dict:
    try:
        with open(path) as handle:
            obj = json.load(handle)
    except OSError as err:
        raise ValidationError(f"cannot read config file: {err}") from None
    except json.JSONDecodeError as err:
        raise DataFormatError(f"config file is not valid JSON: {err}") from None
    if isinstance(obj, dict) and "command" in obj and isinstance(obj.get("config"), dict):
        obj = obj["config"]
    if not isinstance(obj, dict):
        raise DataFormatError("config file must hold a JSON object")
    return obj


def _preset_fields(name: str) -> dict:
    spec = PRESETS[name]
    cfg = spec.cfg
    return {
        "s": cfg.model.s,
        "d": cfg.model.d,
        "n_l": cfg.n_l,
        "n_u": cfg.n_u,
        "n_val": cfg.n_val,
        "n_test": cfg.n_test,
        "methods": cfg.methods,
        "t_grid": cfg.t_grid,
        "self_train_thresholds": cfg.self_train_thresholds,
        "ridge_grid": cfg.ridge_grid,
        "base_seed": cfg.base_seed,
        "ul_backend": cfg.ul_backend,
        "em_budget": cfg.em_budget,
        "axis": spec.axis,
        "grid": spec.grid,
        "replicates": spec.replicates,
    }


def _resolve_simulate(args) -> dict:
    resolved = dict(_SIMULATE_DEFAULTS)
    if args.preset:
        resolved.update(_preset_fields(args.preset))
    if args.config:
        overlay = _load_config_file(args.config)
        unknown = set(overlay) - set(_SIMULATE_DEFAULTS)
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        resolved.update(overlay)
    flag_values = {
        "s": args.s,
        "d": args.d,
        "n_l": args.nl,
        "n_u": args.nu,
        "n_val": args.nval,
        "n_test": args.ntest,
        "methods": _parse_methods(args.methods) if args.methods else None,
        "axis": args.axis,
        "grid": _parse_grid(args.grid) if args.grid else None,
        "replicates": args.replicates,
        "ul_backend": args.ul_backend,
        "em_budget": args.em_budget,
        "base_seed": args.seed,
    }
    for key, value in flag_values.items():
        if value is not None:
            resolved[key] = value
    resolved["methods"] = _parse_methods(",".join(resolved["methods"]))
    if resolved["axis"] is None and resolved["grid"] is None:
        resolved["axis"] = "snr"
        resolved["grid"] = (float(resolved["s"]),)
    elif resolved["axis"] is None or resolved["grid"] is None:
        raise ValidationError("--axis and --grid must be given together")
    resolved["grid"] = tuple(float(v) for v in resolved["grid"])
    return resolved


def _trial_config_from(resolved: dict) -> TrialConfig:
    theta = np.zeros(int(resolved["d"]))
    theta[0] = float(resolved["s"])
    kwargs = dict(
        model=MixtureModel(theta_star=theta),
        n_l=resolved["n_l"],
        n_u=resolved["n_u"],
        n_val=resolved["n_val"],
        n_test=resolved["n_test"],
        methods=resolved["methods"],
        base_seed=resolved["base_seed"],
        ul_backend=resolved["ul_backend"],
        em_budget=resolved["em_budget"],
    )
    for key in ("t_grid", "ridge_grid", "self_train_thresholds"):
        if resolved[key] is not None:
            kwargs[key] = tuple(resolved[key])
    return TrialConfig(**kwargs)


def _cmd_simulate(args) -> int:
    try:
        resolved = _resolve_simulate(args)
        cfg = _trial_config_from(resolved)
        out_dir = _resolve_out_dir(args)
    except (ValidationError, DataFormatError, OSError) as err:
        return _fail(2, err)
    manifest = RunManifest(
        command="simulate",
        config=resolved,
        config_path=args.config,
        out_dir=out_dir,
        base_seed=int(resolved["base_seed"]),
    )
    try:
        manifest_path = _write_manifest(manifest, "manifest.json")
        sweep = run_sweep(
            cfg,
            axis=resolved["axis"],
            grid=resolved["grid"],
            replicates=resolved["replicates"],
            threads=_threads(args),
        )
        results_path = os.path.join(out_dir, "results.csv")
        write_results(sweep, results_path)
    except (SslLabError, OSError) as err:
        return _fail(3, err)
    _say(args, f"wrote {manifest_path}")
    _say(
        args,
        f"wrote {results_path} ({len(sweep.grid)} cells x "
        f"{len(sweep.methods())} methods x {sweep.replicates} replicates)",
    )
    return 0


def _cmd_theory(args) -> int:
    if args.config:
        return _fail(2, "--config applies to the simulate command")
    try:
        report = rate_report(ProblemSize(s=args.s, d=args.d, n_l=args.nl, n_u=args.nu))
    except SslLabError as err:
        return _fail(2, err)
    print(json.dumps(_jsonable(asdict(report)), indent=2))
    return 0


def _cmd_fit(args) -> int:
    if args.config:
        return _fail(2, "--config applies to the simulate command")
    seed = _base_seed(args)
    try:
        methods = _parse_methods(args.methods) if args.methods else DEFAULT_FIT_METHODS
        unsupported = [m for m in methods if m not in FIT_METHODS]
        if unsupported:
            raise ValidationError(
                f"methods {unsupported} are not available on real data; "
                f"choose from {', '.join(FIT_METHODS)}"
            )
        data = load_csv(args.data, args.label_column, args.positive_label)
        table, _ = standardize(data)
        if args.pca is not None:
            table = pca_project(table, args.pca)
        remainder = table.n - args.nl
        n_val = args.nval if args.nval is not None else max(1, remainder // 4)
        n_test = args.ntest if args.ntest is not None else max(1, remainder // 4)
        spec = SplitSpec(n_l=args.nl, n_val=n_val, n_test=n_test, seed=seed)
        labeled, pool, validation, test = split(table, spec)
        out_dir = _resolve_out_dir(args)
    except ConvergenceError as err:
        return _fail(3, err)
    except (ValidationError, DataFormatError, OSError) as err:
        return _fail(2, err)

    resolved = {
        "data": os.fspath(args.data),
        "label_column": args.label_column,
        "positive_label": str(args.positive_label),
        "n_l": spec.n_l,
        "n_val": spec.n_val,
        "n_test": spec.n_test,
        "pca": args.pca,
        "methods": methods,
        "base_seed": seed,
    }
    manifest = RunManifest(
        command="fit", config=resolved, config_path=None, out_dir=out_dir, base_seed=seed
    )
    try:
        manifest_path = _write_manifest(manifest, "fit_manifest.json")
    except OSError as err:
        return _fail(3, err)

    em_init = np.zeros(table.d)
    em_init[-1] = EM_INIT_SCALE
    test_errors: dict = {}
    failures: dict = {}
    selections: dict = {}

    sl_out = None

    def need_sl():
        nonlocal sl_out
        if sl_out is None:
            sl_out = fit_sl(labeled)
        return sl_out

    ridge_selection = None

    def need_ridge():
        nonlocal ridge_selection
        if ridge_selection is None:
            ridge_selection = _select_ridge(labeled, validation, DEFAULT_RIDGE_GRID)
        return ridge_selection

    for tag in methods:
        try:
            if tag == "sl":
                theta = need_sl().theta
            elif tag == "ul":
                theta = fit_ul(pool, seed=seed).theta
            elif tag == "ulplus":
                theta = fix_sign(fit_ul(pool, seed=seed), need_sl()).theta
            elif tag == "sslw":
                out, selection = fit_ssl_w(labeled, pool, validation, seed=seed)
                selections["sslw_t"] = selection.t
                theta = out.theta
            elif tag == "em":
                theta = fit_em(pool, em_init).theta
            elif tag == "em_means":
                theta = fit_em_means(pool, em_init).theta
            elif tag == "logistic":
                ridge, out = need_ridge()
                selections["logistic_ridge"] = ridge
                theta = out.theta
            elif tag == "selftrain":
                ridge, stage1 = need_ridge()
                thresholds = _stage1_threshold_grid(stage1.theta, pool)
                threshold, out = _select_self_train(
                    labeled, pool, validation, ridge, thresholds
                )
                selections["selftrain_ridge"] = ridge
                selections["selftrain_threshold"] = threshold
                theta = out.theta
            else:
                theta = fit_spherical_lda(labeled).theta
            test_errors[tag] = _test_error(theta, test)
        except SslLabError as err:
            failures[tag] = f"{type(err).__name__}: {err}"

    try:
        rho, inverse = compatibility_score(LabeledDataset(x=table.x, y=table.y))
        compatibility = {"rho": rho, "inverse": inverse}
    except SslLabError as err:
        compatibility = {"error": f"{type(err).__name__}: {err}"}

    payload = {
        "data": os.fspath(args.data),
        "n": table.n,
        "d": table.d,
        "split": {
            "n_l": spec.n_l,
            "n_val": spec.n_val,
            "n_test": spec.n_test,
            "pool": pool.n,
            "seed": seed,
        },
        "test_errors": test_errors,
        "selections": selections,
        "failures": failures,
        "compatibility": compatibility,
    }
    text = json.dumps(_jsonable(payload), indent=2)
    print(text)
    results_path = os.path.join(out_dir, "fit_results.json")
    try:
        with open(results_path, "w") as handle:
            handle.write(text + "\n")
    except OSError as err:
        return _fail(3, err)
    _say(args, f"wrote {manifest_path}")
    _say(args, f"wrote {results_path}")
    if not test_errors:
        return _fail(3, "every requested method failed")
    return 0


def _cmd_report(args) -> int:
    if args.config:
        return _fail(2, "--config applies to the simulate command")
    try:
        gap_pair = tuple(_normalize_method(name) for name in args.gap) if args.gap else None
        out_dir = _resolve_out_dir(args)
    except (ValidationError, OSError) as err:
        return _fail(2, err)
    resolved = {
        "results": [os.fspath(p) for p in args.results],
        "metric": args.metric,
        "log_x": args.log_x,
        "log_y": args.log_y,
        "gap": list(gap_pair) if gap_pair else None,
    }
    manifest = RunManifest(
        command="report",
        config=resolved,
        config_path=None,
        out_dir=out_dir,
        base_seed=_base_seed(args),
    )
    try:
        _write_manifest(manifest, "report_manifest.json")
    except OSError as err:
        return _fail(3, err)
    written = []
    for path in args.results:
        try:
            sweep = read_results(path)
        except (DataFormatError, OSError) as err:
            return _fail(2, err)
        if not sweep.grid:
            return _fail(3, f"{path}: results file has no data rows to plot")
        stem = os.path.splitext(os.path.basename(path))[0]
        try:
            svg = render_series_chart(
                sweep, metric=args.metric, log_x=args.log_x, log_y=args.log_y, title=stem
            )
        except ValidationError as err:
            return _fail(2, err)
        target = os.path.join(out_dir, f"{stem}.svg")
        try:
            with open(target, "w") as handle:
                handle.write(svg + "\n")
        except OSError as err:
            return _fail(3, err)
        written.append(target)
        if gap_pair:
            try:
                gap_svg = render_gap_chart(
                    sweep,
                    gap_pair[0],
                    gap_pair[1],
                    metric=args.metric,
                    log_x=args.log_x,
                    title=f"{stem}: {gap_pair[0]} vs {gap_pair[1]}",
                )
            except ValidationError as err:
                return _fail(2, err)
            gap_target = os.path.join(out_dir, f"{stem}_gap_{gap_pair[0]}_{gap_pair[1]}.svg")
            try:
                with open(gap_target, "w") as handle:
                    handle.write(gap_svg + "\n")
            except OSError as err:
                return _fail(3, err)
            written.append(gap_target)
    for target in written:
        _say(args, f"wrote {target}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssl-lab",
        description="Simulation lab for semi-supervised learning on Gaussian mixtures.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="base seed (default 0)")
    common.add_argument(
        "--out", default=None, help="output directory (default: SSL_LAB_OUT_DIR or '.')"
    )
    common.add_argument(
        "--config", default=None, help="JSON config file; flags override its values"
    )
    common.add_argument(
        "--threads", type=int, default=None,
        help="worker processes (default: available parallelism)",
    )
    common.add_argument("--quiet", action="store_true", help="suppress informational output")

    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser(
        "simulate", parents=[common], help="run a replicated sweep and write results.csv"
    )
    sim.add_argument("--preset", choices=sorted(PRESETS), help="compiled-in sweep")
    sim.add_argument("--s", type=float, default=None, help="signal-to-noise ratio")
    sim.add_argument("--d", type=int, default=None, help="dimension")
    sim.add_argument("--nl", type=int, default=None, help="labeled sample size")
    sim.add_argument("--nu", type=int, default=None, help="unlabeled sample size")
    sim.add_argument("--nval", type=int, default=None, help="validation sample size")
    sim.add_argument("--ntest", type=int, default=None, help="test sample size")
    sim.add_argument("--methods", default=None, help="comma-separated method tags")
    sim.add_argument("--axis", choices=SWEEP_AXES, default=None, help="sweep axis")
    sim.add_argument("--grid", default=None, help="comma-separated axis values")
    sim.add_argument("--replicates", type=int, default=None, help="trials per cell")
    sim.add_argument(
        "--ul-backend", dest="ul_backend", choices=UL_BACKENDS, default=None,
        help="unsupervised direction backend",
    )
    sim.add_argument(
        "--em-budget", dest="em_budget", type=int, default=None,
        help="iteration budget of the em backend",
    )
    sim.set_defaults(handler=_cmd_simulate)

    theory = sub.add_parser(
        "theory", parents=[common], help="print the closed-form rate report as JSON"
    )
    theory.add_argument("--s", type=float, required=True, help="signal-to-noise ratio")
    theory.add_argument("--d", type=int, required=True, help="dimension")
    theory.add_argument("--nl", type=int, required=True, help="labeled sample size")
    theory.add_argument("--nu", type=int, required=True, help="unlabeled sample size")
    theory.set_defaults(handler=_cmd_theory)

    fit = sub.add_parser(
        "fit", parents=[common], help="fit estimators to a CSV dataset"
    )
    fit.add_argument("data", help="CSV file with a header row and one label column")
    fit.add_argument(
        "--label-column", dest="label_column", default="label", help="label column name"
    )
    fit.add_argument(
        "--positive-label", dest="positive_label", default="1",
        help="raw label value mapped to +1",
    )
    fit.add_argument("--nl", type=int, required=True, help="labeled training rows")
    fit.add_argument(
        "--nval", type=int, default=None,
        help="validation rows (default: a quarter of the remainder)",
    )
    fit.add_argument(
        "--ntest", type=int, default=None,
        help="test rows (default: a quarter of the remainder)",
    )
    fit.add_argument(
        "--pca", type=int, default=None, metavar="K", help="project onto K principal axes"
    )
    fit.add_argument("--methods", default=None, help="comma-separated method tags")
    fit.set_defaults(handler=_cmd_fit)

    report = sub.add_parser(
        "report", parents=[common], help="render results CSVs as SVG charts"
    )
    report.add_argument("results", nargs="+", help="results CSV files written by simulate")
    report.add_argument(
        "--metric", choices=METRIC_FIELDS, default="excess", help="plotted metric"
    )
    report.add_argument("--log-x", dest="log_x", action="store_true", help="log-scale x axis")
    report.add_argument("--log-y", dest="log_y", action="store_true", help="log-scale y axis")
    report.add_argument(
        "--gap", nargs=2, metavar=("A", "B"), default=None,
        help="also chart the error gap between two methods",
    )
    report.set_defaults(handler=_cmd_report)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (SslLabError, OSError) as err:
        return _fail(3, err)


if __name__ == "__main__":
    sys.exit(main())
