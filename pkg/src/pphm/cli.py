"""Command-line frontend.

Exit codes: 0 success, 2 input or configuration error, 3 computation error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .activity import kmeans, load_distribution, load_score, window_features
from .config import MonitorOptions, PredictorOptions, RunConfig, load_config, parse_band, \
    with_confidence
from .errors import InputError, InvalidParams, MissingBand, PPHMError
from .io import (
    fmt,
    group_series,
    read_accel_csv,
    read_biomarker_samples,
    read_factor_csv,
    write_accel_csv,
    write_biomarker_csv,
    write_biomarker_ndjson,
    write_factor_csv,
)
from .monitor import AlertTracker, TooFewPointsInWindow, describe, fit_trend
from .predictor import (
    correlation_matrix,
    fit_linear,
    rank_predictors,
    significant_correlations,
)
from .recovery import FitConfig, fit_recovery, recovery_time
from .simgen import LocationProfile, gen_accel, gen_drift, gen_panel, gen_recovery

log = logging.getLogger("pphm")


class UsageError(InputError):
    pass


def _dumps(obj, indent=2) -> str:
    return json.dumps(obj, indent=indent, allow_nan=False)


def _out_dir(path) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


# -- simulate -----------------------------------------------------------------

def _profile(text: str) -> tuple[str, LocationProfile]:
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise argparse.ArgumentTypeError(
            f"expected location:amplitude:frequency[:noise], got {text!r}")
    try:
        nums = [float(x) for x in parts[1:]]
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric profile field in {text!r}") from None
    return parts[0], LocationProfile(*nums)


def _coefs(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


_PARAM_FLAGS = {"m": "--n", "noise_sigma": "--sigma", "start_value": "--start",
                "amplitude": "--profile", "frequency": "--profile"}


def cmd_simulate(args, cfg: RunConfig) -> int:
    try:
        if args.kind == "recovery":
            data = gen_recovery(args.a, args.d, args.theta, args.sigma, args.n, args.dt,
                                args.seed, args.subject, args.channel, args.unit)
        elif args.kind == "drift":
            data = gen_drift(args.start, args.slope, args.sigma, args.n, args.dt, args.seed,
                             args.subject, args.channel, args.unit)
        elif args.kind == "panel":
            data = gen_panel(args.coef, args.n, args.sigma, args.seed)
        else:
            data = gen_accel(dict(args.profile), args.n, args.dt, args.seed, args.subject)
    except InvalidParams as exc:
        flag = _PARAM_FLAGS.get(exc.param, f"--{exc.param}")
        raise UsageError(f"{flag}: {exc}") from None

    def write(fh):
        if args.kind == "panel":
            return write_factor_csv(data, fh, target=args.target)
        if args.kind == "accel":
            return write_accel_csv(data, fh)
        if args.format == "ndjson":
            return write_biomarker_ndjson([data], fh)
        return write_biomarker_csv([data], fh)

    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            rows = write(fh)
        summary_stream = sys.stdout
    else:
        rows = write(sys.stdout)
        summary_stream = sys.stderr
    summary = {"kind": args.kind, "n": args.n, "seed": args.seed, "rows": rows,
               "path": args.out}
    print(_dumps(summary), file=summary_stream)
    return 0


# -- fit-recovery -------------------------------------------------------------

def _select(series_map, subject, channel):
    keys = [k for k in series_map
            if (subject is None or k[0] == subject) and (channel is None or k[1] == channel)]
    if not keys:
        raise InputError(f"no series matches subject={subject!r} channel={channel!r}")
    return keys


def recovery_report(series, fit_cfg: FitConfig) -> dict:
    res = fit_recovery(series, fit_cfg)
    m = res.model
    return {
        "subject_id": series.subject_id,
        "channel": series.channel,
        "n": len(series),
        "a": m.a,
        "d": m.d,
        "theta": m.theta,
        "hrrt": recovery_time(m, fit_cfg.hrrt_fraction),
        "hrrt_fraction": fit_cfg.hrrt_fraction,
        "rss": res.rss,
        "residual_std": res.residual_std,
        "iterations": res.iterations,
        "converged": res.converged,
    }, res


def cmd_fit_recovery(args, cfg: RunConfig) -> int:
    fit_cfg = FitConfig(
        tol=args.tol if args.tol is not None else cfg.fit.tol,
        max_iter=args.max_iter if args.max_iter is not None else cfg.fit.max_iter,
        hrrt_fraction=(args.hrrt_fraction if args.hrrt_fraction is not None
                       else cfg.fit.hrrt_fraction))
    series_map = group_series(read_biomarker_samples(args.input, args.format))
    keys = _select(series_map, args.subject, args.channel)
    out = _out_dir(args.out)
    reports = []
    for key in keys:
        series = series_map[key]
        report, res = recovery_report(series, fit_cfg)
        reports.append(report)
        if out is not None:
            stem = f"recovery_{key[0]}_{key[1]}"
            _write_recovery_outputs(out, stem, series, res, fit_cfg.hrrt_fraction)
    print(_dumps(reports[0] if len(reports) == 1 else reports))
    return 0


def _write_recovery_outputs(out, stem, series, res, fraction):
    from .plotting import plot_recovery
    from .recovery import eval_recovery
    t, y = series.t, series.values
    fitted = eval_recovery(res.model, t)
    with open(out / f"{stem}.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("t", "observed", "fitted", "residual"))
        for row in zip(t, y, fitted, y - fitted):
            w.writerow([fmt(v) for v in row])
    plot_recovery(t, y, res, out / f"{stem}.png", fraction)


# -- monitor ------------------------------------------------------------------

def cmd_monitor(args, cfg: RunConfig) -> int:
    opts = MonitorOptions(
        window=args.window if args.window is not None else cfg.monitor.window,
        horizon=args.horizon if args.horizon is not None else cfg.monitor.horizon,
        confidence=args.confidence if args.confidence is not None else cfg.monitor.confidence)
    bands = dict(cfg.bands)
    for b in args.band or []:
        band = parse_band(b)
        bands[band.channel] = replace(band, confidence=opts.confidence)
    if args.confidence is not None:
        bands = with_confidence(bands, opts.confidence)

    series_map = group_series(read_biomarker_samples(args.input, args.format))
    for _, channel in series_map:
        if channel not in bands:
            raise MissingBand(channel)

    out = _out_dir(args.out)
    alert_lines = []
    summaries = []
    for (subject, channel), series in series_map.items():
        band = bands[channel]
        tracker = AlertTracker()
        for i in range(1, len(series) + 1):
            for alert in tracker.step(series.head(i), band, opts.window, opts.horizon):
                line = json.dumps(alert.to_dict(), allow_nan=False)
                alert_lines.append(line)
                print(line)
        summaries.append(describe(series, band, opts.window, opts.horizon))
        if out is not None:
            _write_monitor_outputs(out, series, band, opts)

    summary = {"window": opts.window, "horizon": opts.horizon,
               "confidence": opts.confidence, "alerts": len(alert_lines),
               "series": summaries}
    text = _dumps(summary)
    if args.summary:
        Path(args.summary).write_text(text + "\n", encoding="utf-8")
    if out is not None:
        (out / "summary.json").write_text(text + "\n", encoding="utf-8")
        (out / "alerts.ndjson").write_text("".join(x + "\n" for x in alert_lines),
                                           encoding="utf-8")
    if not args.summary and out is None:
        print(text, file=sys.stderr)
    return 0


def _write_monitor_outputs(out, series, band, opts):
    from .monitor import classify
    from .plotting import plot_trend
    stem = f"monitor_{series.subject_id}_{series.channel}"
    with open(out / f"{stem}.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("t", "value", "zone"))
        for s in series:
            w.writerow((fmt(s.t), fmt(s.value), classify(s.value, band).value))
    try:
        trend = fit_trend(series, opts.window)
    except TooFewPointsInWindow:
        trend = None
    plot_trend(series.t, series.values, trend, band, opts.horizon, out / f"{stem}.png",
               title=f"{series.subject_id} / {series.channel}")


# -- predictors ---------------------------------------------------------------

def predictor_report(matrix, opts: PredictorOptions, correlate: bool) -> dict:
    report = fit_linear(matrix, interactions=opts.interactions)
    body = report.to_dict()
    body["min_abs"] = opts.min_abs
    body["predictors"] = [{"factor": name, "coefficient": b}
                          for name, b in rank_predictors(report, opts.min_abs)]
    if correlate:
        names, corr = correlation_matrix(matrix, include_target=True)
        body["correlation"] = {
            "names": names,
            "matrix": [[float(v) for v in row] for row in corr],
            "alpha": opts.alpha,
            "significant": [{"a": names[i], "b": names[j], "r": r}
                            for i, j, r in significant_correlations(corr, matrix.m, opts.alpha)],
        }
    return body


def cmd_predictors(args, cfg: RunConfig) -> int:
    opts = PredictorOptions(
        min_abs=args.min_abs if args.min_abs is not None else cfg.predictor.min_abs,
        alpha=args.alpha if args.alpha is not None else cfg.predictor.alpha,
        interactions=args.interactions or cfg.predictor.interactions)
    matrix = read_factor_csv(args.input, args.target)
    body = predictor_report(matrix, opts, args.correlate)
    out = _out_dir(args.out)
    if out is not None:
        from .plotting import plot_coefficients, plot_correlation
        with open(out / "coefficients.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("term", "coefficient_standardized", "selected"))
            for term, b in zip(body["terms"], body["coefficients_standardized"]):
                w.writerow((term, fmt(b), int(abs(b) >= opts.min_abs)))
        plot_coefficients(body["terms"], np.array(body["coefficients_standardized"]),
                          opts.min_abs, out / "coefficients.png")
        if args.correlate:
            corr = body["correlation"]
            with open(out / "correlation.csv", "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow([""] + corr["names"])
                for name, row in zip(corr["names"], corr["matrix"]):
                    w.writerow([name] + [fmt(v) for v in row])
            plot_correlation(corr["names"], np.array(corr["matrix"]), out / "correlation.png")
    print(_dumps(body))
    return 0


# -- activity -----------------------------------------------------------------

def activity_report(stream, window: float, k: int | None, seed: int):
    feats = window_features(stream, window)
    if not feats:
        raise InputError("no window holds two or more samples; shorten --window?")
    ranking = load_distribution(feats)
    body = {"window": window, "n_windows": len(feats),
            "load_ranking": [{"body_location": loc, "load_score": s} for loc, s in ranking]}
    result = None
    if k is not None:
        result = kmeans([f.vector() for f in feats], k, seed)
        body["clusters"] = {
            "k": k, "seed": seed, "within_ss": result.within_ss,
            "iterations": result.iterations,
            "feature_order": ["mean_magnitude", "variance", "rms_jerk"],
            "centroids": [[float(v) for v in c] for c in result.centroids],
        }
    return body, feats, result


def cmd_activity(args, cfg: RunConfig) -> int:
    if not args.window > 0:
        raise UsageError(f"--window must be > 0, got {args.window}")
    stream = read_accel_csv(args.input)
    body, feats, result = activity_report(stream, args.window, args.k, args.seed)
    out = _out_dir(args.out)
    if out is not None:
        from .plotting import plot_clusters, plot_load
        with open(out / "features.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("subject_id", "sensor_id", "body_location", "window_start_t",
                        "window_end_t", "n", "mean_magnitude", "variance", "rms_jerk",
                        "load_score"))
            for f in feats:
                w.writerow((f.subject_id, f.sensor_id, f.body_location, fmt(f.window_start_t),
                            fmt(f.window_end_t), f.n, fmt(f.mean_magnitude), fmt(f.variance),
                            fmt(f.rms_jerk), fmt(load_score(f))))
        plot_load([(d["body_location"], d["load_score"]) for d in body["load_ranking"]],
                  out / "load.png")
        if result is not None:
            with open(out / "clusters.csv", "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(("sensor_id", "body_location", "window_start_t", "cluster"))
                for f, lab in zip(feats, result.assignments):
                    w.writerow((f.sensor_id, f.body_location, fmt(f.window_start_t), int(lab)))
            plot_clusters(feats, result.assignments, out / "clusters.png")
    print(_dumps(body))
    return 0


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pphm", description="Personnel health monitoring: recovery fits, "
        "threshold monitoring, predictor ranking and activity analysis.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", help="INI run configuration (bands, fit, monitor, predictor)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="write a deterministic synthetic dataset")
    simk = sim.add_subparsers(dest="kind", required=True)

    def common(sp, n_default, dt_default=None):
        sp.add_argument("--n", type=int, default=n_default, help="sample count")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="output file (default: stdout)")
        if dt_default is not None:
            sp.add_argument("--dt", type=float, default=dt_default, help="sampling step [s]")

    r = simk.add_parser("recovery", help="post-exercise heart-rate recovery")
    r.add_argument("--a", type=float, required=True, help="resting rate [bpm]")
    r.add_argument("--d", type=float, required=True, help="rate at exercise end [bpm]")
    r.add_argument("--theta", type=float, required=True, help="recovery rate [1/s]")
    r.add_argument("--sigma", type=float, default=0.0, help="noise std [bpm]")
    r.add_argument("--subject", default="S1")
    r.add_argument("--channel", default="heart_rate")
    r.add_argument("--unit", default="bpm")
    r.add_argument("--format", choices=("csv", "ndjson"), default="csv")
    common(r, 120, 1.0)

    dr = simk.add_parser("drift", help="linearly drifting biomarker")
    dr.add_argument("--start", type=float, required=True)
    dr.add_argument("--slope", type=float, required=True, help="units per second")
    dr.add_argument("--sigma", type=float, default=0.0)
    dr.add_argument("--subject", default="S1")
    dr.add_argument("--channel", default="glucose")
    dr.add_argument("--unit", default="mg/dL")
    dr.add_argument("--format", choices=("csv", "ndjson"), default="csv")
    common(dr, 61, 1.0)

    pa = simk.add_parser("panel", help="factor matrix with planted coefficients")
    pa.add_argument("--coef", type=_coefs, required=True, help="e.g. 2,0,-1.5,0,0,0")
    pa.add_argument("--sigma", type=float, default=0.0)
    pa.add_argument("--target", default="L", help="target column name")
    common(pa, 200)

    ac = simk.add_parser("accel", help="three-axis accelerometer streams")
    ac.add_argument("--profile", type=_profile, action="append", required=True,
                    help="location:amplitude:frequency[:noise], repeatable")
    ac.add_argument("--subject", default="S1")
    common(ac, 600, 0.05)
    sim.set_defaults(func=cmd_simulate)

    def biomarker_input(sp):
        sp.add_argument("input", help="biomarker CSV or NDJSON file, '-' for stdin")
        sp.add_argument("--format", choices=("csv", "ndjson"),
                        help="input format (default: by extension, CSV otherwise)")

    fr = sub.add_parser("fit-recovery", help="fit the recovery curve and report HRRT")
    biomarker_input(fr)
    fr.add_argument("--subject")
    fr.add_argument("--channel")
    fr.add_argument("--tol", type=float)
    fr.add_argument("--max-iter", type=int)
    fr.add_argument("--hrrt-fraction", type=float)
    fr.add_argument("--out", help="directory for fit CSV and figure")
    fr.set_defaults(func=cmd_fit_recovery)

    mo = sub.add_parser("monitor", help="replay a stream and emit NDJSON alerts")
    biomarker_input(mo)
    mo.add_argument("--band", action="append",
                    help="channel:lower_normal=75,upper_normal=200,upper_risk=250")
    mo.add_argument("--window", type=float, help="trailing trend window [s]")
    mo.add_argument("--horizon", type=float, help="forecast horizon [s]")
    mo.add_argument("--confidence", type=float, help="prediction interval coverage")
    mo.add_argument("--summary", help="write the JSON summary here (default: stderr)")
    mo.add_argument("--out", help="directory for per-series CSV, figures and summary")
    mo.set_defaults(func=cmd_monitor)

    pr = sub.add_parser("predictors", help="standardized regression predictor ranking")
    pr.add_argument("input", help="factor CSV")
    pr.add_argument("--target", default="L", help="target column name")
    pr.add_argument("--min-abs", type=float)
    pr.add_argument("--alpha", type=float)
    pr.add_argument("--interactions", action="store_true")
    pr.add_argument("--correlate", action="store_true")
    pr.add_argument("--out", help="directory for coefficient CSV and figures")
    pr.set_defaults(func=cmd_predictors)

    act = sub.add_parser("activity", help="accelerometer load ranking and clustering")
    act.add_argument("input", help="accelerometer CSV")
    act.add_argument("--window", type=float, default=2.0, help="tumbling window [s]")
    act.add_argument("--k", type=int, help="cluster the windows into k groups")
    act.add_argument("--seed", type=int, default=0)
    act.add_argument("--out", help="directory for feature/cluster CSV and figures")
    act.set_defaults(func=cmd_activity)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        return args.func(args, cfg)
    except PPHMError as exc:
        print(f"pphm {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"pphm {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
