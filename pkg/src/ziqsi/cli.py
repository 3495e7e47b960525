"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 numerical failure.  Diagnostics go
to standard error; delimited outputs use a period decimal separator and a
fixed column order regardless of locale.
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from ._parallel import default_threads
from .baselines import fit_qsi, fit_ziq_linear, predict_model
from .curve import default_grid, fit_ziqsi
from .data import ingest_csv
from .effects import bootstrap_aqe, compute_aqe
from .simulation import SimConfig, generate_dataset, run_study
from .store import load_model, save_model


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(x):
    return repr(float(x))


def _parse_taus(text):
    try:
        taus = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse quantile levels {text!r}") from exc
    if not taus:
        raise UsageError("no quantile levels given")
    for t in taus:
        if not 0.0 < t < 1.0:
            raise UsageError(f"quantile level {t} outside (0, 1)")
    return taus


def _load_dataset(args, need_response):
    covs = args.covariates.split(",") if args.covariates else None
    dummies = args.dummy.split(",") if args.dummy else ()
    if need_response and not args.response:
        raise UsageError("--response is required")
    try:
        ds = ingest_csv(args.data, args.response, covs, dummies)
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if ds.n_dropped:
        print(f"dropped {ds.n_dropped} rows with missing values", file=sys.stderr)
    return ds


def _load_covariates(args, model):
    """Covariate matrix for prediction-time commands."""
    import pandas as pd
    try:
        frame = pd.read_csv(args.data)
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from exc
    cols = model.columns
    if cols:
        missing = [c for c in cols if c not in frame.columns]
        if missing:
            raise UsageError(f"model expects columns missing from file: {missing}")
        frame = frame[cols]
    keep = ~frame.isna().any(axis=1)
    dropped = int((~keep).sum())
    if dropped:
        print(f"dropped {dropped} rows with missing values", file=sys.stderr)
    try:
        X = frame.loc[keep].astype(float).to_numpy()
    except ValueError as exc:
        raise UsageError(f"non-numeric covariate cell: {exc}") from exc
    return X


def _cmd_fit(args):
    ds = _load_dataset(args, need_response=True)
    grid = default_grid() if args.grid_step is None else \
        np.arange(args.grid_step, 1.0, args.grid_step)
    if args.method == "ziqsi":
        model = fit_ziqsi(ds.X, ds.y, delta=args.delta, order=args.order,
                          grid_levels=grid, n_knots=args.knots,
                          threads=args.threads, columns=ds.columns)
    elif args.method == "ziq-linear":
        model = fit_ziq_linear(ds.X, ds.y, delta=args.delta, grid_levels=grid,
                               threads=args.threads, columns=ds.columns)
    else:
        model = fit_qsi(ds.X, ds.y, grid_levels=grid, order=args.order,
                        n_knots=args.knots, seed=args.seed,
                        threads=args.threads, columns=ds.columns)
    save_model(model, args.out)
    print(f"fitted {args.method} model on {len(ds.y)} rows "
          f"({int(np.sum(ds.y > 0))} positive); wrote {args.out}",
          file=sys.stderr)


def _cmd_predict(args):
    taus = _parse_taus(args.taus)
    model = load_model(args.model)
    X = _load_covariates(args, model)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row_id", "tau", "value", "region", "tau_s"])
        for i in range(X.shape[0]):
            for t in taus:
                pred = predict_model(model, X[i], t)
                writer.writerow([i, _fmt(t), _fmt(pred.value), pred.region,
                                 _fmt(pred.tau_s)])
    print(f"wrote {X.shape[0] * len(taus)} predictions to {args.out}",
          file=sys.stderr)


def _cmd_curve(args):
    model = load_model(args.model)
    X = _load_covariates(args, model)
    if not 0 <= args.row < X.shape[0]:
        raise UsageError(f"--row {args.row} outside 0..{X.shape[0] - 1}")
    x = X[args.row]
    taus = default_grid()
    preds = [predict_model(model, x, float(t)) for t in taus]
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tau", "value", "region", "tau_s"])
        for t, p in zip(taus, preds):
            writer.writerow([_fmt(t), _fmt(p.value), p.region, _fmt(p.tau_s)])
    print(f"wrote quantile curve to {args.out}", file=sys.stderr)
    if not args.no_figure:
        from .plots import save_curve_figure
        fig_path = args.figure or os.path.splitext(args.out)[0] + ".png"
        save_curve_figure([float(t) for t in taus], [p.value for p in preds],
                          [p.region for p in preds], fig_path)
        print(f"wrote figure to {fig_path}", file=sys.stderr)


def _cmd_aqe(args):
    if not 0.0 < args.tau < 1.0:
        raise UsageError(f"quantile level {args.tau} outside (0, 1)")
    model = load_model(args.model)
    if args.bootstrap > 0:
        ds = _load_dataset(args, need_response=True)
        out = bootstrap_aqe(ds.X, ds.y, args.j, args.u, args.v, args.tau,
                            n_boot=args.bootstrap, seed=args.seed,
                            threads=args.threads)
        res = out["result"]
        doc = {
            "covariate_index": res.covariate_index, "u": res.level_u,
            "v": res.level_v, "tau": res.tau, "estimate": res.estimate,
            "n_averaged": res.n_averaged, "bootstrap_replicates": args.bootstrap,
            "se": out["se"], "ci_lower": out["ci_lower"],
            "ci_upper": out["ci_upper"],
            "note": "bootstrap interval is a heuristic",
        }
    else:
        if args.response:
            ds = _load_dataset(args, need_response=True)
            X = ds.X
        else:
            X = _load_covariates(args, model)
        res = compute_aqe(model, X, args.j, args.u, args.v, args.tau)
        doc = {
            "covariate_index": res.covariate_index, "u": res.level_u,
            "v": res.level_v, "tau": res.tau, "estimate": res.estimate,
            "n_averaged": res.n_averaged,
        }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    print(f"average quantile effect {doc['estimate']!r}; wrote {args.out}",
          file=sys.stderr)


def _cmd_simulate(args):
    config = SimConfig.from_json(args.config)
    X, y = generate_dataset(config.n, config.seed, args.replicate,
                            gamma=config.resolved_gamma())
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{j + 1}" for j in range(X.shape[1])] + ["y"])
        for i in range(X.shape[0]):
            writer.writerow([_fmt(v) for v in X[i]] + [_fmt(y[i])])
    print(f"wrote {X.shape[0]} simulated rows to {args.out}", file=sys.stderr)


def _cmd_benchmark(args):
    config = SimConfig.from_json(args.config)
    os.makedirs(args.out_dir, exist_ok=True)
    report = run_study(config, threads=args.threads)

    report_path = os.path.join(args.out_dir, "report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=1)
        fh.write("\n")

    metrics_path = os.path.join(args.out_dir, "metrics.csv")
    with open(metrics_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "profile", "metric", "value"])
        for method, per_profile in report["methods"].items():
            for profile, entry in per_profile.items():
                for metric in ("ribias", "rivar", "rimse",
                               "negative_proportion"):
                    writer.writerow([method, profile, metric,
                                     _fmt(entry[metric])])

    bands_path = os.path.join(args.out_dir, "bands.csv")
    with open(bands_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "profile", "tau", "oracle", "mean",
                         "band_lower", "band_upper"])
        for method, per_profile in report["methods"].items():
            for profile, entry in per_profile.items():
                oracle = report["oracle_curves"][profile]
                for k, tau in enumerate(report["tau_grid"]):
                    writer.writerow([method, profile, _fmt(tau),
                                     _fmt(oracle[k]),
                                     _fmt(entry["mean_curve"][k]),
                                     _fmt(entry["band_lower"][k]),
                                     _fmt(entry["band_upper"][k])])

    written = [report_path, metrics_path, bands_path]
    if not args.no_figures:
        from .plots import save_benchmark_figures
        written += save_benchmark_figures(report, args.out_dir)
    for method, per_profile in report["methods"].items():
        for profile, entry in per_profile.items():
            print(f"{method:>11s} {profile:<22s} "
                  f"RIBIAS {entry['ribias']:8.3f}%  RIVAR {entry['rivar']:8.3f}%  "
                  f"RIMSE {entry['rimse']:8.3f}%", file=sys.stderr)
    print("wrote " + ", ".join(written), file=sys.stderr)


def build_parser():
    parser = _Parser(prog="ziqsi",
                     description="Zero-inflated quantile single-index modeling")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common_data(p, response_required):
        p.add_argument("--data", required=True, help="input CSV file")
        p.add_argument("--response", required=response_required,
                       help="response column name")
        p.add_argument("--covariates", default=None,
                       help="comma-separated covariate columns (default: all others)")
        p.add_argument("--dummy", default=None,
                       help="comma-separated categorical columns to dummy-code")

    p = sub.add_parser("fit", help="fit a model and write it as JSON")
    add_common_data(p, True)
    p.add_argument("--method", choices=["ziqsi", "ziq-linear", "qsi"],
                   default="ziqsi")
    p.add_argument("--out", required=True)
    p.add_argument("--delta", type=float, default=0.499)
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--knots", type=int, default=None,
                   help="interior knots (default: BIC scan)")
    p.add_argument("--grid-step", type=float, default=None,
                   help="grid spacing (default 0.01)")
    p.add_argument("--seed", type=int, default=0,
                   help="perturbation seed for --method qsi")
    p.add_argument("--threads", type=int, default=default_threads())
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("predict", help="predict quantiles for covariate rows")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--taus", required=True,
                   help="comma-separated quantile levels")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("curve", help="full quantile curve for one subject")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--row", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--figure", default=None,
                   help="figure path (default: CSV path with .png)")
    p.add_argument("--no-figure", action="store_true")
    p.set_defaults(func=_cmd_curve)

    p = sub.add_parser("aqe", help="average quantile effect of one covariate")
    add_common_data(p, False)
    p.add_argument("--model", required=True)
    p.add_argument("--j", type=int, required=True,
                   help="1-based covariate position")
    p.add_argument("--u", type=float, required=True)
    p.add_argument("--v", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--bootstrap", type=int, default=0,
                   help="bootstrap replicates (0 disables; refits the model)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=default_threads())
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_aqe)

    p = sub.add_parser("simulate", help="write one synthetic dataset as CSV")
    p.add_argument("--config", required=True, help="study config JSON")
    p.add_argument("--replicate", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("benchmark", help="run the Monte Carlo study")
    p.add_argument("--config", required=True, help="study config JSON")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--threads", type=int, default=default_threads())
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=_cmd_benchmark)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 130
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
