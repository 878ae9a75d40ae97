"""Command-line interface: ``bsmix {describe,fit,residuals,envelope,simulate}``.

Exit codes: 0 success, 1 input error, 2 fit did not converge.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

import numpy as np

from .diagnostics import describe, gcs_residuals, simulate_envelope
from .estimation import ConvergenceError, FitConfig, fit_bernoulli_bs, wald_table
from .model import DataError, build_dataset
from .simulation import MCConfig, run_study
from .tobit import TobitSpec, fit_tobit

SCHEMA_VERSION = 1
MODELS = {
    "bernoulli-bs": None,
    "tobit-normal": TobitSpec("normal"),
    "tobit-t": TobitSpec("student_t"),
    "tobit-ln": TobitSpec("log_normal"),
    "tobit-bs": TobitSpec("bs"),
}

EXIT_OK, EXIT_INPUT, EXIT_NOCONV = 0, 1, 2


class InputError(Exception):
    pass


def read_table(path):
    """Read a headered UTF-8 CSV into a dict of float columns."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = [h.strip() for h in next(reader)]
            except StopIteration:
                raise InputError(f"{path}: empty file") from None
            cols = {h: [] for h in header}
            for lineno, row in enumerate(reader, start=2):
                if not row or all(not cell.strip() for cell in row):
                    continue
                if len(row) != len(header):
                    raise InputError(f"{path}: row {lineno} has {len(row)} fields, expected {len(header)}")
                for name, cell in zip(header, row):
                    try:
                        cols[name].append(float(cell))
                    except ValueError:
                        raise InputError(
                            f"{path}: non-numeric value {cell!r} at row {lineno}, column {name!r}"
                        ) from None
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    if not cols or not next(iter(cols.values())):
        raise InputError(f"{path}: no data rows")
    return {k: np.asarray(v) for k, v in cols.items()}


def _split(names):
    if names is None:
        return None
    return [s.strip() for s in names.split(",") if s.strip()]


def _design(table, names, intercept, n):
    for nm in names:
        if nm not in table:
            raise InputError(f"missing column {nm!r}")
    cols = [table[nm] for nm in names]
    labels = list(names)
    if intercept:
        cols = [np.ones(n)] + cols
        labels = ["const"] + labels
    if not cols:
        return np.empty((n, 0)), ()
    return np.column_stack(cols), tuple(labels)


def load_dataset(args):
    table = read_table(args.data)
    if args.response not in table:
        raise InputError(f"missing column {args.response!r}")
    y = table[args.response]
    others = [k for k in table if k != args.response]
    x1 = _split(args.x1)
    x1 = others if x1 is None else x1
    x2 = _split(args.x2)
    x2 = x1 if x2 is None else x2
    intercept = not args.no_intercept
    X1, n1 = _design(table, x1, intercept, y.size)
    X2, n2 = _design(table, x2, intercept, y.size)
    return build_dataset(y, args.ldl, X1, X2, already_log=args.log_scale, x1_names=n1, x2_names=n2)


def fit_config(args):
    return FitConfig(
        max_iterations=args.max_iter,
        gradient_tolerance=args.gtol,
        n_starts=args.n_starts,
        seed=args.seed,
    )


def fit_model(args, data):
    spec = MODELS[args.model]
    cfg = fit_config(args)
    if spec is not None and args.x2 is not None:
        print(f"warning: --x2 is ignored by {args.model}", file=sys.stderr)
    if spec is None:
        return fit_bernoulli_bs(data, cfg)
    return fit_tobit(spec, data.select_columns(range(data.p1), []), cfg)


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if np.isfinite(v) else None


def fit_report(fr, args=None):
    rows = wald_table(fr)
    rep = {
        "schema_version": SCHEMA_VERSION,
        "model": fr.model,
        "n": fr.n,
        "m": fr.m,
        "parameters": list(fr.param_names),
        "estimates": [_num(r["estimate"]) for r in rows],
        "se": [_num(r["se"]) for r in rows],
        "z": [_num(r["z"]) for r in rows],
        "p": [_num(r["p"]) for r in rows],
        "stars": [r["stars"] for r in rows],
        "loglik": _num(fr.loglik),
        "aic": _num(fr.aic),
        "bic": _num(fr.bic),
        "loglik_original_scale": _num(fr.loglik_original_scale),
        "aic_original_scale": _num(fr.aic_original_scale),
        "n_parameters": fr.n_free,
        "converged": bool(fr.converged),
        "n_iterations": int(fr.n_iterations),
        "message": fr.message,
    }
    if "df" in fr.extra:
        rep["df"] = fr.extra["df"]
    return rep


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_describe(args):
    table = read_table(args.data)
    if args.response not in table:
        raise InputError(f"missing column {args.response!r}")
    y = table[args.response]
    stats = describe(y)
    if args.ldl is not None:
        cens = y <= args.ldl
        stats["censored"] = int(cens.sum())
        stats["censored_fraction"] = float(cens.mean())
    stats["schema_version"] = SCHEMA_VERSION
    if args.format == "tsv":
        text = "".join(f"{k}\t{v}\n" for k, v in stats.items())
    else:
        text = _dump(stats)
    _emit(text, args.output)
    return EXIT_OK


def cmd_fit(args):
    data = load_dataset(args)
    fr = fit_model(args, data)
    rep = fit_report(fr)
    if args.format == "tsv":
        lines = ["parameter\testimate\tse\tz\tp\tstars"]
        for j, nm in enumerate(rep["parameters"]):
            lines.append("\t".join(str(x) for x in (nm, rep["estimates"][j], rep["se"][j], rep["z"][j], rep["p"][j], rep["stars"][j])))
        text = "\n".join(lines) + "\n"
    else:
        text = _dump(rep)
    _emit(text, args.output)
    return EXIT_OK if fr.converged else EXIT_NOCONV


def cmd_residuals(args):
    data = load_dataset(args)
    fr = fit_model(args, data)
    res = gcs_residuals(fr, data)
    lines = ["index\tresidual\tis_censored\tcapped"]
    for i in range(data.n):
        lines.append(f"{i}\t{res.r[i]:.10g}\t{int(res.is_censored[i])}\t{int(res.capped[i])}")
    _emit("\n".join(lines) + "\n", args.output)
    print(f"residuals: n={data.n} mean={res.r.mean():.4f} var={res.r.var(ddof=1):.4f}", file=sys.stderr)
    return EXIT_OK if fr.converged else EXIT_NOCONV


def cmd_envelope(args):
    data = load_dataset(args)
    fr = fit_model(args, data)
    res = gcs_residuals(fr, data)
    env = simulate_envelope(fr, data, B=args.B, level=args.level, seed=args.seed, refit=args.refit_envelope)
    _emit(env.to_tsv(res), args.output)
    print(
        f"envelope: B={env.B} dropped={env.n_dropped} outside={env.outside_fraction(res.sorted_r):.4f}",
        file=sys.stderr,
    )
    return EXIT_OK if fr.converged else EXIT_NOCONV


def _floats(text):
    return tuple(float(v) for v in text.split(","))


def cmd_simulate(args):
    cfg = MCConfig(
        alphas=_floats(args.alphas),
        ns=tuple(int(v) for v in args.ns.split(",")),
        beta1=_floats(args.beta1),
        beta2=_floats(args.beta2),
        replications=args.replications,
        seed=args.seed,
        retry_starts=args.impute_refit,
        fit=FitConfig(max_iterations=args.max_iter, gradient_tolerance=args.gtol),
    )
    summary = run_study(cfg)
    _emit(summary.to_json() if args.format == "json" else summary.to_tsv(), args.output)
    failed = sum(r["n_failed"] for r in summary.rows if r["parameter"] == "alpha")
    print(f"simulate: {len(summary.rows)} rows, {failed} failed replicates", file=sys.stderr)
    return EXIT_OK


def _add_data_args(p, need_model=True):
    p.add_argument("--data", required=True, help="CSV file with a header row")
    p.add_argument("--response", default="y", help="response column name")
    p.add_argument("--ldl", type=float, required=need_model, default=None, help="lower detection limit")
    p.add_argument("--log-scale", action="store_true", help="response and LDL are already logged")
    if need_model:
        p.add_argument("--model", choices=sorted(MODELS), default="bernoulli-bs")
        p.add_argument("--x1", help="comma-separated covariates of the continuous component")
        p.add_argument("--x2", help="comma-separated covariates of the logit component")
        p.add_argument("--no-intercept", action="store_true")


def _add_fit_args(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gtol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--n-starts", type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(prog="bsmix", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("describe", help="descriptive statistics of the response")
    _add_data_args(p, need_model=False)
    p.add_argument("--format", choices=("json", "tsv"), default="json")
    p.add_argument("--output")
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser("fit", help="fit a model and print a JSON report")
    _add_data_args(p)
    _add_fit_args(p)
    p.add_argument("--format", choices=("json", "tsv"), default="json")
    p.add_argument("--output")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("residuals", help="GCS residuals of a fitted model (TSV)")
    _add_data_args(p)
    _add_fit_args(p)
    p.add_argument("--output")
    p.set_defaults(func=cmd_residuals)

    p = sub.add_parser("envelope", help="QQ envelope data for GCS residuals (TSV)")
    _add_data_args(p)
    _add_fit_args(p)
    p.add_argument("--B", type=int, default=100)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--refit-envelope", action="store_true", help="re-estimate the model per replicate")
    p.add_argument("--output")
    p.set_defaults(func=cmd_envelope)

    p = sub.add_parser("simulate", help="Monte Carlo study of the ML estimators")
    p.add_argument("--alphas", default="0.1,0.5,1,2,4")
    p.add_argument("--ns", default="100,300,500")
    p.add_argument("--beta1", default="0.2,0.5")
    p.add_argument("--beta2", default="1,2")
    p.add_argument("--replications", type=int, default=5000)
    p.add_argument("--seed", type=int, default=20190101)
    p.add_argument("--impute-refit", type=int, default=0, metavar="K",
                   help="retry failed replicates with K extra random starts")
    p.add_argument("--gtol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--format", choices=("json", "tsv"), default="tsv")
    p.add_argument("--output")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (InputError, DataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOCONV


if __name__ == "__main__":
    sys.exit(main())
