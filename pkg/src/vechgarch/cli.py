"""Command-line interface: simulate, estimate, aggregate, montecarlo.

Exit codes: 0 success, 1 usage or input problems, 2 simulation positivity
failures, 3 singular or otherwise failed linear algebra, 4 eigenvalues on
the unit circle (no stable solvent).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import asymptotics
from .aggregation import AggregationInput, aggregate_params
from .exceptions import (
    InsufficientData,
    InvalidInput,
    MissingSigmaW,
    NonStationary,
    PositivityViolation,
    UnimodularEigenvalues,
    VechGarchError,
)
from .model import GarchSpec
from .simulate import read_returns_csv, simulate, to_x, write_returns_csv
from .solver import estimate

__all__ = ["main", "run"]

_USAGE_ERRORS = (InvalidInput, InsufficientData, MissingSigmaW, NonStationary)


def _load_json(path, what):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InvalidInput(f"cannot read {what} from {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{what} at {path} is not valid JSON: {exc}") from exc


def _load_matrix(path, what):
    data = _load_json(path, what)
    try:
        m = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"{what} at {path} must be a numeric matrix") from exc
    if m.ndim != 2:
        raise InvalidInput(f"{what} at {path} must be two-dimensional")
    return m


def _dump_json(payload, path):
    text = json.dumps(payload, indent=2)
    if path is None:
        print(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _print_warnings(diag):
    for note in diag.warnings:
        print(f"warning: {note['code']}: {note['message']}", file=sys.stderr)


def cmd_simulate(args):
    spec = GarchSpec.from_json(_load_json(args.params, "spec"))
    result = simulate(spec, args.n, args.seed, burn_in=args.burn_in)
    write_returns_csv(result.y, args.out)
    print(json.dumps(spec.to_json(), indent=2))
    return 0


def cmd_estimate(args):
    y = read_returns_csv(args.data)
    x = to_x(y)
    report = estimate(x, phi_method=args.phi_method, lags=args.lags,
                      project=args.project_stationary)
    payload = report.to_json()
    if args.with_se:
        se_report = asymptotics.standard_errors(x, bandwidth=args.bandwidth)
        payload["asymptotics"] = se_report.to_json()
    _print_warnings(report.diagnostics)
    _dump_json(payload, args.out)
    return 0


def cmd_aggregate(args):
    spec = GarchSpec.from_json(_load_json(args.params, "spec"))
    sigma = _load_matrix(args.sigma, "sigma")
    sigma_w = None
    if args.sigma_w is not None:
        sigma_w = _load_matrix(args.sigma_w, "sigma_w")
    inp = AggregationInput(spec=spec, sigma=sigma, m=args.m, kind=args.kind,
                           sigma_w=sigma_w)
    agg = aggregate_params(inp)
    _print_warnings(agg.report.diagnostics)
    _dump_json(agg.to_json(), args.out)
    return 0


def _true_lambda(spec):
    return np.concatenate([
        spec.c,
        spec.A.reshape(-1, order="F"),
        spec.B.reshape(-1, order="F"),
    ])


def _block_errors(est_spec, true_spec):
    k = true_spec.dbar
    err_c = float(np.abs(est_spec.c - true_spec.c).max())
    err_a = float(np.abs(est_spec.A - true_spec.A).max())
    err_b = float(np.abs(est_spec.B - true_spec.B).max())
    return err_c, err_a, err_b, max(err_c, err_a, err_b), k


def _block_coverage(est_spec, true_spec, se):
    k = true_spec.dbar
    diff = np.abs(_true_lambda(est_spec) - _true_lambda(true_spec))
    inside = diff <= 1.96 * se
    c_part = inside[:k]
    a_part = inside[k : k + k * k]
    b_part = inside[k + k * k :]
    return (float(c_part.mean()), float(a_part.mean()), float(b_part.mean()))


def cmd_montecarlo(args):
    spec = GarchSpec.from_json(_load_json(args.params, "spec"))
    ns = args.n
    rows = []
    for rep in range(args.reps):
        # One seed per replication, shared across sample sizes: paths for
        # different n then share their prefix, which stabilises error
        # ratios across n.
        rep_seed = args.seed + rep
        for n in ns:
            row = {"rep": rep, "n": n, "status": "ok", "err_max": "",
                   "err_c": "", "err_a": "", "err_b": "",
                   "cover_c": "", "cover_a": "", "cover_b": ""}
            try:
                sim = simulate(spec, n, rep_seed, burn_in=args.burn_in)
                x = to_x(sim.y)
                report = estimate(x, phi_method=args.phi_method, lags=args.lags,
                                  project=args.project_stationary)
                err_c, err_a, err_b, err_max, _ = _block_errors(report.spec, spec)
                row.update(err_max=f"{err_max:.10g}", err_c=f"{err_c:.10g}",
                           err_a=f"{err_a:.10g}", err_b=f"{err_b:.10g}")
                if args.with_se:
                    se_rep = asymptotics.standard_errors(x, bandwidth=args.bandwidth)
                    cc, ca, cb = _block_coverage(report.spec, spec,
                                                 se_rep.std_errors)
                    row.update(cover_c=f"{cc:.6g}", cover_a=f"{ca:.6g}",
                               cover_b=f"{cb:.6g}")
            except VechGarchError as exc:
                row["status"] = type(exc).__name__
            rows.append(row)
    _write_montecarlo(rows, ns, args)
    return 0


def _write_montecarlo(rows, ns, args):
    fieldnames = ["rep", "n", "status", "err_max", "err_c", "err_a", "err_b",
                  "cover_c", "cover_a", "cover_b"]
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
        for n in ns:
            done = [r for r in rows if r["n"] == n]
            ok = [r for r in done if r["status"] == "ok"]
            failures = len(done) - len(ok)
            parts = [f"# summary n={n} reps={len(done)} failures={failures}"]
            if ok:
                med = np.median([float(r["err_max"]) for r in ok])
                parts.append(f"median_err_max={med:.10g}")
                if args.with_se:
                    for key in ("cover_c", "cover_a", "cover_b"):
                        mean = np.mean([float(r[key]) for r in ok])
                        parts.append(f"{key}={mean:.6g}")
            print(" ".join(parts), file=out)
    finally:
        if args.out:
            out.close()


def _positive_int(text):
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _int_list(text):
    try:
        values = [int(part) for part in text.split(",") if part]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from exc
    if not values or any(v <= 0 for v in values):
        raise argparse.ArgumentTypeError("sample sizes must be positive integers")
    return values


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="vechgarch",
        description="Closed-form moment estimation and temporal aggregation "
                    "for multivariate vech-GARCH(1,1).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate a sample path to CSV")
    sim.add_argument("--params", required=True, help="spec JSON file")
    sim.add_argument("--out", required=True, help="output CSV path")
    sim.add_argument("--n", type=int, required=True, help="number of observations")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--burn-in", type=int, default=1000, dest="burn_in")
    sim.set_defaults(func=cmd_simulate)

    est = sub.add_parser("estimate", help="estimate parameters from a returns CSV")
    est.add_argument("--data", required=True, help="returns CSV with header y1,...,yd")
    est.add_argument("--out", help="output JSON path (stdout when omitted)")
    est.add_argument("--phi-method", choices=["lag1", "weighted", "lstsq"],
                     default="lag1", dest="phi_method")
    est.add_argument("--lags", type=_positive_int, default=1)
    est.add_argument("--with-se", action="store_true", dest="with_se")
    est.add_argument("--bandwidth", type=int, default=None)
    est.add_argument("--project-stationary", action="store_true",
                     dest="project_stationary")
    est.set_defaults(func=cmd_estimate)

    agg = sub.add_parser("aggregate", help="derive low-frequency parameters")
    agg.add_argument("--params", required=True, help="spec JSON file")
    agg.add_argument("--sigma", required=True, help="innovation covariance JSON file")
    agg.add_argument("--sigma-w", default=None, dest="sigma_w",
                     help="flow noise covariance JSON file")
    agg.add_argument("--m", type=_positive_int, required=True)
    agg.add_argument("--kind", choices=["stock", "flow"], required=True)
    agg.add_argument("--out", help="output JSON path (stdout when omitted)")
    agg.set_defaults(func=cmd_aggregate)

    mc = sub.add_parser("montecarlo", help="replicated simulate-and-estimate study")
    mc.add_argument("--params", required=True, help="true spec JSON file")
    mc.add_argument("--reps", type=_positive_int, required=True)
    mc.add_argument("--n", type=_int_list, required=True,
                    help="comma-separated sample sizes")
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--burn-in", type=int, default=1000, dest="burn_in")
    mc.add_argument("--phi-method", choices=["lag1", "weighted", "lstsq"],
                    default="lag1", dest="phi_method")
    mc.add_argument("--lags", type=_positive_int, default=1)
    mc.add_argument("--with-se", action="store_true", dest="with_se")
    mc.add_argument("--bandwidth", type=int, default=None)
    mc.add_argument("--project-stationary", action="store_true",
                    dest="project_stationary")
    mc.add_argument("--out", help="output CSV path (stdout when omitted)")
    mc.set_defaults(func=cmd_montecarlo)

    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except PositivityViolation as exc:
        print(f"error: {exc} (step {exc.step})", file=sys.stderr)
        return 2
    except UnimodularEigenvalues as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except VechGarchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run():
    raise SystemExit(main())
