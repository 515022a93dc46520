"""Command-line interface.

Subcommands: simulate, estimate, bounds, verify, eigen, ywfit, suite.
Exit codes: 0 success, 1 check failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .bounds import bound_report_rows
from .config import experiment_from_config, load_config, model_from_config
from .covariance import CovEstimate, analytic_block_cov, empirical_auto_cov, empirical_cross_cov
from .errors import FtscovError
from .experiments import run_bound_verification, run_suite, suite_names, write_summary
from .processes import child_seed, simulate
from .spectral import eig, perturbation_checks
from .yulewalker import yw_fit, yw_fit_truncated


def _add_common(parser, config_required=True):
    parser.add_argument("--config", required=config_required, help="JSON config file")
    parser.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for replications")
    parser.add_argument("--format", choices=("csv", "json"), default="csv", dest="fmt")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ftscov",
        description="Lagged (cross-)covariance estimation lab for functional time series",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a path from the configured model")
    _add_common(p)
    p.add_argument("--n-samples", type=int, default=None)

    p = sub.add_parser("estimate", help="simulate and estimate one lagged covariance operator")
    _add_common(p)
    p.add_argument("--n-samples", type=int, default=None)
    p.add_argument("--lag", type=int, default=0)
    p.add_argument("--power-m", type=int, default=1)
    p.add_argument("--power-n", type=int, default=1)

    p = sub.add_parser("bounds", help="evaluate the configured bound over the experiment grid")
    _add_common(p)

    p = sub.add_parser("verify", help="Monte Carlo bound verification over the experiment grid")
    _add_common(p)

    p = sub.add_parser("eigen", help="eigenelement perturbation report against the analytic oracle")
    _add_common(p)
    p.add_argument("--n-samples", type=int, default=400)
    p.add_argument("--replications", type=int, default=1)
    p.add_argument("--power-m", type=int, default=1)
    p.add_argument("--k-max", type=int, default=5)

    p = sub.add_parser("ywfit", help="regularized Yule-Walker fit on a simulated path")
    _add_common(p)
    p.add_argument("--n-samples", type=int, default=400)
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--ridge", type=float, default=None)
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--truncated", action="store_true", help="fAR(infinity) truncation reading")

    p = sub.add_parser("suite", help="run a named property-check suite")
    p.add_argument("name", help=f"one of: {', '.join(suite_names())}")
    _add_common(p, config_required=False)

    return parser


def _out_dir(args) -> str | None:
    if args.out is None:
        return None
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _write_text(out_dir: str, name: str, text: str) -> str:
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path


def _write_json(out_dir: str, name: str, obj) -> str:
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _values_csv(values: np.ndarray, header: str) -> str:
    lines = [header]
    for row in values:
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def _model_and_seed(args):
    data = load_config(args.config)
    model = model_from_config(data.get("model", {}))
    exp = data.get("experiment", {}) if isinstance(data.get("experiment"), dict) else {}
    seed = args.seed if args.seed is not None else int(exp.get("seed", 0))
    default_n = int(exp.get("sample_sizes", [100])[0])
    return model, seed, default_n


def _cmd_simulate(args) -> int:
    model, seed, default_n = _model_and_seed(args)
    n = args.n_samples or default_n
    bundle = simulate(model, n, seed)
    out = _out_dir(args)
    if out is None:
        print(f"simulated {n} values on {model.space.d} grid nodes (kind={model.kind}, seed={seed})")
        return 0
    if args.fmt == "json":
        obj = {
            "schema_version": 1,
            "kind": model.kind,
            "seed": seed,
            "xs": bundle.xs.tolist(),
        }
        if bundle.ys is not None:
            obj["ys"] = bundle.ys.tolist()
        paths = [_write_json(out, "path.json", obj)]
    else:
        header = f"# ftscov path: kind={model.kind},n={n},seed={seed},d={model.space.d}"
        paths = [_write_text(out, "path_x.csv", _values_csv(bundle.xs, header))]
        if bundle.ys is not None:
            paths.append(_write_text(out, "path_y.csv", _values_csv(bundle.ys, header)))
    print("wrote " + ", ".join(paths))
    return 0


def _cmd_estimate(args) -> int:
    model, seed, default_n = _model_and_seed(args)
    n = args.n_samples or default_n
    bundle = simulate(model, n, seed)
    if model.has_cross:
        est = empirical_cross_cov(
            bundle.xs, bundle.ys, args.lag, args.power_m, args.power_n, space=model.space
        )
    elif args.power_m == args.power_n:
        est = empirical_auto_cov(bundle.xs, args.lag, args.power_m, space=model.space)
    else:
        est = empirical_cross_cov(
            bundle.xs, bundle.xs, args.lag, args.power_m, args.power_n, space=model.space
        )
    out = _out_dir(args)
    if out is None:
        w = est.window
        print(
            f"estimated {est.kind} covariance: h={w.h}, m={w.m}, n={w.n}, N'={w.n_prime}, "
            f"HS norm {est.op.hs_norm():.6f}"
        )
        return 0
    if args.fmt == "json":
        w = est.window
        obj = {
            "schema_version": 1,
            "kind": est.kind,
            "h": w.h,
            "m": w.m,
            "n": w.n,
            "n_prime": w.n_prime,
            "dense": est.dense().tolist(),
        }
        paths = [_write_json(out, "covariance.json", obj)]
    else:
        path = os.path.join(out, "covariance.csv")
        est.to_csv(path)
        paths = [path]
    print("wrote " + ", ".join(paths))
    return 0


def _cmd_bounds(args) -> int:
    from .experiments import bound_reports

    data = load_config(args.config)
    config = experiment_from_config(data, jobs=args.jobs, seed=args.seed)
    reports = bound_reports(config)
    rows = bound_report_rows(reports)
    out = _out_dir(args)
    if out is not None:
        if args.fmt == "json":
            obj = {
                "schema_version": 1,
                "rows": [dict(zip(rows[0], row)) for row in rows[1:]],
            }
            print("wrote " + _write_json(out, "bounds.json", obj))
        else:
            text = "\n".join(",".join(_cell_to_str(v) for v in row) for row in rows) + "\n"
            print("wrote " + _write_text(out, "bounds.csv", text))
    for row in rows[1:]:
        print(
            f"{row[0]}: N={row[1]} h={row[2]} m={row[3]} n={row[4]} -> value {row[9]!r} "
            f"(leading {row[7]!r}, tail {row[8]!r})"
        )
    return 0


def _cell_to_str(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def _cmd_verify(args) -> int:
    data = load_config(args.config)
    config = experiment_from_config(data, jobs=args.jobs, seed=args.seed)
    summary = run_bound_verification(config)
    out = _out_dir(args)
    if out is not None:
        paths = write_summary(summary, out, args.fmt)
        print("wrote " + ", ".join(paths))
    for r in summary.rows:
        status = "PASS" if r.passed else "FAIL"
        print(
            f"{status} N={r.N} h={r.h} m={r.m} n={r.n}: empirical {r.empirical:.6f} "
            f"vs {r.formula} {r.bound:.6f} (se {r.se:.6f})"
        )
    print(f"verify: {sum(r.passed for r in summary.rows)}/{len(summary.rows)} cells passed")
    return 0 if summary.all_passed else 1


def _cmd_eigen(args) -> int:
    model, seed, _ = _model_and_seed(args)
    m = args.power_m
    truth_op = analytic_block_cov(model, 0, m, m)
    truth = eig(truth_op)
    lines = [
        "rep,j,lambda_hat,lambda,function_slack,function_skipped,uniform_slack,"
        "uniform_skipped,delta_op,eigenvalue_slack"
    ]
    worst = np.inf
    for rep in range(args.replications):
        bundle = simulate(model, args.n_samples, child_seed(seed, 0, 0, rep))
        est_op = empirical_cross_cov(bundle.xs, bundle.xs, 0, m, m, space=model.space).op
        report = perturbation_checks(eig(est_op), truth, est_op, truth_op, k_max=args.k_max)
        worst = min(worst, report.min_slack())
        est_vals = eig(est_op).values
        for (j, fslack), (_, uslack) in zip(report.function_slacks, report.uniform_slacks):
            lines.append(
                ",".join(
                    [
                        str(rep),
                        str(j),
                        repr(float(est_vals[j - 1])),
                        repr(float(truth.values[j - 1])),
                        "" if fslack is None else repr(float(fslack)),
                        "true" if fslack is None else "false",
                        "" if uslack is None else repr(float(uslack)),
                        "true" if uslack is None else "false",
                        repr(float(report.delta_op)),
                        repr(float(report.eigenvalue_slack)),
                    ]
                )
            )
    out = _out_dir(args)
    if out is not None:
        if args.fmt == "json":
            header = lines[0].split(",")
            obj = {
                "schema_version": 1,
                "rows": [dict(zip(header, line.split(","))) for line in lines[1:]],
            }
            print("wrote " + _write_json(out, "eigen.json", obj))
        else:
            print("wrote " + _write_text(out, "eigen.csv", "\n".join(lines) + "\n"))
    print(f"eigen: min slack {worst:.3e} over {args.replications} replication(s)")
    return 0 if worst >= -1e-8 else 1


def _cmd_ywfit(args) -> int:
    model, seed, default_n = _model_and_seed(args)
    n = args.n_samples or default_n
    bundle = simulate(model, n, seed)
    fit_fn = yw_fit_truncated if args.truncated else yw_fit
    fit = fit_fn(bundle.xs, args.order, ridge=args.ridge, rank=args.rank, space=model.space)
    diag = fit.diagnostics
    lines = ["block,hs_norm,ridge,rank,residual_hs,explained_variance,rank_warning"]
    for j, norm in enumerate(diag.block_hs_norms, start=1):
        lines.append(
            ",".join(
                [
                    str(j),
                    repr(float(norm)),
                    repr(float(fit.ridge)),
                    str(fit.rank),
                    repr(float(diag.residual_hs)),
                    repr(float(diag.explained_variance)),
                    "true" if diag.rank_warning else "false",
                ]
            )
        )
    out = _out_dir(args)
    if out is not None:
        if args.fmt == "json":
            obj = {
                "schema_version": 1,
                "ridge": fit.ridge,
                "rank": fit.rank,
                "residual_hs": diag.residual_hs,
                "block_hs_norms": list(diag.block_hs_norms),
                "explained_variance": diag.explained_variance,
                "rank_warning": diag.rank_warning,
            }
            print("wrote " + _write_json(out, "ywfit.json", obj))
        else:
            print("wrote " + _write_text(out, "ywfit.csv", "\n".join(lines) + "\n"))
    print(
        f"ywfit: order {args.order}, ridge {fit.ridge:.6f}, rank {fit.rank}, "
        f"residual {diag.residual_hs:.6f}"
    )
    return 0


def _cmd_suite(args) -> int:
    result = run_suite(args.name, seed=args.seed if args.seed is not None else 0)
    for line in result.report_lines():
        print(line)
    out = _out_dir(args)
    if out is not None:
        print("wrote " + _write_json(out, f"suite_{args.name}.json", result.to_json_obj()))
    return result.exit_status


_HANDLERS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "bounds": _cmd_bounds,
    "verify": _cmd_verify,
    "eigen": _cmd_eigen,
    "ywfit": _cmd_ywfit,
    "suite": _cmd_suite,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except FtscovError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
