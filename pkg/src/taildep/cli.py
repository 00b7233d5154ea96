"""Command-line interface: ``taildep {estimate,gof,simulate,reproduce}``.

Exit codes: 0 success, 2 usage or input error, 3 estimation failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from taildep.errors import TailDepError
from taildep.inference import CovMethod, covariance_Sigma, gof_test, mom_estimate, wald_statistic
from taildep.models import get_family
from taildep.simulate import (
    EllipticalModelConfig,
    ExperimentConfig,
    FactorModelConfig,
    Scale,
    figure_config,
    run_experiment,
)
from taildep.tail_core import MomentMap, Sample

EXIT_OK, EXIT_USAGE, EXIT_ESTIMATION = 0, 2, 3


class InputError(Exception):
    pass


def read_pairs(path):
    """Two numeric columns; a single non-numeric first row is taken as a header."""
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    if not rows:
        raise InputError(f"{path}: no data")
    if not _numeric(rows[0]):
        rows = rows[1:]
    data = []
    for lineno, row in enumerate(rows, start=1):
        if len(row) != 2 or not _numeric(row):
            raise InputError(f"{path}: row {lineno} is not two numeric columns: {row!r}")
        data.append((float(row[0]), float(row[1])))
    try:
        return Sample.from_pairs(np.array(data))
    except TailDepError as exc:
        raise InputError(f"{path}: {exc}") from None


def _numeric(row):
    try:
        [float(c) for c in row]
    except ValueError:
        return False
    return True


def parse_floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def parse_k_grid(text):
    """``"50,100,200"`` or a range ``"start:stop:step"`` (inclusive)."""
    try:
        if ":" in text:
            start, stop, step = (int(v) for v in text.split(":"))
            return list(range(start, stop + 1, step))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad k grid {text!r}") from None


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def emit(payload, args):
    text = json.dumps(_clean(payload), indent=2, sort_keys=False) + "\n"
    _write(text, args.out)


def _write(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _moment_map(name, family):
    if name in (None, "default"):
        return family.default_g
    return MomentMap.from_name(name)


def _named(family, values):
    return {n: v for n, v in zip(family.param_names, np.asarray(values, dtype=float).tolist())}


def cmd_estimate(args):
    sample = read_pairs(args.input)
    family = get_family(args.family)
    g = _moment_map(args.g, family)
    est = mom_estimate(sample, args.k, family, g)
    out = {
        "family": family.name,
        "g": g.kind.value,
        "k": est.k,
        "n": est.n,
        "status": est.status.value,
        "theta_hat": _named(family, est.theta_hat),
        "moment_vector": est.moment_vector,
    }
    if not est.ok:
        out["message"] = est.message
        emit(out, args)
        return EXIT_ESTIMATION
    sigma = covariance_Sigma(
        est.theta_hat, family, g, CovMethod.SIMULATED, budget=args.sims or 2000, seed=args.seed, grid_m=args.grid_m
    )
    out["sigma"] = {
        "method": sigma.method.value,
        "entries": sigma.sigma_mat,
        "mc_stderr": sigma.mc_stderr,
    }
    theta0 = args.theta0
    if theta0 is not None and len(theta0) != family.p:
        raise InputError(f"--theta0 needs {family.p} values for {family.name}")
    try:
        w = wald_statistic(est, family, g, theta_ref=theta0, sigma=sigma)
        out["wald"] = {
            "theta0": None if theta0 is None else _named(family, theta0),
            "stat": w.stat,
            "p_value": w.p_value,
            "df": w.df,
            "reject_95": bool(w.reject(0.95)),
            "region_matrix": w.matrix,
        }
    except TailDepError as exc:
        out["wald"] = {"error": str(exc)}
    emit(out, args)
    return EXIT_OK


def cmd_gof(args):
    if args.sims is not None and args.sims < 1:
        raise InputError("--sims must be positive")
    sample = read_pairs(args.input)
    family = get_family(args.family)
    g = _moment_map(args.g, family)
    try:
        res = gof_test(sample, args.k, family, g, n_sims=args.sims or 1000, grid_m=args.grid_m, rng=args.seed)
    except (TailDepError, ValueError) as exc:
        est = getattr(exc, "estimate", None)
        if est is None:
            raise
        emit(
            {
                "family": family.name,
                "k": est.k,
                "n": est.n,
                "status": est.status.value,
                "moment_vector": est.moment_vector,
                "message": est.message,
            },
            args,
        )
        return EXIT_ESTIMATION
    emit(
        {
            "family": family.name,
            "g": g.kind.value,
            "k": res.estimate.k,
            "n": res.estimate.n,
            "status": res.estimate.status.value,
            "theta_hat": _named(family, res.estimate.theta_hat),
            "statistic": res.statistic,
            "critical_values": {f"{lv:.2f}": v for lv, v in res.critical_values.items()},
            "p_value": res.p_value,
            "n_sims": res.n_limit_sims,
            "grid_m": args.grid_m,
        },
        args,
    )
    return EXIT_OK


def _emit_experiment(result, args):
    if args.format == "json":
        emit({"header": list(result.header), "rows": [list(r) for r in result.rows()]}, args)
    else:
        _write(result.to_csv(), args.out)
    return EXIT_OK


def _model_from_args(args):
    if args.model == "factor":
        if args.theta is None or len(args.theta) != 2:
            raise InputError("--model factor needs --theta a,b")
        return FactorModelConfig.from_theta(args.theta, args.factor_law)
    if args.generator == "cauchy":
        return EllipticalModelConfig("cauchy", 1.0)
    if args.theta is None or len(args.theta) != 1:
        raise InputError("--generator frechet needs --theta nu")
    return EllipticalModelConfig("frechet", args.theta[0])


def cmd_simulate(args):
    if args.figure is not None:
        return cmd_reproduce(args)
    if args.model is None:
        raise InputError("simulate needs --model or --figure")
    model = _model_from_args(args)
    reps = args.replicates or Scale(args.scale).replicates
    cfg = ExperimentConfig(model, args.n, reps, args.k_grid or _default_grid(args.n), args.seed)
    family = get_family(args.family) if args.family else None
    g = _moment_map(args.g, family) if family else None
    return _emit_experiment(run_experiment(cfg, family, g), args)


def _default_grid(n):
    return [k for k in range(25, 401, 25) if k <= n]


def cmd_reproduce(args):
    if args.figure is None:
        raise InputError("reproduce needs --figure")
    kw = {"k_grid": args.k_grid} if args.k_grid else {}
    cfg = figure_config(args.figure, Scale(args.scale), args.seed, **kw)
    return _emit_experiment(run_experiment(cfg), args)


def build_parser():
    p = argparse.ArgumentParser(prog="taildep", description="Semiparametric estimation of bivariate tail dependence.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, data=True):
        if data:
            sp.add_argument("--input", required=True, help="CSV file with two numeric columns")
            sp.add_argument("--k", type=int, required=True, help="number of upper order statistics")
        sp.add_argument("--family", choices=["two-point", "elliptical"], required=data)
        sp.add_argument("--g", choices=["default", "two-point", "triangle"], default="default")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="output file (default stdout)")
        sp.add_argument("--grid-m", type=int, default=30, help="limit-field grid size")

    est = sub.add_parser("estimate", help="moment estimate, covariance and Wald test")
    common(est)
    est.add_argument("--theta0", type=parse_floats, help="null value for the Wald test")
    est.add_argument("--sims", type=int, help="Monte Carlo draws for the covariance (default 2000)")
    est.add_argument("--format", choices=["json"], default="json")
    est.set_defaults(func=cmd_estimate)

    gof = sub.add_parser("gof", help="goodness-of-fit test with simulated critical values")
    common(gof)
    gof.add_argument("--sims", type=int, help="limit-distribution draws (default 1000)")
    gof.add_argument("--format", choices=["json"], default="json")
    gof.set_defaults(func=cmd_gof)

    for name, func in (("simulate", cmd_simulate), ("reproduce", cmd_reproduce)):
        sp = sub.add_parser(name, help="bias/RMSE experiment" if name == "simulate" else "rerun a figure's study")
        common(sp, data=False)
        sp.add_argument("--figure", type=int, help="figure id 1..11")
        sp.add_argument("--scale", choices=["desk", "full"], default="desk")
        sp.add_argument("--k-grid", type=parse_k_grid, help="e.g. 25:400:25 or 50,100,200")
        sp.add_argument("--format", choices=["csv", "json"], default="csv")
        if name == "simulate":
            sp.add_argument("--model", choices=["factor", "elliptical"])
            sp.add_argument("--theta", type=parse_floats, help="a,b for factor; nu for a Frechet generator")
            sp.add_argument("--factor-law", choices=["frechet1", "t2"], default="frechet1")
            sp.add_argument("--generator", choices=["cauchy", "frechet"], default="cauchy")
            sp.add_argument("--n", type=int, default=1000)
            sp.add_argument("--replicates", type=int)
        sp.set_defaults(func=func)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, TailDepError, ValueError) as exc:
        print(f"taildep {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
