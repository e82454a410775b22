"""Command-line harness: single-dataset selection, Monte-Carlo tables,
penalty-multiplier sweeps and catalog listing.

Input data are headerless CSV files, one observation per row.  Report
commands write delimited output plus a rendered figure into the output
directory (flag ``--out``, env var ``PCOKDE_OUTDIR``, or the working
directory).  Exit codes: 0 success, 2 input error, 3 computation error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import figures
from .densities import BenchmarkDensity, UniformBall, UniformBox, get_density, zoo
from .errors import PcoKdeError, UnsupportedDimension
from .risk import (
    MethodSpec,
    build_grid,
    lambda_sweep,
    monte_carlo_risk,
    select_bandwidth,
)

METHODS_1D = ("pco", "rot", "rot0", "ucv", "bcv", "sjste", "sjdpi")
METHODS_MD = ("pco", "rot", "ucv", "scv", "pi")
DEFAULT_GRID_SIZE = {2: 256, 3: 4096, 4: 256}


class InputError(Exception):
    """Bad user input (maps to exit code 2)."""


def _read_csv(path: str) -> np.ndarray:
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise InputError(f"malformed CSV {path}: {exc}") from exc
    if data.size == 0:
        raise InputError(f"{path} is empty")
    if not np.all(np.isfinite(data)):
        raise InputError(f"{path} contains non-finite values")
    if data.shape[1] > 4:
        raise InputError(f"unsupported dimension {data.shape[1]} (supported: 1..4)")
    return data


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (np.floating,)):
        return repr(float(value))
    return str(value)


def _write_csv(path, fieldnames, rows) -> None:
    with open(path, "w", newline="") as handle:
        handle.write(",".join(fieldnames) + "\n")
        for row in rows:
            handle.write(",".join(_fmt(row[k]) for k in fieldnames) + "\n")


def _out_dir(args) -> str:
    out = args.out or os.environ.get("PCOKDE_OUTDIR") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _parse_list(text: str) -> list[str]:
    return [item.strip() for item in str(text).split(",") if item.strip()]


def _parse_lambdas(text: str) -> list[float]:
    if ":" in text:
        start, stop, step = (float(v) for v in text.split(":"))
        count = int(round((stop - start) / step))
        return [round(start + k * step, 10) for k in range(count + 1)]
    return [float(v) for v in _parse_list(text)]


def _load_config(path: str) -> dict:
    values = {}
    try:
        with open(path) as handle:
            for line in handle:
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise InputError(f"bad config line: {line!r}")
                key, val = line.split("=", 1)
                values[key.strip()] = val.strip()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    return values


def _resolve(cli_value, config: dict, key: str, default, cast):
    if cli_value is not None:
        return cli_value
    if key in config:
        return cast(config[key])
    return default


def _write_config(path: str, config: dict) -> None:
    with open(path, "w", newline="") as handle:
        for key in sorted(config):
            handle.write(f"{key} = {config[key]}\n")


def _density_list(dim: int, spec: str) -> list[BenchmarkDensity]:
    if spec.strip().lower() == "all":
        return list(zoo(dim))
    out = []
    for key in _parse_list(spec):
        try:
            out.append(get_density(dim, key))
        except KeyError as exc:
            raise InputError(str(exc)) from exc
    return out


def _check_methods(methods: list[str], dim: int) -> None:
    allowed = METHODS_1D if dim == 1 else METHODS_MD
    for meth in methods:
        if meth not in allowed:
            raise InputError(
                f"method {meth!r} unavailable in d={dim}; choose from {allowed}")


def cmd_select(args) -> int:
    data = _read_csv(args.input)
    dim = data.shape[1]
    _check_methods([args.method], dim)
    sample = data.ravel() if dim == 1 else data
    spec = MethodSpec(method=args.method, kernel=args.kernel, lam=args.lam,
                      grid=args.grid, grid_size=args.grid_size)
    grid = build_grid(spec, dim, data.shape[0], sample=sample)
    result = select_bandwidth(sample, spec, grid=grid)
    if dim == 1:
        print(f"h = {result.chosen.h!r}")
    else:
        vech = " ".join(repr(float(v)) for v in result.chosen.vech)
        eig = " ".join(repr(float(v)) for v in result.chosen.eigenvalues)
        print(f"vech(H) = {vech}")
        print(f"eigenvalues = {eig}")
    if args.curve:
        if not result.criterion_curve:
            raise InputError(f"method {args.method!r} has no criterion curve")
        if dim == 1:
            rows = [{"h": bw.h, "criterion": val} for bw, val in result.criterion_curve]
            fields = ["h", "criterion"]
        else:
            fields = ["detH", "criterion"] + [f"vech{k}" for k in range(dim * (dim + 1) // 2)]
            rows = []
            for bw, val in result.criterion_curve:
                row = {"detH": bw.det, "criterion": val}
                row.update({f"vech{k}": v for k, v in enumerate(bw.vech)})
                rows.append(row)
        _write_csv(args.curve, fields, rows)
        figures.save_criterion_curve(rows, os.path.splitext(args.curve)[0] + ".png", dim)
    return 0


def cmd_simulate(args) -> int:
    config = _load_config(args.config) if args.config else {}
    dim = _resolve(args.dim, config, "dim", 1, int)
    densities = _resolve(args.densities, config, "densities", "all", str)
    methods = _parse_list(_resolve(args.methods, config, "methods",
                                   "pco,ucv" if dim == 1 else "pco,ucv,scv,pi", str))
    kernel = _resolve(args.kernel, config, "kernel", "gaussian", str)
    ns = [int(v) for v in _parse_list(_resolve(args.ns, config, "ns", "100", str))]
    trials = _resolve(args.trials, config, "trials", 20, int)
    lam = _resolve(args.lam, config, "lambda", 1.0, float)
    grid_kind = _resolve(args.grid, config, "grid", "diagonal", str)
    grid_size = _resolve(args.grid_size, config, "grid_size",
                         DEFAULT_GRID_SIZE.get(dim, 400), int)
    seed = _resolve(args.seed, config, "seed", 0, int)
    workers = _resolve(args.workers, config, "workers", 1, int)
    _check_methods(methods, dim)
    dens_objs = _density_list(dim, densities)
    out = _out_dir(args)

    effective = {
        "command": "simulate", "dim": dim, "densities": densities,
        "methods": ",".join(methods), "kernel": kernel,
        "ns": ",".join(str(n) for n in ns), "trials": trials, "lambda": lam,
        "grid": grid_kind, "grid_size": grid_size, "seed": seed, "workers": workers,
    }
    _write_config(os.path.join(out, "config.txt"), effective)

    trial_fields = ["density", "method", "kernel", "grid", "lambda", "n", "trial",
                    "seed", "ise_sqrt", "chosen_bandwidth_vech", "status"]
    trial_rows = []
    agg_rows = []
    for n in ns:
        for dens in dens_objs:
            for meth in methods:
                spec = MethodSpec(method=meth, kernel=kernel, lam=lam,
                                  grid=grid_kind, grid_size=grid_size)
                report = monte_carlo_risk(dens, spec, n, trials, seed, workers=workers)
                trial_rows.extend(report.rows())
                agg_rows.append({
                    "density": dens.abbrev, "method": meth, "kernel": report.kernel,
                    "grid": grid_kind if dim > 1 else "univariate", "lambda": lam,
                    "n": n, "mean_ise_sqrt": report.mean,
                    "median_ise_sqrt": report.median,
                    "failures": report.failures, "marker": 0,
                })
    for n in ns:
        for dens in dens_objs:
            cell = [r for r in agg_rows if r["n"] == n and r["density"] == dens.abbrev]
            best = min(r["mean_ise_sqrt"] for r in cell)
            for r in cell:
                r["marker"] = int(r["mean_ise_sqrt"] <= 1.05 * best)
    _write_csv(os.path.join(out, "trials.csv"), trial_fields, trial_rows)
    agg_fields = ["density", "method", "kernel", "grid", "lambda", "n",
                  "mean_ise_sqrt", "median_ise_sqrt", "failures", "marker"]
    for n in ns:
        rows_n = [r for r in agg_rows if r["n"] == n]
        _write_csv(os.path.join(out, f"aggregate_n{n}.csv"), agg_fields, rows_n)
        figures.save_aggregate_figure(rows_n, os.path.join(out, f"aggregate_n{n}.png"))
    return 0


def cmd_lambda_sweep(args) -> int:
    config = _load_config(args.config) if args.config else {}
    dim = _resolve(args.dim, config, "dim", 1, int)
    densities = _resolve(args.densities, config, "densities", "G,MG,K", str)
    lambdas = _parse_lambdas(_resolve(args.lambdas, config, "lambdas", "-0.2:2:0.2", str))
    kernel = _resolve(args.kernel, config, "kernel", "gaussian", str)
    n = _resolve(args.n, config, "n", 100, int)
    trials = _resolve(args.trials, config, "trials", 20, int)
    seed = _resolve(args.seed, config, "seed", 0, int)
    grid_size = _resolve(args.grid_size, config, "grid_size",
                         400 if dim == 1 else DEFAULT_GRID_SIZE.get(dim, 256), int)
    dens_objs = _density_list(dim, densities)
    out = _out_dir(args)
    effective = {
        "command": "lambda-sweep", "dim": dim, "densities": densities,
        "lambdas": ",".join(repr(v) for v in lambdas), "kernel": kernel,
        "n": n, "trials": trials, "seed": seed, "grid_size": grid_size,
    }
    _write_config(os.path.join(out, "config.txt"), effective)
    rows = []
    for dens in dens_objs:
        sweep_rows, _ = lambda_sweep(dens, n, trials, lambdas, kernel=kernel,
                                     master_seed=seed, grid_size=grid_size)
        rows.extend(sweep_rows)
    fields = ["density", "lambda", "n", "trials", "mean_ise", "mean_ise_sqrt", "median_ise"]
    _write_csv(os.path.join(out, "lambda_sweep.csv"), fields, rows)
    figures.save_lambda_figure(rows, os.path.join(out, "lambda_sweep.png"))
    return 0


def _component_json(comp) -> dict:
    if isinstance(comp, UniformBox):
        return {"kind": "uniform_box", "intervals": [list(iv) for iv in comp.intervals]}
    if isinstance(comp, UniformBall):
        return {"kind": "uniform_ball", "center": list(comp.center), "radius": comp.radius}
    if hasattr(comp, "rate"):
        return {"kind": "exponential", "rate": comp.rate}
    return {"kind": "gaussian", "mean": list(comp.mean),
            "covariance": [list(row) for row in comp.covariance],
            "clamped": comp.clamped}


def cmd_zoo(args) -> int:
    densities = zoo(args.dim)
    if args.json:
        catalog = [{
            "name": dens.name, "abbrev": dens.abbrev, "dim": dens.dim,
            "weights": list(dens.weights),
            "components": [_component_json(c) for c in dens.components],
        } for dens in densities]
        print(json.dumps({"dim": args.dim, "densities": catalog}, indent=2))
    else:
        for dens in densities:
            print(f"{dens.abbrev}\t{dens.name}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pcokde",
                                     description="Bandwidth selection and risk benchmarks "
                                                 "for kernel density estimation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sel = sub.add_parser("select", help="select a bandwidth for a dataset")
    p_sel.add_argument("--method", required=True,
                       choices=sorted(set(METHODS_1D) | set(METHODS_MD)))
    p_sel.add_argument("--kernel", default="gaussian",
                       choices=["gaussian", "epanechnikov", "biweight"])
    p_sel.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p_sel.add_argument("--grid", default="diagonal", choices=["diagonal", "rotated"])
    p_sel.add_argument("--grid-size", type=int, default=None)
    p_sel.add_argument("--input", required=True, help="headerless CSV, one row per observation")
    p_sel.add_argument("--curve", default=None, help="write the criterion curve CSV here")
    p_sel.set_defaults(func=cmd_select)

    p_sim = sub.add_parser("simulate", help="Monte-Carlo risk tables")
    p_sim.add_argument("--config", default=None, help="flat key=value config file")
    p_sim.add_argument("--densities", default=None, help="comma list of abbreviations or 'all'")
    p_sim.add_argument("--methods", default=None)
    p_sim.add_argument("--kernel", default=None)
    p_sim.add_argument("--dim", type=int, default=None)
    p_sim.add_argument("--ns", default=None, help="comma list of sample sizes")
    p_sim.add_argument("--trials", type=int, default=None)
    p_sim.add_argument("--lambda", dest="lam", type=float, default=None)
    p_sim.add_argument("--grid", default=None, choices=["diagonal", "rotated"])
    p_sim.add_argument("--grid-size", type=int, default=None)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--workers", type=int, default=None)
    p_sim.add_argument("--out", default=None)
    p_sim.set_defaults(func=cmd_simulate)

    p_lam = sub.add_parser("lambda-sweep", help="risk against the penalty multiplier")
    p_lam.add_argument("--config", default=None)
    p_lam.add_argument("--densities", default=None)
    p_lam.add_argument("--lambdas", default=None, help="comma list or start:stop:step")
    p_lam.add_argument("--kernel", default=None)
    p_lam.add_argument("--dim", type=int, default=None)
    p_lam.add_argument("--n", type=int, default=None)
    p_lam.add_argument("--trials", type=int, default=None)
    p_lam.add_argument("--grid-size", type=int, default=None)
    p_lam.add_argument("--seed", type=int, default=None)
    p_lam.add_argument("--out", default=None)
    p_lam.set_defaults(func=cmd_lambda_sweep)

    p_zoo = sub.add_parser("zoo", help="list the benchmark densities")
    p_zoo.add_argument("--dim", type=int, required=True)
    p_zoo.add_argument("--list", action="store_true", default=True)
    p_zoo.add_argument("--json", action="store_true")
    p_zoo.set_defaults(func=cmd_zoo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except UnsupportedDimension as exc:
        print(f"error: unsupported dimension: {exc}", file=sys.stderr)
        return 2
    except PcoKdeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except KeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
