"""Command-line client: simulate, fit, r0, serve.

Each run is driven by a flat JSON config file; any config field can be
overridden with a flag of the same name. Exit codes: 0 success, 2 invalid
input/config, 3 numeric failure, 4 fit did not converge (result still
written).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .calibrate import (DAILY_INCIDENCE, DEFAULT_INIT, FREE_PARAM_NAMES,
                        FitProblem, fit, simulate_observable)
from .dataio import (TimeSeries, export_trajectory, load_case_series,
                     moving_average, normalize_cases)
from .errors import NumericError
from .integrate import IntegratorConfig, integrate, sample_at
from .model import (AGG_LABELS, AggParams, NetParams, Trajectory, agg_rhs,
                    chain_mobility, make_agg_initial, make_net_initial,
                    net_labels, net_rhs)
from .reproduction import r0_aggregated, r0_network
from .svgchart import render_svg

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_NOT_CONVERGED = 0, 2, 3, 4

# Config schema per command: field -> type. Every field doubles as a flag.
_INTEGRATOR_FIELDS = {"method": str, "dt": float, "rel_tol": float,
                      "abs_tol": float, "max_steps": int}
_SIM_FIELDS = {"model": str, "beta": float, "gamma": float, "rho": float,
               "alpha": float, "beta_R": float, "N": float, "I0": float,
               "pI0": float, "t_end": float, "mobility": str,
               "populations": str, "seed_district": int, "seed_size": float,
               "out": str, "svg": str, **_INTEGRATOR_FIELDS}
_FIT_FIELDS = {"model": str, "observable": str, "beta": float, "gamma": float,
               "rho": float, "alpha": float, "beta_R": float, "N": float,
               "I0": float, "pI0": float, "free": str, "window": int,
               "pop": float, "detect": float, **_INTEGRATOR_FIELDS}


def _load_config(path: str, fields: dict, args: argparse.Namespace) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ValueError(f"config {path} must be a JSON object")
    unknown = [k for k in cfg if k not in fields]
    if unknown:
        raise ValueError(f"unknown config field(s) {unknown} in {path}")
    for name, typ in fields.items():
        override = getattr(args, name, None)
        if override is not None:
            cfg[name] = override
        elif name in cfg and cfg[name] is not None and typ is not str:
            cfg[name] = typ(cfg[name])
    return cfg


def _integrator_config(cfg: dict) -> IntegratorConfig:
    kwargs = {k: cfg[k] for k in _INTEGRATOR_FIELDS if cfg.get(k) is not None}
    return IntegratorConfig(**kwargs)


def _mobility_matrix(value) -> np.ndarray:
    if isinstance(value, list):
        return np.asarray(value, dtype=float)
    if not isinstance(value, str):
        raise ValueError(f"mobility must be 'chain:D:p', a CSV path, or a "
                         f"matrix, got {value!r}")
    if value.startswith("chain:"):
        parts = value.split(":")
        if len(parts) != 3:
            raise ValueError(f"mobility shorthand must be 'chain:D:p', got {value!r}")
        return chain_mobility(int(parts[1]), float(parts[2]))
    try:
        return np.loadtxt(value, delimiter=",", ndmin=2)
    except OSError as exc:
        raise ValueError(f"cannot read mobility matrix {value}: {exc}") from exc


def _net_params(cfg: dict) -> NetParams:
    mob = _mobility_matrix(cfg.get("mobility"))
    pops = cfg.get("populations")
    if pops is None:
        pops = np.full(mob.shape[0], float(cfg.get("N", 1.0)) / mob.shape[0])
    elif isinstance(pops, str):
        pops = np.array([float(v) for v in pops.split(",")])
    else:
        pops = np.asarray(pops, dtype=float)
    return NetParams(beta=float(cfg["beta"]), gamma=float(cfg["gamma"]),
                     populations=pops, mobility=mob)


def _agg_params(cfg: dict) -> AggParams:
    missing = [k for k in ("beta", "gamma", "rho", "alpha", "beta_R") if k not in cfg]
    if missing:
        raise ValueError(f"config missing field(s) {missing}")
    return AggParams(beta=float(cfg["beta"]), gamma=float(cfg["gamma"]),
                     rho=float(cfg["rho"]), alpha=float(cfg["alpha"]),
                     beta_R=float(cfg["beta_R"]), N=float(cfg.get("N", 1.0)))


def _daily_grid(traj: Trajectory) -> np.ndarray:
    return np.arange(np.ceil(traj.times[0]), np.floor(traj.times[-1]) + 0.5)


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config, _SIM_FIELDS, args)
    model = cfg.get("model", "agg")
    out = cfg.get("out")
    if out is None:
        raise ValueError("no output path: set --out or the config 'out' field")
    config = _integrator_config(cfg)
    t_end = float(cfg.get("t_end", 0.0))

    if model == "agg":
        params = _agg_params(cfg)
        y0 = make_agg_initial(params.N, float(cfg["I0"]), float(cfg["pI0"]))
        traj = integrate(lambda t, y: agg_rhs(y, params), y0.to_array(),
                         0.0, t_end, config)
        export_trajectory(traj, AGG_LABELS, out)
        svg_series = [(lbl, TimeSeries(traj.times, traj.states[:, i]))
                      for i, lbl in enumerate(AGG_LABELS)]
    elif model == "net":
        params = _net_params(cfg)
        y0 = make_net_initial(params, int(cfg.get("seed_district", 1)),
                              float(cfg["seed_size"]))
        traj = integrate(lambda t, y: net_rhs(y, params), y0.to_array(),
                         0.0, t_end, config)
        export_trajectory(traj, net_labels(params.D), out)
        # Companion files: per-district infected plus their sum, and the
        # daily-sampled total for feeding straight into `psir fit`.
        D = params.D
        infected = traj.states[:, D:2 * D]
        total = infected.sum(axis=1)
        itraj = Trajectory(traj.times, np.column_stack([infected, total]))
        ilabels = [f"I_{i}" for i in range(1, D + 1)] + ["I_total"]
        base = Path(out).with_suffix("")
        export_trajectory(itraj, ilabels, f"{base}.infected.csv")
        days = _daily_grid(traj)
        daily_total = sample_at(itraj, days)[:, -1]
        export_trajectory(Trajectory(days, daily_total[:, None]),
                          ["total_infected"], f"{base}.total.csv")
        svg_series = [(lbl, TimeSeries(traj.times, col))
                      for lbl, col in zip(ilabels, itraj.states.T)]
    else:
        raise ValueError(f"model must be 'agg' or 'net', got {model!r}")

    if cfg.get("svg"):
        render_svg(svg_series, cfg["svg"])
    return EXIT_OK


def cmd_fit(args) -> int:
    series = load_case_series(args.data)
    cfg = _load_config(args.config, _FIT_FIELDS, args)
    window = int(cfg.get("window", 7))
    series = moving_average(series, window)
    series = normalize_cases(series, float(cfg.get("pop", 1.0)),
                             float(cfg.get("detect", 1.0)))

    free_field = cfg.get("free")
    if not free_field:
        raise ValueError("no free parameters: set --free or the config 'free' field")
    free = tuple(n.strip() for n in free_field.split(","))
    fixed = {"gamma": float(cfg["gamma"]), "I0": float(cfg["I0"]),
             "N": float(cfg.get("N", 1.0))}
    init = {}
    for name in FREE_PARAM_NAMES:
        value = cfg.get(name)
        if name in free:
            init[name] = float(value) if value is not None else DEFAULT_INIT[name]
        else:
            if value is None:
                raise ValueError(f"fixed parameter {name!r} needs a config value")
            fixed[name] = float(value)

    problem = FitProblem(observed=series,
                         observable=cfg.get("observable", DAILY_INCIDENCE),
                         free=free, fixed=fixed, init=init,
                         integrator=_integrator_config(cfg))
    result = fit(problem)

    p = result.params
    params = AggParams(beta=p["beta"], gamma=p["gamma"], rho=p["rho"],
                       alpha=p["alpha"], beta_R=p["beta_R"], N=p["N"])
    fitted = simulate_observable(params, p["pI0"], p["I0"], series.times,
                                 problem.observable, problem.integrator)

    out = Path(args.out)
    lines = [f"converged = {str(result.converged).lower()}",
             f"iterations = {result.iterations}",
             f"sse = {result.sse:.12g}",
             f"rmse = {result.rmse:.12g}",
             f"observable = {problem.observable}",
             f"free = {','.join(free)}"]
    lines += [f"{name} = {p[name]:.12g}"
              for name in ("rho", "beta_R", "alpha", "beta", "pI0", "gamma",
                           "I0", "N")]
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")

    base = out.with_suffix("")
    curve = Trajectory(series.times,
                       np.column_stack([series.values, fitted]))
    export_trajectory(curve, ["observed", "model"], f"{base}.curve.csv")
    render_svg([("observed", series),
                ("model", TimeSeries(series.times, fitted))], f"{base}.svg")
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_r0(args) -> int:
    cfg = _load_config(args.config, _SIM_FIELDS, args)
    model = cfg.get("model", "agg")
    if model == "agg":
        params = _agg_params(cfg)
        print(f"R0 = {r0_aggregated(params):.12g}")
        print(f"r_inf = {params.r_inf:.12g}")
    elif model == "net":
        print(f"R0 = {r0_network(_net_params(cfg)):.12g}")
    else:
        raise ValueError(f"model must be 'agg' or 'net', got {model!r}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import app
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def _add_override_flags(parser: argparse.ArgumentParser, fields: dict,
                        skip=()) -> None:
    for name, typ in fields.items():
        if name in skip:
            continue
        parser.add_argument(f"--{name}", type=typ, default=None,
                            help=f"override config field {name!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="psir",
        description="Aggregated spatial-SIR simulation and calibration toolkit")
    parser.add_argument("--version", action="version",
                        version=f"psir {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="integrate a model, write CSV/SVG")
    p_sim.add_argument("--config", required=True, help="flat JSON run config")
    p_sim.add_argument("--out", default=None, help="trajectory CSV path")
    p_sim.add_argument("--svg", default=None, help="optional SVG chart path")
    _add_override_flags(p_sim, _SIM_FIELDS, skip=("out", "svg"))
    p_sim.set_defaults(func=cmd_simulate)

    p_fit = sub.add_parser("fit", help="calibrate the aggregated model to data")
    p_fit.add_argument("--data", required=True, help="two-column case CSV")
    p_fit.add_argument("--config", required=True, help="flat JSON fit config")
    p_fit.add_argument("--free", default=None,
                       help="comma list of free parameters")
    p_fit.add_argument("--window", type=int, default=None,
                       help="moving-average width (odd, default 7)")
    p_fit.add_argument("--pop", type=float, default=None,
                       help="population divisor for normalization")
    p_fit.add_argument("--detect", type=float, default=None,
                       help="under-detection multiplier")
    p_fit.add_argument("--out", required=True, help="fit report path")
    _add_override_flags(p_fit, _FIT_FIELDS,
                        skip=("free", "window", "pop", "detect"))
    p_fit.set_defaults(func=cmd_fit)

    p_r0 = sub.add_parser("r0", help="print the basic reproduction number")
    p_r0.add_argument("--config", required=True, help="flat JSON run config")
    _add_override_flags(p_r0, _SIM_FIELDS, skip=("out", "svg"))
    p_r0.set_defaults(func=cmd_r0)

    p_serve = sub.add_parser("serve", help="run the HTTP API")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KeyError as exc:
        print(f"error: missing config field {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
