"""Command-line entry point: ``squeezesieve {evolve,sieve,scan,coeffs}``.

Exit codes: 0 success, 2 configuration error, 3 physics validation error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from pydantic import ValidationError

from .config import SCAN_KEYS, ScenarioConfig
from .errors import PhysicsError
from .gaussian_core import PhysicalConstants, decompose, entropy
from .lindblad_model import (
    GeneratorCoefficients,
    coefficients_to_parameters,
    evolve_many,
    stationary_scaled,
)
from .output import render_csv, render_json
from .sieve import (
    optimal_shape_from_kernels,
    optimal_shape_numeric,
    optimal_squeezing_closed_form,
    sieve_kernels,
)

log = logging.getLogger("squeezesieve")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PHYSICS = 3

ORACLE_TOL = 1e-6
CHAIN_RTOL = 1e-12


class ConfigError(Exception):
    pass


def _set(data: dict, path: tuple[str, ...], value) -> None:
    node = data
    for key in path[:-1]:
        child = node.setdefault(key, {})
        if not isinstance(child, dict):
            raise ConfigError(f"{'.'.join(path[:-1])}: expected an object")
        node = child
    node[path[-1]] = value


def _apply_overrides(data: dict, args: argparse.Namespace) -> dict:
    env = {"lambda": args.lam, "d_qq": args.dqq, "d_pp": args.dpp, "d_pq": args.dpq}
    env = {k: v for k, v in env.items() if v is not None}
    if env:
        if "coefficients" in data:
            raise ConfigError(
                "params: --lambda/--dqq/--dpp/--dpq cannot override a 'coefficients' block"
            )
        for key, value in env.items():
            _set(data, ("params", key), value)
    if args.omega is not None:
        _set(data, ("constants", "omega"), args.omega)
    if args.tmax is not None or args.steps is not None:
        grid = data.get("time_grid") or {}
        if isinstance(grid, dict) and "times" in grid:
            raise ConfigError("time_grid: --tmax/--steps cannot override an explicit 'times' list")
    if args.tmax is not None:
        _set(data, ("time_grid", "t_max"), args.tmax)
    if args.steps is not None:
        _set(data, ("time_grid", "steps"), args.steps)
    if args.eval_time is not None:
        value = args.eval_time
        if value != "auto":
            try:
                value = float(value)
            except ValueError:
                raise ConfigError(f"sieve.eval_time: expected 'auto' or a number, got {value!r}")
        _set(data, ("sieve", "eval_time"), value)
    if args.out is not None:
        _set(data, ("output", "path"), args.out)
    if args.format is not None:
        _set(data, ("output", "format"), args.format)
    return data


def build_config(args: argparse.Namespace) -> ScenarioConfig:
    data: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"config: cannot read {args.config}: {exc.strerror}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON ({exc})")
        if not isinstance(data, dict):
            raise ConfigError("config: document must be a JSON object")
    data = _apply_overrides(data, args)
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        messages = []
        for err in exc.errors():
            loc = ".".join(str(p) for p in err["loc"]) or "config"
            messages.append(f"{loc}: {err['msg']}")
        raise ConfigError("; ".join(messages))


def _require_environment(cfg: ScenarioConfig) -> None:
    if cfg.params is None and cfg.coefficients is None:
        raise ConfigError("params: one of 'params' or 'coefficients' is required")


def _emit(cfg: ScenarioConfig, text: str) -> None:
    if cfg.output.path:
        with open(cfg.output.path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


EVOLVE_COLUMNS = [
    ("t", "time"),
    ("sigma_qq", "length^2"),
    ("sigma_pp", "momentum^2"),
    ("sigma_pq", "action"),
    ("det_sigma", "action^2"),
    ("area", "1"),
    ("entropy", "1"),
]


def cmd_evolve(cfg: ScenarioConfig) -> str:
    _require_environment(cfg)
    if cfg.time_grid is None:
        raise ConfigError("time_grid: required for 'evolve' (give t_max and steps, or times)")
    lp = cfg.lindblad_params()
    pc = lp.pc
    sigma0 = cfg.initial_covariance()
    times = cfg.times()
    mats = evolve_many(sigma0, times, lp)
    mw = pc.m_omega
    rows = []
    for t, mat in zip(times, mats):
        det = float(mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0])
        area = 2.0 * math.sqrt(det) / pc.hbar if det > 0 else float("nan")
        try:
            s = entropy(area)
        except PhysicsError:
            s = float("nan")
        rows.append([float(t), float(mat[0, 0]) / mw, float(mat[1, 1]) * mw,
                     float(mat[0, 1]), det, area, s])

    m_inf = stationary_scaled(lp)
    diagnostics = {
        "sigma_inf": {
            "sigma_qq": float(m_inf[0, 0]) / mw,
            "sigma_pp": float(m_inf[1, 1]) * mw,
            "sigma_pq": float(m_inf[0, 1]),
        },
        "positivity_margin": lp.positivity_margin,
    }
    if cfg.output.format == "json":
        results = {"columns": [name for name, _ in EVOLVE_COLUMNS], "rows": rows}
        return render_json(cfg.dump(), results, diagnostics)
    return render_csv(EVOLVE_COLUMNS, rows)


def sieve_report(cfg: ScenarioConfig) -> tuple[dict, dict]:
    _require_environment(cfg)
    lp = cfg.lindblad_params()
    sigma0 = cfg.initial_covariance()
    shape0 = decompose(sigma0, lp.pc)
    t_eval = cfg.eval_time(lp.lam)
    point = sieve_kernels(t_eval, lp)
    kern = optimal_shape_from_kernels(point)
    num = optimal_shape_numeric(point, cfg.grid_spec())
    closed = optimal_squeezing_closed_form(lp)

    diff = sigma0.scaled(lp.pc) - stationary_scaled(lp)
    dropped = math.exp(-4.0 * lp.lam * t_eval) * float(diff[0, 0] * diff[1, 1] - diff[0, 1] ** 2)
    results = {
        "eval_time": t_eval,
        "aleph_closed": closed,
        "aleph_from_kernels": kern.aleph_star,
        "aleph_numeric": num.aleph_star,
        "aleph_canonical": kern.aleph_canonical,
        "theta_star": kern.theta_star,
        "theta_canonical": kern.theta_canonical,
        "theta_numeric": num.theta_star,
        "objective_value": kern.objective_value * shape0.area,
        "initial_area": shape0.area,
        "dropped_term": dropped,
        "degenerate": bool(kern.degenerate),
        "kernels": {"t_pp": point.t_pp, "t_qq": point.t_qq, "t_pq": point.t_pq},
    }
    chain = abs(kern.aleph_star - closed) / closed
    oracle = max(abs(num.aleph_star - closed), abs(num.aleph_star - kern.aleph_star))
    diagnostics = {
        "chain_relative_residual": chain,
        "chain_tolerance": CHAIN_RTOL,
        "oracle_residual": oracle,
        "oracle_tolerance": ORACLE_TOL,
        "agree": bool(chain <= CHAIN_RTOL and oracle <= ORACLE_TOL),
    }
    if not diagnostics["agree"]:
        log.warning("aleph estimates disagree: chain=%.3g oracle=%.3g", chain, oracle)
    return results, diagnostics


SIEVE_COLUMNS = [
    ("eval_time", "time"),
    ("aleph_closed", "1"),
    ("aleph_from_kernels", "1"),
    ("aleph_numeric", "1"),
    ("aleph_canonical", "1"),
    ("theta_star", "rad"),
    ("theta_canonical", "rad"),
    ("objective_value", "action^2"),
    ("dropped_term", "action^2"),
    ("degenerate", "flag"),
]


def cmd_sieve(cfg: ScenarioConfig) -> str:
    results, diagnostics = sieve_report(cfg)
    if cfg.output.format == "json":
        return render_json(cfg.dump(), results, diagnostics)
    return render_csv(SIEVE_COLUMNS, [[results[name] for name, _ in SIEVE_COLUMNS]])


SCAN_COLUMNS = [
    ("lambda", "1/time"),
    ("d_qq", "length^2/time"),
    ("d_pp", "momentum^2/time"),
    ("d_pq", "action/time"),
    ("omega", "rad/time"),
    ("aleph_closed", "1"),
    ("aleph_numeric", "1"),
    ("residual", "1"),
]


def _scan_point(task):
    index, lp, eval_time, grid = task
    try:
        closed = optimal_squeezing_closed_form(lp)
        t = 10.0 / lp.lam if eval_time is None else eval_time
        num = optimal_shape_numeric(sieve_kernels(t, lp), grid)
    except PhysicsError as exc:
        return index, None, str(exc)
    return index, (closed, num.aleph_star), None


def cmd_scan(cfg: ScenarioConfig, jobs: int = 1) -> str:
    _require_environment(cfg)
    if cfg.scan is None or not cfg.scan.axes():
        raise ConfigError("scan: at least one parameter range is required")
    base = cfg.lindblad_params()
    axes = cfg.scan.axes()
    names = [k for k in SCAN_KEYS if k in axes]
    eval_time = None if cfg.sieve.eval_time == "auto" else cfg.eval_time(base.lam)
    grid = cfg.grid_spec()

    tasks, skipped, values_by_index = [], [], {}
    for index, combo in enumerate(itertools.product(*(axes[k] for k in names))):
        values = dict(zip(names, (float(v) for v in combo)))
        values_by_index[index] = values
        try:
            pc = base.pc if "omega" not in values else PhysicalConstants(
                m=base.pc.m, omega=values["omega"], hbar=base.pc.hbar)
            lp = replace(
                base,
                lam=values.get("lambda", base.lam),
                d_qq=values.get("d_qq", base.d_qq),
                d_pp=values.get("d_pp", base.d_pp),
                d_pq=values.get("d_pq", base.d_pq),
                pc=pc,
            )
        except PhysicsError as exc:
            log.info("skipping grid point %d %s: %s", index, values, exc)
            skipped.append({"index": index, "values": values, "reason": str(exc)})
            continue
        tasks.append((index, lp, eval_time, grid))

    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_scan_point, tasks, chunksize=8))
    else:
        outcomes = [_scan_point(t) for t in tasks]

    rows = []
    by_index = {task[0]: task[1] for task in tasks}
    for index, result, error in sorted(outcomes, key=lambda o: o[0]):
        if result is None:
            log.info("skipping grid point %d: %s", index, error)
            skipped.append({"index": index, "values": values_by_index[index], "reason": error})
            continue
        lp = by_index[index]
        closed, numeric = result
        rows.append([lp.lam, lp.d_qq, lp.d_pp, lp.d_pq, lp.pc.omega,
                     closed, numeric, abs(closed - numeric)])
    skipped.sort(key=lambda s: s["index"])
    if not rows:
        raise ConfigError("scan: no grid point satisfies the positivity constraint")

    max_residual = max(r[-1] for r in rows)
    summary = {"points": len(rows), "skipped": len(skipped), "max_residual": max_residual,
               "tolerance": ORACLE_TOL}
    if cfg.output.format == "json":
        results = {"columns": [n for n, _ in SCAN_COLUMNS], "rows": rows, "summary": summary}
        return render_json(cfg.dump(), results, {"skipped": skipped})
    footer = [f"points={len(rows)} skipped={len(skipped)} max_residual={max_residual:.17g}"]
    return render_csv(SCAN_COLUMNS, rows, footer)


COEFF_COLUMNS = [
    ("d_qq", "length^2/time"),
    ("d_pp", "momentum^2/time"),
    ("d_pq", "action/time"),
    ("lambda", "1/time"),
    ("positivity_margin", "action^2/time^2"),
]


def _coefficients(cfg: ScenarioConfig, args: argparse.Namespace) -> GeneratorCoefficients:
    flags = {k: getattr(args, k) for k in ("a1", "a2", "b1", "b2")}
    if any(v is not None for v in flags.values()):
        if cfg.coefficients is not None:
            raise ConfigError("coefficients: give them either in the config or as flags")
        if flags["a1"] is None or flags["b1"] is None:
            raise ConfigError("coefficients: --a1 and --b1 are required")
        return GeneratorCoefficients(*(complex(*v) if v is not None else 0j for v in flags.values()))
    if cfg.coefficients is None:
        raise ConfigError("coefficients: required for 'coeffs' (config block or --a1/--b1 flags)")
    return cfg.coefficients.to_coefficients()


def cmd_coeffs(cfg: ScenarioConfig, args: argparse.Namespace) -> str:
    coeffs = _coefficients(cfg, args)
    lp = coefficients_to_parameters(coeffs, cfg.physical_constants())
    values = [lp.d_qq, lp.d_pp, lp.d_pq, lp.lam, lp.positivity_margin]
    if cfg.output.format == "json":
        results = {name: v for (name, _), v in zip(COEFF_COLUMNS, values)}
        coeff_echo = {k: [getattr(coeffs, k).real, getattr(coeffs, k).imag]
                      for k in ("a1", "a2", "b1", "b2")}
        return render_json(cfg.dump(), results, {"coefficients": coeff_echo})
    return render_csv(COEFF_COLUMNS, [values])


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON scenario file")
    common.add_argument("--lambda", dest="lam", type=float, help="friction constant")
    common.add_argument("--omega", type=float)
    common.add_argument("--dqq", type=float)
    common.add_argument("--dpp", type=float)
    common.add_argument("--dpq", type=float)
    common.add_argument("--tmax", type=float)
    common.add_argument("--steps", type=int)
    common.add_argument("--eval-time", help="evaluation time or 'auto' (= 10/lambda)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--dump-config", action="store_true",
                        help="print the effective config as JSON and exit")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="squeezesieve",
        description="Gaussian damped-oscillator dynamics and predictability sieve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("evolve", parents=[common], help="covariance trajectory")
    sub.add_parser("sieve", parents=[common], help="optimal initial squeezing")
    scan = sub.add_parser("scan", parents=[common], help="sieve over a parameter grid")
    scan.add_argument("--jobs", type=int, default=1)
    coeffs = sub.add_parser("coeffs", parents=[common], help="Lindblad coefficients to D, lambda")
    for name in ("a1", "a2", "b1", "b2"):
        coeffs.add_argument(f"--{name}", nargs=2, type=float, metavar=("RE", "IM"))
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = build_config(args)
        if args.dump_config:
            sys.stdout.write(json.dumps(cfg.dump(), indent=2) + "\n")
            return EXIT_OK
        if args.command == "evolve":
            text = cmd_evolve(cfg)
        elif args.command == "sieve":
            text = cmd_sieve(cfg)
        elif args.command == "scan":
            text = cmd_scan(cfg, jobs=args.jobs)
        else:
            text = cmd_coeffs(cfg, args)
        _emit(cfg, text)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PhysicsError as exc:
        print(f"physics error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
