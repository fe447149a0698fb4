"""Command-line front end.

Subcommands: ``solve``, ``curve``, ``verify``, ``simulate``, ``limit``.
Settings come from an optional TOML file (``--config``) and are
overridden by long flags of the same name.

Exit codes: 0 ok, 1 configuration error, 2 sub-critical discount rate,
3 verification failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .errors import ParameterError, SubCriticalError, TelegraphError
from .limit import DEFAULT_LAMBDAS, limit_sequence
from .model import DOWN, UP, ModelParams, critical_rate
from .report import flatten, to_csv, to_json
from .simulate import StoppingRule, simulate_path
from .thresholds import Solution, boundary_residuals, solve
from .value import value_array
from .verify import run_battery

EXIT_OK, EXIT_CONFIG, EXIT_SUBCRITICAL, EXIT_VERIFY = 0, 1, 2, 3


class ConfigError(Exception):
    pass


# flat key -> (section in the TOML file or None for top level, converter)
KEYS = {
    "rho": ("params", float),
    "mu": ("params", float),
    "sigma": ("params", float),
    "lambda": ("params", float),
    "a": ("params", float),
    "y0": (None, float),
    "s0": (None, int),
    "n": ("mc", int),
    "seed": ("mc", int),
    "horizon": ("mc", str),
    "workers": ("mc", int),
    "y_min": ("curve", float),
    "y_max": ("curve", float),
    "n_points": ("curve", int),
    "format": ("output", str),
    "out": ("output", str),
    "sigma0": ("limit", float),
    "lambdas": ("limit", str),
}


@dataclass
class RunConfig:
    params: Optional[ModelParams]
    y0: Optional[float] = None
    s0: int = DOWN
    n: int = 1_000_000
    seed: int = 12345
    horizon: Optional[float] = None  # None: automatic per-path truncation
    workers: int = 1
    y_min: float = 0.0
    y_max: Optional[float] = None
    n_points: int = 101
    format: str = "json"
    out: str = "-"
    sigma0: Optional[float] = None
    lambdas: tuple[float, ...] = field(default=DEFAULT_LAMBDAS)
    raw: dict = field(default_factory=dict)

    @property
    def start_price(self) -> float:
        return self.y0 if self.y0 is not None else self.params.a


def _load_file(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    flat = {}
    for key, (section, _) in KEYS.items():
        table = doc if section is None else doc.get(section, {})
        if key == "out" and "path" in table and section == "output":
            flat[key] = table["path"]
        if key in table:
            flat[key] = table[key]
    return flat


def _parse_lambdas(value) -> tuple[float, ...]:
    if isinstance(value, (list, tuple)):
        items = value
    else:
        items = [v for v in str(value).split(",") if v.strip()]
    try:
        lams = tuple(float(v) for v in items)
    except ValueError as exc:
        raise ConfigError(f"bad lambda list {value!r}") from exc
    if not lams:
        raise ConfigError("empty lambda list")
    return lams


def build_config(args: argparse.Namespace, need_params: bool = True) -> RunConfig:
    flat = _load_file(args.config) if args.config else {}
    for key in KEYS:
        value = getattr(args, key, None)
        if value is not None:
            flat[key] = value

    converted = {}
    for key, value in flat.items():
        conv = KEYS[key][1]
        try:
            converted[key] = value if key == "lambdas" else conv(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key!r}: {value!r}") from exc

    params = None
    names = ("rho", "mu", "sigma", "lambda", "a")
    if need_params:
        missing = [k for k in names if k not in converted]
        if missing:
            raise ConfigError(f"missing parameters: {', '.join(missing)}")
        params = ModelParams(converted["rho"], converted["mu"], converted["sigma"], converted["lambda"],
                             converted["a"])

    cfg = RunConfig(params=params, raw=converted)
    for key in ("y0", "s0", "n", "seed", "workers", "y_min", "y_max", "n_points", "format", "out", "sigma0"):
        if key in converted:
            setattr(cfg, key, converted[key])
    horizon = converted.get("horizon", "auto")
    if horizon != "auto":
        try:
            cfg.horizon = float(horizon)
        except ValueError as exc:
            raise ConfigError(f"horizon must be 'auto' or a time, got {horizon!r}") from exc
    if "lambdas" in converted:
        cfg.lambdas = _parse_lambdas(converted["lambdas"])

    if cfg.s0 not in (DOWN, UP):
        raise ConfigError(f"s0 must be +1 or -1, got {cfg.s0!r}")
    if cfg.n < 1:
        raise ConfigError("n must be >= 1")
    if cfg.n_points < 2:
        raise ConfigError("n_points must be >= 2")
    if cfg.y_max is not None and not cfg.y_min < cfg.y_max:
        raise ConfigError("y_min must be < y_max")
    if cfg.y_min < 0:
        raise ConfigError("y_min must be >= 0")
    if cfg.y0 is not None and not cfg.y0 > 0:
        raise ConfigError("y0 must be > 0")
    if cfg.format not in ("json", "csv"):
        raise ConfigError(f"format must be json or csv, got {cfg.format!r}")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    return cfg


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out == "-":
        sys.stdout.write(text)
    else:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)


def solution_report(sol: Solution) -> dict:
    return {
        "regime": sol.regime.value,
        "params": sol.params.as_dict(),
        "critical_rate": critical_rate(sol.params),
        "closed_forms": sol.forms.as_dict(),
        "u_minus": sol.u_minus,
        "u_plus": sol.u_plus,
        "C_minus": sol.C_minus,
        "C_plus": sol.C_plus,
        "C": sol.C_cont,
        "residuals": boundary_residuals(sol),
    }


def cmd_solve(cfg: RunConfig) -> int:
    report = solution_report(solve(cfg.params))
    if cfg.format == "json":
        _emit(cfg, to_json(report))
    else:
        _emit(cfg, to_csv(["key", "value"], flatten(report)))
    return EXIT_OK


def curve_rows(sol: Solution, y_min: float, y_max: float, n_points: int):
    y = np.linspace(y_min, y_max, n_points)
    g_down = value_array(sol, y, DOWN)
    g_up = value_array(sol, y, UP)
    stop_down = y >= sol.u_minus
    stop_up = y >= sol.u_plus
    return [
        (float(y[i]), float(g_down[i]), float(g_up[i]), "stop" if stop_down[i] else "continue",
         "stop" if stop_up[i] else "continue")
        for i in range(n_points)
    ]


CURVE_COLUMNS = ["y", "g_down", "g_up", "region_down", "region_up"]


def cmd_curve(cfg: RunConfig) -> int:
    sol = solve(cfg.params)
    y_max = cfg.y_max
    if y_max is None:
        y_max = 1.5 * (sol.u_plus if sol.u_plus_finite else 2.0 * sol.u_minus)
    if not cfg.y_min < y_max:
        raise ConfigError("y_min must be < y_max")
    rows = curve_rows(sol, cfg.y_min, y_max, cfg.n_points)
    if cfg.format == "csv":
        comments = [f"regime={sol.regime.value}",
                    f"u_minus={format(sol.u_minus, '.17g')}",
                    f"u_plus={'inf' if not sol.u_plus_finite else format(sol.u_plus, '.17g')}"]
        _emit(cfg, to_csv(CURVE_COLUMNS, rows, comments))
    else:
        _emit(cfg, to_json({
            "regime": sol.regime.value,
            "u_minus": sol.u_minus,
            "u_plus": sol.u_plus,
            "columns": CURVE_COLUMNS,
            "rows": [list(r) for r in rows],
        }))
    return EXIT_OK


def cmd_verify(cfg: RunConfig, corrupt: bool = False) -> int:
    sol = solve(cfg.params)
    if corrupt:
        sol = dataclasses.replace(sol, A_minus=sol.A_minus * (1.0 + 1e-3))
    checks = run_battery(sol, cfg.start_price, cfg.n, cfg.seed, cfg.horizon, cfg.workers)
    passed = all(c.passed for c in checks)
    if cfg.format == "json":
        _emit(cfg, to_json({
            "regime": sol.regime.value,
            "params": sol.params.as_dict(),
            "y0": cfg.start_price,
            "n": cfg.n,
            "seed": cfg.seed,
            "checks": [c.as_dict() for c in checks],
            "passed": passed,
        }))
    else:
        rows = [(c.name, "pass" if c.passed else "fail", c.value, c.tolerance, c.detail) for c in checks]
        _emit(cfg, to_csv(["check", "status", "value", "tolerance", "detail"], rows,
                          [f"regime={sol.regime.value}", f"passed={str(passed).lower()}"]))
    return EXIT_OK if passed else EXIT_VERIFY


def jump_record(params: ModelParams, y0: float, s0: int, jump_times) -> list[tuple[float, int, float]]:
    """``(time, state after the switch, price at the switch)`` for each trend switch."""
    out = []
    t_prev, s, log_y = 0.0, s0, math.log(y0)
    for t in jump_times:
        log_y += params.speed(s) * (t - t_prev)
        s = -s
        out.append((t, s, math.exp(log_y)))
        t_prev = t
    return out


def cmd_simulate(cfg: RunConfig, path_index: int = 0) -> int:
    sol = solve(cfg.params)
    rule = StoppingRule.from_solution(sol)
    y0 = cfg.start_price
    path = simulate_path(cfg.params, y0, cfg.s0, rule, cfg.seed, path_index, cfg.horizon)
    record = jump_record(cfg.params, y0, cfg.s0, path.jump_times)
    if cfg.format == "json":
        _emit(cfg, to_json({
            "seed": cfg.seed,
            "path_index": path_index,
            "y0": y0,
            "s0": cfg.s0,
            "u_minus": rule.u_minus,
            "u_plus": rule.u_plus,
            "tau": path.tau,
            "y_tau": path.y_tau,
            "reward": path.reward,
            "n_jumps": path.n_jumps,
            "censored": path.censored,
            "t_end": path.t_end,
            "jumps": [{"t": t, "state": s, "price": y} for t, s, y in record],
        }))
    else:
        comments = [f"tau={'inf' if math.isinf(path.tau) else format(path.tau, '.17g')}",
                    f"y_tau={format(path.y_tau, '.17g')}", f"reward={format(path.reward, '.17g')}",
                    f"censored={str(path.censored).lower()}"]
        _emit(cfg, to_csv(["t", "state", "price"], record, comments))
    return EXIT_OK


def cmd_limit(cfg: RunConfig) -> int:
    raw = cfg.raw
    missing = [k for k in ("rho", "mu", "a", "sigma0") if k not in raw]
    if missing:
        raise ConfigError(f"limit needs: {', '.join(missing)}")
    table = limit_sequence(raw["rho"], raw["mu"], raw["sigma0"], raw["a"], cfg.lambdas)
    passed = table.decreasing() and table.final_relative_error() < 1e-2
    errs = table.u_errors()
    if cfg.format == "json":
        _emit(cfg, to_json({
            "Omega0": table.bs.Omega0,
            "u": table.bs.u,
            "rows": [
                {**dataclasses.asdict(r), "u_error": e, "value_error_down": r.value_error[0],
                 "value_error_up": r.value_error[1]}
                for r, e in zip(table.rows, errs)
            ],
            "decreasing": table.decreasing(),
            "final_relative_error": table.final_relative_error(),
            "passed": passed,
        }))
    else:
        header = ["lambda", "sigma", "u_minus", "u_minus_rewritten", "Omega_minus", "w_minus", "w_plus",
                  "u_error", "value_error_down", "value_error_up"]
        rows = [(r.lam, r.sigma, r.u_minus, r.u_minus_rewritten, r.Omega_minus, r.w_minus, r.w_plus, e,
                 *r.value_error) for r, e in zip(table.rows, errs)]
        _emit(cfg, to_csv(header, rows, [f"Omega0={format(table.bs.Omega0, '.17g')}",
                                         f"u={format(table.bs.u, '.17g')}", f"passed={str(passed).lower()}"]))
    return EXIT_OK if passed else EXIT_VERIFY


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML config file")
    for name in ("rho", "mu", "sigma", "lambda", "a", "y0"):
        p.add_argument(f"--{name}", dest=name, type=float)
    p.add_argument("--s0", type=int, choices=(DOWN, UP))
    p.add_argument("--n", type=int, help="Monte Carlo path count")
    p.add_argument("--seed", type=int)
    p.add_argument("--horizon", help="'auto' or a time at which unfinished paths are censored")
    p.add_argument("--workers", type=int, help="processes for Monte Carlo (results do not depend on it)")
    p.add_argument("--y-min", "--y_min", dest="y_min", type=float)
    p.add_argument("--y-max", "--y_max", dest="y_max", type=float)
    p.add_argument("--n-points", "--n_points", dest="n_points", type=int)
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--out", help="output path, '-' for stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="telegraph-stopping", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("solve", "free boundaries, constants and boundary residuals"),
        ("curve", "value function g(y, -1), g(y, +1) on a price grid"),
        ("verify", "invariant battery including Monte Carlo checks"),
        ("simulate", "one exact path under the optimal rule, with its jump record"),
        ("limit", "white-noise limit table against the diffusion solution"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name == "verify":
            p.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)
        if name == "simulate":
            p.add_argument("--path-index", type=int, default=0)
        if name == "limit":
            p.add_argument("--sigma0", type=float)
            p.add_argument("--lambdas", help="comma separated switching rates")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args, need_params=args.command != "limit")
        if args.command == "solve":
            return cmd_solve(cfg)
        if args.command == "curve":
            return cmd_curve(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, corrupt=args.corrupt)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.path_index)
        return cmd_limit(cfg)
    except SubCriticalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SUBCRITICAL
    except (ConfigError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TelegraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
