"""Command-line experiment harness emitting CSV or JSON tables.

Four subcommands cover node generation and the standard desk-scale
comparisons between node families:

``points``
    Node coordinates per method and node count.
``power-sweep``
    Grid maxima of the power function per method, ratio columns against the
    approximate Fekete nodes, and a scaled theoretical rate curve.
``error-sweep``
    Sup-grid interpolation errors for the benchmark targets, ratio columns,
    and the rate bound each error must stay below.
``bounds``
    Tabulated tail, Lebesgue, rate, and fill-distance bounds per node count.

Output is deterministic: identical configuration (including digits) yields
byte-identical files.  Hardware-precision values are printed with 17
significant digits, extended-precision values with the full working digit
count.  Exit status is 0 only if every row has status ``ok``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import gmpy2

from .basis import GaussianKernel, Interval
from .baselines import chebyshev_points, equispaced_points, fill_distance, p_greedy
from .bounds import (
    RATE_PREFACTOR,
    TargetFunction,
    fill_distance_bound,
    gaussian_rate_bound,
    generic_uniform_bound,
    log_fill_distance_bound,
    log_gaussian_rate_bound,
    log_generic_uniform_bound,
    rate_base,
)
from .basis import tail_sup_bound
from .fekete import EnergyProblem, solve_fekete
from .interpolation import (
    auto_digits,
    fit,
    kernel_columns,
    lebesgue_constant,
    max_power_on_grid,
)
from .numerics import make_context

__all__ = [
    "ExperimentConfig",
    "ReportTable",
    "cmd_points",
    "cmd_power_sweep",
    "cmd_error_sweep",
    "cmd_bounds",
    "main",
]

METHODS = ("fekete", "chebyshev", "pgreedy", "equispaced")
DIGITS_ENV_VAR = "FEKETE_DIGITS"

_POINTS_HEADER = ["method", "n", "eps", "digits", "index", "coordinate", "status"]
_POWER_HEADER = [
    "n",
    "eps",
    "digits",
    "max_power_fekete",
    "max_power_chebyshev",
    "max_power_pgreedy",
    "max_power_equispaced",
    "ratio_pgreedy_fekete",
    "ratio_chebyshev_fekete",
    "rate_scaled",
    "status",
]
_ERROR_HEADER = [
    "m",
    "n",
    "eps",
    "digits",
    "norm",
    "error_fekete",
    "error_chebyshev",
    "error_pgreedy",
    "error_equispaced",
    "ratio_pgreedy_fekete",
    "ratio_chebyshev_fekete",
    "rate_bound",
    "status",
]
_BOUNDS_HEADER = [
    "method",
    "n",
    "eps",
    "digits",
    "rate_constant",
    "tail_sup_bound",
    "log_tail_sup_bound",
    "lebesgue",
    "generic_bound",
    "log_generic_bound",
    "rate_bound",
    "log_rate_bound",
    "fill_distance_equispaced",
    "fill_distance_bound",
    "log_fill_distance_bound",
    "status",
]


@dataclass
class ExperimentConfig:
    """Validated parameters shared by all subcommands."""

    methods: tuple = ("fekete",)
    eps: float = 1.0
    n_min: int = 2
    n_max: int = 20
    interval: Interval = field(default_factory=lambda: Interval(-1.0, 1.0))
    grid_size: int = 1000
    digits: object = "auto"
    m_list: tuple = (5, 10, 15)
    fmt: str = "csv"
    out: str | None = None

    def __post_init__(self):
        self.methods = tuple(self.methods)
        for method in self.methods:
            if method not in METHODS:
                raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
        if not self.methods:
            raise ValueError("at least one method is required")
        if self.n_min < 1 or self.n_max < self.n_min:
            raise ValueError(f"empty n range [{self.n_min}, {self.n_max}]")
        if self.grid_size < max(2, self.n_max):
            raise ValueError("grid_size must be at least max(n_range)")
        if not float(self.eps) > 0:
            raise ValueError("eps must be positive")
        if self.digits != "auto" and (not isinstance(self.digits, int) or self.digits < 16):
            raise ValueError("digits must be 'auto' or an integer >= 16")
        if self.fmt not in ("csv", "json"):
            raise ValueError("format must be csv or json")
        self.m_list = tuple(int(m) for m in self.m_list)

    @property
    def ns(self) -> range:
        return range(self.n_min, self.n_max + 1)

    def resolve_digits(self) -> int:
        """Explicit digits, else the environment override, else the auto policy."""
        if isinstance(self.digits, int):
            return self.digits
        env = os.environ.get(DIGITS_ENV_VAR)
        if env:
            return int(env)
        return auto_digits(self.n_max)


@dataclass
class ReportTable:
    """Formatted output rows plus the overall success flag."""

    command: str
    header: list
    rows: list

    @property
    def all_ok(self) -> bool:
        status_at = self.header.index("status")
        return all(row[status_at] == "ok" for row in self.rows)

    def render_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.header)
        writer.writerows(self.rows)
        return buffer.getvalue()

    def render_json(self) -> str:
        records = [dict(zip(self.header, row)) for row in self.rows]
        return json.dumps({"command": self.command, "rows": records}, indent=2) + "\n"


def _fmt_float(value) -> str:
    return f"{float(value):.17g}"


def _fmt_mp(value, digits: int) -> str:
    return f"{value:.{digits}g}" if isinstance(value, gmpy2.mpfr) else _fmt_float(value)


def _status_of(errors: list) -> str:
    return "ok" if not errors else "; ".join(errors)


def _error_text(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}"


def _sets_by_n(method: str, config: ExperimentConfig, ctx):
    """Node sets per n for one method; exceptions stored in place of sets."""
    result = {}
    if method == "pgreedy":
        try:
            trace = p_greedy(
                config.n_max, GaussianKernel(config.eps), config.interval, config.grid_size, ctx
            )
        except Exception as exc:  # noqa: BLE001 - reported per row
            return {n: exc for n in config.ns}, None
        return {n: trace.point_set(n) for n in config.ns}, trace
    for n in config.ns:
        try:
            if method == "fekete":
                result[n] = solve_fekete(EnergyProblem(n, config.eps, config.interval)).points
            elif method == "chebyshev":
                result[n] = chebyshev_points(n, config.interval)
            elif method == "equispaced":
                result[n] = equispaced_points(n, config.interval)
        except Exception as exc:  # noqa: BLE001 - reported per row
            result[n] = exc
    return result, None


def cmd_points(config: ExperimentConfig) -> ReportTable:
    """One row per node: method, count, index and coordinate, ascending."""
    digits = config.resolve_digits()
    ctx = make_context(digits)
    eps_text = _fmt_float(config.eps)
    rows = []
    for method in config.methods:
        sets, _ = _sets_by_n(method, config, ctx)
        digits_text = str(digits) if method == "pgreedy" else ""
        for n in config.ns:
            outcome = sets[n]
            if isinstance(outcome, Exception):
                rows.append([method, str(n), eps_text, digits_text, "", "", _error_text(outcome)])
                continue
            for index, coordinate in enumerate(outcome.nodes):
                rows.append(
                    [method, str(n), eps_text, digits_text, str(index), _fmt_float(coordinate), "ok"]
                )
    return ReportTable("points", _POINTS_HEADER, rows)


def cmd_power_sweep(config: ExperimentConfig) -> ReportTable:
    """Grid maxima of the power function per method and node count."""
    digits = config.resolve_digits()
    ctx = make_context(digits)
    kernel = GaussianKernel(config.eps)
    grid = equispaced_points(config.grid_size, config.interval).nodes
    eps_text = _fmt_float(config.eps)

    maxima = {}
    failures = {}
    for method in config.methods:
        sets, trace = _sets_by_n(method, config, ctx)
        for n in config.ns:
            outcome = sets[n]
            if isinstance(outcome, Exception):
                failures[(method, n)] = _error_text(outcome)
                continue
            if method == "pgreedy":
                maxima[(method, n)] = trace.power_maxima[n - 1]
            else:
                try:
                    value, _ = max_power_on_grid(outcome, kernel, grid, ctx)
                    maxima[(method, n)] = value
                except Exception as exc:  # noqa: BLE001 - reported per row
                    failures[(method, n)] = _error_text(exc)

    scale = _rate_scale(config, maxima)
    rows = []
    for n in config.ns:
        cells = {"n": str(n), "eps": eps_text, "digits": str(digits)}
        errors = []
        for method in config.methods:
            key = (method, n)
            if key in failures:
                errors.append(f"{method}: {failures[key]}")
            elif key in maxima:
                cells[f"max_power_{method}"] = _fmt_mp(maxima[key], digits)
        for numerator in ("pgreedy", "chebyshev"):
            top, bottom = maxima.get((numerator, n)), maxima.get(("fekete", n))
            if top is not None and bottom is not None and bottom > 0:
                cells[f"ratio_{numerator}_fekete"] = _fmt_float(top / bottom)
        if scale is not None:
            cells["rate_scaled"] = _fmt_float(
                math.exp(scale + _log_rate_curve(n, config.eps, config.interval.sup_abs))
            )
        cells["status"] = _status_of(errors)
        rows.append([cells.get(name, "") for name in _POWER_HEADER])
    return ReportTable("power-sweep", _POWER_HEADER, rows)


def _log_rate_curve(n: int, eps: float, c_sup: float) -> float:
    return 0.75 * math.log(n) - n * (0.5 * math.log(n) - math.log(rate_base(eps, c_sup)))


def _rate_scale(config: ExperimentConfig, maxima: dict):
    """Log scale factor matching the rate curve to the first Fekete data point."""
    anchor_methods = ["fekete"] + [m for m in config.methods if m != "fekete"]
    for method in anchor_methods:
        for n in config.ns:
            value = maxima.get((method, n))
            if value is not None and value > 0:
                return float(gmpy2.log(value)) - _log_rate_curve(
                    n, config.eps, config.interval.sup_abs
                )
    return None


def cmd_error_sweep(config: ExperimentConfig) -> ReportTable:
    """Sup-grid interpolation errors for the benchmark targets per method."""
    digits = config.resolve_digits()
    ctx = make_context(digits)
    kernel = GaussianKernel(config.eps)
    grid = equispaced_points(config.grid_size, config.interval).nodes
    eps_text = _fmt_float(config.eps)
    c_sup = config.interval.sup_abs
    norm_tol = ctx.pow10(-ctx.digits / 2)

    sets = {}
    set_errors = {}
    for method in config.methods:
        by_n, _ = _sets_by_n(method, config, ctx)
        for n, outcome in by_n.items():
            if isinstance(outcome, Exception):
                set_errors[(method, n)] = _error_text(outcome)
            else:
                sets[(method, n)] = outcome

    rows = []
    for m in config.m_list:
        target = TargetFunction(m, config.eps)
        norm_value = target.norm(norm_tol, ctx)
        target_on_grid = [target.value(x, ctx) for x in grid]
        for n in config.ns:
            cells = {
                "m": str(m),
                "n": str(n),
                "eps": eps_text,
                "digits": str(digits),
                "norm": _fmt_mp(norm_value, digits),
            }
            errors = []
            sup_errors = {}
            for method in config.methods:
                key = (method, n)
                if key in set_errors:
                    errors.append(f"{method}: {set_errors[key]}")
                    continue
                try:
                    sup = _sup_interpolation_error(
                        sets[key], kernel, target, target_on_grid, grid, ctx
                    )
                    sup_errors[method] = sup
                    cells[f"error_{method}"] = _fmt_mp(sup, digits)
                except Exception as exc:  # noqa: BLE001 - reported per row
                    errors.append(f"{method}: {_error_text(exc)}")
            for numerator in ("pgreedy", "chebyshev"):
                top, bottom = sup_errors.get(numerator), sup_errors.get("fekete")
                if top is not None and bottom is not None and bottom > 0:
                    cells[f"ratio_{numerator}_fekete"] = _fmt_float(top / bottom)
            if n >= 2.0 * config.eps**2 * c_sup**2:
                cells["rate_bound"] = _fmt_float(
                    gaussian_rate_bound(n, config.eps, c_sup, float(norm_value))
                )
            cells["status"] = _status_of(errors)
            rows.append([cells.get(name, "") for name in _ERROR_HEADER])
    return ReportTable("error-sweep", _ERROR_HEADER, rows)


def _sup_interpolation_error(points, kernel, target, target_on_grid, grid, ctx):
    values = [target.value(x, ctx) for x in points.nodes]
    interpolant = fit(points, values, kernel, ctx)
    columns = kernel_columns(points, kernel, grid, ctx)
    with ctx.active():
        worst = ctx.mpf(0)
        for x, row, exact in zip(grid, columns, target_on_grid):
            worst = max(worst, abs(interpolant.evaluate(x, column=row) - exact))
        return worst


def cmd_bounds(config: ExperimentConfig) -> ReportTable:
    """Tail, Lebesgue, rate and fill-distance bound table (unit target norm)."""
    digits = config.resolve_digits()
    ctx = make_context(digits)
    grid = equispaced_points(config.grid_size, config.interval).nodes
    eps = config.eps
    c_sup = config.interval.sup_abs
    eps_text = _fmt_float(eps)
    method = config.methods[0]
    sets, _ = _sets_by_n(method, config, ctx)

    rows = []
    for n in config.ns:
        cells = {
            "method": method,
            "n": str(n),
            "eps": eps_text,
            "digits": str(digits),
            "rate_constant": _fmt_float(RATE_PREFACTOR),
        }
        errors = []
        outcome = sets[n]
        lebesgue = None
        if isinstance(outcome, Exception):
            errors.append(_error_text(outcome))
        else:
            lebesgue = lebesgue_constant(outcome, eps, grid)
            cells["lebesgue"] = _fmt_float(lebesgue)

        precondition_met = n >= 2.0 * eps**2 * c_sup**2
        if precondition_met:
            tail = tail_sup_bound(n, eps, c_sup)
            cells["tail_sup_bound"] = _fmt_float(tail)
            cells["log_tail_sup_bound"] = _fmt_float(math.log(tail))
            if lebesgue is not None:
                cells["generic_bound"] = _fmt_float(generic_uniform_bound(n, lebesgue, tail, 1.0))
                cells["log_generic_bound"] = _fmt_float(
                    log_generic_uniform_bound(n, lebesgue, tail, 1.0)
                )
            cells["rate_bound"] = _fmt_float(gaussian_rate_bound(n, eps, c_sup, 1.0))
            cells["log_rate_bound"] = _fmt_float(log_gaussian_rate_bound(n, eps, c_sup, 1.0))

        if n >= 2:
            h = fill_distance(equispaced_points(n, config.interval), config.interval)
            cells["fill_distance_equispaced"] = _fmt_float(h)
            if 0.0 < h < 1.0:
                cells["fill_distance_bound"] = _fmt_float(
                    fill_distance_bound(h, config.interval, 1.0)
                )
                cells["log_fill_distance_bound"] = _fmt_float(
                    log_fill_distance_bound(h, config.interval, 1.0)
                )

        if errors:
            cells["status"] = _status_of(errors)
        elif not precondition_met:
            cells["status"] = "precondition-unmet"
        else:
            cells["status"] = "ok"
        rows.append([cells.get(name, "") for name in _BOUNDS_HEADER])
    return ReportTable("bounds", _BOUNDS_HEADER, rows)


_COMMANDS = {
    "points": (cmd_points, _POINTS_HEADER),
    "power-sweep": (cmd_power_sweep, _POWER_HEADER),
    "error-sweep": (cmd_error_sweep, _ERROR_HEADER),
    "bounds": (cmd_bounds, _BOUNDS_HEADER),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaussfekete",
        description="Node-set experiments for Gaussian kernel interpolation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, header) in _COMMANDS.items():
        p = sub.add_parser(
            name,
            help=f"write the {name} table",
            description=f"Columns: {', '.join(header)}",
        )
        p.add_argument(
            "--method",
            default="fekete",
            help=f"comma-separated list from {{{','.join(METHODS)}}} (default: fekete)",
        )
        p.add_argument("--eps", type=float, default=1.0, help="kernel scale (default: 1)")
        p.add_argument("--n", type=int, default=None, help="shorthand for --n-min N --n-max N")
        p.add_argument("--n-min", type=int, default=2, help="smallest node count (default: 2)")
        p.add_argument("--n-max", type=int, default=20, help="largest node count (default: 20)")
        p.add_argument(
            "--interval",
            default="-1,1",
            help="domain as 'a,b'; use --interval=-1,1 syntax (default: -1,1)",
        )
        p.add_argument("--grid-size", type=int, default=1000, help="evaluation grid (default: 1000)")
        p.add_argument(
            "--digits",
            default="auto",
            help="working precision in decimal digits, or 'auto' "
            f"(overridable via ${DIGITS_ENV_VAR})",
        )
        if name == "error-sweep":
            p.add_argument(
                "--m-list", default="5,10,15", help="target exponents, comma list (default: 5,10,15)"
            )
        p.add_argument("--format", choices=("csv", "json"), default="csv", dest="fmt")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
    return parser


def _config_from_args(args) -> ExperimentConfig:
    try:
        a_text, b_text = args.interval.split(",")
        interval = Interval(float(a_text), float(b_text))
    except ValueError as exc:
        raise SystemExit(f"invalid --interval {args.interval!r}: {exc}") from exc
    digits = args.digits
    if digits != "auto":
        try:
            digits = int(digits)
        except ValueError as exc:
            raise SystemExit(f"invalid --digits {digits!r}") from exc
    n_min, n_max = args.n_min, args.n_max
    if args.n is not None:
        n_min = n_max = args.n
    m_list = (5, 10, 15)
    if getattr(args, "m_list", None):
        m_list = tuple(int(v) for v in args.m_list.split(","))
    try:
        return ExperimentConfig(
            methods=tuple(m.strip() for m in args.method.split(",") if m.strip()),
            eps=args.eps,
            n_min=n_min,
            n_max=n_max,
            interval=interval,
            grid_size=args.grid_size,
            digits=digits,
            m_list=m_list,
            fmt=args.fmt,
            out=args.out,
        )
    except ValueError as exc:
        raise SystemExit(str(exc)) from exc


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    config = _config_from_args(args)
    command, _ = _COMMANDS[args.command]
    table = command(config)
    text = table.render_csv() if config.fmt == "csv" else table.render_json()
    if config.out:
        with open(config.out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return 0 if table.all_ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
