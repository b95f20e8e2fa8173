"""
Command-line front end.

Every subcommand builds a ResultTable from a list of independent work items, evaluated on a
thread pool in sweep order, and writes it as CSV or JSON. The table header embeds the
canonical run configuration, which --config accepts back to reproduce the file.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from cli.output import ResultTable, emit, error_record, split_complex
from cli.selfcheck import CheckStatus, run_selfcheck
from config.settings import DEFAULT_M_MAX, DEFAULT_N_MAX, DEFAULT_TOL, get_thread_count
from core.errors import ParaqedError
from database.operations import (
    cached_mode_table,
    cached_quantize,
    init_database,
    record_run,
)
from decay.rates import alpha_cut, rate_exact, rate_linear_modesum, rate_semiclassical
from dynamics.contour import ORACLE_TOL
from dynamics.trace import TraceMethod, decay_trace
from modes.geometry import ParabolicPoint
from modes.params import CavityParams
from modes.quantization import eikonal_alpha, quantize
from photon.distribution import transverse_distribution
from photon.field import one_photon_amplitude, one_photon_amplitude_simplified

logger = logging.getLogger(__name__)

COMMANDS = ("quantize", "rate", "decay", "field", "tdist", "selfcheck")
RATE_METHODS = ("exact", "semiclassical", "linear")
DECAY_METHODS = {
    "path": TraceMethod.PATH_SERIES,
    "oracle": TraceMethod.CONTOUR_ORACLE,
    "pole": TraceMethod.POLE,
}
DEFAULT_METHODS = {"rate": "both", "decay": "path"}
DEFAULT_GRIDS = {"t": "0:5:501", "xi": "2:20:50", "eta": "0.5:2:50", "y": "0:10:201"}


@dataclass(frozen=True)
class SweepSpec:
    """start:stop:count, endpoints included"""

    start: float
    stop: float
    count: int

    def __post_init__(self):
        if not self.start < self.stop:
            raise ValueError(f"sweep needs start < stop, got {self.start}:{self.stop}")
        if self.count < 2:
            raise ValueError(f"sweep needs count >= 2, got {self.count}")

    @classmethod
    def parse(cls, text: str) -> SweepSpec:
        parts = str(text).split(":")
        if len(parts) != 3:
            raise ValueError(f"expected start:stop:count, got {text!r}")
        return cls(float(parts[0]), float(parts[1]), int(parts[2]))

    def values(self) -> list[float]:
        return [float(v) for v in np.linspace(self.start, self.stop, self.count)]

    def __str__(self) -> str:
        return f"{self.start!r}:{self.stop!r}:{self.count}"


def parse_values(text: str | Sequence, cast: Callable = float) -> tuple:
    """a single value, a comma list or a start:stop:count grid"""
    if isinstance(text, (list, tuple)):
        return tuple(cast(v) for v in text)
    text = str(text)
    if ":" in text:
        return tuple(cast(v) for v in SweepSpec.parse(text).values())
    return tuple(cast(v) for v in text.split(",") if v.strip())


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: CavityParams
    options: dict[str, Any] = field(default_factory=dict)
    sweep: SweepSpec | None = None
    output_path: Path | None = None
    format: str = "csv"
    threads: int | None = None
    use_cache: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise ValueError(f"unknown format {self.format!r}")
        if self.output_path is not None:
            parent = self.output_path.resolve().parent
            if not parent.is_dir() or not os.access(parent, os.W_OK):
                raise ValueError(f"output path {self.output_path} is not writable")

    def option(self, name: str):
        value = self.options.get(name)
        if value is None:
            value = DEFAULT_GRIDS.get(name) or DEFAULT_METHODS.get(self.command)
        return value

    def u_values(self) -> list[float]:
        """geometry points: the u sweep, else axial resonances from --n, else --u"""
        if self.sweep is not None:
            return self.sweep.values()
        if self.command != "quantize" and self.options.get("n") is not None:
            return [math.pi * (n + 0.5) for n in parse_values(self.options["n"], int)]
        return [self.params.u]

    def to_dict(self) -> dict:
        """canonical form, accepted back by --config"""
        data = {
            "command": self.command,
            "u": self.params.u,
            "u_sweep": str(self.sweep) if self.sweep else None,
            "gamma_s_T": self.options.get("gamma_s_T") or self.params.gamma_s_T,
            "m_max": self.params.m_max,
            "n_max": self.params.n_max,
            "tol": self.params.tol,
            "format": self.format,
        }
        for key in ("n", "t", "method", "xi", "eta", "y"):
            if self.options.get(key) is not None:
                data[key] = self.options[key]
        return data


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--u", type=float, help="geometry parameter u = k f")
    common.add_argument("--u-sweep", help="u grid start:stop:count (inclusive)")
    common.add_argument(
        "--n", help="mode labels for quantize; axial resonances u = pi(n + 1/2) elsewhere"
    )
    common.add_argument("--gamma-s-T", help="Gamma_s T, single value or comma list")
    common.add_argument("--t", help="times t/T: value, comma list or start:stop:count")
    common.add_argument("--m-max", type=int, help="reflection series truncation")
    common.add_argument("--n-max", type=int, help="hard cap on the exact mode sum")
    common.add_argument("--tol", type=float, help="absolute tolerance")
    common.add_argument("--method", help="comma list of methods")
    common.add_argument("--xi", help="field grid in xi/f, start:stop:count")
    common.add_argument("--eta", help="field grid in eta/f, start:stop:count")
    common.add_argument("--y", help="transverse grid in y = (rho/2f)^2, start:stop:count")
    common.add_argument("--threads", type=int, help="worker pool size (default PARAQED_THREADS or cpu count)")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    common.add_argument("--out", type=Path, help="output file (default stdout)")
    common.add_argument("--config", type=Path, help="JSON file; its keys override the flags")
    common.add_argument("--cache", action="store_true", default=None, help="use the sqlite mode cache")

    parser = argparse.ArgumentParser(
        prog="paraqed", description="Atom at the focus of a parabolic mirror"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    helps = {
        "quantize": "separation constants alpha_n/k against u",
        "rate": "spontaneous decay rate Gamma/Gamma_s against u",
        "decay": "atomic amplitude traces",
        "field": "one-photon amplitude on a (xi, eta) grid",
        "tdist": "transverse energy distribution h(y)",
        "selfcheck": "run the invariant suite",
    }
    for name in COMMANDS:
        subparsers.add_parser(name, parents=[common], help=helps[name])
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    options = {k: v for k, v in vars(args).items() if v is not None and k != "config"}
    if args.config is not None:
        overrides = json.loads(args.config.read_text(encoding="utf-8"))
        options.update({k: v for k, v in overrides.items() if v is not None})

    gamma_values = parse_values(options["gamma_s_T"]) if "gamma_s_T" in options else (0.0,)
    sweep = SweepSpec.parse(options["u_sweep"]) if options.get("u_sweep") else None
    params = CavityParams(
        u=float(options.get("u", math.pi / 2)),
        gamma_s_T=gamma_values[0],
        m_max=int(options.get("m_max", DEFAULT_M_MAX)),
        n_max=int(options.get("n_max", DEFAULT_N_MAX)),
        tol=float(options.get("tol", DEFAULT_TOL)),
    )
    out = options.get("out")
    return RunConfig(
        command=options["command"],
        params=params,
        options={k: options.get(k) for k in ("n", "gamma_s_T", "t", "method", "xi", "eta", "y")},
        sweep=sweep,
        output_path=Path(out) if out else None,
        format=options.get("format", "csv"),
        threads=options.get("threads"),
        use_cache=bool(options.get("cache", False)),
    )


def _pool_map(config: RunConfig, fn: Callable, items: Sequence) -> list:
    """evaluate fn over items on the worker pool; results keep the input order"""
    workers = get_thread_count(config.threads)
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _meta(config: RunConfig, **extra) -> dict:
    meta = {
        "config": config.to_dict(),
        "tolerances": {"tol": config.params.tol, "oracle_tol": ORACLE_TOL},
    }
    meta.update(extra)
    return meta


def _run_quantize(config: RunConfig) -> ResultTable:
    labels = parse_values(config.options.get("n") or "0", int)
    items = [(u, n) for u in config.u_values() for n in labels]

    def solve(item):
        u, n = item
        params = config.params.with_changes(u=u)
        mode = cached_quantize(params, n) if config.use_cache else quantize(params, n)
        return (u, n, mode.alpha_over_k, mode.norm, mode.residual, eikonal_alpha(params, n))

    table = ResultTable(
        command="quantize",
        columns=["u", "n", "alpha_over_k", "norm", "residual", "alpha_over_k_eikonal"],
        meta=_meta(config),
    )
    for row in _pool_map(config, solve, items):
        table.add_row(*row)
    return table


def _rate_methods(text: str) -> list[str]:
    requested = []
    for name in str(text).split(","):
        name = name.strip()
        if name == "both":
            requested += ["exact", "semiclassical"]
        elif name == "all":
            requested += list(RATE_METHODS)
        elif name in RATE_METHODS:
            requested.append(name)
        else:
            raise ValueError(f"unknown rate method {name!r}")
    return [m for m in RATE_METHODS if m in requested]


def _run_rate(config: RunConfig) -> ResultTable:
    methods = _rate_methods(config.option("method"))

    def evaluate(u):
        params = config.params.with_changes(u=u)
        row = [u]
        for method in methods:
            if method == "exact":
                modes = cached_mode_table(params, alpha_cut()) if config.use_cache else None
                row.append(rate_exact(params, modes).ratio_total)
            elif method == "semiclassical":
                row.append(rate_semiclassical(params).ratio_total)
            else:
                row.append(rate_linear_modesum(params).ratio_total)
        return row

    table = ResultTable(command="rate", columns=["u", *methods], meta=_meta(config))
    for row in _pool_map(config, evaluate, config.u_values()):
        table.add_row(*row)
    return table


def _run_decay(config: RunConfig) -> ResultTable:
    names = [m.strip() for m in str(config.option("method")).split(",")]
    unknown = [m for m in names if m not in DECAY_METHODS]
    if unknown:
        raise ValueError(f"unknown decay methods {unknown}")
    times = parse_values(config.option("t"))
    gammas = parse_values(config.options["gamma_s_T"]) if config.options.get("gamma_s_T") else (config.params.gamma_s_T,)
    items = [(u, g) for u in config.u_values() for g in gammas]

    def evaluate(item):
        u, g = item
        params = config.params.with_changes(u=u, gamma_s_T=g)
        traces = [decay_trace(params, times, DECAY_METHODS[m]) for m in names]
        rows = []
        for i, t in enumerate(times):
            row = [u, g, t]
            for trace in traces:
                row.extend(split_complex(trace.values[i]))
            rows.append(row)
        return rows

    columns = ["u", "gamma_s_T", "t_over_T"]
    for name in names:
        columns += [f"{name}_abs", f"{name}_phase"]
    table = ResultTable(command="decay", columns=columns, meta=_meta(config))
    for rows in _pool_map(config, evaluate, items):
        for row in rows:
            table.add_row(*row)
    return table


def _run_field(config: RunConfig) -> ResultTable:
    xi_grid = parse_values(config.option("xi"))
    eta_grid = parse_values(config.option("eta"))
    times = parse_values(config.options.get("t") or "50")
    items = [(u, t, xi, eta) for u in config.u_values() for t in times for xi in xi_grid for eta in eta_grid]

    def evaluate(item):
        u, t, xi, eta = item
        params = config.params.with_changes(u=u)
        point = ParabolicPoint(xi=xi * u, eta=eta * u)
        sample = one_photon_amplitude(params, point, t)
        simplified = one_photon_amplitude_simplified(params, point, t)
        return (u, t, xi, eta, *split_complex(sample.amplitude), *split_complex(simplified), sample.valid)

    table = ResultTable(
        command="field",
        columns=[
            "u",
            "t_over_T",
            "xi_over_f",
            "eta_over_f",
            "abs",
            "phase",
            "simplified_abs",
            "simplified_phase",
            "valid",
        ],
        meta=_meta(config),
    )
    for row in _pool_map(config, evaluate, items):
        table.add_row(*row)
    return table


def _run_tdist(config: RunConfig) -> ResultTable:
    y_grid = parse_values(config.option("y"))
    profiles = _pool_map(
        config,
        lambda u: transverse_distribution(config.params.with_changes(u=u), y_grid),
        config.u_values(),
    )
    integrals = {repr(u): p.integral for u, p in zip(config.u_values(), profiles)}
    table = ResultTable(
        command="tdist",
        columns=["u", "y", "h", "h_free"],
        meta=_meta(config, plane_integral=integrals),
    )
    for u, profile in zip(config.u_values(), profiles):
        for y, h, h0 in zip(profile.y_grid, profile.intensity, profile.free_shape):
            table.add_row(u, y, h, h0)
    return table


def _run_selfcheck(config: RunConfig) -> ResultTable:
    table = ResultTable(
        command="selfcheck",
        columns=["check", "status", "measured", "tolerance"],
        meta=_meta(config),
    )
    for result in run_selfcheck(m_max=config.params.m_max):
        table.add_row(result.name, result.status.value, result.measured, result.tolerance)
    return table


HANDLERS = {
    "quantize": _run_quantize,
    "rate": _run_rate,
    "decay": _run_decay,
    "field": _run_field,
    "tdist": _run_tdist,
    "selfcheck": _run_selfcheck,
}


def run(config: RunConfig, stream=None) -> int:
    """execute one configuration and emit its table; returns the exit status"""
    stream = stream or sys.stdout
    if config.use_cache:
        init_database()
    logger.info(f"running {config.command} with {config.to_dict()}")

    try:
        table = HANDLERS[config.command](config)
    except Exception as e:
        if config.use_cache:
            record_run(config.command, config.to_dict(), "failed", error=str(e))
        raise

    emit(table, config.format, config.output_path, stream)
    failed = config.command == "selfcheck" and any(
        row[1] == CheckStatus.FAIL.value for row in table.rows
    )
    if config.use_cache:
        record_run(config.command, config.to_dict(), "failed" if failed else "ok", rows=len(table.rows))
    return 1 if failed else 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
    except (ValueError, OSError) as e:
        logger.error(f"invalid arguments: {e}")
        print(error_record(e), file=sys.stderr)
        return 2

    try:
        return run(config)
    except (ParaqedError, ValueError) as e:
        logger.error(f"{config.command} failed: {e}")
        print(error_record(e), file=sys.stderr)
        return 1
    except Exception as e:
        logger.exception(f"{config.command} failed unexpectedly")
        print(error_record(e), file=sys.stderr)
        return 1
