from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from core.errors import ParaqedError
from decay.self_energy import Branch, pole_amplitude
from dynamics.contour import ORACLE_TOL, contour_oracle_many
from dynamics.path_series import Combinatorics, path_series_eval
from modes.params import CavityParams

logger = logging.getLogger(__name__)


class TraceMethod(str, Enum):
    PATH_SERIES = "path_series"
    CONTOUR_ORACLE = "contour_oracle"
    POLE = "pole"


@dataclass(frozen=True)
class AmplitudeTrace:
    """sampled atomic amplitude A_e(t); times in units of T"""

    times: tuple[float, ...]
    values: tuple[complex, ...]
    method: TraceMethod
    params: CavityParams
    m_used: int
    branch: Branch = Branch.RETARDED

    def probabilities(self) -> np.ndarray:
        return np.abs(np.asarray(self.values)) ** 2

    def max_deviation(self, other: AmplitudeTrace) -> float:
        if self.times != other.times:
            raise ValueError("traces are sampled on different grids")
        return float(np.max(np.abs(np.asarray(self.values) - np.asarray(other.values))))


@dataclass(frozen=True)
class BounceRow:
    """
    One reflection window (M T, (M+1) T].

    largest_term is the biggest |M-th bounce term| sampled in the window; oracle_deviation is
    max |path series - contour oracle| there; displayed_deviation compares the two
    combinatorial rules for the path series.
    """

    m: int
    largest_term: float
    oracle_deviation: float
    displayed_deviation: float


def _check_grid(t_grid: Sequence[float], branch: Branch) -> list[float]:
    grid = [float(t) for t in t_grid]
    if not grid:
        raise ValueError("time grid is empty")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("time grid must be sorted")
    for t in grid:
        branch.check_time(t)
    return grid


def decay_trace(
    params: CavityParams,
    t_grid: Sequence[float],
    method: TraceMethod = TraceMethod.PATH_SERIES,
    branch: Branch = Branch.RETARDED,
    combinatorics: Combinatorics = Combinatorics.EXACT,
    oracle_tol: float = ORACLE_TOL,
) -> AmplitudeTrace:
    method = TraceMethod(method)
    grid = _check_grid(t_grid, branch)

    m_used = 0
    if method is TraceMethod.CONTOUR_ORACLE:
        values = [complex(v) for v in contour_oracle_many(params, grid, branch, oracle_tol).values]
    else:
        values = []
        for i, t in enumerate(grid):
            try:
                if method is TraceMethod.PATH_SERIES:
                    evaluation = path_series_eval(params, t, branch, combinatorics)
                    m_used = max(m_used, evaluation.m_used)
                    values.append(evaluation.value)
                else:
                    values.append(pole_amplitude(params, t, branch))
            except ParaqedError as e:
                raise e.with_context(index=i, t_over_T=t)

    logger.info(f"{method.value} trace at u={params.u}, gamma_s_T={params.gamma_s_T}: {len(grid)} points")
    return AmplitudeTrace(
        times=tuple(grid),
        values=tuple(values),
        method=method,
        params=params,
        m_used=m_used,
        branch=branch,
    )


def fit_decay_rate(trace: AmplitudeTrace, t_min: float, t_max: float) -> float:
    """Gamma/Gamma_s from a least-squares line through ln|A|^2 against Gamma_s t"""
    g = trace.params.gamma_s_T
    if g <= 0.0:
        raise ValueError("decay rate fit needs gamma_s_T > 0")
    times = np.abs(np.asarray(trace.times))
    mask = (times >= t_min) & (times <= t_max)
    if np.count_nonzero(mask) < 2:
        raise ValueError(f"fewer than two samples in [{t_min}, {t_max}]")
    slope, _ = np.polyfit(g * times[mask], np.log(trace.probabilities()[mask]), 1)
    return float(-slope)


def bounce_report(
    params: CavityParams,
    windows: int | None = None,
    samples: int = 20,
    branch: Branch = Branch.RETARDED,
    oracle_tol: float = ORACLE_TOL,
) -> list[BounceRow]:
    """per-reflection comparison of the path series against the oracle and the displayed rule"""
    windows = params.m_max if windows is None else min(windows, params.m_max)
    rows = []
    for big_m in range(1, windows + 1):
        grid = branch.sign * np.linspace(big_m, big_m + 1, samples + 1)[1:]
        if branch is Branch.ADVANCED:
            grid = grid[::-1]
        exact = [path_series_eval(params, t, branch) for t in grid]
        displayed = [path_series_eval(params, t, branch, Combinatorics.DISPLAYED).value for t in grid]
        oracle = contour_oracle_many(params, grid, branch, oracle_tol).values

        path_values = np.array([e.value for e in exact])
        rows.append(
            BounceRow(
                m=big_m,
                largest_term=max(abs(e.bounce_terms[big_m - 1]) for e in exact),
                oracle_deviation=float(np.max(np.abs(path_values - oracle))),
                displayed_deviation=float(np.max(np.abs(path_values - np.array(displayed)))),
            )
        )
        logger.debug(f"bounce window M={big_m}: {rows[-1]}")
    return rows
