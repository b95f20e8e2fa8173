"""
Invariant suite run by `paraqed selfcheck`.

Each check returns the worst measured deviation for its invariant; a check passes when that
value does not exceed its tolerance. A check that raises is recorded as a failure, so one
broken routine never hides the rest of the report.
"""

from __future__ import annotations

import io
import logging
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad

from decay.rates import (
    rate_exact,
    rate_semiclassical,
    reflection_tail_bound,
)
from decay.self_energy import Branch, self_energy
from dynamics.contour import contour_oracle_many
from dynamics.path_series import path_series_amplitude
from dynamics.trace import decay_trace, fit_decay_rate
from modes.geometry import ParabolicPoint, to_cartesian, to_parabolic
from modes.normalization import normalization_semiclassical
from modes.params import CavityParams
from modes.quantization import eikonal_alpha, quantize
from photon.distribution import (
    distribution_norm_check,
    free_term_integral,
    planar_intensity,
)
from photon.field import one_photon_amplitude, one_photon_amplitude_simplified
from specfun.coulomb import _asymptotic, _series, coulomb_f0, coulomb_normalization
from specfun.integrals import (
    KERNEL_TAYLOR_LIMIT,
    sinh_kernel_even,
    sinh_kernel_odd,
    stability_function,
)

logger = logging.getLogger(__name__)

# rate disagreement outside the u ~ 2 dip; see decay tests for the full sweep
RATE_BAND = 0.055
EIKONAL_WINDOW = 0.2


class CheckStatus(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    SKIP = "SKIP"


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: CheckStatus
    measured: float
    tolerance: float


class SkipCheck(Exception):
    """raised by a check that does not apply to the given truncation"""


def _params(u: float, **kwargs) -> CavityParams:
    # strong coupling points trip the RWA warning on purpose
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return CavityParams(u=u, **kwargs)


def _coulomb_overlap(m_max: int) -> float:
    worst = 0.0
    for mu in (-0.5, 0.2, 1.0):
        norm = coulomb_normalization(mu)
        for rho in (11.0, 11.5, 12.0):
            phi, dphi, _ = _series(mu, rho)
            value, derivative, _ = _asymptotic(mu, rho)
            worst = max(worst, abs(norm * phi - value), abs(norm * dphi - derivative))
    return worst


def _free_coulomb(m_max: int) -> float:
    worst = 0.0
    for rho in np.linspace(0.0, 100.0, 401):
        evaluation = coulomb_f0(0.0, float(rho))
        worst = max(worst, abs(evaluation.value - math.sin(rho)), abs(evaluation.derivative - math.cos(rho)))
    return worst


def _stability_monotone(m_max: int) -> float:
    values = [stability_function(float(u)).s for u in np.linspace(0.0, 60.0, 241)]
    return max(0.0, max(a - b for a, b in zip(values, values[1:])))


def _kernel_quadrature(m_max: int) -> float:
    worst = abs(sinh_kernel_even(0.0) - math.pi**2 / 3.0) + abs(sinh_kernel_odd(0.0) - math.pi**2 / 2.0)
    for beta in (0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0):
        omega = beta / math.pi
        even, _ = quad(
            lambda x: (x / math.sinh(x)) ** 2 if x else 1.0,
            0.0, 80.0, weight="cos", wvar=omega, epsabs=1e-14, limit=400,
        )
        odd, _ = quad(
            lambda x: x / math.sinh(x) if x else 1.0,
            0.0, 80.0, weight="cos", wvar=omega, epsabs=1e-14, limit=400,
        )
        worst = max(worst, abs(2.0 * even - sinh_kernel_even(beta)), abs(2.0 * odd - sinh_kernel_odd(beta)))
    return worst


def _kernel_parity(m_max: int) -> float:
    worst = 0.0
    for beta in (1e-5, KERNEL_TAYLOR_LIMIT, 3.0, 50.0):
        worst = max(
            worst,
            abs(sinh_kernel_even(-beta) - sinh_kernel_even(beta)),
            abs(sinh_kernel_odd(-beta) - sinh_kernel_odd(beta)),
        )
    return worst


def _axial_family(m_max: int) -> float:
    return max(abs(quantize(CavityParams.for_axial_mode(n), n).alpha_over_k) for n in range(11))


def _axial_normalization(m_max: int) -> float:
    worst = 0.0
    for u in (math.pi / 2, 5.0 * math.pi / 2):
        params = CavityParams(u=u)
        mode = quantize(params, int(round(params.axial_index)))
        expected = 4.0 * stability_function(u).s / math.pi
        worst = max(worst, abs(mode.norm - expected) / expected)
    return worst


def _eikonal_agreement(m_max: int) -> float:
    worst = 0.0
    compared = 0
    for u in np.linspace(0.5, 15.0, 30):
        if u < math.pi / 2:
            continue
        params = CavityParams(u=float(u))
        for n in (0, 1):
            if abs(eikonal_alpha(params, n)) > 1.2:
                continue
            mode = quantize(params, n)
            if abs(mode.alpha_over_k) <= EIKONAL_WINDOW:
                worst = max(worst, abs(mode.alpha_over_k - eikonal_alpha(params, n)))
                compared += 1
    if compared == 0:
        raise SkipCheck
    return worst


def _normalization_agreement(m_max: int) -> float:
    worst = 0.0
    for u in (10.0, 20.0):
        params = CavityParams(u=u)
        mode = quantize(params, int(round(params.axial_index)))
        semiclassical = normalization_semiclassical(params, mode)
        worst = max(worst, abs(mode.norm - semiclassical) / semiclassical)
    return worst


def _boundary_residual(m_max: int) -> float:
    params = CavityParams(u=6.0)
    return max(quantize(params, n).residual for n in range(5))


def _coordinate_round_trip(m_max: int) -> float:
    rng = np.random.default_rng(2024)
    worst = 0.0
    for x, y, z in rng.uniform(-50.0, 50.0, size=(1000, 3)):
        back = to_cartesian(to_parabolic(x, y, z))
        worst = max(worst, max(abs(a - b) / max(1.0, abs(b)) for a, b in zip(back, (x, y, z))))
    return worst


def _rate_agreement(m_max: int) -> float:
    if m_max < 10:
        raise SkipCheck
    worst = 0.0
    for u in np.linspace(math.pi / 2, 20.0, 40)[[10, 22, 39]]:
        params = CavityParams(u=float(u), m_max=m_max)
        semiclassical = rate_semiclassical(params).ratio_total
        worst = max(worst, abs(rate_exact(params).ratio_total - semiclassical) / semiclassical)
    return worst


def _reflection_free_rate(m_max: int) -> float:
    return max(abs(rate_semiclassical(CavityParams(u=u, m_max=0)).ratio_total - 1.0) for u in (0.5, 5.0))


def _resonance_identity(m_max: int) -> float:
    worst = 0.0
    for u in (math.pi / 2, 5.0, 12.0):
        params = CavityParams(u=u, m_max=m_max)
        sigma = self_energy(params, 0.0, Branch.RETARDED).value
        worst = max(worst, abs(-2.0 * sigma.imag - rate_semiclassical(params).ratio_total))
    return worst


def _truncation_bound(m_max: int) -> float:
    # measured excess of the doubled-truncation difference over the reported bound
    worst = 0.0
    for u in (math.pi / 2, 5.0):
        params = CavityParams(u=u, m_max=m_max)
        doubled = params.with_changes(m_max=2 * m_max)
        difference = abs(rate_semiclassical(doubled).ratio_total - rate_semiclassical(params).ratio_total)
        bound = reflection_tail_bound(stability_function(u).s, m_max)
        worst = max(worst, difference - bound)
    return max(worst, 0.0)


def _small_mirror(m_max: int) -> float:
    return rate_exact(CavityParams(u=0.05)).ratio_total


def _oracle_equivalence(m_max: int) -> float:
    if m_max == 0:
        raise SkipCheck
    times = np.linspace(0.0, 5.0, 51)
    worst = 0.0
    for g in (0.01, 5.0):
        params = _params(math.pi / 2, gamma_s_T=g, m_max=m_max)
        oracle = contour_oracle_many(params, times).values
        path = np.array([path_series_amplitude(params, t) for t in times])
        worst = max(worst, float(np.max(np.abs(path - oracle))))
    return worst


def _no_mirror(m_max: int) -> float:
    params = _params(math.pi / 2, gamma_s_T=5.0, m_max=0)
    return max(
        abs(abs(path_series_amplitude(params, t)) - math.exp(-2.5 * t)) for t in np.linspace(0.0, 5.0, 26)
    )


def _time_reversal(m_max: int) -> float:
    if m_max == 0:
        raise SkipCheck
    worst = 0.0
    for g in (0.01, 5.0):
        params = _params(math.pi / 2, gamma_s_T=g, m_max=m_max)
        for t in np.linspace(0.0, 5.0, 51):
            retarded = path_series_amplitude(params, t, Branch.RETARDED)
            advanced = path_series_amplitude(params, -t, Branch.ADVANCED)
            worst = max(worst, abs(abs(retarded) - abs(advanced)))
    return worst


def _causality(m_max: int) -> float:
    if m_max == 0:
        raise SkipCheck
    short = _params(math.pi / 2, gamma_s_T=5.0, m_max=min(m_max, 3))
    long = short.with_changes(m_max=max(m_max, 10))
    horizon = short.m_max + 0.99
    return max(
        abs(path_series_amplitude(short, t) - path_series_amplitude(long, t))
        for t in np.linspace(0.0, horizon, 40)
    )


def _fitted_rate(m_max: int) -> float:
    params = _params(math.pi / 2, gamma_s_T=0.01, m_max=20)
    trace = decay_trace(params, np.linspace(1.0, 100.0, 199))
    expected = rate_semiclassical(params).ratio_total
    return abs(fit_decay_rate(trace, 1.0, 100.0) - expected) / expected


def _distribution_norm(m_max: int) -> float:
    return max(distribution_norm_check(CavityParams(u=u, m_max=m_max)) for u in (math.pi / 2, 8.0))


def _free_term(m_max: int) -> float:
    return abs(free_term_integral() - 1.0)


def _resonant_phase(m_max: int) -> float:
    worst = 0.0
    for n in range(4):
        phase = CavityParams.for_axial_mode(n).round_trip_phase
        worst = max(worst, max(abs(abs(math.cos(big_m * phase)) - 1.0) for big_m in range(1, 21)))
    return worst


def _large_stability_reduction(m_max: int) -> float:
    params = CavityParams(u=200.0, gamma_s_T=0.01)
    f = params.u
    full, simplified = [], []
    for xi in np.linspace(2.0 * f, 20.0 * f, 10):
        for eta in np.linspace(0.5 * f, 2.0 * f, 10):
            point = ParabolicPoint(xi=float(xi), eta=float(eta))
            full.append(one_photon_amplitude(params, point, 50.0).amplitude)
            simplified.append(one_photon_amplitude_simplified(params, point, 50.0))
    full, simplified = np.array(full), np.array(simplified)
    return float(np.max(np.abs(full - simplified)) / np.max(np.abs(simplified)))


def _focal_length_independence(m_max: int) -> float:
    params = CavityParams.for_axial_mode(1, m_max=m_max)
    ratio = rate_semiclassical(params).ratio_total
    y = np.linspace(0.0, 10.0, 41)
    shapes = []
    for f in (1.0, 7.3):
        rho = 2.0 * f * np.sqrt(y)
        shapes.append(planar_intensity(params, rho, f) * ratio * math.pi * (2.0 * f) ** 2)
    return float(np.max(np.abs(shapes[0] - shapes[1])))


def _deterministic_output(m_max: int) -> float:
    # runner imports this module
    from cli.runner import RunConfig, run

    config = RunConfig(command="rate", params=CavityParams(u=5.0, m_max=m_max))
    outputs = []
    for _ in range(2):
        stream = io.StringIO()
        run(config, stream)
        outputs.append(stream.getvalue())
    return 0.0 if outputs[0] == outputs[1] else 1.0


CHECKS: list[tuple[str, Callable[[int], float], float]] = [
    ("coulomb series and asymptotic expansions overlap", _coulomb_overlap, 1e-6),
    ("zero-charge coulomb function is the sine", _free_coulomb, 1e-12),
    ("stability function never decreases", _stability_monotone, 0.0),
    ("sinh kernels against quadrature", _kernel_quadrature, 1e-10),
    ("sinh kernels are even", _kernel_parity, 0.0),
    ("axial modes have alpha = 0", _axial_family, 1e-8),
    ("axial normalization equals 4S/pi", _axial_normalization, 1e-8),
    ("linear eikonal tracks the exact roots", _eikonal_agreement, 0.05),
    ("exact and semiclassical normalization agree", _normalization_agreement, 0.03),
    ("quantized modes satisfy the mirror condition", _boundary_residual, 1e-6),
    ("parabolic coordinates round trip", _coordinate_round_trip, 1e-12),
    ("exact and semiclassical rates agree", _rate_agreement, RATE_BAND),
    ("reflection-free rate is the free-space rate", _reflection_free_rate, 1e-15),
    ("resonant self-energy gives the rate", _resonance_identity, 1e-8),
    ("reflection tail bound covers the truncation", _truncation_bound, 0.0),
    ("small mirror suppresses the rate", _small_mirror, 1e-3),
    ("path series matches the contour oracle", _oracle_equivalence, 1e-3),
    ("reflection-free amplitude is the free exponential", _no_mirror, 1e-15),
    ("advanced and retarded moduli agree", _time_reversal, 1e-10),
    ("unarrived reflections do not contribute", _causality, 1e-14),
    ("weak coupling decays at the modified rate", _fitted_rate, 0.02),
    ("transverse distribution carries one photon", _distribution_norm, 1e-6),
    ("free emission pattern carries one photon", _free_term, 1e-10),
    ("resonant round trips are in phase", _resonant_phase, 1e-12),
    ("large mirrors reduce to the two-term field", _large_stability_reduction, 1e-3),
    ("emission shape is independent of the focal length", _focal_length_independence, 1e-12),
    ("repeated runs give identical output", _deterministic_output, 0.0),
]


def run_selfcheck(m_max: int = 20, only: Sequence[str] | None = None) -> list[CheckResult]:
    """run every check, or those named in `only`, at the given reflection truncation"""
    selected = CHECKS
    if only is not None:
        unknown = set(only) - {name for name, _, _ in CHECKS}
        if unknown:
            raise ValueError(f"unknown checks: {sorted(unknown)}")
        selected = [check for check in CHECKS if check[0] in only]

    results = []
    for name, check, tolerance in selected:
        try:
            measured = check(m_max)
        except SkipCheck:
            results.append(CheckResult(name, CheckStatus.SKIP, math.nan, tolerance))
            continue
        except Exception as e:
            logger.error(f"check '{name}' raised {type(e).__name__}: {e}")
            results.append(CheckResult(name, CheckStatus.FAIL, math.nan, tolerance))
            continue
        status = CheckStatus.PASS if measured <= tolerance else CheckStatus.FAIL
        if status is CheckStatus.FAIL:
            logger.warning(f"check '{name}' failed: {measured:.3e} > {tolerance:.1e}")
        results.append(CheckResult(name, status, float(measured), tolerance))
    passed = sum(r.status is CheckStatus.PASS for r in results)
    logger.info(f"selfcheck: {passed}/{len(results)} passed")
    return results
