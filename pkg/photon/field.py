"""
Asymptotic one-photon amplitude in the radiation zone.

Units: lengths in 1/k0 (so the focal length is f = u), times in T = 2f/c, and the field in
units of sqrt(3 Gamma_s hbar c / (4 eps0 pi^5 omega0)). Only the e_phi component exists.
The global phase exp(i E_g t / hbar) is dropped.
"""

from __future__ import annotations

import cmath
import logging
import math
import warnings
from dataclasses import dataclass

from core.errors import OutsideValidity
from decay.rates import rate_semiclassical
from decay.self_energy import POLE_VALIDITY_LIMIT, Branch
from modes.geometry import ParabolicPoint
from modes.params import CavityParams
from specfun.integrals import stability_function

logger = logging.getLogger(__name__)

# asymptotic mode functions are used once k0 xi or k0 eta exceeds this
RADIATION_ZONE = 10.0

_HALF_PI_SQ = 0.5 * math.pi**2
# exp(2 M S) beyond this makes a term vanish in double precision
_MAX_EXPONENT = 700.0


@dataclass(frozen=True)
class FieldSample:
    point: ParabolicPoint
    t_over_T: float
    amplitude: complex
    branch: Branch
    valid: bool = True


def _gated_wave(elapsed: float, delay: float, decay_per_length: float, sigma: int) -> complex:
    """exp(+-i (ct - d)) exp(-Gamma (ct - d) / 2c) behind the front ct = d, zero before it"""
    lag = elapsed - delay
    if lag <= 0.0:
        return 0j
    return cmath.exp(1j * sigma * lag) * math.exp(-0.5 * decay_per_length * lag)


def _check_validity(params: CavityParams, point: ParabolicPoint) -> bool:
    reasons = []
    if max(point.xi, point.eta) < RADIATION_ZONE:
        reasons.append(f"point (xi={point.xi:.3g}, eta={point.eta:.3g}) is not in the radiation zone")
    if params.gamma_s_T >= POLE_VALIDITY_LIMIT:
        reasons.append(f"gamma_s_T={params.gamma_s_T} is not small")
    if point.eta > 2.0 * params.u:
        reasons.append(f"eta={point.eta:.4g} lies behind the mirror eta=2f={2.0 * params.u:.4g}")
    if reasons:
        message = "one-photon amplitude outside validity: " + "; ".join(reasons)
        logger.debug(message)
        warnings.warn(message, OutsideValidity, stacklevel=3)
        return False
    return True


def _decay_per_length(params: CavityParams) -> float:
    # Gamma / c in units of k0: ratio * Gamma_s T / (2f)
    return rate_semiclassical(params).ratio_total * params.gamma_s_T / (2.0 * params.u)


def one_photon_amplitude(
    params: CavityParams,
    p: ParabolicPoint,
    t_over_T: float,
    branch: Branch = Branch.RETARDED,
) -> FieldSample:
    """
    Reflection sum of the photon wave emitted by the atom.

    The first bracket (M >= 0) holds waves leaving the focus after M round trips, arriving
    at r + M T c; the second bracket (M >= 1) holds waves reflected into the open side,
    arriving at z + M T c.
    """
    branch.check_time(t_over_T)
    valid = _check_validity(params, p)
    sigma = branch.sign
    f = params.u
    stability = stability_function(params.u).s
    gamma = _decay_per_length(params)
    elapsed = abs(t_over_T) * 2.0 * f
    period = 2.0 * f
    rho = p.rho
    phase = params.round_trip_phase

    total = 0j
    for big_m in range(params.m_max + 1):
        if elapsed <= min(p.r, p.z) + big_m * period:
            break
        path_phase = cmath.exp(-1j * sigma * big_m * phase)

        exponent = 2.0 * big_m * stability
        outgoing = 0.0
        if exponent < _MAX_EXPONENT and rho > 0.0:
            e_m = math.exp(exponent)
            outgoing = 2.0 * math.pi**2 * rho / (p.eta * e_m + p.xi / e_m) ** 2
        term = outgoing * _gated_wave(elapsed, p.r + big_m * period, gamma, sigma)

        if big_m >= 1:
            exponent = 2.0 * (big_m - 1) * stability
            reflected = 0.0
            if exponent < _MAX_EXPONENT and rho > 0.0:
                width = 2.0 * f * math.exp(exponent)
                c = rho / width
                reflected = 2.0 * math.pi**2 * rho / (width**2 * (1.0 + c * c) ** 2)
            term -= reflected * _gated_wave(elapsed, p.z + big_m * period, gamma, sigma)

        total += path_phase * term

    return FieldSample(point=p, t_over_T=t_over_T, amplitude=1j * sigma * total, branch=branch, valid=valid)


def one_photon_amplitude_simplified(
    params: CavityParams,
    p: ParabolicPoint,
    t_over_T: float,
    branch: Branch = Branch.RETARDED,
) -> complex:
    """large-S form: the direct wave rho/r^2 and the once-reflected collimated lobe"""
    branch.check_time(t_over_T)
    sigma = branch.sign
    f = params.u
    gamma = _decay_per_length(params)
    elapsed = abs(t_over_T) * 2.0 * f
    rho = p.rho

    direct = 0.0 if p.r == 0.0 else rho / p.r**2
    y = rho / (2.0 * f)
    lobe = (2.0 / f) * y / (1.0 + y * y) ** 2

    value = direct * _gated_wave(elapsed, p.r, gamma, sigma)
    value -= (
        cmath.exp(-1j * sigma * params.round_trip_phase)
        * lobe
        * _gated_wave(elapsed, p.z + 2.0 * f, gamma, sigma)
    )
    return 1j * sigma * _HALF_PI_SQ * value
