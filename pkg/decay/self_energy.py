"""
Semiclassical self-energy of the excited atom and the pole approximation built on it.

Energies are measured from hbar*omega_0 in units of hbar*Gamma_s: s = (Lambda/hbar - omega_0)/Gamma_s.
Along the axial orbit n(Lambda, 0) is linear in Lambda with slope T/(2 pi hbar), so the M-th
reflection term carries the phase M (phi0 + s * Gamma_s T). The Lamb shift is absorbed into
omega_0; only the cavity-induced shift survives in Re Sigma.
"""

from __future__ import annotations

import cmath
import logging
import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from core.errors import ValidityWarning
from decay.rates import bounce_kernels, rate_semiclassical
from modes.params import CavityParams

logger = logging.getLogger(__name__)

# pole approximation requires f << c/Gamma_s; enforced as gamma_s_T below this value
POLE_VALIDITY_LIMIT = 0.1


class Branch(str, Enum):
    RETARDED = "retarded"
    ADVANCED = "advanced"

    @property
    def sign(self) -> int:
        return 1 if self is Branch.RETARDED else -1

    def check_time(self, t_over_T: float) -> None:
        """retarded amplitudes live at t >= 0, advanced ones at t <= 0"""
        if self.sign * t_over_T < 0.0:
            raise ValueError(f"{self.value} branch needs sign-consistent time, got t/T={t_over_T}")


@dataclass(frozen=True)
class SelfEnergyEval:
    lambda_rel: float
    value: complex
    branch: Branch


def _reflection_sum(params: CavityParams, lambda_rel: float, sigma: int, weights: np.ndarray) -> complex:
    """sum_{j>=1} weights[j] K(j) exp(i sigma j (phi0 + s g))"""
    kernels = bounce_kernels(params)
    if len(kernels) <= 1:
        return 0j
    j = np.arange(1, len(kernels))
    phase = params.round_trip_phase + lambda_rel * params.gamma_s_T
    return complex(np.sum(weights[1:] * kernels[1:] * np.exp(1j * sigma * j * phase)))


def self_energy(
    params: CavityParams, lambda_rel: float, branch: Branch = Branch.RETARDED
) -> SelfEnergyEval:
    """Sigma^(+-)(s) = -+ (i/2) [1 + 2 sum_{M>=1} K(M) exp(+-i M (phi0 + s g))]"""
    sigma = branch.sign
    weights = np.ones(params.m_max + 1)
    bounce = _reflection_sum(params, lambda_rel, sigma, weights)
    value = -sigma * 0.5j * (1.0 + 2.0 * bounce)
    return SelfEnergyEval(lambda_rel=lambda_rel, value=value, branch=branch)


def self_energy_derivative(
    params: CavityParams, lambda_rel: float, branch: Branch = Branch.RETARDED
) -> complex:
    """d Sigma / ds = g sum_{M>=1} M K(M) exp(+-i M (phi0 + s g)), in units of hbar Gamma_s per hbar Gamma_s"""
    sigma = branch.sign
    weights = np.arange(params.m_max + 1, dtype=float)
    return params.gamma_s_T * _reflection_sum(params, lambda_rel, sigma, weights)


def slow_variation_parameter(params: CavityParams) -> float:
    """hbar Gamma_s |d Sigma / d Lambda| at resonance; the pole approximation needs this << 1"""
    return abs(self_energy_derivative(params, 0.0))


def resonant_shift(params: CavityParams) -> float:
    """cavity-induced level shift Re Sigma(hbar omega_0) in units of Gamma_s"""
    return self_energy(params, 0.0).value.real


def pole_amplitude(
    params: CavityParams, t_over_T: float, branch: Branch = Branch.RETARDED
) -> complex:
    """A_e(t) = exp(-i Delta tau) exp(-|tau| Gamma/2) with tau = Gamma_s t"""
    branch.check_time(t_over_T)
    if params.gamma_s_T >= POLE_VALIDITY_LIMIT:
        message = (
            f"pole approximation used with gamma_s_T={params.gamma_s_T} >= {POLE_VALIDITY_LIMIT}; "
            f"slow-variation parameter {slow_variation_parameter(params):.3g}"
        )
        logger.warning(message)
        warnings.warn(message, ValidityWarning, stacklevel=2)

    tau = params.tau(t_over_T)
    ratio = rate_semiclassical(params).ratio_total
    shift = resonant_shift(params)
    return cmath.exp(-1j * shift * tau) * math.exp(-0.5 * abs(tau) * ratio)
