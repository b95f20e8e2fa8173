from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.special import sici

from config.settings import DEFAULT_TOL
from specfun.coulomb import EULER_GAMMA

logger = logging.getLogger(__name__)

# above this u the stability function switches from quadrature to the Ci identity
STABILITY_QUADRATURE_LIMIT = 50.0

# below this |beta| the sinh kernels use their Taylor expansions
KERNEL_TAYLOR_LIMIT = 1e-2

# sinh(b)^2 overflows past this half-argument; use the exponential tail instead
_KERNEL_EXP_LIMIT = 350.0


@dataclass(frozen=True)
class StabilityValue:
    """stability function S(u) = int_0^u sin^2(y)/y dy"""

    u: float
    s: float


def _sin2_over_y(y: float) -> float:
    # sin(y)^2 / y written through sinc so y = 0 is regular
    return y * float(np.sinc(y / math.pi)) ** 2


@lru_cache(maxsize=4096)
def stability_function(u: float, tol: float = DEFAULT_TOL) -> StabilityValue:
    """stability function of the axial closed photon orbit"""
    if u < 0.0:
        raise ValueError(f"stability function needs u >= 0, got {u}")
    if u == 0.0:
        return StabilityValue(u=0.0, s=0.0)

    if u <= STABILITY_QUADRATURE_LIMIT:
        value, abserr = quad(_sin2_over_y, 0.0, u, epsabs=tol, epsrel=0.0, limit=400)
        if abserr > tol:
            logger.warning(f"stability quadrature at u={u} reached {abserr:.2e} > tol={tol:.1e}")
    else:
        # S(u) = Cin(2u)/2 = [gamma + ln(2u) - Ci(2u)]/2
        _, ci = sici(2.0 * u)
        value = 0.5 * (EULER_GAMMA + math.log(2.0 * u) - float(ci))
    return StabilityValue(u=u, s=float(value))


def stability_asymptotic(u: float) -> float:
    """large-u form 1/2 [ln(2u) + gamma - sin(2u)/(2u)], accurate to O(u^-2)"""
    if u <= 0.0:
        raise ValueError(f"asymptotic stability needs u > 0, got {u}")
    return 0.5 * (math.log(2.0 * u) + EULER_GAMMA - math.sin(2.0 * u) / (2.0 * u))


def sinh_kernel_even(beta: float) -> float:
    """
    Closed form of int x^2/sinh^2(x) exp(i beta x / pi) dx over the real line:
    pi^2 [(b) coth(b) - 1] / sinh^2(b) with b = beta/2.
    """
    b = abs(beta) / 2.0
    if b < KERNEL_TAYLOR_LIMIT / 2.0:
        b2 = b * b
        return math.pi**2 * (1.0 / 3.0 + b2 * (-2.0 / 15.0 + b2 * (2.0 / 63.0 - b2 * 4.0 / 675.0)))
    if b > _KERNEL_EXP_LIMIT:
        return math.pi**2 * 4.0 * (b - 1.0) * math.exp(-2.0 * b)
    sinh_b = math.sinh(b)
    return math.pi**2 * (b / math.tanh(b) - 1.0) / (sinh_b * sinh_b)


def sinh_kernel_odd(beta: float) -> float:
    """closed form of int x/sinh(x) exp(i beta x / pi) dx: pi^2 / (2 cosh^2(beta/2))"""
    b = abs(beta) / 2.0
    if b < KERNEL_TAYLOR_LIMIT / 2.0:
        b2 = b * b
        return math.pi**2 / 2.0 * (1.0 + b2 * (-1.0 + b2 * (2.0 / 3.0 - b2 * 17.0 / 45.0)))
    if b > _KERNEL_EXP_LIMIT:
        return 2.0 * math.pi**2 * math.exp(-2.0 * b)
    cosh_b = math.cosh(b)
    return math.pi**2 / (2.0 * cosh_b * cosh_b)
