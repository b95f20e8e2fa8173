"""
Asymptotic transverse energy distribution of the emitted photon.

With y = (rho / 2f)^2 and v = 2 S(u), the shape function is

    h(y) = 6 y/(1+y)^4 + 12 sum_{M>=1} cos(M phi0) y e^{-2Mv} / ((1+y)^2 (1 + y e^{-2Mv})^2)

and the planar intensity is I = (Gamma_s/Gamma) h / (pi (2f)^2). Every term is integrated over
the plane in the variable z = ln y, where it becomes a product of logistic functions.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import expit

from core.errors import QuadratureFailure
from decay.rates import rate_semiclassical
from modes.params import CavityParams
from specfun.integrals import stability_function

logger = logging.getLogger(__name__)

# logistic tails are below 1e-17 this far outside the active region
_LOG_MARGIN = 40.0
# reflection terms with M v above this are exactly zero in double precision
_MAX_SHIFT = 350.0
_QUAD_TOL = 1e-13


@dataclass(frozen=True)
class TransverseProfile:
    """h on the requested grid; integral is the plane integral of I, which should be 1"""

    y_grid: tuple[float, ...]
    intensity: tuple[float, ...]
    free_shape: tuple[float, ...]
    integral: float
    m_max: int

    @property
    def correction(self) -> np.ndarray:
        """M >= 1 part of h"""
        return np.asarray(self.intensity) - np.asarray(self.free_shape)


def _shifts(params: CavityParams) -> np.ndarray:
    v = 2.0 * stability_function(params.u).s
    return v * np.arange(1, params.m_max + 1)


def free_shape(y) -> np.ndarray:
    """6 y / (1 + y)^4, the reflection-free emission pattern"""
    y = np.asarray(y, dtype=float)
    return 6.0 * y / (1.0 + y) ** 4


def shape_function(params: CavityParams, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if np.any(y < 0.0):
        raise ValueError("y must be >= 0")
    h = free_shape(y)
    phase = params.round_trip_phase
    for m, a in enumerate(_shifts(params), start=1):
        if a > _MAX_SHIFT:
            break
        damping = math.exp(-2.0 * a)
        h = h + 12.0 * math.cos(m * phase) * y * damping / ((1.0 + y) ** 2 * (1.0 + y * damping) ** 2)
    return h


def _log_quad(integrand, lower: float, upper: float, points: Sequence[float]) -> float:
    inner = sorted(p for p in set(points) if lower < p < upper)
    value, abserr = quad(integrand, lower, upper, points=inner or None, epsabs=_QUAD_TOL, epsrel=_QUAD_TOL, limit=200)
    if abserr > 1e-10:
        raise QuadratureFailure("transverse term quadrature did not converge", abserr=abserr)
    return value


def free_term_integral() -> float:
    """int_0^inf 6 y/(1+y)^4 dy, numerically; exactly 1"""
    return _log_quad(
        lambda z: 6.0 * (expit(z) * expit(-z)) ** 2, -_LOG_MARGIN, _LOG_MARGIN, [0.0]
    )


def reflection_term_integral(a: float) -> float:
    """int_0^inf y e^{-2a} / ((1+y)^2 (1 + y e^{-2a})^2) dy; closed form (a coth a - 1)/(2 sinh^2 a)"""
    if a > _MAX_SHIFT:
        return 0.0
    shift = 2.0 * a

    def integrand(z: float) -> float:
        return float(expit(z) * expit(-z) * expit(z - shift) * expit(shift - z))

    return _log_quad(integrand, -_LOG_MARGIN, shift + _LOG_MARGIN, [0.0, shift])


def shape_integral(params: CavityParams) -> float:
    """int_0^inf h(y) dy evaluated term by term"""
    phase = params.round_trip_phase
    terms = [free_term_integral()]
    for m, a in enumerate(_shifts(params), start=1):
        terms.append(12.0 * math.cos(m * phase) * reflection_term_integral(float(a)))
    return math.fsum(terms)


def plane_integral(params: CavityParams) -> float:
    """int d phi int rho d rho I = (Gamma_s / Gamma) int h dy, with Gamma truncated at the same m_max"""
    ratio = rate_semiclassical(params).ratio_total
    return shape_integral(params) / ratio


def transverse_distribution(params: CavityParams, y_grid: Sequence[float]) -> TransverseProfile:
    y = np.asarray(y_grid, dtype=float)
    h = shape_function(params, y)
    integral = plane_integral(params)
    logger.info(f"transverse distribution at u={params.u}: {len(y)} points, plane integral {integral:.12f}")
    return TransverseProfile(
        y_grid=tuple(float(v) for v in y),
        intensity=tuple(float(v) for v in h),
        free_shape=tuple(float(v) for v in free_shape(y)),
        integral=integral,
        m_max=params.m_max,
    )


def distribution_norm_check(params: CavityParams) -> float:
    """|plane integral - 1|; exercises the rate and the distribution together"""
    return abs(plane_integral(params) - 1.0)


def planar_intensity(params: CavityParams, rho, focal_length: float) -> np.ndarray:
    """I(rho) in units of 1/length^2 for an explicit focal length"""
    if focal_length <= 0.0:
        raise ValueError(f"focal length must be > 0, got {focal_length}")
    rho = np.asarray(rho, dtype=float)
    y = (rho / (2.0 * focal_length)) ** 2
    ratio = rate_semiclassical(params).ratio_total
    return shape_function(params, y) / (ratio * math.pi * (2.0 * focal_length) ** 2)
