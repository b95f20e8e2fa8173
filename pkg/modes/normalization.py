from __future__ import annotations

import logging
import math
import warnings
from typing import TYPE_CHECKING

from scipy.integrate import quad

from core.errors import QuadratureFailure, ValidityWarning
from modes.params import CavityParams
from specfun.coulomb import CoulombProfile
from specfun.integrals import stability_function

if TYPE_CHECKING:
    from modes.quantization import QuantizedMode

logger = logging.getLogger(__name__)

QUAD_LIMIT = 500


def normalization_integral(u: float, alpha_over_k: float, tol: float) -> tuple[float, float]:
    """
    k N = (4/pi) int_0^u F0(-a, s)^2 / s ds with a = alpha/k.

    Returns the value and the quadrature error estimate. Raises QuadratureFailure when the
    estimate exceeds tol relative to the value.
    """
    profile = CoulombProfile(-alpha_over_k, u, tol)

    def integrand(s: float) -> float:
        if s <= 0.0:
            return 0.0
        value, _ = profile(s)
        return float(value) ** 2 / s

    breaks = None if profile.onset is None else [profile.onset]
    value, abserr = quad(integrand, 0.0, u, points=breaks, epsabs=tol, epsrel=tol, limit=QUAD_LIMIT)
    value *= 4.0 / math.pi
    abserr *= 4.0 / math.pi
    if abserr > 10.0 * tol * max(1.0, abs(value)):
        raise QuadratureFailure(
            "normalization quadrature did not converge",
            u=u,
            alpha_over_k=alpha_over_k,
            value=value,
            abserr=abserr,
        )
    return value, abserr


def normalization_exact(params: CavityParams, mode: QuantizedMode) -> float:
    norm, _ = normalization_integral(params.u, mode.alpha_over_k, params.tol)
    return norm


def normalization_semiclassical(params: CavityParams, mode: QuantizedMode | None = None) -> float:
    """
    Semiclassical k N = 4 S(u) / pi, the same for every mode.

    Only meaningful for u >= pi/2; below that a ValidityWarning is issued.
    """
    if not params.semiclassical:
        message = f"semiclassical normalization used below the axial resonance (u={params.u} < pi/2)"
        logger.warning(message)
        warnings.warn(message, ValidityWarning, stacklevel=2)
    return 4.0 * stability_function(params.u).s / math.pi
