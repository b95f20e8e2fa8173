"""
Spontaneous decay rate of the atom at the focus, in units of the free-space rate Gamma_s.

Three routes are provided:

- rate_exact: the mode sum over every quantized separation constant
- rate_semiclassical: the reflection series 1 + 2 sum_M K(M) cos(M phi0)
- rate_linear_modesum: the mode sum with linearised roots and semiclassical norms
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from core.errors import InvalidParameters
from modes.params import CavityParams
from modes.quantization import QuantizedMode, mode_table
from specfun.integrals import sinh_kernel_even, stability_function

logger = logging.getLogger(__name__)

COUPLING_PREFACTOR = 3.0 / math.pi**2

# modes with a squared coupling (x/sinh x)^2 below this floor are dropped from the sum
WEIGHT_FLOOR = 1e-12


class RateMethod(str, Enum):
    EXACT_SUM = "exact_sum"
    SEMICLASSICAL = "semiclassical"
    LINEAR_MODESUM = "linear_modesum"


@dataclass(frozen=True)
class RateBreakdown:
    """
    Gamma/Gamma_s with its decomposition.

    m_terms holds (M, 2 K(M) cos(M phi0)) for M >= 1 in the semiclassical route; mode_terms
    holds (n, contribution) for the two mode sums. truncation_bound bounds what was dropped.
    """

    ratio_total: float
    method: RateMethod
    truncation_bound: float
    m_terms: tuple[tuple[int, float], ...] = ()
    mode_terms: tuple[tuple[int, float], ...] = ()


def sinh_ratio_squared(x: float) -> float:
    """(x / sinh x)^2 with the x -> 0 limit and no overflow at large |x|"""
    ax = abs(x)
    if ax < 1e-8:
        return 1.0 - ax * ax / 3.0
    if ax > 350.0:
        return 4.0 * ax * ax * math.exp(-2.0 * ax)
    return (ax / math.sinh(ax)) ** 2


def log_sinh_ratio_squared(x: float) -> float:
    """ln (x / sinh x)^2 = ln 4 + 2 ln|x| - 2|x| - 2 ln(1 - exp(-2|x|)), finite for every x"""
    ax = abs(x)
    if ax < 1e-8:
        return math.log1p(-ax * ax / 3.0)
    return math.log(4.0) + 2.0 * math.log(ax) - 2.0 * ax - 2.0 * math.log(-math.expm1(-2.0 * ax))


def coupling_weight(x: float) -> float:
    """squared dipole coupling w(x) = (3/pi^2) x^2 / sinh^2 x; integrates to 1 over the real line"""
    return COUPLING_PREFACTOR * sinh_ratio_squared(x)


def alpha_cut(weight_floor: float = WEIGHT_FLOOR) -> float:
    """|alpha/k| beyond which (x/sinh x)^2 < weight_floor"""
    if not 0.0 < weight_floor < 1.0:
        raise ValueError(f"weight floor must lie in (0, 1), got {weight_floor}")
    log_floor = math.log(weight_floor)
    x = brentq(lambda v: log_sinh_ratio_squared(v) - log_floor, 1e-6, 800.0)
    return x / math.pi


def bounce_kernel(stability: float, j: int) -> float:
    """K(j) = (3/pi^2) int x^2/sinh^2 x exp(i 4 j S x / pi) dx; K(0) = 1"""
    return COUPLING_PREFACTOR * sinh_kernel_even(4.0 * j * stability)


def bounce_kernels(params: CavityParams, m_max: int | None = None) -> np.ndarray:
    """K(0), K(1), ..., K(m_max) at the cavity's stability value"""
    m_max = params.m_max if m_max is None else m_max
    stability = stability_function(params.u).s
    return np.array([bounce_kernel(stability, j) for j in range(m_max + 1)])


def _exact_tail_bound(x_cut: float) -> float:
    # modes beyond the cut, counted with the semiclassical density and norm:
    # (6/pi^2) int_{x_cut}^inf (x/sinh x)^2 dx
    tail, _ = quad(sinh_ratio_squared, x_cut, np.inf)
    return 6.0 / math.pi**2 * tail


def rate_exact(
    params: CavityParams,
    modes: Sequence[QuantizedMode] | None = None,
    weight_floor: float = WEIGHT_FLOOR,
) -> RateBreakdown:
    """
    Gamma/Gamma_s = (6/pi) sum_n (1/kN_n) (x_n / sinh x_n)^2 over the quantized modes.

    A precomputed mode table can be passed in (for example from the cache); otherwise every
    mode with (x/sinh x)^2 above weight_floor is solved.
    """
    cut = alpha_cut(weight_floor)
    if modes is None:
        modes = mode_table(params, cut)

    terms = []
    for mode in modes:
        if mode.norm <= 0.0:
            raise InvalidParameters(f"mode n={mode.n} has non-positive norm", n=mode.n, norm=mode.norm)
        terms.append((mode.n, 6.0 / math.pi * sinh_ratio_squared(mode.x) / mode.norm))

    total = math.fsum(c for _, c in terms)
    bound = _exact_tail_bound(math.pi * cut)
    logger.info(f"exact rate at u={params.u}: {total:.10f} from {len(terms)} modes")
    return RateBreakdown(
        ratio_total=total,
        method=RateMethod.EXACT_SUM,
        truncation_bound=bound,
        mode_terms=tuple(terms),
    )


def reflection_tail_bound(stability: float, m_max: int) -> float:
    """
    Upper bound on sum_{M > m_max} 2 K(M).

    K decreases in M, so the sum is bounded by 2 int_{m_max}^inf K(M) dM.
    """
    if stability <= 0.0:
        return math.inf
    tail, _ = quad(sinh_kernel_even, 4.0 * m_max * stability, np.inf)
    return 2.0 * COUPLING_PREFACTOR * tail / (4.0 * stability)


@lru_cache(maxsize=1024)
def rate_semiclassical(params: CavityParams) -> RateBreakdown:
    stability = stability_function(params.u).s
    phase = params.round_trip_phase
    m_terms = tuple(
        (m, 2.0 * bounce_kernel(stability, m) * math.cos(m * phase))
        for m in range(1, params.m_max + 1)
    )
    total = 1.0 + math.fsum(c for _, c in m_terms)
    bound = reflection_tail_bound(stability, params.m_max)
    if bound > 1e-3:
        logger.warning(
            f"reflection series at u={params.u} (S={stability:.4g}) converges slowly: "
            f"tail bound {bound:.3g} after m_max={params.m_max}"
        )
    logger.debug(f"semiclassical rate at u={params.u}: {total:.12f}")
    return RateBreakdown(
        ratio_total=total,
        method=RateMethod.SEMICLASSICAL,
        truncation_bound=bound,
        m_terms=m_terms,
    )


def rate_linear_modesum(
    params: CavityParams, physical: bool = True, weight_floor: float = WEIGHT_FLOOR
) -> RateBreakdown:
    """
    Mode sum with the roots of the linear eikonal and the semiclassical norm 4S/pi:
    (6/pi)(pi/(4S)) sum_n (x_n/sinh x_n)^2, x_n = pi^2 (n + 1/2 - u/pi) / (2S).

    physical=True keeps n >= 0 only; physical=False sums over every integer, which resums
    the reflection series with m_max -> infinity.
    """
    stability = stability_function(params.u).s
    x_cut = math.pi * alpha_cut(weight_floor)
    scale = math.pi**2 / (2.0 * stability)
    centre = params.u / math.pi - 0.5
    n_lo = math.ceil(centre - x_cut / scale)
    n_hi = math.floor(centre + x_cut / scale)
    if physical:
        n_lo = max(n_lo, 0)

    terms = []
    prefactor = 6.0 / math.pi * math.pi / (4.0 * stability)
    for n in range(n_lo, n_hi + 1):
        x = scale * (n - centre)
        terms.append((n, prefactor * sinh_ratio_squared(x)))

    total = math.fsum(c for _, c in terms)
    return RateBreakdown(
        ratio_total=total,
        method=RateMethod.LINEAR_MODESUM,
        truncation_bound=_exact_tail_bound(x_cut),
        mode_terms=tuple(terms),
    )
