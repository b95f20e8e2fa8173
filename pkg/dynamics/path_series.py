"""
Photon-path expansion of the atomic amplitude.

Expanding 1/(Lambda - hbar omega_0 - Sigma) in powers of the reflection part of Sigma gives,
for |t| > M T, contributions from M mirror reflections shared among m rescatterings by the
atom. With P(w) = sum_{j>=1} K(j) w^j and tau' = Gamma_s (|t| - M T):

    A(t) = exp(-|tau|/2)
         + sum_M exp(+-i M phi0) exp(-tau'/2) sum_{m=1}^{M} (-tau')^m / m! [w^M] P(w)^m

The "displayed" combinatorics replaces [w^M] P^m by C(M-1, m-1) K(M-m+1) K(1)^(m-1), which
agrees with the exact coefficient for M <= 3.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from decay.rates import bounce_kernels
from decay.self_energy import Branch
from modes.params import CavityParams

logger = logging.getLogger(__name__)


class Combinatorics(str, Enum):
    EXACT = "exact"
    DISPLAYED = "displayed"


@dataclass(frozen=True)
class PathSeriesEval:
    value: complex
    m_used: int
    bounce_terms: tuple[complex, ...]


def _exact_coefficients(kernels: np.ndarray, m_max: int) -> np.ndarray:
    coefficients = np.zeros((m_max + 1, m_max + 1))
    polynomial = np.array(kernels, dtype=float)
    polynomial[0] = 0.0
    power = np.zeros(m_max + 1)
    power[0] = 1.0
    for m in range(1, m_max + 1):
        power = np.convolve(power, polynomial)[: m_max + 1]
        coefficients[:, m] = power
    return coefficients


def _displayed_coefficients(kernels: np.ndarray, m_max: int) -> np.ndarray:
    coefficients = np.zeros((m_max + 1, m_max + 1))
    k1 = kernels[1] if m_max >= 1 else 0.0
    for big_m in range(1, m_max + 1):
        for k in range(big_m):
            coefficients[big_m, k + 1] = math.comb(big_m - 1, k) * kernels[big_m - k] * k1**k
    return coefficients


@lru_cache(maxsize=256)
def path_coefficients(params: CavityParams, combinatorics: Combinatorics) -> np.ndarray:
    """table c[M, m] multiplying (-tau')^m / m! in the M-reflection term"""
    kernels = bounce_kernels(params)
    if combinatorics is Combinatorics.EXACT:
        table = _exact_coefficients(kernels, params.m_max)
    else:
        table = _displayed_coefficients(kernels, params.m_max)
    table.setflags(write=False)
    return table


def bounces_arrived(params: CavityParams, t_over_T: float) -> int:
    """number of reflection terms with |t| > M T, capped at m_max"""
    elapsed = abs(t_over_T)
    if elapsed <= 1.0:
        return 0
    return min(params.m_max, math.ceil(elapsed) - 1)


def path_series_eval(
    params: CavityParams,
    t_over_T: float,
    branch: Branch = Branch.RETARDED,
    combinatorics: Combinatorics = Combinatorics.EXACT,
) -> PathSeriesEval:
    branch.check_time(t_over_T)
    combinatorics = Combinatorics(combinatorics)
    sigma = branch.sign
    g = params.gamma_s_T
    free = math.exp(-0.5 * g * abs(t_over_T))

    m_used = bounces_arrived(params, t_over_T)
    if m_used == 0 or g == 0.0:
        return PathSeriesEval(value=complex(free), m_used=m_used, bounce_terms=())

    table = path_coefficients(params, combinatorics)
    phase = params.round_trip_phase
    terms = []
    for big_m in range(1, m_used + 1):
        delayed = g * (abs(t_over_T) - big_m)
        m = np.arange(1, big_m + 1)
        # (-tau')^m / m!, built by cumulative products
        powers = np.cumprod(-delayed / m)
        series = float(np.dot(powers, table[big_m, 1 : big_m + 1]))
        terms.append(np.exp(1j * sigma * big_m * phase) * math.exp(-0.5 * delayed) * series)

    value = free + complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))
    return PathSeriesEval(value=value, m_used=m_used, bounce_terms=tuple(complex(t) for t in terms))


def path_series_amplitude(
    params: CavityParams,
    t_over_T: float,
    branch: Branch = Branch.RETARDED,
    combinatorics: Combinatorics = Combinatorics.EXACT,
) -> complex:
    """atomic amplitude from the photon-path series; terms beyond m_max are dropped"""
    return path_series_eval(params, t_over_T, branch, combinatorics).value
