"""
Direct numerical Laplace inversion of the atomic amplitude, used as the reference for the
photon-path series.

With s = (Lambda/hbar - omega_0)/Gamma_s, f0 = s + i sigma/2 (the free propagator) and
f = f0 + i sigma B(s), B(s) = sum_{j>=1} K(j) exp(i sigma j (phi0 + s g)):

    A(tau) = exp(-|tau|/2) + (1/2 pi) int exp(-i s tau) B / (f0 f) ds

The free part is inverted in closed form. The remainder is integrated adaptively on
[-S, S] for all requested times at once; for |s| > S it is replaced by B/s^2, whose
integral is known through the sine integral.

The cutoff S is not a fixed multiple of 1/(Gamma_s t). It is the smallest S whose remainder
bound, 1.1 b (1 + b) / (2 pi S^2) with b = sum |K(j)|, uses half the tolerance, and never
below MIN_CUTOFF. The bound holds uniformly in t, so one S serves every requested time.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import quad_vec
from scipy.special import sici

from core.errors import QuadratureFailure, TruncationError
from decay.rates import bounce_kernels
from decay.self_energy import Branch
from modes.params import CavityParams

logger = logging.getLogger(__name__)

ORACLE_TOL = 1e-5
CONTOUR_OFFSET = 1e-6
MIN_CUTOFF = 50.0
_TAIL_SAFETY = 1.1


@dataclass(frozen=True)
class OracleResult:
    values: np.ndarray
    error_estimate: float
    cutoff: float


def _remainder_bound(b_max: float, cutoff: float) -> float:
    """bound on the error of replacing B/(f0 f) by B/s^2 beyond |s| = cutoff"""
    return _TAIL_SAFETY * b_max * (1.0 + b_max) / (2.0 * math.pi * cutoff**2)


def _cosine_tail(a: np.ndarray, cutoff: float) -> np.ndarray:
    """int_S^inf cos(a s)/s^2 ds = cos(a S)/S - |a| (pi/2 - Si(|a| S))"""
    abs_a = np.abs(a)
    si, _ = sici(abs_a * cutoff)
    return np.cos(a * cutoff) / cutoff - abs_a * (0.5 * math.pi - si)


def contour_oracle_many(
    params: CavityParams,
    times: Sequence[float],
    branch: Branch = Branch.RETARDED,
    tol: float = ORACLE_TOL,
    cutoff: float | None = None,
) -> OracleResult:
    """amplitudes at every t/T in times, from one vector-valued quadrature"""
    t_over_T = np.asarray(times, dtype=float)
    for t in t_over_T:
        branch.check_time(float(t))
    sigma = branch.sign
    g = params.gamma_s_T
    tau = g * t_over_T
    free = np.exp(-0.5 * np.abs(tau)).astype(complex)

    kernels = bounce_kernels(params)[1:]
    if len(kernels) == 0 or g == 0.0:
        return OracleResult(values=free, error_estimate=0.0, cutoff=0.0)

    j = np.arange(1, len(kernels) + 1)
    phase = params.round_trip_phase
    b_max = float(np.sum(np.abs(kernels)))
    if cutoff is None:
        cutoff = max(MIN_CUTOFF, math.sqrt(_TAIL_SAFETY * b_max * (1.0 + b_max) / (2.0 * math.pi * 0.5 * tol)))
    tail_error = _remainder_bound(b_max, cutoff)
    if tail_error > tol:
        raise TruncationError(
            f"contour cutoff S={cutoff:g} leaves a tail of {tail_error:.2e} > tol={tol:g}",
            cutoff=cutoff,
            tail_bound=tail_error,
            tol=tol,
        )

    offset = 1j * sigma * CONTOUR_OFFSET
    n_times = len(tau)

    def integrand(s: float) -> np.ndarray:
        z = s + offset
        bounce = np.sum(kernels * np.exp(1j * sigma * j * (phase + z * g)))
        free_prop = z + 0.5j * sigma
        remainder = bounce / (free_prop * (free_prop + 1j * sigma * bounce))
        values = np.exp(-1j * z * tau) * remainder
        return np.concatenate([values.real, values.imag])

    result, abserr = quad_vec(integrand, -cutoff, cutoff, epsabs=0.1 * tol, epsrel=0.0, norm="max")
    if abserr > 0.5 * tol:
        raise QuadratureFailure(
            "contour quadrature did not reach tolerance", abserr=float(abserr), tol=tol, cutoff=cutoff
        )
    inner = (result[:n_times] + 1j * result[n_times:]) / (2.0 * math.pi)

    weights = kernels * np.exp(1j * sigma * j * phase)
    shifted = tau[:, None] - sigma * j[None, :] * g
    outer = (_cosine_tail(shifted, cutoff) @ weights) / math.pi

    values = free + inner + outer
    error = float(abserr) + tail_error
    logger.debug(f"contour oracle: {n_times} times, S={cutoff:.1f}, error {error:.2e}")
    return OracleResult(values=values, error_estimate=error, cutoff=cutoff)


def contour_oracle(
    params: CavityParams,
    t_over_T: float,
    branch: Branch = Branch.RETARDED,
    tol: float = ORACLE_TOL,
) -> complex:
    """atomic amplitude by numerical inversion of the resolvent"""
    return complex(contour_oracle_many(params, [t_over_T], branch, tol).values[0])
