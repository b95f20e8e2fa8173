"""
Regular L=0 Coulomb wave function F0(mu, rho) and its rho-derivative.

F0 solves F'' + (1 - 2 mu / rho) F = 0 with F(0) = 0 and F ~ sin(Phi(mu, rho)) for large rho.
Three regimes are used:

- series: ascending power series, valid while cancellation stays below tolerance
- asymptotic: the sine/cosine expansion around the Coulomb phase for large rho
- integrated: series start near the origin, continued with an adaptive ODE solver
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import loggamma

from config.settings import DEFAULT_TOL
from core.errors import NonConvergence

logger = logging.getLogger(__name__)

EULER_GAMMA = 0.5772156649015328606

_EPS = float(np.finfo(float).eps)
_SERIES_MAX_TERMS = 5000
_ASYMPTOTIC_MAX_TERMS = 400
_ODE_RTOL = 1e-13


class Regime(str, Enum):
    SERIES = "series"
    ASYMPTOTIC = "asymptotic"
    INTEGRATED = "integrated"


@dataclass(frozen=True)
class CoulombEval:
    """one evaluation of F0 and dF0/drho"""

    value: float
    derivative: float
    regime: Regime
    est_error: float


def coulomb_normalization(mu: float) -> float:
    """C0(mu) = sqrt(2 pi mu / (exp(2 pi mu) - 1)); underflows gracefully to 0 for large mu"""
    x = 2.0 * math.pi * mu
    if x == 0.0:
        return 1.0
    if x > 0.0:
        log_ratio = math.log(x) - x - math.log(-math.expm1(-x))
    else:
        log_ratio = math.log(-x) - math.log(-math.expm1(x))
    return math.exp(0.5 * log_ratio)


def coulomb_phase(mu: float, rho: float) -> float:
    """Phi = rho - mu ln(2 rho) + arg Gamma(1 + i mu)"""
    if rho <= 0.0:
        raise ValueError(f"coulomb phase needs rho > 0, got {rho}")
    sigma0 = float(np.imag(loggamma(1.0 + 1j * mu)))
    return rho - mu * math.log(2.0 * rho) + sigma0


def _series_terms(mu: float, rho: float) -> tuple[np.ndarray, float]:
    """
    Scaled series terms t_k = A_k rho^k of the unnormalised solution phi = sum_k t_k.

    Returns the terms (t_0 = 0 included) and an absolute error estimate that covers
    rounding in both phi and rho * phi'.
    """
    terms = [0.0, rho]
    running = rho
    two_mu_rho = 2.0 * mu * rho
    rho_sq = rho * rho
    k = 1
    while k < _SERIES_MAX_TERMS:
        t_next = (two_mu_rho * terms[k] - rho_sq * terms[k - 1]) / (k * (k + 1))
        terms.append(t_next)
        running += t_next
        k += 1
        scale = abs(running) + _EPS
        if k > 2 and (abs(terms[k]) + abs(terms[k - 1])) * k <= 0.25 * _EPS * scale:
            break
    else:
        return np.asarray(terms), math.inf

    t = np.asarray(terms)
    weights = np.arange(len(t))
    rounding = 4.0 * _EPS * float(np.sum(np.abs(t) * (1.0 + weights)))
    return t, rounding


def _series_eval(t: np.ndarray, rho_ref: float, rho) -> tuple[np.ndarray, np.ndarray]:
    """evaluate phi and phi' from scaled terms at rho <= rho_ref (vectorised over rho)"""
    x = np.asarray(rho, dtype=float) / rho_ref
    phi = np.polynomial.polynomial.polyval(x, t)
    dcoef = t[1:] * np.arange(1, len(t))
    dphi = np.polynomial.polynomial.polyval(x, dcoef) / rho_ref
    return phi, dphi


def _series(mu: float, rho: float) -> tuple[float, float, float]:
    t, err = _series_terms(mu, rho)
    phi, dphi = _series_eval(t, rho, rho)
    return float(phi), float(dphi), err


def _asymptotic(mu: float, rho: float) -> tuple[float, float, float]:
    """
    Asymptotic expansion F = g cos(Phi) + f sin(Phi), F' = g* cos(Phi) + f* sin(Phi).

    The series is summed up to its smallest term; that term is the error estimate.
    """
    f, g = 1.0, 0.0
    fs, gs = 0.0, 1.0 - mu / rho
    f_sum, g_sum, fs_sum, gs_sum = f, g, fs, gs
    last = math.inf
    for k in range(_ASYMPTOTIC_MAX_TERMS):
        a_k = (2 * k + 1) * mu / ((2 * k + 2) * rho)
        b_k = (mu * mu - k * (k + 1)) / ((2 * k + 2) * rho)
        f_new = a_k * f - b_k * g
        g_new = a_k * g + b_k * f
        fs_new = a_k * fs - b_k * gs - f_new / rho
        gs_new = a_k * gs + b_k * fs - g_new / rho
        size = max(abs(f_new), abs(g_new), abs(fs_new), abs(gs_new))
        if size > last:
            break
        f_sum += f_new
        g_sum += g_new
        fs_sum += fs_new
        gs_sum += gs_new
        f, g, fs, gs = f_new, g_new, fs_new, gs_new
        last = size
        if size <= _EPS:
            break

    theta = coulomb_phase(mu, rho)
    c, s = math.cos(theta), math.sin(theta)
    value = g_sum * c + f_sum * s
    derivative = gs_sum * c + fs_sum * s
    return value, derivative, last + 8.0 * _EPS


def _asymptotic_allowed(mu: float, rho: float) -> bool:
    return rho > 2.0 * abs(mu) and rho >= 3.0


def _asymptotic_onset(mu: float, rho_max: float, tol: float) -> float | None:
    """smallest rho on a geometric ladder from which the asymptotic expansion meets tol / 10"""
    rho = max(3.0, 2.0 * abs(mu) + 1.0)
    while rho < rho_max:
        _, _, err = _asymptotic(mu, rho)
        if err <= 0.1 * tol:
            return rho
        rho *= 1.25
    return None


def _ode_start(mu: float, rho: float) -> float:
    return min(rho, 0.5 / (1.0 + abs(mu)))


def _coulomb_rhs(mu: float):
    def rhs(r, y):
        return [y[1], (2.0 * mu / r - 1.0) * y[0]]

    return rhs


def _integrate(mu: float, rho: float, dense: bool = False):
    """continue the unnormalised series solution from near the origin out to rho"""
    rho0 = _ode_start(mu, rho)
    phi0, dphi0, _ = _series(mu, rho0)
    if rho0 >= rho:
        return rho0, None, phi0, dphi0, 0.0

    scale = max(abs(phi0), abs(dphi0))
    sol = solve_ivp(
        _coulomb_rhs(mu),
        (rho0, rho),
        [phi0, dphi0],
        method="DOP853",
        rtol=_ODE_RTOL,
        atol=_ODE_RTOL * scale * 1e-3,
        dense_output=dense,
    )
    if not sol.success:
        raise NonConvergence(
            f"coulomb ODE continuation failed: {sol.message}", mu=mu, rho=rho, regime="integrated"
        )
    phi, dphi = float(sol.y[0, -1]), float(sol.y[1, -1])
    amplitude = float(np.max(np.hypot(sol.y[0], sol.y[1])))
    err = _ODE_RTOL * (1.0 + rho) * amplitude
    return rho0, sol, phi, dphi, err


def _solve(mu: float, rho: float, tol: float, relative: bool):
    """
    Pick the regime with the smallest error estimate among those meeting tol.

    Returns (phi, dphi, regime, err, scale) with F = scale * phi. The acceptance test is
    absolute on the normalised function, or relative to |(phi, phi')| when relative=True.
    """
    norm = coulomb_normalization(mu)

    def accepted(phi, dphi, err, scale):
        if relative:
            return err <= tol * max(math.hypot(phi, dphi), 1e-300)
        return err * scale <= tol

    candidates = []
    if rho <= max(10.0, 2.0 * abs(mu)):
        phi, dphi, err = _series(mu, rho)
        if accepted(phi, dphi, err, norm):
            candidates.append((phi, dphi, Regime.SERIES, err, norm))
        else:
            logger.debug(f"series rejected at mu={mu}, rho={rho}: est {err * norm:.3e}")

    if _asymptotic_allowed(mu, rho):
        value, derivative, err = _asymptotic(mu, rho)
        if accepted(value, derivative, err, 1.0):
            candidates.append((value, derivative, Regime.ASYMPTOTIC, err, 1.0))
        else:
            logger.debug(f"asymptotic rejected at mu={mu}, rho={rho}: est {err:.3e}")

    if candidates:
        return min(candidates, key=lambda c: c[3] * c[4])

    _, _, phi, dphi, err = _integrate(mu, rho)
    if not accepted(phi, dphi, err, norm):
        raise NonConvergence(
            f"no regime meets tol={tol:g} for F0 at mu={mu}, rho={rho}",
            mu=mu,
            rho=rho,
            est_error=err * norm,
        )
    return phi, dphi, Regime.INTEGRATED, err, norm


def coulomb_f0(mu: float, rho: float, tol: float = DEFAULT_TOL) -> CoulombEval:
    """regular Coulomb function F0(mu, rho) and dF0/drho to absolute error tol"""
    if rho < 0.0:
        raise ValueError(f"rho must be >= 0, got {rho}")
    if tol <= 0.0:
        raise ValueError(f"tol must be > 0, got {tol}")
    if rho == 0.0:
        return CoulombEval(0.0, coulomb_normalization(mu), Regime.SERIES, 0.0)

    phi, dphi, regime, err, scale = _solve(mu, rho, tol, relative=False)
    return CoulombEval(scale * phi, scale * dphi, regime, scale * err)


def coulomb_f0_direction(mu: float, rho: float, tol: float = DEFAULT_TOL) -> float:
    """
    F0'/|(F0, F0')| at rho.

    Independent of the normalisation constant, so it stays meaningful where C0(mu)
    underflows (strongly repulsive mu).
    """
    if rho <= 0.0:
        return 1.0
    phi, dphi, _, _, _ = _solve(mu, rho, tol, relative=True)
    return dphi / math.hypot(phi, dphi)


class CoulombProfile:
    """
    F0(mu, .) and its derivative on [0, rho_max] for a fixed mu, vectorised over rho.

    The inner part comes from the series or a dense ODE solution. When the asymptotic
    expansion reaches tol before rho_max, it takes over from `onset` outwards.
    """

    def __init__(self, mu: float, rho_max: float, tol: float = DEFAULT_TOL):
        if rho_max <= 0.0:
            raise ValueError(f"rho_max must be > 0, got {rho_max}")
        self.mu = mu
        self.rho_max = rho_max
        self.norm = coulomb_normalization(mu)
        self.onset: float | None = None
        self._solution = None

        terms, err = _series_terms(mu, rho_max)
        if err * self.norm <= tol:
            self.regime = Regime.SERIES
            self._terms, self._rho_ref = terms, rho_max
            self.est_error = err * self.norm
        else:
            self.onset = _asymptotic_onset(mu, rho_max, tol)
            inner_max = rho_max if self.onset is None else self.onset
            terms, err = _series_terms(mu, inner_max)
            if self.onset is not None and err * self.norm <= tol:
                self.regime = Regime.SERIES
                self._terms, self._rho_ref = terms, inner_max
                self.est_error = err * self.norm
            else:
                self.regime = Regime.INTEGRATED
                rho0, sol, _, _, ode_err = _integrate(mu, inner_max, dense=True)
                self._terms, _ = _series_terms(mu, rho0)
                self._rho_ref = rho0
                self._solution = sol
                self.est_error = ode_err * self.norm
            if self.onset is not None:
                self.est_error = max(self.est_error, 0.1 * tol)
            if self.est_error > tol:
                raise NonConvergence(
                    f"coulomb profile cannot meet tol={tol:g}",
                    mu=mu,
                    rho_max=rho_max,
                    est_error=self.est_error,
                )
        logger.debug(
            f"coulomb profile mu={mu} rho_max={rho_max} regime={self.regime.value} onset={self.onset}"
        )

    def __call__(self, rho) -> tuple[np.ndarray, np.ndarray]:
        rho = np.asarray(rho, dtype=float)
        flat = np.atleast_1d(rho).ravel()
        inner = np.minimum(flat, self._rho_ref)
        value, derivative = _series_eval(self._terms, self._rho_ref, inner)
        value = self.norm * np.array(value, dtype=float)
        derivative = self.norm * np.array(derivative, dtype=float)

        if self._solution is not None:
            middle = flat > self._rho_ref
            if self.onset is not None:
                middle &= flat <= self.onset
            if middle.any():
                y = self._solution.sol(flat[middle])
                value[middle] = self.norm * y[0]
                derivative[middle] = self.norm * y[1]

        if self.onset is not None:
            for i in np.flatnonzero(flat > self.onset):
                value[i], derivative[i], _ = _asymptotic(self.mu, float(flat[i]))

        shape = rho.shape
        return value.reshape(shape), derivative.reshape(shape)
