"""
Quantization of the separation constant alpha_n(omega).

The mirror condition d chi / d eta = 0 at eta = 2f reads dF0(-a, s)/ds = 0 at s = u, with
a = alpha/k. For a <= -u/2 the whole interval (0, u] is classically forbidden, F0 is convex
and increasing there, so no root exists below -u/2. Roots above it are ordered: the n-th one
(n = 0, 1, ...) leaves exactly n interior extrema of F0 on (0, u). Labels are therefore
exact root counts from -u/2; the linear eikonal only sizes the search window.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from scipy.optimize import brentq

from config.settings import DEFAULT_TOL
from core.errors import ParaqedError, RootNotBracketed
from modes.normalization import normalization_integral
from modes.params import CavityParams
from specfun.coulomb import coulomb_f0, coulomb_f0_direction
from specfun.integrals import stability_function

logger = logging.getLogger(__name__)

CHI_PREFACTOR = math.sqrt(4.0 / math.pi)

# search window: eikonal guess +/- this many spacings, widened geometrically
BRACKET_SPACINGS = 3
BRACKET_EXPANSIONS = 5


@dataclass(frozen=True)
class QuantizedMode:
    """one solved mode; norm is the dimensionless k * N_{omega,n}"""

    n: int
    alpha_over_k: float
    norm: float
    residual: float
    eikonal_n: float

    @property
    def x(self) -> float:
        """x = pi alpha / k"""
        return math.pi * self.alpha_over_k


def chi(
    u: float, alpha_over_k: float, s: float, branch: str = "eta", tol: float = DEFAULT_TOL
) -> tuple[float, float]:
    """
    Mode factor sqrt(4/pi) F0(-+alpha/k, s) and its s-derivative, with k = 1.

    branch="eta" uses -alpha/k (s = k eta / 2 <= u inside the mirror),
    branch="xi" uses +alpha/k (s = k xi / 2, unbounded).
    """
    if s < 0.0:
        raise ValueError(f"s must be >= 0, got {s}")
    if branch == "eta":
        if s > u * (1.0 + 1e-12):
            raise ValueError(f"eta branch lives inside the mirror: s={s} > u={u}")
        mu = -alpha_over_k
    elif branch == "xi":
        mu = alpha_over_k
    else:
        raise ValueError(f"unknown branch {branch!r}")
    evaluation = coulomb_f0(mu, s, tol)
    return CHI_PREFACTOR * evaluation.value, CHI_PREFACTOR * evaluation.derivative


def eikonal_linear(params: CavityParams, x: float) -> float:
    """n(omega, x) = u/pi - 1/2 + x * 2 S(u) / pi^2"""
    s = stability_function(params.u).s
    return params.u / math.pi - 0.5 + x * 2.0 * s / math.pi**2


def eikonal_alpha(params: CavityParams, n: float) -> float:
    """alpha/k predicted for label n by inverting the linear eikonal"""
    s = stability_function(params.u).s
    return math.pi * (n + 0.5 - params.u / math.pi) / (2.0 * s)


def eikonal_spacing(params: CavityParams) -> float:
    """predicted distance in alpha/k between neighbouring roots"""
    return math.pi / (2.0 * stability_function(params.u).s)


def boundary_residual(params: CavityParams, alpha_over_k: float) -> float:
    """signed, normalisation free value of dF0(-a, s)/ds at the mirror s = u"""
    return coulomb_f0_direction(-alpha_over_k, params.u, params.tol)


class _RootScanner:
    """walks alpha/k upward from -u/2, bracketing every sign change of the boundary residual"""

    def __init__(self, params: CavityParams):
        self.params = params
        self.u = params.u
        self.stability = stability_function(params.u).s
        self.position = -0.5 * params.u
        self.value = boundary_residual(params, self.position)
        self.roots: list[float] = []

    def _step(self, a: float) -> float:
        phase_slope = 2.0 * self.stability + 1.0
        if a > 0.5:
            phase_slope = min(phase_slope, 2.0 * math.asinh(math.sqrt(self.u / (2.0 * a))) + 0.5)
        return math.pi / (6.0 * phase_slope)

    def advance(self, a_stop: float, max_roots: int | None = None) -> None:
        """scan up to a_stop, or until max_roots roots are known"""
        xtol = 0.01 * self.params.tol
        while self.position < a_stop:
            if max_roots is not None and len(self.roots) >= max_roots:
                return
            nxt = min(self.position + self._step(self.position), a_stop)
            value = boundary_residual(self.params, nxt)
            if value == 0.0:
                self.roots.append(nxt)
            elif self.value != 0.0 and (value > 0.0) != (self.value > 0.0):
                root = brentq(
                    lambda a: boundary_residual(self.params, a),
                    self.position,
                    nxt,
                    xtol=xtol,
                    rtol=4.0 * 2.220446049250313e-16,
                )
                self.roots.append(root)
                logger.debug(f"u={self.u}: root #{len(self.roots) - 1} at alpha/k={root:.12f}")
            self.position, self.value = nxt, value


def _build_mode(params: CavityParams, n: int, alpha_over_k: float) -> QuantizedMode:
    try:
        norm, _ = normalization_integral(params.u, alpha_over_k, params.tol)
    except ParaqedError as e:
        raise e.with_context(n=n, u=params.u)
    return QuantizedMode(
        n=n,
        alpha_over_k=alpha_over_k,
        norm=norm,
        residual=abs(boundary_residual(params, alpha_over_k)),
        eikonal_n=eikonal_linear(params, math.pi * alpha_over_k),
    )


def quantize(params: CavityParams, n: int) -> QuantizedMode:
    """solve the mirror boundary condition for the mode labelled n"""
    if n < 0:
        raise ValueError(f"mode index must be >= 0, got {n}")

    scanner = _RootScanner(params)
    start = scanner.position
    spacing = eikonal_spacing(params)
    upper = max(eikonal_alpha(params, n) + BRACKET_SPACINGS * spacing, start + spacing)

    for expansion in range(BRACKET_EXPANSIONS + 1):
        scanner.advance(upper, max_roots=n + 1)
        if len(scanner.roots) > n:
            break
        logger.debug(f"u={params.u}, n={n}: {len(scanner.roots)} roots below {upper:.4g}")
        if expansion < BRACKET_EXPANSIONS:
            upper = start + 2.0 * (upper - start)
    else:
        raise RootNotBracketed(
            f"mode n={n} not bracketed at u={params.u}",
            n=n,
            u=params.u,
            bracket=[start, upper],
            roots_found=len(scanner.roots),
        )

    mode = _build_mode(params, n, scanner.roots[n])
    logger.debug(f"quantized u={params.u}, n={n}: alpha/k={mode.alpha_over_k:.10f}")
    return mode


def mode_table(params: CavityParams, alpha_cut: float) -> list[QuantizedMode]:
    """every mode with |alpha/k| <= alpha_cut, labels counted from -u/2"""
    scanner = _RootScanner(params)
    scanner.advance(alpha_cut, max_roots=params.n_max + 1)
    if len(scanner.roots) > params.n_max:
        logger.warning(
            f"mode table at u={params.u} truncated at n_max={params.n_max} "
            f"(alpha/k={scanner.roots[-1]:.4g} < cut {alpha_cut:.4g})"
        )
    modes = [
        _build_mode(params, n, a)
        for n, a in enumerate(scanner.roots[: params.n_max + 1])
        if a >= -alpha_cut
    ]
    logger.info(f"mode table at u={params.u}: {len(modes)} modes with |alpha/k| <= {alpha_cut:.3g}")
    return modes
