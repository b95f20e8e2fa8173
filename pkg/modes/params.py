from __future__ import annotations

import logging
import math
import warnings
from dataclasses import asdict, dataclass

from config.settings import DEFAULT_M_MAX, DEFAULT_N_MAX, DEFAULT_TOL
from core.errors import InvalidParameters, ValidityWarning

logger = logging.getLogger(__name__)

# Gamma_s << omega_0 is enforced as gamma_s_T < RWA_LIMIT * u
RWA_LIMIT = 0.1


@dataclass(frozen=True)
class CavityParams:
    """
    Dimensionless problem statement.

    Units: c = hbar = 1, lengths in 1/k, rates in Gamma_s, times in T = 2f/c.
    u = k f is the only geometry parameter; gamma_s_T = Gamma_s * T sets the
    ratio of the free decay time to the photon round trip.
    """

    u: float
    gamma_s_T: float = 0.0
    m_max: int = DEFAULT_M_MAX
    n_max: int = DEFAULT_N_MAX
    tol: float = DEFAULT_TOL
    strict_rwa: bool = False

    def __post_init__(self):
        if not (self.u > 0.0 and math.isfinite(self.u)):
            raise InvalidParameters(f"u must be a finite positive number, got {self.u}", u=self.u)
        if self.gamma_s_T < 0.0:
            raise InvalidParameters(
                f"gamma_s_T must be >= 0, got {self.gamma_s_T}", gamma_s_T=self.gamma_s_T
            )
        if self.m_max < 0:
            raise InvalidParameters(f"m_max must be >= 0, got {self.m_max}", m_max=self.m_max)
        if self.n_max < 1:
            raise InvalidParameters(f"n_max must be >= 1, got {self.n_max}", n_max=self.n_max)
        if self.tol <= 0.0:
            raise InvalidParameters(f"tol must be > 0, got {self.tol}", tol=self.tol)

        if not self.rwa_consistent:
            message = (
                f"gamma_s_T={self.gamma_s_T} is not small against u={self.u} "
                f"(Gamma_s/omega_0 = {self.gamma_s_T / (2.0 * self.u):.3g})"
            )
            if self.strict_rwa:
                raise InvalidParameters(message, u=self.u, gamma_s_T=self.gamma_s_T)
            logger.warning(f"rotating-wave approximation questionable: {message}")
            warnings.warn(message, ValidityWarning, stacklevel=3)

    @property
    def rwa_consistent(self) -> bool:
        return self.gamma_s_T < RWA_LIMIT * self.u

    @property
    def axial_index(self) -> float:
        """n(omega, x=0) = u/pi - 1/2; negative below the lowest axial resonance"""
        return self.u / math.pi - 0.5

    @property
    def semiclassical(self) -> bool:
        """the linearised eikonal is trusted once the axial mode exists (u >= pi/2)"""
        return self.axial_index >= 0.0

    @property
    def round_trip_phase(self) -> float:
        """phase 2 pi n(omega, 0) = 2(u - pi/2) collected per closed axial orbit"""
        return 2.0 * (self.u - 0.5 * math.pi)

    def tau(self, t_over_T: float) -> float:
        """convert t/T to Gamma_s t"""
        return self.gamma_s_T * t_over_T

    def with_changes(self, **changes) -> CavityParams:
        data = asdict(self)
        data.update(changes)
        return CavityParams(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def for_axial_mode(cls, n: int, **kwargs) -> CavityParams:
        """parameters tuned to the axial resonance u = pi (n + 1/2)"""
        if n < 0:
            raise InvalidParameters(f"axial mode index must be >= 0, got {n}", n=n)
        return cls(u=math.pi * (n + 0.5), **kwargs)
