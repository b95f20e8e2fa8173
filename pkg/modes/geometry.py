from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ParabolicPoint:
    """
    Parabolic coordinates with the focus at the origin.

    x = sqrt(xi eta) cos(phi), y = sqrt(xi eta) sin(phi), z = (xi - eta)/2.
    The mirror of focal length f is the surface eta = 2f.
    """

    xi: float
    eta: float
    phi: float = 0.0

    def __post_init__(self):
        if self.xi < 0.0 or self.eta < 0.0:
            raise ValueError(f"parabolic coordinates must be >= 0, got xi={self.xi}, eta={self.eta}")
        if not 0.0 <= self.phi < TWO_PI:
            raise ValueError(f"phi must lie in [0, 2pi), got {self.phi}")

    @property
    def rho(self) -> float:
        """distance from the symmetry axis"""
        return math.sqrt(self.xi * self.eta)

    @property
    def r(self) -> float:
        """distance from the focus"""
        return 0.5 * (self.xi + self.eta)

    @property
    def z(self) -> float:
        return 0.5 * (self.xi - self.eta)


def to_parabolic(x: float, y: float, z: float) -> ParabolicPoint:
    """convert Cartesian coordinates (focus at origin) to parabolic ones"""
    rho_sq = x * x + y * y
    r = math.sqrt(rho_sq + z * z)
    # pick the cancellation-free form for each of xi = r + z and eta = r - z
    if z >= 0.0:
        xi = r + z
        eta = rho_sq / xi if xi > 0.0 else 0.0
    else:
        eta = r - z
        xi = rho_sq / eta
    phi = math.atan2(y, x) % TWO_PI if rho_sq > 0.0 else 0.0
    if phi >= TWO_PI:
        phi = 0.0
    return ParabolicPoint(xi=xi, eta=eta, phi=phi)


def to_cartesian(point: ParabolicPoint) -> tuple[float, float, float]:
    rho = point.rho
    return rho * math.cos(point.phi), rho * math.sin(point.phi), point.z


def on_mirror(point: ParabolicPoint, focal_length: float, rel_tol: float = 1e-12) -> bool:
    """true when the point lies on the paraboloid eta = 2f"""
    return math.isclose(point.eta, 2.0 * focal_length, rel_tol=rel_tol)
