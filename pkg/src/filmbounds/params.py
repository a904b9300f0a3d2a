"""Rescaled and physical parameter sets for the compressed-film model."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Params:
    """Nondimensional parameters of the rescaled film energy.

    ``sigma`` is the rescaled film thickness, ``gamma`` the rescaled bonding
    strength, and ``l1 <= l2`` the side lengths of the rectangular domain
    (clamped edge along ``x = 0``).
    """

    sigma: float
    gamma: float
    l1: float = 1.0
    l2: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 < self.sigma < 1.0):
            raise ValueError(f"sigma must lie in (0, 1), got {self.sigma}")
        if self.gamma < 0.0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if not (0.0 < self.l1 <= self.l2):
            raise ValueError(f"need 0 < l1 <= l2, got l1={self.l1}, l2={self.l2}")

    @property
    def sl1(self) -> float:
        """Bending prefactor length sigma * l1."""
        return self.sigma * self.l1

    @property
    def area(self) -> float:
        return self.l1 * self.l2

    def with_l2(self, l2: float) -> "Params":
        return Params(self.sigma, self.gamma, self.l1, l2)


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensional film/substrate parameters prior to rescaling."""

    film_thickness: float        # h_f, length
    youngs_modulus: float        # E, pressure
    poisson_ratio: float         # nu, dimensionless in [0, 0.5)
    compression_ratio: float     # eps_*, dimensionless in (0, 1)
    bond_energy_density: float   # gamma_*, energy per area
    l1: float
    l2: float

    def __post_init__(self) -> None:
        for name in ("film_thickness", "youngs_modulus", "bond_energy_density", "l1", "l2"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if not (0.0 <= self.poisson_ratio < 0.5):
            raise ValueError("poisson_ratio must lie in [0, 0.5)")
        if not (0.0 < self.compression_ratio < 1.0):
            raise ValueError("compression_ratio must lie in (0, 1)")
        if self.l1 > self.l2:
            raise ValueError("need l1 <= l2")


def rescale_physical(p: PhysicalParams) -> Params:
    """Map physical parameters to the rescaled pair (sigma, gamma).

    sigma = h_f / (l1 * sqrt(6 eps_*)) and
    gamma = 2 (1 - nu^2) gamma_* / (E h_f eps_*^2).

    The (1 - nu^2) factor is kept general here; the rescaled energy itself
    is evaluated with the Poisson ratio set to zero.
    """
    sigma = p.film_thickness / (p.l1 * math.sqrt(6.0 * p.compression_ratio))
    gamma = (
        2.0
        * (1.0 - p.poisson_ratio**2)
        * p.bond_energy_density
        / (p.youngs_modulus * p.film_thickness * p.compression_ratio**2)
    )
    if sigma >= 1.0:
        raise ValueError(
            f"rescaled thickness sigma = {sigma:.4g} >= 1: outside the model range"
        )
    return Params(sigma=sigma, gamma=gamma, l1=p.l1, l2=p.l2)
