"""Physical constants and YIG material defaults."""

from dataclasses import dataclass

import numpy as np
from scipy import constants as _sc

GAMMA_GHZ_PER_T = 28.0  # gamma / 2pi
MU0_MS_T = 0.176  # room-temperature YIG, mu0 * Ms


@dataclass(frozen=True)
class PhysicalConstants:
    reduced_planck: float = _sc.hbar
    vacuum_permeability: float = _sc.mu_0
    bohr_magneton: float = _sc.physical_constants["Bohr magneton"][0]
    lande_g: float = 2.0
    moment_per_site: float = 5.0  # in Bohr magnetons
    spin_density: float = 4.22e27  # m^-3
    gyromagnetic_ratio: float = 2 * np.pi * GAMMA_GHZ_PER_T * 1e9  # rad s^-1 T^-1

    def __post_init__(self):
        for name, value in vars(self).items():
            if not value > 0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")

    @property
    def spins_per_moment(self):
        """mu / (g_l mu_B) with mu given in Bohr magnetons."""
        return self.moment_per_site / self.lande_g

    @property
    def implied_mu0_ms(self):
        """mu0 * Ms implied by the moment and spin density, in tesla (~0.246 T)."""
        return self.vacuum_permeability * self.moment_per_site * self.bohr_magneton * self.spin_density
