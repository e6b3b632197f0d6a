"""Physical constants and Rb-85 atomic parameters.

Detunings are handled in angular frequency internally; the nm form used
throughout the lab notes converts linearly at c/lambda0^2 (493 GHz per nm
near 780 nm).
"""

from dataclasses import dataclass

import numpy as np
from scipy.constants import c, hbar, k as k_B, g as g_earth

TWO_PI = 2.0 * np.pi

# Rb-85 D2 reference line
LAMBDA_D2 = 780.24e-9        # m
MASS_RB85 = 1.4100e-25       # kg
LINEWIDTH = TWO_PI * 6.1e6   # rad/s
I_SAT = 16.0                 # W/m^2 (1.6 mW/cm^2)
FINE_STRUCTURE_SPLITTING = TWO_PI * 7.1e12   # rad/s, D1-D2 separation

# photon recoil at the D2 wavelength
RECOIL_ENERGY = (hbar * TWO_PI / LAMBDA_D2) ** 2 / (2.0 * MASS_RB85)  # J

GHZ_PER_NM = c / LAMBDA_D2 ** 2 * 1e-9 / 1e9   # ~492.8


@dataclass(frozen=True)
class AtomicParams:
    """Two-line light-shift parameters for the trapped species.

    ``detuning`` is the angular-frequency offset of the trap laser from the
    reference line; positive means blue (above resonance).
    """

    detuning: float                                  # rad/s
    linewidth: float = LINEWIDTH                     # rad/s
    saturation_intensity: float = I_SAT              # W/m^2
    fine_structure_splitting: float = FINE_STRUCTURE_SPLITTING  # rad/s
    mass: float = MASS_RB85                          # kg
    resonance_wavelength: float = LAMBDA_D2          # m
    raman_branching: float = 2.0 / 3.0               # dimensionless

    @classmethod
    def rb85(cls, detuning_nm: float) -> "AtomicParams":
        """Parameters with the detuning given in nm below 780.24 nm (blue)."""
        return cls(detuning=detuning_from_nm(detuning_nm))

    @property
    def detuning_nm(self) -> float:
        return self.detuning / (TWO_PI * c / self.resonance_wavelength ** 2) * 1e9

    @property
    def trap_wavelength(self) -> float:
        """Trap-light wavelength implied by the detuning (blue = shorter)."""
        return self.resonance_wavelength - self.detuning_nm * 1e-9


def detuning_from_nm(delta_nm: float, wavelength: float = LAMBDA_D2) -> float:
    """Convert a wavelength offset in nm to angular frequency (rad/s).

    Linearized as d(nu) = c*d(lambda)/lambda^2, which reproduces the usual
    1 nm <-> 493 GHz rule near 780 nm.
    """
    return TWO_PI * c * (delta_nm * 1e-9) / wavelength ** 2


__all__ = [
    "AtomicParams", "detuning_from_nm",
    "LAMBDA_D2", "MASS_RB85", "LINEWIDTH", "I_SAT", "FINE_STRUCTURE_SPLITTING",
    "RECOIL_ENERGY", "GHZ_PER_NM",
    "c", "hbar", "k_B", "g_earth", "TWO_PI",
]
