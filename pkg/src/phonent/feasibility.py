"""Back-of-the-envelope experimental feasibility estimates.

Physical constants are pinned to CODATA 2018 values in one place.  The three
calculators implement the standard textbook expressions; where published
figures for comparable setups disagree with these conventions (peak versus
averaged intensity, single- versus multi-photon coupling in the phase-noise
rate), the CLI prints the formula result and leaves the interpretation to
the user.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "K_BOLTZMANN",
    "HBAR",
    "FeasibilityInputs",
    "thermal_occupancy",
    "phase_noise_heating",
    "tweezer_intensity",
]

#: Boltzmann constant, J/K (exact, SI 2019)
K_BOLTZMANN = 1.380649e-23

#: reduced Planck constant, J s (exact, SI 2019)
HBAR = 1.054571817e-34


@dataclass(frozen=True)
class FeasibilityInputs:
    """Inputs of the feasibility calculators; all strictly positive.

    temperature        K
    mechanical_frequency  rad/s
    g                  dispersive coupling, rad/s
    n_phot             intracavity photon number
    kappa              cavity decay, rad/s
    s_phidot           frequency-noise spectral density, Hz^2/Hz
    power              beam power, W
    waist              beam waist, m
    """

    temperature: float
    mechanical_frequency: float
    g: float
    n_phot: float
    kappa: float
    s_phidot: float
    power: float
    waist: float

    def __post_init__(self):
        for name in ("temperature", "mechanical_frequency", "g", "n_phot",
                     "kappa", "s_phidot", "power", "waist"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def thermal_occupancy(temperature: float, omega: float) -> float:
    """Mean thermal phonon number k_B T / (hbar Omega).

    ``temperature`` in K, ``omega`` in rad/s.
    """
    if temperature <= 0 or omega <= 0:
        raise ValueError("temperature and omega must be positive")
    return K_BOLTZMANN * temperature / (HBAR * omega)


def phase_noise_heating(g: float, n_phot: float, kappa: float, s_phidot: float) -> float:
    """Laser-phase-noise heating rate 4 g^2 n_phot S_phidot / kappa^2.

    ``g`` and ``kappa`` in rad/s, ``s_phidot`` in Hz^2/Hz; returns rad/s.
    ``s_phidot`` may be zero (noiseless drive).
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if g < 0 or n_phot < 0 or s_phidot < 0:
        raise ValueError("g, n_phot and s_phidot must be nonnegative")
    return 4.0 * g**2 * n_phot * s_phidot / kappa**2


def tweezer_intensity(power: float, waist: float) -> float:
    """Peak Gaussian-beam intensity 2 P / (pi w^2), returned in W/cm^2."""
    if power <= 0 or waist <= 0:
        raise ValueError("power and waist must be positive")
    return 2.0 * power / (math.pi * waist**2) / 1e4
