"""Material and geometry -> magnon model parameters.

Inputs are SI except the gyromagnetic ratio (Hz/T, linear) and the single
spin coupling (Hz, linear). Outputs are linear frequencies in Hz. The
closed forms are written with hbar = 1 in the literature; here hbar is put
back so the Kerr coefficient and the anisotropy shift come out as
frequencies rather than energies.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

from scipy.constants import hbar

from .errors import InvalidInputError

DIAMETER_GUARD = (1e-5, 5e-3)


class CrystalAxis(str, Enum):
    AXIS100 = "100"
    AXIS110 = "110"


@dataclass(frozen=True)
class MaterialAndGeometry:
    spin_density: float = 2.1e28  # spins / m^3
    anisotropy_energy: float = 2480.0  # mu0 * K_an, J / m^3
    saturation_magnetization: float = 196e3  # A / m
    gyromagnetic_ratio: float = 28e9  # Hz / T
    single_spin_coupling: float = 39e-3  # Hz
    diameter: float = 1e-3  # m
    crystal_axis: CrystalAxis = CrystalAxis.AXIS100
    bias_field: float = 0.357  # T

    def __post_init__(self):
        object.__setattr__(self, "crystal_axis", CrystalAxis(self.crystal_axis))
        for name in ("spin_density", "anisotropy_energy", "saturation_magnetization",
                     "gyromagnetic_ratio", "diameter"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidInputError(f"{name} must be positive, got {value!r}")
        # zero coupling and zero field are legitimate limits
        for name in ("single_spin_coupling", "bias_field"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise InvalidInputError(f"{name} must be >= 0, got {value!r}")
        lo, hi = DIAMETER_GUARD
        if not lo <= self.diameter <= hi:
            warnings.warn(
                f"sphere diameter {self.diameter:g} m outside the usual range [{lo:g}, {hi:g}] m",
                stacklevel=3,
            )

    @property
    def volume(self) -> float:
        return math.pi / 6.0 * self.diameter**3


@dataclass(frozen=True)
class DerivedMagnonParams:
    macrospin_s: float
    volume: float
    g_m: float
    kerr: float
    omega_m: float
    anisotropy: tuple[float, float, float]

    def as_dict(self) -> dict:
        return {
            "macrospin_S": self.macrospin_s,
            "volume_m3": self.volume,
            "g_m_Hz": self.g_m,
            "K_Hz": self.kerr,
            "omega_m_Hz": self.omega_m,
            "D_x_Hz": self.anisotropy[0],
            "D_y_Hz": self.anisotropy[1],
            "D_z_Hz": self.anisotropy[2],
        }


def derive_coupling(mg: MaterialAndGeometry) -> tuple[float, float]:
    """Return ``(g_m, S)``: the collective coupling in Hz and the macrospin.

    Each spin carries s = 1/2, so 2S equals the number of spins in the sphere.
    """
    two_s = mg.spin_density * mg.volume
    return math.sqrt(two_s) * mg.single_spin_coupling, two_s / 2.0


def _anisotropy_unit(mg: MaterialAndGeometry) -> float:
    # mu0 K_an gamma^2 hbar / (M^2 V), converted to linear frequency
    gamma = 2.0 * math.pi * mg.gyromagnetic_ratio
    omega = mg.anisotropy_energy * gamma**2 * hbar / (mg.saturation_magnetization**2 * mg.volume)
    return omega / (2.0 * math.pi)


def derive_kerr_and_anisotropy(mg: MaterialAndGeometry) -> tuple[float, tuple[float, float, float]]:
    """Return ``(K, (D_x, D_y, D_z))`` in Hz."""
    unit = _anisotropy_unit(mg)
    if mg.crystal_axis is CrystalAxis.AXIS100:
        return unit, (0.0, 0.0, unit)
    return -13.0 / 16.0 * unit, (1.5 * unit, 9.0 / 8.0 * unit, 0.5 * unit)


def anisotropy_shift(mg: MaterialAndGeometry) -> float:
    """Volume-independent anisotropy contribution to the magnon frequency (Hz)."""
    gamma = 2.0 * math.pi * mg.gyromagnetic_ratio
    base = mg.anisotropy_energy * mg.spin_density * (hbar / 2.0) * gamma**2 / mg.saturation_magnetization**2
    if mg.crystal_axis is CrystalAxis.AXIS100:
        omega = -2.0 * base
    else:
        omega = 13.0 / 8.0 * base
    return omega / (2.0 * math.pi)


def derive_magnon_frequency(mg: MaterialAndGeometry) -> float:
    return mg.gyromagnetic_ratio * mg.bias_field + anisotropy_shift(mg)


def derive_all(mg: MaterialAndGeometry) -> DerivedMagnonParams:
    g_m, s = derive_coupling(mg)
    kerr, d = derive_kerr_and_anisotropy(mg)
    return DerivedMagnonParams(
        macrospin_s=s,
        volume=mg.volume,
        g_m=g_m,
        kerr=kerr,
        omega_m=derive_magnon_frequency(mg),
        anisotropy=d,
    )
