"""Value types for the driven cavity-magnon model.

All frequencies and rates are linear frequencies in MHz (omega/2pi), the
Kerr coefficient included. Drive powers are in mW and the power-coupling
constant ``c`` in MHz^3/mW.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from enum import Enum

from .errors import InvalidInputError


class DriveTarget(str, Enum):
    YIG = "yig"
    CAVITY = "cavity"


class Branch(str, Enum):
    LOWER = "lower"
    MIDDLE = "middle"
    UPPER = "upper"


def _finite(name, value):
    if not math.isfinite(value):
        raise InvalidInputError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class SystemConfig:
    """Linear cavity + Kerr magnon model.

    ``macrospin_s`` is optional; when given, steady-state solutions warn if
    the magnon number leaves the low-excitation regime.
    """

    omega_c: float
    omega_m: float
    kappa_i: float
    kappa_o: float
    kappa_int: float
    gamma_m: float
    g_m: float
    kerr: float
    macrospin_s: float | None = None

    def __post_init__(self):
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value is not None:
                _finite(f.name, value)
        for name in ("kappa_i", "kappa_o", "kappa_int", "g_m"):
            if getattr(self, name) < 0:
                raise InvalidInputError(f"{name} must be >= 0")
        if self.kappa_c <= 0:
            raise InvalidInputError("total cavity decay kappa_i + kappa_o + kappa_int must be > 0")
        if self.gamma_m <= 0:
            raise InvalidInputError("gamma_m must be > 0")
        if self.macrospin_s is not None and self.macrospin_s <= 0:
            raise InvalidInputError("macrospin_s must be > 0")

    @property
    def kappa_c(self) -> float:
        return self.kappa_i + self.kappa_o + self.kappa_int

    @property
    def detuning(self) -> float:
        """Cavity-magnon detuning omega_c - omega_m."""
        return self.omega_c - self.omega_m

    def replace(self, **changes) -> SystemConfig:
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class DriveConfig:
    """Pump tone. ``rabi`` overrides the power-derived Rabi frequency."""

    target: DriveTarget
    omega_d: float
    power: float
    c: float
    rabi: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "target", DriveTarget(self.target))
        _finite("omega_d", self.omega_d)
        _finite("power", self.power)
        _finite("c", self.c)
        if self.power < 0:
            raise InvalidInputError("drive power must be >= 0")
        if self.rabi is not None:
            _finite("rabi", self.rabi)
            if self.rabi < 0:
                raise InvalidInputError("rabi must be >= 0")

    def replace(self, **changes) -> DriveConfig:
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class EffectiveParams:
    """Cavity-dressed magnon detuning and damping seen by the drive."""

    delta_c: float
    delta_m: float
    eta: float
    delta_m_eff: float
    gamma_m_eff: float

    @property
    def detuning(self) -> float:
        return self.delta_c - self.delta_m


@dataclass(frozen=True)
class SteadySolution:
    shift: float
    b0: complex
    a0: complex
    stable: bool | None
    branch: Branch
    degenerate: bool = False

    @property
    def magnon_number(self) -> float:
        return abs(self.b0) ** 2
