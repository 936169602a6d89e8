"""Magnon Kerr bistability in a driven cavity-magnon system."""

from .errors import (
    DivergenceError,
    InvalidFixedPointError,
    InvalidInputError,
    KerrMagError,
    NoThresholdError,
    NumericalFailure,
    SweepError,
)
from .model import Branch, DriveConfig, DriveTarget, EffectiveParams, SteadySolution, SystemConfig

__version__ = "0.1.0"

__all__ = [
    "Branch",
    "DivergenceError",
    "DriveConfig",
    "DriveTarget",
    "EffectiveParams",
    "InvalidFixedPointError",
    "InvalidInputError",
    "KerrMagError",
    "NoThresholdError",
    "NumericalFailure",
    "SteadySolution",
    "SweepError",
    "SystemConfig",
]
