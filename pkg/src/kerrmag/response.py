"""Weak-probe response of the cavity and its transmission S21.

The probe only sees the drive through the Kerr shift of the magnon
frequency, so everything here takes that shift as an input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .model import DriveConfig, SteadySolution, SystemConfig
from .sweep import Direction, HysteresisTrace, SweepAxis, SweepPlan, run_direction


def self_energy(omega_p, sys: SystemConfig, shift: float):
    """Magnon contribution to the cavity pole (MHz). Vectorised over ``omega_p``."""
    return sys.g_m**2 / (1j * (sys.omega_m + shift - np.asarray(omega_p)) + sys.gamma_m)


def s21_at(omega_p, sys: SystemConfig, shift: float):
    if sys.kappa_i <= 0 or sys.kappa_o <= 0:
        raise InvalidInputError("transmission needs kappa_i > 0 and kappa_o > 0")
    omega_p = np.asarray(omega_p)
    denom = 1j * (sys.omega_c - omega_p) + sys.kappa_c + self_energy(omega_p, sys, shift)
    out = 2.0 * math.sqrt(sys.kappa_i * sys.kappa_o) / denom
    return complex(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class ProbeResponse:
    omega_p: float
    epsilon_p: float
    a1: complex
    b1: complex
    s21: complex
    drive_output: complex | None = None


def probe_response(
    omega_p: float,
    sys: SystemConfig,
    shift: float,
    epsilon_p: float = 1.0,
    steady: SteadySolution | None = None,
) -> ProbeResponse:
    """Probe amplitudes A1, B1 and S21 at one probe frequency.

    ``drive_output`` is the drive-tone part sqrt(2 kappa_o) A0 of the output
    field; it is reported for diagnostics and never enters S21.
    """
    a1 = -1j * epsilon_p / (1j * (sys.omega_c - omega_p) + sys.kappa_c + self_energy(omega_p, sys, shift))
    b1 = -sys.g_m * a1 / complex(sys.omega_m + shift - omega_p, -sys.gamma_m)
    s21 = math.sqrt(2.0 * sys.kappa_o) * a1 / (-1j * epsilon_p / math.sqrt(2.0 * sys.kappa_i))
    drive_output = None if steady is None else math.sqrt(2.0 * sys.kappa_o) * steady.a0
    return ProbeResponse(omega_p, epsilon_p, complex(a1), complex(b1), complex(s21), drive_output)


@dataclass
class SpectrumGrid:
    probe: np.ndarray
    omega_m: np.ndarray  # in sweep order
    magnitude: np.ndarray  # shape (len(omega_m), len(probe))
    phase: np.ndarray
    shifts: np.ndarray
    branches: list[str]
    trace: HysteresisTrace | None = None


def spectrum_map(
    sys: SystemConfig,
    drive: DriveConfig,
    probe: np.ndarray,
    omega_m: np.ndarray,
    direction: Direction = Direction.UP,
    jump_factor: float = 10.0,
) -> SpectrumGrid:
    """|S21| over (omega_p, omega_m) with the shift fed row by row by the tracker.

    Rows follow the sweep order, so an up and a down map over the same grid
    differ exactly where the two sweeps sit on different branches.
    """
    probe = np.asarray(probe, dtype=float)
    if probe.size == 0 or np.any(np.diff(probe) <= 0):
        raise InvalidInputError("probe grid must be nonempty and increasing")
    direction = Direction(direction)
    if direction is Direction.BOTH:
        raise InvalidInputError("spectrum_map takes a single direction")
    plan = SweepPlan(SweepAxis.MAGNON_FREQUENCY, tuple(omega_m), direction, sys, drive, jump_factor)
    trace = run_direction(plan, direction)
    rows = trace.values
    shifts = trace.shifts
    # one broadcast over the whole grid
    detuning = (rows + shifts)[:, None] - probe[None, :]
    sigma = sys.g_m**2 / (1j * detuning + sys.gamma_m)
    s21 = 2.0 * math.sqrt(sys.kappa_i * sys.kappa_o) / (1j * (sys.omega_c - probe[None, :]) + sys.kappa_c + sigma)
    return SpectrumGrid(
        probe=probe,
        omega_m=rows,
        magnitude=np.abs(s21),
        phase=np.angle(s21),
        shifts=shifts,
        branches=[s.branch.value for s in trace.samples],
        trace=trace,
    )


def peak_positions(x: np.ndarray, y: np.ndarray, count: int = 2) -> list[tuple[float, float]]:
    """Largest local maxima of ``y``, refined by a parabola through three points.

    Returns ``(position, height)`` pairs sorted by position.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    idx = [k for k in range(1, len(y) - 1) if y[k] >= y[k - 1] and y[k] > y[k + 1]]
    idx = sorted(idx, key=lambda k: y[k], reverse=True)[:count]
    peaks = []
    for k in idx:
        y0, y1, y2 = y[k - 1], y[k], y[k + 1]
        curv = y0 - 2.0 * y1 + y2
        off = 0.5 * (y0 - y2) / curv if curv != 0 else 0.0
        h = x[k + 1] - x[k]
        peaks.append((float(x[k] + off * h), float(y1 - 0.25 * (y0 - y2) * off)))
    return sorted(peaks)
