"""Ordered sweeps with continuity-based branch tracking.

A sweep walks a list of drive powers or magnon frequencies in order and at
each sample keeps the stable steady state closest to the previous one. When
the followed branch folds away the tracker lands on the other stable root;
that jump is a switching point and the origin of the hysteresis loop.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InvalidInputError, SweepError
from .model import Branch, DriveConfig, SteadySolution, SystemConfig
from .steady import solve_shift_cubic


class SweepAxis(str, Enum):
    POWER = "power"
    MAGNON_FREQUENCY = "omega_m"


class Direction(str, Enum):
    UP = "up"
    DOWN = "down"
    BOTH = "both"


@dataclass(frozen=True)
class SweepPlan:
    axis: SweepAxis
    values: tuple[float, ...]
    direction: Direction
    system: SystemConfig
    drive: DriveConfig
    jump_factor: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "axis", SweepAxis(self.axis))
        object.__setattr__(self, "direction", Direction(self.direction))
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if not values:
            raise InvalidInputError("sweep needs at least one value")
        diffs = np.diff(values)
        if not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise InvalidInputError("sweep values must be strictly monotone")
        if self.axis is SweepAxis.POWER and min(values) < 0:
            raise InvalidInputError("sweep powers must be >= 0")
        if self.jump_factor <= 1:
            raise InvalidInputError("jump_factor must be > 1")

    def ordered(self, direction: Direction) -> list[float]:
        return sorted(self.values, reverse=direction is Direction.DOWN)

    def configure(self, value: float) -> tuple[SystemConfig, DriveConfig]:
        if self.axis is SweepAxis.POWER:
            return self.system, self.drive.replace(power=value)
        return self.system.replace(omega_m=value), self.drive


@dataclass(frozen=True)
class TraceSample:
    value: float
    shift: float
    branch: Branch
    root_count: int
    stable_count: int
    solution: SteadySolution = field(repr=False, compare=False)


@dataclass(frozen=True)
class Switching:
    before: float  # last axis value on the old branch
    value: float  # first axis value on the new branch
    jump: float
    under_resolved: bool = False


@dataclass
class HysteresisTrace:
    direction: Direction
    samples: list[TraceSample]
    switchings: list[Switching] = field(default_factory=list)
    roots: list[list[SteadySolution]] = field(default_factory=list, repr=False)

    @property
    def values(self) -> np.ndarray:
        return np.array([s.value for s in self.samples])

    @property
    def shifts(self) -> np.ndarray:
        return np.array([s.shift for s in self.samples])


def _pick(candidates: list[SteadySolution], previous: float | None) -> SteadySolution:
    if previous is None:
        key = lambda s: (abs(s.shift), s.shift)  # noqa: E731
    else:
        key = lambda s: (abs(s.shift - previous), abs(s.shift), s.shift)  # noqa: E731
    return min(candidates, key=key)


def run_direction(plan: SweepPlan, direction: Direction) -> HysteresisTrace:
    samples = []
    all_roots = []
    previous = None
    for value in plan.ordered(direction):
        sys, drive = plan.configure(value)
        roots = solve_shift_cubic(sys, drive)
        stable = [r for r in roots if r.stable]
        if not stable:
            raise SweepError(
                "no stable steady state at sweep sample",
                {"axis": plan.axis.value, "value": value, "roots": roots, "system": sys, "drive": drive},
            )
        chosen = _pick(stable, previous)
        previous = chosen.shift
        samples.append(TraceSample(value, chosen.shift, chosen.branch, len(roots), len(stable), chosen))
        all_roots.append(roots)
    trace = HysteresisTrace(direction, samples, roots=all_roots)
    trace.switchings = detect_switchings(trace, plan.jump_factor)
    return trace


def hysteresis_sweep(plan: SweepPlan, workers: int = 1):
    """Run the plan; returns one trace, or ``(up, down)`` for ``Direction.BOTH``."""
    if plan.direction is not Direction.BOTH:
        return run_direction(plan, plan.direction)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=2) as pool:
            up, down = pool.map(lambda d: run_direction(plan, d), (Direction.UP, Direction.DOWN))
        return up, down
    return run_direction(plan, Direction.UP), run_direction(plan, Direction.DOWN)


def detect_switchings(trace: HysteresisTrace, jump_factor: float = 10.0) -> list[Switching]:
    """Branch changes whose jump exceeds ``jump_factor`` x the local increment.

    The local increment is the smaller of the two neighbouring steps; the
    step just before a fold is inflated by the square-root steepness there.

    A switching whose pre-jump sample never saw two stable roots means the
    bistable window fell between grid points; it is kept and flagged
    ``under_resolved``.
    """
    s = trace.samples
    shifts = np.array([x.shift for x in s])
    steps = np.abs(np.diff(shifts))
    found = []
    for k in range(1, len(s)):
        if s[k].branch == s[k - 1].branch:
            continue
        neighbours = [steps[j] for j in (k - 2, k) if 0 <= j < len(steps)]
        local = min(neighbours, default=0.0)
        if steps[k - 1] > jump_factor * local:
            found.append(
                Switching(s[k - 1].value, s[k].value, float(steps[k - 1]), s[k - 1].stable_count < 2)
            )
    return found


def hysteresis_area(up: HysteresisTrace, down: HysteresisTrace) -> float:
    """Trapezoidal integral of |shift_up - shift_down| over the axis."""
    order_up = np.argsort(up.values)
    order_down = np.argsort(down.values)
    x = up.values[order_up]
    if not np.array_equal(x, down.values[order_down]):
        raise InvalidInputError("traces must share the same axis samples")
    gap = np.abs(up.shifts[order_up] - down.shifts[order_down])
    return float(np.sum(0.5 * (gap[1:] + gap[:-1]) * np.diff(x)))
