import numpy as np
import pytest

from kerrmag import sweep as sweep_mod
from kerrmag.errors import InvalidInputError, SweepError
from kerrmag.model import Branch, SteadySolution
from kerrmag.steady import bistability_analysis, effective_params, shift_cubic_residual, drive_term
from kerrmag.sweep import (
    Direction,
    HysteresisTrace,
    SweepAxis,
    SweepPlan,
    TraceSample,
    detect_switchings,
    hysteresis_area,
    hysteresis_sweep,
)

from conftest import OMEGA_C, make_drive, make_system

OMEGA_GRID = np.linspace(9900, 10100, 401)


def field_sweep_plan(power, kerr=1e-13):
    sys = make_system(kerr=kerr)
    drive = make_drive(sys, 0.0, power, c=2.0 if kerr > 0 else -2.0).replace(omega_d=OMEGA_C - 35.0)
    return SweepPlan(SweepAxis.MAGNON_FREQUENCY, tuple(OMEGA_GRID), Direction.BOTH, sys, drive)


def power_plan(delta_m=36.2, stop=150.0, points=601, direction=Direction.BOTH):
    sys = make_system()
    drive = make_drive(sys, delta_m, 0.0)
    return SweepPlan(SweepAxis.POWER, tuple(np.linspace(0, stop, points)), direction, sys, drive)


def aligned(up, down):
    ou, od = np.argsort(up.values), np.argsort(down.values)
    return up.values[ou], up.shifts[ou], down.shifts[od]


def test_below_critical_power_traces_coincide():
    up, down = hysteresis_sweep(field_sweep_plan(80.0))
    _, su, sd = aligned(up, down)
    assert np.array_equal(su, sd)
    assert hysteresis_area(up, down) == 0.0


@pytest.mark.parametrize("kerr", [1e-13, -1e-13])
def test_high_power_traces_differ_between_switchings(kerr):
    up, down = hysteresis_sweep(field_sweep_plan(200.0, kerr))
    x, su, sd = aligned(up, down)
    differ = x[su != sd]
    assert differ.size > 0
    assert len(up.switchings) == len(down.switchings) == 1
    edges = sorted([up.switchings[0].before, up.switchings[0].value,
                    down.switchings[0].before, down.switchings[0].value])
    assert edges[0] <= differ.min() and differ.max() <= edges[-1]
    # outside the loop the two traces agree bit for bit
    outside = (x < edges[0]) | (x > edges[-1])
    assert np.array_equal(su[outside], sd[outside])


def test_power_sweep_switchings_bracket_window():
    plan = power_plan()
    up, down = hysteresis_sweep(plan)
    eff = effective_params(plan.system, plan.drive)
    report = bistability_analysis(eff, plan.drive)
    lo_p, hi_p = sorted(report.fold_powers)
    (s_up,), (s_down,) = up.switchings, down.switchings
    step = plan.values[1] - plan.values[0]
    midpoint = lambda sw: 0.5 * (sw.before + sw.value)  # noqa: E731
    assert midpoint(s_up) > midpoint(s_down)  # up-switch above the down-switch for K > 0
    assert abs(s_up.before - hi_p) <= step and s_up.before <= hi_p <= s_up.value
    assert abs(s_down.before - lo_p) <= step and s_down.value <= lo_p <= s_down.before
    # the fold shift lies between the tracked root and the middle root it is about to meet
    for sw, trace in ((s_up, up), (s_down, down)):
        k = [s.value for s in trace.samples].index(sw.before)
        roots = trace.roots[k]
        middle = next(r.shift for r in roots if r.branch is Branch.MIDDLE)
        tracked = trace.samples[k].shift
        fold = min(report.switching_shifts, key=lambda s: abs(s - tracked))
        assert min(tracked, middle) <= fold <= max(tracked, middle)


def test_monotone_trace_has_no_switching():
    (trace) = hysteresis_sweep(power_plan(delta_m=20.0, direction=Direction.UP))
    assert trace.switchings == []
    assert np.all(np.diff(trace.shifts) > 0)


@pytest.mark.parametrize("delta_m", [36.2, 36.25, 36.29])
def test_under_resolved_window_flagged(delta_m):
    # close to the threshold detuning the window is narrower than the 1 mW grid
    plan = power_plan(delta_m=delta_m, stop=150.0, points=151)
    eff = effective_params(plan.system, plan.drive)
    lo, hi = sorted(bistability_analysis(eff, plan.drive).fold_powers)
    assert hi - lo < 1.0
    for trace in hysteresis_sweep(plan):
        assert len(trace.switchings) <= 1
        assert all(s.under_resolved for s in trace.switchings)


def test_under_resolved_frequency_window():
    up, down = hysteresis_sweep(field_sweep_plan(80.0))
    for trace in (up, down):
        assert len(trace.switchings) <= 1
        assert all(s.under_resolved for s in trace.switchings)


def test_every_sample_satisfies_the_cubic():
    plan = power_plan()
    for trace in hysteresis_sweep(plan):
        for s in trace.samples:
            sys, drive = plan.configure(s.value)
            eff = effective_params(sys, drive)
            c_power = drive_term(sys, drive, eff)
            assert abs(shift_cubic_residual(s.shift, eff, c_power)) < 1e-9 * max(1.0, abs(c_power))
            assert s.solution.stable


def test_deterministic_and_thread_independent():
    plan = field_sweep_plan(200.0)
    a = hysteresis_sweep(plan)
    b = hysteresis_sweep(plan, workers=2)
    for x, y in zip(a, b):
        assert np.array_equal(x.shifts, y.shifts)
        assert x.switchings == y.switchings


def test_area_grows_with_power():
    areas = [hysteresis_area(*hysteresis_sweep(field_sweep_plan(p))) for p in (80.0, 140.0, 200.0)]
    assert areas[0] <= areas[1] <= areas[2]
    assert areas[2] > 0


def _trace(shifts, branches):
    samples = [TraceSample(float(i), s, b, 1, 1, None) for i, (s, b) in enumerate(zip(shifts, branches))]
    return HysteresisTrace(Direction.UP, samples)


def test_detect_switchings_jump_rule():
    L, U = Branch.LOWER, Branch.UPPER
    jump = _trace([0.0, 0.1, 0.2, 3.0, 3.1, 3.2], [L, L, L, U, U, U])
    (sw,) = detect_switchings(jump)
    assert sw.before == 2.0 and sw.value == 3.0 and sw.jump == pytest.approx(2.8)
    assert sw.under_resolved  # synthetic samples never saw two stable roots
    # a steep but continuous relabel is not a switching
    smooth = _trace([0.0, 0.1, 0.2, 0.35, 0.5, 0.6], [L, L, L, U, U, U])
    assert detect_switchings(smooth) == []
    assert detect_switchings(jump, jump_factor=100.0) == []


def test_no_stable_root_is_a_hard_error(monkeypatch):
    unstable = [SteadySolution(1.0, 1j, 1j, False, Branch.MIDDLE)]
    monkeypatch.setattr(sweep_mod, "solve_shift_cubic", lambda sys, drive: unstable)
    with pytest.raises(SweepError) as info:
        hysteresis_sweep(power_plan(direction=Direction.UP))
    assert info.value.diagnostics["value"] == 0.0


@pytest.mark.parametrize(
    "values, axis, factor",
    [((), SweepAxis.POWER, 10), ((1.0, 1.0, 2.0), SweepAxis.POWER, 10), ((1.0, 3.0, 2.0), SweepAxis.POWER, 10),
     ((-1.0, 2.0), SweepAxis.POWER, 10), ((1.0, 2.0), SweepAxis.POWER, 1.0)],
)
def test_invalid_plans(values, axis, factor):
    sys = make_system()
    with pytest.raises(InvalidInputError):
        SweepPlan(axis, values, Direction.UP, sys, make_drive(sys, 30.0, 0.0), factor)


def test_descending_values_accepted():
    plan = power_plan(direction=Direction.DOWN)
    plan = SweepPlan(plan.axis, tuple(reversed(plan.values)), Direction.DOWN, plan.system, plan.drive)
    trace = hysteresis_sweep(plan)
    assert np.all(np.diff(trace.values) < 0)
