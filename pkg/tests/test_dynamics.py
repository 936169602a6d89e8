import math

import numpy as np
import pytest

from kerrmag.dynamics import (
    IntegrationConfig,
    MeanFieldState,
    RelaxJob,
    drive_rabi,
    jacobian,
    mean_field_rhs,
    perturb,
    relax_many,
    relax_to_steady,
    stability_of,
)
from kerrmag.errors import DivergenceError, InvalidFixedPointError, InvalidInputError
from kerrmag.model import DriveTarget
from kerrmag.steady import bistability_analysis, effective_params, solve_shift_cubic

from conftest import make_drive, make_system

TWO_PI = 2 * math.pi


def rel_err(state, a0, b0):
    return math.hypot(abs(state.a - a0), abs(state.b - b0)) / math.hypot(abs(a0), abs(b0))


def window_power(sys, drive, frac=0.5):
    lo, hi = sorted(bistability_analysis(effective_params(sys, drive), drive).fold_powers)
    return lo + frac * (hi - lo)


def test_vacuum_is_fixed_without_drive(resonant):
    sys, drive = resonant
    rhs = mean_field_rhs(MeanFieldState(0j, 0j), sys, drive.replace(power=0.0))
    assert rhs.a == 0 and rhs.b == 0


@pytest.mark.parametrize("target", list(DriveTarget))
@pytest.mark.parametrize("power", [10.0, 69.5, 150.0])
def test_steady_roots_are_fixed_points(resonant, target, power):
    sys, drive = resonant
    drive = drive.replace(target=target, power=power)
    rabi = drive_rabi(sys, drive)
    for r in solve_shift_cubic(sys, drive):
        rhs = mean_field_rhs(MeanFieldState(r.a0, r.b0), sys, drive)
        # rhs is in rad/us; compare in linear MHz
        assert rhs.norm / TWO_PI < 1e-8 * (abs(r.a0) + abs(r.b0) + rabi) * max(1.0, abs(drive.omega_d - sys.omega_m) + abs(r.shift))


def test_linear_single_mode_limit():
    sys = make_system(g_m=0.0, kerr=0.0)
    drive = make_drive(sys, 3.0, 0.0).replace(rabi=5.0)
    res = relax_to_steady(MeanFieldState(0j, 0j), sys, drive)
    expected = -5.0 / complex(3.0, -2.0)
    assert res.converged
    assert abs(res.state.b - expected) < 1e-7 * abs(expected)
    assert abs(res.state.a) < 1e-12


def test_jacobian_matches_finite_differences(resonant):
    sys, drive = resonant
    rng = np.random.default_rng(7)
    for _ in range(100):
        scale = 10 ** rng.uniform(2, 7)
        v = rng.standard_normal(4) * scale
        state = MeanFieldState.from_vector(v)
        jac = jacobian(state, sys, drive)
        fd = np.empty((4, 4))
        for j in range(4):
            h = 1e-6 * max(abs(v[j]), scale)
            vp, vm = v.copy(), v.copy()
            vp[j] += h
            vm[j] -= h
            fd[:, j] = (mean_field_rhs(MeanFieldState.from_vector(vp), sys, drive).as_vector()
                        - mean_field_rhs(MeanFieldState.from_vector(vm), sys, drive).as_vector()) / (2 * h)
        tol = 1e-6 * np.max(np.abs(jac))
        assert np.all(np.abs(jac - fd) <= np.maximum(1e-6 * np.abs(jac), tol))


def test_vacuum_eigenvalues_are_bare_decay_rates(resonant):
    sys, drive = resonant
    report = stability_of(MeanFieldState(0j, 0j), sys, drive.replace(power=0.0))
    assert report.stable
    expected = sorted([-TWO_PI * sys.kappa_c] * 2 + [-TWO_PI * sys.gamma_m] * 2)
    assert sorted(report.eigen_real_parts) == pytest.approx(expected, abs=1e-10 * TWO_PI * 40)


def test_middle_root_has_one_unstable_direction(resonant):
    sys, drive = resonant
    drive = drive.replace(power=window_power(sys, drive))
    lower, middle, upper = solve_shift_cubic(sys, drive)
    for r in (lower, upper):
        assert stability_of(MeanFieldState(r.a0, r.b0), sys, drive).stable
    rep = stability_of(MeanFieldState(middle.a0, middle.b0), sys, drive)
    assert not rep.stable
    assert sum(x > 0 for x in rep.eigen_real_parts) == 1


def test_large_power_single_root_stable(resonant):
    sys, drive = resonant
    (root,) = solve_shift_cubic(sys, drive.replace(power=2000.0))
    assert root.stable


def test_non_fixed_point_rejected(resonant):
    sys, drive = resonant
    with pytest.raises(InvalidFixedPointError):
        stability_of(MeanFieldState(1e6 + 0j, 0j), sys, drive)


def test_relax_from_vacuum_below_window(resonant):
    sys, drive = resonant
    drive = drive.replace(power=40.0)
    (root,) = solve_shift_cubic(sys, drive)
    res = relax_to_steady(MeanFieldState(0j, 0j), sys, drive)
    assert res.converged
    assert rel_err(res.state, root.a0, root.b0) < 1e-6


@pytest.mark.parametrize("target", list(DriveTarget))
def test_basins_and_escape(resonant, target):
    sys, drive = resonant
    drive = drive.replace(target=target)
    drive = drive.replace(power=window_power(sys, drive, 0.4))
    roots = solve_shift_cubic(sys, drive)
    assert len(roots) == 3
    rng = np.random.default_rng(1)
    lower, middle, upper = roots
    jobs = [RelaxJob(perturb(MeanFieldState(r.a0, r.b0), 1e-3, rng), sys, drive) for r in (lower, upper)]
    # the saddle is weak this close to the fold, so the escape needs a longer budget
    jobs += [RelaxJob(perturb(MeanFieldState(middle.a0, middle.b0), 1e-6, rng), sys, drive, 400.0)
             for _ in range(4)]
    results = relax_many(jobs)
    assert rel_err(results[0].state, lower.a0, lower.b0) < 1e-6
    assert rel_err(results[1].state, upper.a0, upper.b0) < 1e-6
    for res in results[2:]:
        assert res.converged
        assert min(rel_err(res.state, r.a0, r.b0) for r in (lower, upper)) < 1e-6
        assert rel_err(res.state, middle.a0, middle.b0) > 1e-3


def test_completeness_over_initial_grid(resonant):
    """Every converged end state is a stable cubic root, and each stable root is reached."""
    sys, drive = resonant
    drive = drive.replace(power=window_power(sys, drive, 0.6))
    stable = [r for r in solve_shift_cubic(sys, drive) if r.stable]
    scale = max(abs(r.b0) for r in stable)
    grid = np.linspace(-1.5, 1.5, 5) * scale
    jobs = [RelaxJob(MeanFieldState(0j, complex(x, y)), sys, drive) for x in grid for y in grid]
    results = relax_many(jobs)
    reached = set()
    for res in results:
        assert res.converged
        errs = [rel_err(res.state, r.a0, r.b0) for r in stable]
        assert min(errs) < 1e-6
        reached.add(int(np.argmin(errs)))
    assert reached == set(range(len(stable)))


def test_frame_consistency(resonant):
    sys, drive = resonant
    drive = drive.replace(power=120.0)
    (root,) = solve_shift_cubic(sys, drive)
    res = relax_to_steady(MeanFieldState(0j, 0j), sys, drive, record_every=1)
    tail = res.trajectory[-len(res.trajectory) // 10 :]
    number = np.mean(tail[:, 3] ** 2 + tail[:, 4] ** 2)
    assert number == pytest.approx(abs(root.b0) ** 2, rel=1e-6)


def test_trajectory_columns(resonant):
    sys, drive = resonant
    res = relax_to_steady(MeanFieldState(0j, 0j), sys, drive, record_every=25)
    assert res.trajectory.shape[1] == 5
    assert np.all(np.diff(res.trajectory[:, 0]) > 0)


def test_unconverged_run_is_reported_not_raised(resonant):
    sys, drive = resonant
    res = relax_to_steady(MeanFieldState(0j, 0j), sys, drive, IntegrationConfig(max_time=0.01))
    assert not res.converged


def test_divergence_raises(resonant):
    sys, drive = resonant
    with pytest.raises(DivergenceError) as info:
        relax_to_steady(MeanFieldState(1 + 0j, 0j), sys, drive, IntegrationConfig(step=1.0, max_time=1e4))
    assert "sys" in info.value.diagnostics


@pytest.mark.parametrize(
    "kwargs",
    [dict(step=0.0), dict(step=1.0, max_time=0.5), dict(steady_tolerance=1.0), dict(perturbation_scale=0.0),
     dict(window=0)],
)
def test_integration_config_validation(kwargs):
    with pytest.raises(InvalidInputError):
        IntegrationConfig(**kwargs)


def test_batch_matches_single_runs(resonant):
    sys, drive = resonant
    drives = [drive.replace(power=p) for p in (20.0, 60.0, 100.0)]
    batch = relax_many([RelaxJob(MeanFieldState(0j, 0j), sys, d) for d in drives])
    for d, res in zip(drives, batch):
        single = relax_to_steady(MeanFieldState(0j, 0j), sys, d)
        assert single.converged and res.converged
        assert rel_err(single.state, res.state.a, res.state.b) < 1e-12
