"""Cross-check of the cubic solver against time integration.

Every stable root must be an attractor (relaxing from a slightly perturbed
start returns to it) and every middle root must be a saddle (a tiny kick
sends the state away, normally onto an outer root). Escapes that end on a
self-oscillation instead of a fixed point are recorded as findings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import IntegrationConfig, MeanFieldState, RelaxJob, perturb, relax_many, stability_of
from .model import Branch, DriveConfig, DriveTarget, SystemConfig
from .steady import bistability_analysis, effective_params, solve_shift_cubic

REL_TOL = 1e-6
ESCAPE_KICK = 1e-6


@dataclass(frozen=True)
class OracleCase:
    sys: SystemConfig
    drive: DriveConfig


@dataclass
class OracleReport:
    configs: int = 0
    three_root_configs: int = 0
    stable_roots: int = 0
    reproduced: int = 0
    middle_roots: int = 0
    middle_unstable: int = 0
    middle_escaped: int = 0
    max_relative_error: float = 0.0
    failures: list[dict] = field(default_factory=list)
    limit_cycles: list[dict] = field(default_factory=list)  # findings, not failures

    @property
    def passed(self) -> bool:
        return (
            self.reproduced == self.stable_roots
            and self.middle_unstable == self.middle_roots
            and self.middle_escaped == self.middle_roots
        )

    def as_dict(self) -> dict:
        return {
            "configs": self.configs,
            "three_root_configs": self.three_root_configs,
            "stable_roots": self.stable_roots,
            "reproduced": self.reproduced,
            "middle_roots": self.middle_roots,
            "middle_unstable": self.middle_unstable,
            "middle_escaped": self.middle_escaped,
            "max_relative_error": self.max_relative_error,
            "passed": self.passed,
            "failures": self.failures,
            "limit_cycles": self.limit_cycles,
        }


def _scale(rng, value, spread):
    return value * rng.uniform(1.0 - spread, 1.0 + spread)


def sample_case(
    base_sys: SystemConfig,
    base_drive: DriveConfig,
    rng: np.random.Generator,
    spread: float = 0.5,
    target: DriveTarget | None = None,
) -> OracleCase:
    """Randomise a configuration around ``base`` and pick a drive power.

    Bistable draws get a power from the inner 10-90% of the fold window so
    three roots are present; the rest get 0.2-2x the critical power.
    """
    detuning = base_sys.detuning
    delta_m = base_sys.omega_m - base_drive.omega_d
    sys = base_sys.replace(
        g_m=_scale(rng, base_sys.g_m, spread),
        kappa_i=_scale(rng, base_sys.kappa_i, spread),
        kappa_o=_scale(rng, base_sys.kappa_o, spread),
        kappa_int=_scale(rng, base_sys.kappa_int, spread),
        gamma_m=_scale(rng, base_sys.gamma_m, spread),
        kerr=math.copysign(10 ** rng.uniform(-15, -12), base_sys.kerr),
    )
    sys = sys.replace(omega_m=sys.omega_c - _scale(rng, detuning, spread))
    drive = base_drive.replace(
        target=target or base_drive.target,
        omega_d=sys.omega_m - _scale(rng, delta_m, spread),
        c=_scale(rng, base_drive.c, spread),
        rabi=None,
    )
    eff = effective_params(sys, drive)
    report = bistability_analysis(eff, drive)
    if report.bistable and rng.random() < 0.75:
        lo, hi = sorted(report.fold_powers)
        power = lo + rng.uniform(0.1, 0.9) * (hi - lo)
    else:
        power = report.critical_power * rng.uniform(0.2, 2.0)
    return OracleCase(sys, drive.replace(power=power))


def _relative(state: MeanFieldState, a0: complex, b0: complex) -> float:
    ref = math.hypot(abs(a0), abs(b0))
    return math.hypot(abs(state.a - a0), abs(state.b - b0)) / ref


def _settle_time(rate: float, cfg: IntegrationConfig) -> float:
    """Time for a mode with growth/decay ``rate`` (1/us) to cover ~17 e-folds."""
    return max(cfg.max_time, 40.0 / rate) if rate > 0 else cfg.max_time


def cross_check(
    cases: list[OracleCase],
    rng: np.random.Generator,
    cfg: IntegrationConfig = IntegrationConfig(),
) -> OracleReport:
    report = OracleReport(configs=len(cases))
    jobs, meta = [], []
    for ci, case in enumerate(cases):
        roots = solve_shift_cubic(case.sys, case.drive)
        if len(roots) == 3:
            report.three_root_configs += 1
        stable = [r for r in roots if r.stable]
        # slowest decay among the attractors bounds how long settling takes
        slowest = min(
            (-max(stability_of(MeanFieldState(r.a0, r.b0), case.sys, case.drive).eigen_real_parts) for r in stable),
            default=0.0,
        )
        for r in roots:
            start = MeanFieldState(r.a0, r.b0)
            if r.stable:
                report.stable_roots += 1
                budget = _settle_time(slowest, cfg)
                jobs.append(RelaxJob(perturb(start, cfg.perturbation_scale, rng), case.sys, case.drive, budget))
                meta.append(("stable", ci, r, stable))
            elif r.branch is Branch.MIDDLE:
                report.middle_roots += 1
                rep = stability_of(start, case.sys, case.drive)
                if not rep.stable:
                    report.middle_unstable += 1
                else:
                    report.failures.append({"case": ci, "kind": "middle root classified stable"})
                growth = max(rep.eigen_real_parts)
                # ~20 e-folds to leave the saddle, then settle on an attractor
                budget = (20.0 / growth if growth > 0 else cfg.max_time) + _settle_time(slowest, cfg)
                jobs.append(RelaxJob(perturb(start, ESCAPE_KICK, rng), case.sys, case.drive, budget))
                meta.append(("middle", ci, r, stable))

    results = relax_many(jobs, cfg)
    for res, (kind, ci, root, stable) in zip(results, meta):
        if kind == "stable":
            err = _relative(res.state, root.a0, root.b0)
            report.max_relative_error = max(report.max_relative_error, err)
            if res.converged and err < REL_TOL:
                report.reproduced += 1
            else:
                report.failures.append(
                    {"case": ci, "kind": "stable root not reproduced", "error": err, "converged": res.converged}
                )
        else:
            errs = [_relative(res.state, s.a0, s.b0) for s in stable]
            left = _relative(res.state, root.a0, root.b0)
            if res.converged and min(errs, default=math.inf) < REL_TOL and left > 1e-3:
                report.middle_escaped += 1
            elif not res.converged and left > 1e-3:
                # left the saddle but still moving: a self-oscillating attractor
                report.middle_escaped += 1
                report.limit_cycles.append({"case": ci, "residual": res.residual, "time": res.time})
            else:
                report.failures.append(
                    {"case": ci, "kind": "middle root did not escape", "converged": res.converged}
                )
    return report
