"""Time-domain mean-field dynamics in the frame rotating at the drive.

This is the brute-force check on the cubic solver: fixed points found by
relaxing the equations of motion must coincide with the algebraic roots,
and the Jacobian decides which roots are stable. Time is in microseconds,
so a rate of x MHz enters the equations as 2*pi*x per microsecond.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, InvalidFixedPointError, InvalidInputError
from .model import DriveConfig, DriveTarget, SystemConfig

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class MeanFieldState:
    a: complex
    b: complex

    def as_vector(self) -> np.ndarray:
        return np.array([self.a.real, self.a.imag, self.b.real, self.b.imag])

    @classmethod
    def from_vector(cls, v) -> MeanFieldState:
        return cls(complex(v[0], v[1]), complex(v[2], v[3]))

    @property
    def norm(self) -> float:
        return math.hypot(abs(self.a), abs(self.b))


@dataclass(frozen=True)
class IntegrationConfig:
    """Fixed-step RK4 settings. ``step=None`` picks the step from the rates."""

    step: float | None = None
    max_time: float = 50.0
    steady_tolerance: float = 1e-11
    perturbation_scale: float = 1e-3
    window: int = 5

    def __post_init__(self):
        if self.step is not None and not self.step > 0:
            raise InvalidInputError("step must be > 0")
        if not self.max_time > (self.step or 0.0):
            raise InvalidInputError("max_time must exceed step")
        for name in ("steady_tolerance", "perturbation_scale"):
            if not 0 < getattr(self, name) < 1:
                raise InvalidInputError(f"{name} must lie in (0, 1)")
        if self.window < 1:
            raise InvalidInputError("window must be >= 1")


@dataclass
class RelaxResult:
    state: MeanFieldState
    converged: bool
    time: float
    residual: float
    steps: int
    trajectory: np.ndarray | None = field(default=None, repr=False)


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    eigen_real_parts: tuple[float, float, float, float]
    eigenvalues: tuple[complex, ...] = ()


def drive_rabi(sys: SystemConfig, drive: DriveConfig) -> float:
    # local import: steady depends on this module for stability flags
    from .steady import rabi_from_power

    return rabi_from_power(drive, sys.kerr)


def _coefficients(sys: SystemConfig, drive: DriveConfig, rabi: float):
    delta_c = sys.omega_c - drive.omega_d
    delta_m = sys.omega_m - drive.omega_d
    ca = TWO_PI * complex(-sys.kappa_c, -delta_c)
    cb = TWO_PI * complex(-sys.gamma_m, -delta_m)
    cg = -1j * TWO_PI * sys.g_m
    kk = -1j * TWO_PI * 2.0 * sys.kerr
    force = -1j * TWO_PI * rabi
    if drive.target is DriveTarget.CAVITY:
        return ca, cb, cg, kk, force, 0j
    return ca, cb, cg, kk, 0j, force


def mean_field_rhs(state: MeanFieldState, sys: SystemConfig, drive: DriveConfig) -> MeanFieldState:
    """d(A, B)/dt in the rotating frame, per microsecond."""
    ca, cb, cg, kk, fa, fb = _coefficients(sys, drive, drive_rabi(sys, drive))
    a, b = state.a, state.b
    da = ca * a + cg * b + fa
    db = (cb + kk * abs(b) ** 2) * b + cg * a + fb
    return MeanFieldState(da, db)


def _frequency_scale(sys: SystemConfig, drive: DriveConfig, state: MeanFieldState) -> float:
    delta_c = sys.omega_c - drive.omega_d
    delta_m = sys.omega_m - drive.omega_d
    shift = 2.0 * sys.kerr * abs(state.b) ** 2
    return max(sys.kappa_c, sys.gamma_m, sys.g_m, abs(delta_c), abs(delta_m + shift), abs(delta_m))


def jacobian(state: MeanFieldState, sys: SystemConfig, drive: DriveConfig) -> np.ndarray:
    """4x4 real Jacobian of the rhs in (Re A, Im A, Re B, Im B)."""
    ca, cb, cg, kk, _, _ = _coefficients(sys, drive, 0.0)
    b = state.b
    # holomorphic parts: d/dz and d/dz* of each complex component
    blocks = [
        [(ca, 0j), (cg, 0j)],
        [(cg, 0j), (cb + 2.0 * kk * abs(b) ** 2, kk * b * b)],
    ]
    jac = np.empty((4, 4))
    for i in range(2):
        for j in range(2):
            d, dc = blocks[i][j]
            s, t = d + dc, d - dc
            jac[2 * i : 2 * i + 2, 2 * j : 2 * j + 2] = [[s.real, -t.imag], [s.imag, t.real]]
    return jac


def fixed_point_residual(state: MeanFieldState, sys: SystemConfig, drive: DriveConfig) -> float:
    """Residual of the rhs relative to its natural scale (dimensionless)."""
    rhs = mean_field_rhs(state, sys, drive)
    amp = abs(state.a) + abs(state.b) + drive_rabi(sys, drive)
    if amp == 0.0:
        return 0.0
    scale = TWO_PI * max(1.0, _frequency_scale(sys, drive, state))
    return rhs.norm / (scale * amp)


def stability_of(
    fixed_point: MeanFieldState,
    sys: SystemConfig,
    drive: DriveConfig,
    residual_bound: float = 1e-8,
) -> StabilityReport:
    residual = fixed_point_residual(fixed_point, sys, drive)
    if residual > residual_bound:
        raise InvalidFixedPointError(
            "state is not a fixed point of the mean-field equations",
            {"residual": residual, "bound": residual_bound, "state": (fixed_point.a, fixed_point.b)},
        )
    eig = np.linalg.eigvals(jacobian(fixed_point, sys, drive))
    eig = eig[np.lexsort((eig.imag, eig.real))]
    real = tuple(float(x) for x in eig.real)
    return StabilityReport(bool(max(real) < 0.0), real, tuple(complex(x) for x in eig))


# -- relaxation -------------------------------------------------------------


@dataclass(frozen=True)
class RelaxJob:
    initial: MeanFieldState
    sys: SystemConfig
    drive: DriveConfig
    max_time: float | None = None  # overrides cfg.max_time for this trajectory


def _auto_step(sys: SystemConfig, drive: DriveConfig, rabi: float, initial: MeanFieldState) -> float:
    from .steady import effective_params

    eff = effective_params(sys, drive)
    c_power = 2.0 * abs(sys.kerr) * rabi**2
    if drive.target is DriveTarget.CAVITY:
        c_power *= eff.eta
    spec_scale = max(sys.kappa_c, eff.gamma_m_eff, abs(eff.delta_m_eff), sys.g_m)
    shift_bound = max(abs(2.0 * sys.kerr) * abs(initial.b) ** 2, 2.0 * abs(eff.delta_m_eff) + c_power ** (1 / 3))
    rhs_scale = max(spec_scale, abs(eff.delta_c), abs(eff.delta_m) + shift_bound)
    return min(0.01 / spec_scale, 0.5 / (TWO_PI * rhs_scale))


def relax_many(
    jobs: list[RelaxJob],
    cfg: IntegrationConfig = IntegrationConfig(),
    record_every: int = 0,
) -> list[RelaxResult]:
    """Integrate a batch of independent trajectories with classical RK4.

    Each trajectory has its own fixed step and stops once its relative
    residual stays below ``cfg.steady_tolerance`` for ``cfg.window``
    consecutive steps. ``record_every > 0`` stores (t, ReA, ImA, ReB, ImB)
    rows for the first trajectory.
    """
    # blow-ups are caught by the divergence bound, not by numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        return _relax_batch(jobs, cfg, record_every)


SCALAR_TAIL = 8


def _relax_batch(jobs, cfg, record_every):
    n = len(jobs)
    if n == 0:
        return []
    coeffs = np.empty((6, n), dtype=complex)
    h = np.empty(n)
    bound = np.empty(n)
    for k, job in enumerate(jobs):
        rabi = drive_rabi(job.sys, job.drive)
        coeffs[:, k] = _coefficients(job.sys, job.drive, rabi)
        h[k] = cfg.step if cfg.step is not None else _auto_step(job.sys, job.drive, rabi, job.initial)
        floor = min(job.sys.kappa_c, job.sys.gamma_m)
        bound[k] = 1e12 * (1.0 + job.initial.norm + rabi / floor)
    ca, cb, cg, kk, fa, fb = coeffs
    a = np.array([j.initial.a for j in jobs], dtype=complex)
    b = np.array([j.initial.b for j in jobs], dtype=complex)

    def rhs(a, b, idx):
        da = ca[idx] * a + cg[idx] * b + fa[idx]
        db = (cb[idx] + kk[idx] * (b.real**2 + b.imag**2)) * b + cg[idx] * a + fb[idx]
        return da, db

    out_a, out_b = a.copy(), b.copy()
    out_t = np.zeros(n)
    out_res = np.full(n, np.inf)
    out_steps = np.zeros(n, dtype=int)
    converged = np.zeros(n, dtype=bool)
    streak = np.zeros(n, dtype=int)
    t = np.zeros(n)
    steps = np.zeros(n, dtype=int)
    idx = np.arange(n)
    rows = []
    budget = np.array([cfg.max_time if j.max_time is None else j.max_time for j in jobs])
    max_steps = np.ceil(budget / h).astype(int)

    def retire(mask):
        sel = idx[mask]
        out_a[sel], out_b[sel] = a[mask], b[mask]
        out_t[sel], out_steps[sel] = t[mask], steps[mask]
        out_res[sel] = res[mask]
        converged[sel] = done[mask]

    def finish_scalar(j):
        """Same stepping as the vector loop, for the last few trajectories.

        Plain complex arithmetic avoids numpy's per-call overhead, which
        dominates once only one or two trajectories remain.
        """
        k = int(idx[j])
        c_a, c_b, c_g, c_k, f_a, f_b = (complex(x) for x in coeffs[:, k])
        aa, bb, tt, nst, stk = complex(a[j]), complex(b[j]), float(t[j]), int(steps[j]), int(streak[j])
        hk, limit, cap, tol, win = float(h[k]), int(max_steps[k]), float(bound[k]), cfg.steady_tolerance, cfg.window
        hypot = math.hypot

        def f(x, y):
            return c_a * x + c_g * y + f_a, (c_b + c_k * (y.real * y.real + y.imag * y.imag)) * y + c_g * x + f_b

        while True:
            k1a, k1b = f(aa, bb)
            nrm = hypot(aa.real, aa.imag, bb.real, bb.imag)
            r = hypot(k1a.real, k1a.imag, k1b.real, k1b.imag) / (TWO_PI * (1.0 + nrm))
            stk = stk + 1 if r < tol else 0
            if not math.isfinite(nrm) or nrm > cap:
                raise DivergenceError(
                    "mean-field integration diverged", {"sys": jobs[k].sys, "drive": jobs[k].drive, "time": tt}
                )
            if record_every and k == 0 and nst % record_every == 0:
                rows.append((tt, aa.real, aa.imag, bb.real, bb.imag))
            if stk >= win or nst >= limit:
                break
            k2a, k2b = f(aa + 0.5 * hk * k1a, bb + 0.5 * hk * k1b)
            k3a, k3b = f(aa + 0.5 * hk * k2a, bb + 0.5 * hk * k2b)
            k4a, k4b = f(aa + hk * k3a, bb + hk * k3b)
            aa = aa + hk / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
            bb = bb + hk / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
            tt += hk
            nst += 1
        out_a[k], out_b[k], out_t[k], out_steps[k], out_res[k] = aa, bb, tt, nst, r
        converged[k] = stk >= win

    while idx.size:
        if idx.size <= SCALAR_TAIL:
            for j in range(idx.size):
                finish_scalar(j)
            break
        hh = h[idx]
        k1a, k1b = rhs(a, b, idx)
        norm = np.sqrt(np.abs(a) ** 2 + np.abs(b) ** 2)
        res = np.sqrt(np.abs(k1a) ** 2 + np.abs(k1b) ** 2) / (TWO_PI * (1.0 + norm))
        streak = np.where(res < cfg.steady_tolerance, streak + 1, 0)
        done = streak >= cfg.window
        timeout = steps >= max_steps[idx]
        bad = ~np.isfinite(norm) | (norm > bound[idx])
        if bad.any():
            k = int(idx[bad][0])
            raise DivergenceError(
                "mean-field integration diverged",
                {"sys": jobs[k].sys, "drive": jobs[k].drive, "time": float(t[bad][0])},
            )
        if record_every and idx[0] == 0 and steps[0] % record_every == 0:
            rows.append((t[0], a[0].real, a[0].imag, b[0].real, b[0].imag))
        stop = done | timeout
        if stop.any():
            retire(stop)
            keep = ~stop
            idx, a, b, t, steps, streak = idx[keep], a[keep], b[keep], t[keep], steps[keep], streak[keep]
            k1a, k1b, hh = k1a[keep], k1b[keep], hh[keep]
            if not idx.size:
                break
        k2a, k2b = rhs(a + 0.5 * hh * k1a, b + 0.5 * hh * k1b, idx)
        k3a, k3b = rhs(a + 0.5 * hh * k2a, b + 0.5 * hh * k2b, idx)
        k4a, k4b = rhs(a + hh * k3a, b + hh * k3b, idx)
        a = a + hh / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
        b = b + hh / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
        t = t + hh
        steps = steps + 1

    results = []
    for k in range(n):
        results.append(
            RelaxResult(
                state=MeanFieldState(complex(out_a[k]), complex(out_b[k])),
                converged=bool(converged[k]),
                time=float(out_t[k]),
                residual=float(out_res[k]),
                steps=int(out_steps[k]),
            )
        )
    if record_every:
        results[0].trajectory = np.array(rows)
    return results


def relax_to_steady(
    initial: MeanFieldState,
    sys: SystemConfig,
    drive: DriveConfig,
    cfg: IntegrationConfig = IntegrationConfig(),
    record_every: int = 0,
) -> RelaxResult:
    """Integrate from ``initial`` until the state stops moving.

    Not converging within ``cfg.max_time`` is reported through
    ``converged=False`` (e.g. a limit cycle), not raised.
    """
    return relax_many([RelaxJob(initial, sys, drive)], cfg, record_every)[0]


def perturb(state: MeanFieldState, scale: float, rng: np.random.Generator) -> MeanFieldState:
    """Displace ``state`` by a random vector of relative size ``scale``."""
    direction = rng.standard_normal(4)
    direction /= np.linalg.norm(direction)
    size = scale * max(state.norm, 1e-300)
    return MeanFieldState.from_vector(state.as_vector() + size * direction)
