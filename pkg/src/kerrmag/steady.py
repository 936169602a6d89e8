"""Mean-field steady states, fold points and critical powers.

The drive-induced magnon frequency shift D solves

    [(d' + D)^2 + g'^2] D = c_eff * P

with d' and g' the cavity-dressed detuning and damping of the Kittel mode.
For a YIG drive c_eff = c; for a cavity drive the cavity filters the pump
and c_eff = eta * c.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NoThresholdError, NumericalFailure
from .model import Branch, DriveConfig, DriveTarget, EffectiveParams, SteadySolution, SystemConfig

SQRT3 = math.sqrt(3.0)
DEGENERACY_TOL = 1e-12
RESIDUAL_TOL = 1e-9
LOW_EXCITATION_LIMIT = 0.01


def effective_params(sys: SystemConfig, drive: DriveConfig) -> EffectiveParams:
    delta_c = sys.omega_c - drive.omega_d
    delta_m = sys.omega_m - drive.omega_d
    eta = sys.g_m**2 / (delta_c**2 + sys.kappa_c**2)
    return EffectiveParams(
        delta_c=delta_c,
        delta_m=delta_m,
        eta=eta,
        delta_m_eff=delta_m - eta * delta_c,
        gamma_m_eff=sys.gamma_m + eta * sys.kappa_c,
    )


def rabi_from_power(drive: DriveConfig, kerr: float) -> float:
    """Rabi frequency (MHz) from 2 K |Omega|^2 = c P."""
    if drive.rabi is not None:
        return drive.rabi
    if drive.power == 0.0:
        return 0.0
    if kerr == 0.0:
        raise InvalidInputError("Rabi frequency from power is undefined for K = 0; set an explicit rabi")
    if drive.c * kerr <= 0.0:
        raise InvalidInputError(f"c ({drive.c:g}) must have the sign of K ({kerr:g})")
    return math.sqrt(drive.c * drive.power / (2.0 * kerr))


def drive_term(sys: SystemConfig, drive: DriveConfig, eff: EffectiveParams | None = None) -> float:
    """Right-hand side c_eff * P of the shift cubic."""
    if eff is None:
        eff = effective_params(sys, drive)
    if drive.rabi is not None:
        value = 2.0 * sys.kerr * drive.rabi**2
    else:
        if drive.power > 0 and drive.c * sys.kerr < 0:
            raise InvalidInputError(f"c ({drive.c:g}) must have the sign of K ({sys.kerr:g})")
        value = drive.c * drive.power
    if drive.target is DriveTarget.CAVITY:
        value *= eff.eta
    return value


# -- cubic ------------------------------------------------------------------


def _cubic(x, b, c, d):
    return ((x + b) * x + c) * x + d


def _polish(x, b, c, d, iterations=8):
    for _ in range(iterations):
        f = _cubic(x, b, c, d)
        df = (3.0 * x + 2.0 * b) * x + c
        if df == 0.0:
            break
        step = f / df
        x -= step
        if abs(step) <= 1e-15 * abs(x):
            break
    return x


def real_cubic_roots(b: float, c: float, d: float) -> tuple[list[float], bool]:
    """Real roots of x^3 + b x^2 + c x + d, ascending, and a degeneracy flag.

    Classification uses the discriminant of the depressed cubic after
    scaling the coefficients to order one; a discriminant within
    ``DEGENERACY_TOL`` of zero (relative) is treated as a double root and
    reported as two distinct roots with ``degenerate=True``.
    """
    s = max(abs(b), math.sqrt(abs(c)), abs(d) ** (1.0 / 3.0))
    if s == 0.0:
        return [0.0], True
    # divide step by step so tiny scales do not underflow through s**3
    bs, cs, ds = b / s, c / s / s, d / s / s / s
    p = cs - bs * bs / 3.0
    q = 2.0 * bs**3 / 27.0 - bs * cs / 3.0 + ds
    disc = 4.0 * p**3 + 27.0 * q**2  # negative <=> three distinct real roots
    scale = 4.0 * abs(p) ** 3 + 27.0 * q**2
    shift = -bs / 3.0
    degenerate = abs(disc) <= DEGENERACY_TOL * scale
    if scale == 0.0:
        ts = [0.0]
    elif degenerate:
        ts = sorted([3.0 * q / p, -1.5 * q / p])
    elif disc < 0.0:
        r = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * r)
        phi = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        ts = sorted(r * math.cos(phi - 2.0 * math.pi * k / 3.0) for k in range(3))
    else:
        root = math.sqrt(q * q / 4.0 + p**3 / 27.0)
        ts = [float(np.cbrt(-q / 2.0 + root) + np.cbrt(-q / 2.0 - root))]
    roots = []
    for t in ts:
        y = t + shift
        if not (degenerate and len(ts) > 1):
            y = _polish(y, bs, cs, ds)
        roots.append(y * s)
    return sorted(roots), bool(degenerate and scale != 0.0)


def shift_cubic_residual(shift: float, eff: EffectiveParams, c_power: float) -> float:
    return ((eff.delta_m_eff + shift) ** 2 + eff.gamma_m_eff**2) * shift - c_power


# -- bistability ------------------------------------------------------------


@dataclass(frozen=True)
class BistabilityReport:
    bistable: bool
    switching_shifts: tuple[float, ...]
    critical_power: float
    fold_powers: tuple[float, ...] = ()


def switching_shifts(eff: EffectiveParams) -> tuple[float, ...]:
    """Real roots of 3 D^2 + 4 d' D + d'^2 + g'^2 = 0, ascending."""
    dp, gp = eff.delta_m_eff, eff.gamma_m_eff
    disc = dp * dp - 3.0 * gp * gp
    if disc < 0.0:
        return ()
    root = math.sqrt(disc)
    return tuple(sorted(((-2.0 * dp - root) / 3.0, (-2.0 * dp + root) / 3.0)))


def is_bistable(eff: EffectiveParams, kerr_sign: float) -> bool:
    if kerr_sign > 0:
        return eff.delta_m_eff < -SQRT3 * eff.gamma_m_eff
    if kerr_sign < 0:
        return eff.delta_m_eff > SQRT3 * eff.gamma_m_eff
    return False


def critical_power(eff: EffectiveParams, target: DriveTarget, c: float) -> float:
    """Power (mW) at which the two switching points coalesce."""
    if c == 0.0:
        return math.inf
    p = 8.0 * SQRT3 * eff.gamma_m_eff**3 / (9.0 * abs(c))
    if DriveTarget(target) is DriveTarget.CAVITY:
        p = p / eff.eta if eff.eta > 0 else math.inf
    return p


def bistability_analysis(eff: EffectiveParams, drive: DriveConfig) -> BistabilityReport:
    """Bistable condition, switching shifts, fold powers and critical power.

    The sign of K is taken from the sign of ``drive.c``; the two always agree
    for a valid drive.
    """
    sign = math.copysign(1.0, drive.c) if drive.c != 0 else 0.0
    pc = critical_power(eff, drive.target, drive.c)
    if not is_bistable(eff, sign):
        return BistabilityReport(False, (), pc)
    shifts = switching_shifts(eff)
    c_eff = drive.c * (eff.eta if drive.target is DriveTarget.CAVITY else 1.0)
    folds = tuple(
        ((eff.delta_m_eff + x) ** 2 + eff.gamma_m_eff**2) * x / c_eff if c_eff else math.inf for x in shifts
    )
    return BistabilityReport(True, shifts, pc, folds)


# -- steady states ----------------------------------------------------------


def _label(roots, eff, kerr_sign, degenerate):
    n = len(roots)
    if n == 3:
        return [Branch.LOWER, Branch.MIDDLE, Branch.UPPER]
    if n == 2:
        # one of the two is the double root where the middle branch folds away
        return None
    if not is_bistable(eff, kerr_sign):
        return [Branch.LOWER]
    hi = max(abs(x) for x in switching_shifts(eff))
    return [Branch.UPPER if abs(roots[0]) >= hi else Branch.LOWER]


def solve_shift_cubic(
    sys: SystemConfig,
    drive: DriveConfig,
    eff: EffectiveParams | None = None,
    *,
    with_stability: bool = True,
) -> list[SteadySolution]:
    """All real steady states, ordered by |shift| (lower, middle, upper).

    Stability flags come from the Jacobian of the mean-field equations;
    pass ``with_stability=False`` to leave them as ``None``.
    """
    if eff is None:
        eff = effective_params(sys, drive)
    c_power = drive_term(sys, drive, eff)
    rabi = rabi_from_power(drive, sys.kerr)
    kerr_sign = math.copysign(1.0, sys.kerr) if sys.kerr != 0 else 0.0

    if c_power == 0.0:
        roots, degenerate = [0.0], False
    else:
        dp, gp = eff.delta_m_eff, eff.gamma_m_eff
        roots, degenerate = real_cubic_roots(2.0 * dp, dp * dp + gp * gp, -c_power)
    bound = RESIDUAL_TOL * max(1.0, abs(c_power))
    for x in roots:
        r = shift_cubic_residual(x, eff, c_power)
        if not abs(r) < bound:
            raise NumericalFailure(
                "cubic root polishing did not converge",
                {"root": x, "residual": r, "bound": bound, "effective": eff, "c_power": c_power},
            )
    roots = sorted(roots, key=abs)

    labels = _label(roots, eff, kerr_sign, degenerate)
    double = None
    if labels is None:
        # the double root is the one where the cubic's derivative vanishes
        dp, gp = eff.delta_m_eff, eff.gamma_m_eff
        deriv = [abs(3 * x * x + 4 * dp * x + dp * dp + gp * gp) for x in roots]
        double = int(np.argmin(deriv))
        simple = 1 - double
        labels = [None, None]
        labels[double] = Branch.MIDDLE
        labels[simple] = Branch.UPPER if simple == 1 else Branch.LOWER

    solutions = []
    for k, x in enumerate(roots):
        denom = complex(eff.delta_m_eff + x, -eff.gamma_m_eff)
        cav = complex(eff.delta_c, -sys.kappa_c)
        if drive.target is DriveTarget.YIG:
            b0 = -rabi / denom
            a0 = -sys.g_m * b0 / cav
        else:
            b0 = (sys.g_m * rabi / cav) / denom
            a0 = -(sys.g_m * b0 + rabi) / cav
        if sys.macrospin_s and abs(b0) ** 2 / (2.0 * sys.macrospin_s) > LOW_EXCITATION_LIMIT:
            warnings.warn(
                f"magnon number {abs(b0) ** 2:.3g} exceeds {LOW_EXCITATION_LIMIT:g} x 2S; "
                "the low-excitation approximation is strained",
                stacklevel=2,
            )
        solutions.append(SteadySolution(x, b0, a0, None, labels[k], degenerate and k == double))

    if with_stability:
        from .dynamics import MeanFieldState, stability_of

        flagged = []
        for sol in solutions:
            if sol.degenerate:
                stable = False
            else:
                stable = stability_of(MeanFieldState(sol.a0, sol.b0), sys, drive).stable
            flagged.append(SteadySolution(sol.shift, sol.b0, sol.a0, stable, sol.branch, sol.degenerate))
        solutions = flagged
    return solutions


# -- threshold detuning -----------------------------------------------------


@dataclass(frozen=True)
class ThresholdResult:
    detuning: float
    delta_m: float
    eta: float
    gamma_m_eff: float
    power_yig: float
    power_cavity: float


def _threshold_function(x, detuning, g_m, kappa_c, gamma_m, kerr_sign):
    delta_c = x + detuning
    eta = g_m**2 / (delta_c**2 + kappa_c**2)
    dp = x - eta * delta_c
    gp = gamma_m + eta * kappa_c
    return dp + SQRT3 * gp if kerr_sign > 0 else dp - SQRT3 * gp


def threshold_detuning(
    detuning: float,
    g_m: float,
    kappa_c: float,
    gamma_m: float,
    kerr_sign: float = 1.0,
    c: float = 2.0,
) -> ThresholdResult:
    """Magnon-drive detuning at which bistability appears, and its critical powers.

    Solves d'(delta_m) = -sqrt(3) g'(delta_m) (K > 0) or
    d'(delta_m) = +sqrt(3) g'(delta_m) (K < 0) with delta_c = delta_m + detuning.
    The equation can have several roots; the largest delta_m is returned.
    The scan starts at an upper bound where the threshold function is
    provably positive and walks down in steps of min(kappa_c, gamma_m)/8
    before bisecting to |f| < 1e-9 gamma_m.
    """
    if not (g_m > 0 and kappa_c > 0 and gamma_m > 0):
        raise InvalidInputError("g_m, kappa_c and gamma_m must be positive")
    if kerr_sign == 0:
        raise InvalidInputError("kerr_sign must be nonzero")
    args = (detuning, g_m, kappa_c, gamma_m, kerr_sign)
    span = abs(detuning) + 2.0 * g_m + 20.0 * (kappa_c + gamma_m)
    step = min(kappa_c, gamma_m) / 8.0
    grid = np.arange(span, -span - step, -step)
    values = _threshold_function(grid, *args)
    sign_change = np.nonzero(np.signbit(values[1:]) != np.signbit(values[:-1]))[0]
    if sign_change.size == 0:
        raise NoThresholdError(
            "no threshold detuning in the search interval",
            {"interval": (-span, span), "detuning": detuning},
        )
    k = int(sign_change[0])
    hi, lo = float(grid[k]), float(grid[k + 1])
    f_hi = _threshold_function(hi, *args)
    tol = 1e-9 * gamma_m
    mid = hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = _threshold_function(mid, *args)
        if abs(f_mid) < tol:
            break
        if (f_mid > 0) == (f_hi > 0):
            hi, f_hi = mid, f_mid
        else:
            lo = mid
    else:
        raise NumericalFailure("threshold bisection did not converge", {"bracket": (lo, hi)})

    delta_c = mid + detuning
    eta = g_m**2 / (delta_c**2 + kappa_c**2)
    gp = gamma_m + eta * kappa_c
    p_m = 8.0 * SQRT3 * gp**3 / (9.0 * abs(c))
    return ThresholdResult(detuning, mid, eta, gp, p_m, p_m / eta)
