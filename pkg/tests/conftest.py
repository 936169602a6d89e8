import pytest

from kerrmag.model import DriveConfig, DriveTarget, SystemConfig

OMEGA_C = 10000.0


def make_system(detuning=0.0, g_m=40.0, kerr=1e-13, gamma_m=2.0, kappa=(0.7, 0.7, 0.6)):
    ki, ko, kint = kappa
    return SystemConfig(OMEGA_C, OMEGA_C - detuning, ki, ko, kint, gamma_m, g_m, kerr)


def make_drive(sys, delta_m, power, c=2.0, target=DriveTarget.YIG):
    return DriveConfig(target, sys.omega_m - delta_m, power, c)


@pytest.fixture
def resonant():
    """Resonant cavity and magnon, K > 0, drive 36.2 MHz below the magnon."""
    sys = make_system()
    return sys, make_drive(sys, 36.2, 68.0)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
