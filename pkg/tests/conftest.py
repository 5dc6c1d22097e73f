import numpy as np
import pytest

from hopgeo import HopfieldEnergy, NetworkSpec, SeparablePotential, Softplus


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def make_network(rng, n, scale=1.0, zero_diagonal=False):
    A = rng.uniform(-scale, scale, size=(n, n))
    J = 0.5 * (A + A.T)
    if zero_diagonal:
        np.fill_diagonal(J, 0.0)
    return NetworkSpec(J, rng.uniform(0.5, 2.0, n), rng.uniform(-0.5, 0.5, n))


def softplus_space(n):
    return SeparablePotential(Softplus(), n)


def hopfield_energy(spec):
    return HopfieldEnergy(spec, Softplus())


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def record_acceptance(number, passed, detail):
    ACCEPTANCE[number] = (bool(passed), detail)
    return bool(passed)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
