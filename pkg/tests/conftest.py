import numpy as np
import pytest

from floqnf.fields import BUILTIN_GUESSES, BUILTINS
from floqnf.linsys import manufacture, rotation_qspec
from floqnf.orbitframes import build_frame, refine_orbit

# filled by the acceptance tests, echoed in the terminal summary
ACCEPTANCE_LINES = []

W = np.pi * np.array([[0.0, -1.0], [1.0, 0.0]])
LN2 = np.log(2.0)


def reference_system(rstar=None):
    """Q*(t) = exp(tW), R* = diag(0, ln 2) unless given; T = 1."""
    rstar = np.diag([0.0, LN2]) if rstar is None else rstar
    return manufacture(rotation_qspec(2, 1.0), rstar)


@pytest.fixture(scope="session")
def ref_sys():
    return reference_system()


@pytest.fixture(scope="session")
def frames():
    """Refined orbits and frames for the built-in fields, built once."""
    out = {}
    for name, make in BUILTINS.items():
        f = make()
        z0, T0 = BUILTIN_GUESSES[name]
        orbit = refine_orbit(f, z0, T0)
        out[name] = (f, orbit, build_frame(f, orbit))
    return out


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
