import pytest

from giantvortex.critical import solve_critical_speed
from giantvortex.gv_solver import minimize_gv
from giantvortex.model import ModelParams
from giantvortex.phase_opt import optimize_beta

LADDER = (0.2, 0.1, 0.05)


@pytest.fixture(scope="session")
def critical4():
    return solve_critical_speed(4)


@pytest.fixture(scope="session")
def ladder(critical4):
    """Optimal-phase solves at s = 4, omega0 = 1.2 omega_c on the eps ladder, plus g_gv."""
    omega0 = 1.2 * critical4.omega_c
    gv = minimize_gv(ModelParams(4, omega0, 0.1))
    out = {}
    for eps in LADDER:
        m = ModelParams(4, omega0, eps)
        out[eps] = (m, optimize_beta(m))
    return dict(omega0=omega0, gv=gv, points=out)
