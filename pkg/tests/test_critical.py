import math

import numpy as np
import pytest

from giantvortex.cost import cost_function_gv
from giantvortex.critical import g_map, limiting_params, solve_critical_speed
from giantvortex.gv_solver import minimize_gv
from oracles import shooting_profile


def test_g_positive_and_subcritical_at_large_speed():
    for o in (1e-3, 0.05, 1.0, 100.0):
        assert g_map(o, 4) > 0
    assert g_map(100.0, 4) / 100.0 < 1


def test_g_small_speed_exponent():
    G = {o: g_map(o, 4) for o in (1e-4, 1e-3, 1e-2)}
    lo = math.log(G[1e-3] / G[1e-4]) / math.log(10)
    hi = math.log(G[1e-2] / G[1e-3]) / math.log(10)
    assert abs(lo - 2 / 3) < 0.05
    assert abs(lo - 2 / 3) < abs(hi - 2 / 3)


@pytest.mark.parametrize("s", [3, 4, 6])
def test_bracket_signs(s):
    assert 1e-3 - g_map(1e-3, s) < 0
    assert 1e3 - g_map(1e3, s) > 0


def test_critical_speed_s4(critical4):
    res = critical4
    assert res.unique
    assert res.residual < 1e-8
    assert res.omega_c == pytest.approx(0.0460103854, rel=1e-8)
    assert res.scan.shape[1] == 2


def test_critical_speed_against_shooting(critical4):
    # G evaluated from the independent shooting solution at the computed omega_c
    oc, s = critical4.omega_c, 4
    mu, g, _ = shooting_profile(oc * math.sqrt(s + 2))
    G = 4 / (s + 2) * (mu - g(0.0) ** 2 / (2 * math.pi))
    assert abs(G - oc) < 1e-8


@pytest.mark.parametrize("s", [3, 6])
def test_critical_speed_other_exponents(s):
    res = solve_critical_speed(s)
    assert res.residual < 1e-8
    assert len(res.fixed_points) >= 1 and res.omega_c == max(res.fixed_points)


def test_positivity_equivalence(critical4):
    oc = critical4.omega_c
    for factor, positive in ((0.95, False), (1.05, True)):
        m = limiting_params(4, factor * oc)
        curve = cost_function_gv(minimize_gv(m))
        assert (curve.min_k >= 0) is positive


def test_rejects_flat_trap():
    with pytest.raises(ValueError):
        solve_critical_speed(2.0)
