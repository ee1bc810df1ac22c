import math
from types import SimpleNamespace

import numpy as np
import pytest

from giantvortex.gv_solver import minimize_gv_beta, weighted_grid
from giantvortex.model import ModelParams
from giantvortex.numerics import Profile1D, make_grid, normalize
from giantvortex.phase_opt import (BracketError, Moments, beta_energy_derivative,
                                   beta_star_closed_form, moments, optimality_residual,
                                   optimize_beta)


def _fake_solution(m, grid, values):
    p = normalize(Profile1D(grid, values))
    return SimpleNamespace(grid=grid, y=grid.y, g=p.values, params=m)


def test_moments_of_gaussian():
    m = ModelParams(4, 1.0, 0.1)
    grid = make_grid(-12, 12, 4801, "annular", eps=0.01)
    sol = _fake_solution(m, grid, np.exp(-0.5 * m.alpha * grid.y**2))
    mo = moments(sol)
    # flat-measure moments of a profile normalized in the annular measure differ by O(eps^2)
    assert abs(mo.mean_y) < 1e-3
    assert mo.V == pytest.approx(m.alpha / 4, rel=1e-3)


def test_derivative_vanishes_for_even_profile_as_eps_shrinks():
    vals = []
    for eps in (0.2, 0.1, 0.05):
        m = ModelParams(4, 1.0, eps)
        grid = weighted_grid(m, h=0.005)
        sol = _fake_solution(m, grid, np.exp(-0.5 * m.alpha * grid.y**2))
        vals.append(abs(beta_energy_derivative(m, 0.0, sol)))
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 1e-4


def test_closed_form_sign_and_large_s_limit():
    m = ModelParams(4, 2.0, 0.1)
    op = SimpleNamespace(moments=Moments(V=0.1, Q=0.5, T=0.2, mean_y=0.0, mean_y3=0.0))
    assert beta_star_closed_form(op, m) > 0           # Q > (s - 2) V
    big = ModelParams(1e9, 2.0, 0.1)
    assert beta_star_closed_form(op, big) == pytest.approx(-2 * 0.1 / 2.0, rel=1e-6)


def test_optimal_phase_properties(ladder):
    for eps, (m, op) in ladder["points"].items():
        assert abs(op.optimality_residual) < 1e-6
        assert abs(op.derivative) < 1e-8
        assert abs(op.beta_star) < 3
        assert op.solution.residual < 1e-6
        assert optimality_residual(op, m) == op.optimality_residual
        E0 = minimize_gv_beta(m, 0.0, op.solution.grid, init=op.solution).breakdown.e_total
        assert op.e_star <= E0
        assert np.min(op.scan[:, 1]) >= op.e_star - 1e-12


def test_derivative_brackets_optimum(ladder):
    m, op = ladder["points"][0.1]
    from giantvortex.phase_opt import _optimality_integral
    for d in (-1.0, 1.0):
        b = op.beta_star + d
        sol = minimize_gv_beta(m, b, op.solution.grid, init=op.solution)
        assert np.sign(beta_energy_derivative(m, b, sol)) == np.sign(d)
        assert abs(_optimality_integral(m, b, sol)) > 1e4 * abs(op.optimality_residual)


def test_chemical_potential_identity(ladder):
    # mu* - (T + V + 2Q) with flat-measure moments is O(eps^2)
    d = {}
    for eps, (m, op) in ladder["points"].items():
        mo = op.moments
        d[eps] = abs(op.solution.breakdown.mu - (mo.T + mo.V + 2 * mo.Q))
        assert d[eps] < 0.1 * eps**2
    assert d[0.1] < d[0.2] / 4 and d[0.05] < d[0.1] / 4


def test_closed_form_error_is_order_eps_squared(ladder):
    pts = ladder["points"]
    diff = {eps: abs(op.closed_form - op.beta_star) for eps, (m, op) in pts.items()}
    C = diff[0.2] / 0.2**2
    assert diff[0.1] <= C * 0.1**2
    assert diff[0.05] <= C * 0.05**2


def test_energy_gap_and_mean_position_trends(ladder):
    e_gv = ladder["gv"].breakdown.e_total
    pts = ladder["points"]
    gaps = [pts[e][1].e_star - e_gv for e in (0.2, 0.1, 0.05)]
    means = [abs(pts[e][1].moments.mean_y) for e in (0.2, 0.1, 0.05)]
    assert all(g > 0 for g in gaps)
    for a, b in zip(gaps, gaps[1:]):
        assert 8 <= a / b <= 32
    for a, b in zip(means, means[1:]):
        assert 2.5 <= a / b <= 6


def test_scan_edge_raises():
    m = ModelParams(4, 1.0, 0.1)
    with pytest.raises(BracketError):
        optimize_beta(m, weighted_grid(m, h=0.01), window=20, step=40)
