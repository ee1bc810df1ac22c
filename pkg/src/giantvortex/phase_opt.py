"""Optimal phase shift beta of the giant-vortex ansatz.

E(beta) = min E_beta is scanned on an integer lattice of beta values, then
the minimum is refined by a root search on dE/dbeta. By the Feynman-Hellmann
principle that derivative is <g_beta | dU_beta/dbeta | g_beta>, which the
discrete minimizer satisfies exactly, so no finite differences of E enter.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .gv_solver import (SolverOptions, minimize_gv_beta, potential_beta_derivative,
                        weighted_grid)
from .numerics import Grid1D

REFINE_OPTIONS = SolverOptions()


class BracketError(RuntimeError):
    pass


@dataclass(frozen=True)
class Moments:
    V: float
    Q: float
    T: float
    mean_y: float
    mean_y3: float

    def as_dict(self):
        return dict(V=self.V, Q=self.Q, T=self.T, mean_y=self.mean_y, mean_y3=self.mean_y3)


@dataclass(frozen=True)
class OptimalPhase:
    beta_star: float
    solution: object
    e_star: float
    closed_form: float
    optimality_residual: float
    moments: Moments
    derivative: float
    scan: np.ndarray = field(repr=False)     # columns beta, E_beta
    brackets: list = field(default_factory=list)

    @property
    def g(self):
        return self.solution.g

    @property
    def y(self):
        return self.solution.y


def moments(sol):
    """V, Q, T, <y>, <y^3> of a weighted solution, all against the flat measure dy."""
    grid = sol.grid
    flat = Grid1D(grid.lo, grid.hi, grid.n)
    q = flat.quad_weights
    y, g = grid.y, sol.g
    alpha = sol.params.alpha
    V = 0.5 * alpha**2 * float(q @ (y**2 * g**2))
    Q = float(q @ g**4) / (2 * math.pi)
    T = 0.5 * float(np.sum(np.diff(g) ** 2)) / grid.h
    return Moments(V=V, Q=Q, T=T, mean_y=float(q @ (y * g**2)), mean_y3=float(q @ (y**3 * g**2)))


def beta_energy_derivative(m, beta, sol):
    """dE_beta/dbeta at the minimizer: <g | dU_beta/dbeta | g> in the annular measure."""
    dU = potential_beta_derivative(sol.y, beta, m)
    return float(sol.grid.quad_weights @ (dU * sol.g**2))


def _optimality_integral(m, beta, sol):
    e2 = m.epsilon**2
    y = sol.y
    dU = potential_beta_derivative(y, beta, m)
    # (1 + e2 y)^-1 (y + e2 y^2/2 - e2 beta/(2 O0)) = -(1 + e2 y) dU / (2 O0 e2)
    return float(sol.grid.quad_weights @ (dU * sol.g**2)) / (-2 * m.omega0 * e2)


def beta_star_closed_form(op, m):
    """Leading-order optimal phase -(2/(omega0 (s-2))) [(s-2) V - Q]."""
    V, Q = op.moments.V, op.moments.Q
    return -2.0 / (m.omega0 * (m.s - 2)) * ((m.s - 2) * V - Q)


def optimality_residual(op, m):
    """int (1 + eps^2 y)^-1 (y + eps^2 y^2 / 2 - eps^2 beta*/(2 omega0)) g*^2 dy."""
    return _optimality_integral(m, op.beta_star, op.solution)


def scan_beta(m, betas, grid=None, opts=None):
    """E_beta on a list of beta values, warm-starting each solve from the previous one."""
    grid = grid or weighted_grid(m)
    sols, prev = [], None
    for b in betas:
        prev = minimize_gv_beta(m, b, grid, opts, init=prev)
        sols.append(prev)
    return sols


def optimize_beta(m, grid=None, opts=None, window=20.0, step=1.0, xtol=1e-9):
    """Locate beta* by a coarse scan of E_beta and a derivative root search."""
    grid = grid or weighted_grid(m)
    betas = np.arange(-window, window + 0.5 * step, step)
    sols = scan_beta(m, betas, grid, opts)
    E = np.array([s.breakdown.e_total for s in sols])
    interior = [i for i in range(1, len(E) - 1) if E[i] <= E[i - 1] and E[i] <= E[i + 1]]
    brackets = [(float(betas[i - 1]), float(betas[i + 1])) for i in interior]
    i0 = int(np.argmin(E))
    if i0 in (0, len(E) - 1):
        raise BracketError(f"E_beta is minimal at the scan edge beta = {betas[i0]}; "
                           "widen the window")

    refine = REFINE_OPTIONS if opts is None else opts
    cache = {}

    def deriv(b):
        if cache:
            init = cache[min(cache, key=lambda c: abs(c - b))]
        else:
            init = sols[int(np.argmin(np.abs(betas - b)))]
        sol = minimize_gv_beta(m, b, grid, refine, init=init)
        cache[b] = sol
        return beta_energy_derivative(m, b, sol)

    a, b = float(betas[i0 - 1]), float(betas[i0 + 1])
    da, db = deriv(a), deriv(b)
    if not (da < 0 < db):
        raise BracketError(f"dE/dbeta does not change sign on [{a}, {b}] ({da:.3e}, {db:.3e})")
    beta_star = brentq(deriv, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps)
    sol = cache.get(beta_star) or minimize_gv_beta(m, beta_star, grid, refine, init=sols[i0])
    mom = moments(sol)
    closed = -2.0 / (m.omega0 * (m.s - 2)) * ((m.s - 2) * mom.V - mom.Q)
    return OptimalPhase(beta_star=float(beta_star), solution=sol, e_star=sol.breakdown.e_total,
                        closed_form=closed,
                        optimality_residual=_optimality_integral(m, beta_star, sol),
                        moments=mom, derivative=beta_energy_derivative(m, beta_star, sol),
                        scan=np.column_stack([betas, E]), brackets=brackets)
