"""Independent reference solutions used by the tests.

Nothing here shares code with the package solvers: the limiting profile is
obtained by ODE shooting on -g''/2 + alpha^2 y^2 g/2 + g^3/pi = mu g.
"""
import math

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq


def _shoot(a, mu, alpha, y_end):
    """Integrate from y=0 with g(0)=a, g'(0)=0 until g crosses 0 or turns upward."""
    def rhs(y, u):
        g, gp = u
        return [gp, 2 * (0.5 * alpha**2 * y**2 * g + g**3 / math.pi - mu * g)]

    def cross(y, u):
        return u[0]
    cross.terminal = True
    cross.direction = -1

    def turn(y, u):
        return u[1]
    turn.terminal = True
    turn.direction = 1

    return solve_ivp(rhs, (0.0, y_end), [a, 0.0], method="DOP853", rtol=1e-13, atol=1e-15,
                     events=(cross, turn), dense_output=True)


def _mu_for_amplitude(a, alpha, y_end):
    """Eigenvalue mu for which the solution started at g(0)=a decays (bisection)."""
    lo, hi = 0.0, 0.5 * alpha + a**2 / math.pi + 1.0
    while _shoot(a, hi, alpha, y_end).t_events[0].size == 0:
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        sol = _shoot(a, mid, alpha, y_end)
        if sol.t_events[0].size:      # crossed zero: mu too large
            hi = mid
        else:
            lo = mid
    return lo


def _decaying_solution(a, alpha, y_end):
    mu = _mu_for_amplitude(a, alpha, y_end)
    sol = _shoot(a, mu, alpha, y_end)
    y_stop = sol.t[-1]
    return mu, sol, y_stop


def _mass(a, alpha, y_end):
    mu, sol, y_stop = _decaying_solution(a, alpha, y_end)
    val, _ = quad(lambda y: sol.sol(y)[0] ** 2, 0.0, y_stop, limit=400, epsabs=1e-14, epsrel=1e-13)
    return 2 * val


def shooting_profile(alpha, y_end=None):
    """Normalized even positive solution; returns (mu, callable g on |y| <= y_stop, y_stop)."""
    if y_end is None:
        y_end = max(8 / math.sqrt(alpha), 8.0)
    a_lin = (alpha / math.pi) ** 0.25
    lo, hi = 1e-3 * a_lin, a_lin
    a = brentq(lambda a: _mass(a, alpha, y_end) - 1.0, lo, hi, xtol=1e-15, rtol=1e-14)
    mu, sol, y_stop = _decaying_solution(a, alpha, y_end)

    def g(y):
        y = np.abs(np.asarray(y, dtype=float))
        out = np.zeros_like(y)
        inside = y <= y_stop
        out[inside] = sol.sol(y[inside])[0]
        return out
    return mu, g, y_stop
