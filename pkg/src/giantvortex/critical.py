"""Critical speed: largest fixed point of omega0 = G(omega0).

G(omega0) = 4/(s+2) [mu - g(0)^2 / (2 pi)] is built from the limiting
minimizer at alpha = omega0 sqrt(s+2).
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .gv_solver import DEFAULT_NODES, SolverOptions, limiting_grid, minimize_gv
from .model import ModelParams

G_MAP_OPTIONS = SolverOptions()


@dataclass(frozen=True)
class CriticalSpeedResult:
    s: float
    omega_c: float
    residual: float
    fixed_points: list
    scan: np.ndarray = field(repr=False)   # columns omega0, G(omega0)

    @property
    def unique(self):
        return len(self.fixed_points) == 1


def limiting_params(s, omega0):
    """ModelParams for the limiting problem; eps does not enter it and is a placeholder."""
    return ModelParams(s=s, omega0=omega0, epsilon=0.5)


def g_map(omega0, s, opts=None, n=DEFAULT_NODES, init=None, return_solution=False):
    """G(omega0) from a fresh limiting solve."""
    m = limiting_params(s, omega0)
    grid = limiting_grid(m, n)
    sol = minimize_gv(m, grid, opts or G_MAP_OPTIONS, init=init)
    g0 = sol.g[grid.center_index()]
    G = 4.0 / (s + 2) * (sol.breakdown.mu - g0**2 / (2 * math.pi))
    return (G, sol) if return_solution else G


class _Evaluator:
    """Caches G evaluations and warm-starts each solve from the closest previous one."""

    def __init__(self, s, opts, n):
        self.s, self.opts, self.n = s, opts, n
        self.cache = {}

    def __call__(self, omega0):
        if omega0 in self.cache:
            return self.cache[omega0][0]
        init = None
        if self.cache:
            near = min(self.cache, key=lambda o: abs(math.log(o / omega0)))
            if abs(math.log(near / omega0)) < 0.5:
                init = self.cache[near][1].profile
        G, sol = g_map(omega0, self.s, self.opts, self.n, init=init, return_solution=True)
        self.cache[omega0] = (G, sol)
        return G


def _bisect(f, a, b, fa, fb):
    """Bisection down to adjacent floating point numbers."""
    while True:
        c = 0.5 * (a + b)
        if not a < c < b or (b - a) <= 2 * np.finfo(float).eps * abs(c):
            break
        fc = f(c)
        if fc == 0:
            return c, c
        if (fc < 0) == (fa < 0):
            a, fa = c, fc
        else:
            b, fb = c, fc
    return a, b


def solve_critical_speed(s, opts=None, lo=1e-3, hi=1e3, npts=40, n=DEFAULT_NODES):
    """Scan h = omega0 - G on a geometric grid, bisect every sign change, keep the largest root."""
    if not s > 2:
        raise ValueError(f"exponent s must exceed 2, got {s}")
    ev = _Evaluator(s, opts or G_MAP_OPTIONS, n)
    h = lambda o: o - ev(o)
    for attempt in range(2):
        omegas = np.geomspace(lo, hi, npts)
        hs = np.array([h(o) for o in omegas])
        if hs[0] < 0 < hs[-1]:
            break
        if attempt == 0:
            lo, hi = lo / 10, hi * 10
            npts += 10
    else:
        raise RuntimeError(f"no bracket: omega0 - G has signs {np.sign(hs[0])}, {np.sign(hs[-1])} "
                           f"at the ends of [{lo}, {hi}]")
    roots = []
    for i in np.nonzero(np.sign(hs[:-1]) * np.sign(hs[1:]) <= 0)[0]:
        a, b = omegas[i], omegas[i + 1]
        if hs[i] == 0:
            roots.append(float(a))
            continue
        if hs[i + 1] == 0:
            continue
        a, b = _bisect(h, a, b, hs[i], hs[i + 1])
        roots.append(float(a if abs(h(a)) <= abs(h(b)) else b))
    roots = sorted(set(roots))
    omega_c = roots[-1]
    scan = np.array(sorted((o, G) for o, (G, _) in ev.cache.items() if o in set(omegas)))
    return CriticalSpeedResult(s=float(s), omega_c=omega_c, residual=abs(h(omega_c)),
                               fixed_points=roots, scan=scan)
