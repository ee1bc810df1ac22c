"""Minimization of the 1D giant-vortex functionals.

Two problems are solved on a uniform grid:

* the limiting functional on the whole line (flat measure)
      E(g) = int 1/2 g'^2 + alpha^2/2 y^2 g^2 + g^4 / (2 pi) dy,
* the eps-dependent functional on [-eta, eta] with measure (1 + eps^2 y) dy,
      E_beta(g) = int (1 + eps^2 y) {1/2 g'^2 + P_beta g^2 + g^4 / (2 pi)} dy,
  where P_beta = U_beta + eps^2 y^3 v is the exact rotating-frame potential.

Both use the same discretization: trapezoid mass, kinetic energy from edge
differences with the measure taken at cell midpoints. The discrete gradient
is then a three-point weighted Laplacian with natural (Neumann) ends, and the
discrete chemical potential satisfies mu = E + Q exactly.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solveh_banded

from .model import shifted_w_tail
from .numerics import Grid1D, Profile1D, differentiate, integrate, make_grid

DEFAULT_NODES = 32001


class ConvergenceError(RuntimeError):
    """Raised when a solve does not meet its tolerances; carries the last iterate."""

    def __init__(self, msg, solution=None):
        super().__init__(msg)
        self.solution = solution


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-10          # sup-norm of the Euler-Lagrange defect
    energy_tol: float = 1e-14   # relative energy decrement per step
    max_iter: int = 200_000
    tau: float | None = None    # initial pseudo-time step, default 4/alpha
    quartic: bool = True        # False drops g^4 (harmonic oscillator check)
    raise_on_fail: bool = True


@dataclass(frozen=True)
class EnergyBreakdown:
    t_kin: float
    v_pot: float
    q_int: float
    e_total: float
    mu: float

    def as_dict(self):
        return dict(t_kin=self.t_kin, v_pot=self.v_pot, q_int=self.q_int,
                    e_total=self.e_total, mu=self.mu)


@dataclass(frozen=True)
class Solution1D:
    profile: Profile1D
    breakdown: EnergyBreakdown
    residual: float
    iterations: int
    converged: bool
    params: object = None
    kind: str = "limiting"          # or "weighted"
    beta: float | None = None
    quartic: bool = True
    energy_trace: np.ndarray = field(default=None, repr=False)

    @property
    def grid(self):
        return self.profile.grid

    @property
    def y(self):
        return self.profile.grid.y

    @property
    def g(self):
        return self.profile.values


# ---------------------------------------------------------------- potentials

def _ring_weight(y, eps):
    x = 1.0 + eps**2 * np.asarray(y, dtype=float)
    if np.any(x <= 0):
        raise ValueError("singular weight: 1 + eps^2 y must be positive")
    return x


def potential_u_beta(y, beta, m):
    """U_beta(y) = [alpha^2 y^2/2 - 2 O0 e^2 beta y - O0 e^4 beta y^2 + e^4 beta^2/2] / (1 + e^2 y)^2."""
    e2, O0 = m.epsilon**2, m.omega0
    y = np.asarray(y, dtype=float)
    x = _ring_weight(y, m.epsilon)
    num = (0.5 * m.alpha**2 * y**2 - 2 * O0 * e2 * beta * y
           - O0 * e2**2 * beta * y**2 + 0.5 * e2**2 * beta**2)
    return num / x**2


def potential_v(y, m):
    """Cubic remainder v with U_0 + eps^2 y^3 v equal to the exact potential at beta = 0."""
    e2, O0, s = m.epsilon**2, m.omega0, m.s
    y = np.asarray(y, dtype=float)
    x = _ring_weight(y, m.epsilon)
    t = e2 * y
    c3 = (s - 1) * (s - 2) / 6
    return O0**2 * ((s + 0.5 * (s - 1) * t) / x**2 + c3 + shifted_w_tail(t, s, order=4, power=3))


def potential_exact(y, beta, m):
    """Rotating-frame potential eps^4 Omega^2 [(x - (Omega+beta)/(Omega x))^2/2 + W(x)], x = 1+eps^2 y."""
    e2, O0 = m.epsilon**2, m.omega0
    y = np.asarray(y, dtype=float)
    x = _ring_weight(y, m.epsilon)
    t = e2 * y
    shift = 2 * y + e2 * y**2 - e2 * beta / O0
    return 0.5 * O0**2 * shift**2 / x**2 + (O0 / e2) ** 2 * shifted_w_tail(t, m.s)


def potential_beta_derivative(y, beta, m):
    """d U_beta / d beta = eps^2 (-2 O0 y - O0 eps^2 y^2 + eps^2 beta) / (1 + eps^2 y)^2."""
    e2, O0 = m.epsilon**2, m.omega0
    y = np.asarray(y, dtype=float)
    x = _ring_weight(y, m.epsilon)
    return e2 * (-2 * O0 * y - O0 * e2 * y**2 + e2 * beta) / x**2


# ---------------------------------------------------------------- grids

def limiting_half_width(alpha):
    return max(8.0 / math.sqrt(alpha), 8.0)


def limiting_grid(m, n=DEFAULT_NODES):
    """Symmetric grid on [-Y, Y], Y = max(8/sqrt(alpha), 8); n is forced odd so y=0 is a node."""
    Y = limiting_half_width(m.alpha)
    n = int(n) | 1
    return make_grid(-Y, Y, n, "unit")


def weighted_grid(m, h=None):
    """Annular grid on [-eta, eta].

    By default the spacing matches limiting_grid(m), so that energy
    differences between the two problems share their discretization error.
    """
    eta = m.eta
    if h is None:
        h = 2 * limiting_half_width(m.alpha) / (DEFAULT_NODES - 1)
    n = int(math.ceil(2 * eta / h)) | 1
    n = max(n, 17)
    return make_grid(-eta, eta, n, "annular", eps=m.epsilon)


# ---------------------------------------------------------------- discrete operator

class _Operator:
    """H g = -(1/2w)(w g')' + P g + lam g^3 on a grid, in discrete form."""

    def __init__(self, grid, pot, lam):
        self.grid = grid
        self.mass = np.asarray(grid.quad_weights)
        self.c = np.asarray(grid.edge_weight) / grid.h   # kinetic edge couplings
        self.pot = np.asarray(pot, dtype=float)
        self.lam = lam

    def kin(self, g):
        """K g, the gradient of T = 1/2 sum c (dg)^2."""
        flux = self.c * np.diff(g)
        kg = np.zeros_like(g)
        kg[:-1] -= flux
        kg[1:] += flux
        return kg

    def parts(self, g):
        T = 0.5 * np.sum(self.c * np.diff(g) ** 2)
        V = np.sum(self.mass * self.pot * g**2)
        Q = 0.5 * self.lam * np.sum(self.mass * g**4)
        return T, V, Q

    def energy(self, g):
        return sum(self.parts(g))

    def apply(self, g):
        return 0.5 * self.kin(g) / self.mass + (self.pot + self.lam * g**2) * g

    def breakdown(self, g):
        T, V, Q = self.parts(g)
        E = T + V + Q
        return EnergyBreakdown(float(T), float(V), float(Q), float(E), float(E + Q))

    def defect(self, g, mu):
        return self.apply(g) - mu * g

    def rounding_floor(self, g, mu):
        """Size of the defect that rounding alone produces at each node."""
        ag = np.abs(g)
        flux = self.c * (ag[1:] + ag[:-1])
        rows = np.zeros_like(g)
        rows[:-1] += flux
        rows[1:] += flux
        rows = 0.5 * rows / self.mass + (np.abs(self.pot) + self.lam * g**2 + abs(mu)) * ag
        return 32 * np.finfo(float).eps * float(np.max(rows[1:-1]))

    def step(self, g, tau):
        """One backward-Euler step with the cubic coefficient frozen at g."""
        n = g.size
        ab = np.zeros((2, n))
        ab[0, 1:] = -0.5 * tau * self.c
        diag = self.mass * (1.0 + tau * (self.pot + self.lam * g**2))
        diag[:-1] += 0.5 * tau * self.c
        diag[1:] += 0.5 * tau * self.c
        ab[1] = diag
        return solveh_banded(ab, self.mass * g, check_finite=False)


def _norm(g, op):
    return math.sqrt(float(np.sum(op.mass * g * g)))


def _descend(op, g, opts, tau):
    """Projected semi-implicit gradient flow with step halving on energy increase."""
    g = g / _norm(g, op)
    E = op.energy(g)
    trace = [E]
    it = 0
    converged = False
    res = math.inf
    tau_max = tau
    while it < opts.max_iter:
        it += 1
        while True:
            gn = op.step(g, tau)
            gn /= _norm(gn, op)
            En = op.energy(gn)
            if En <= E + 4 * np.finfo(float).eps * abs(E) or tau < 1e-14 * tau_max:
                break
            tau *= 0.5
        dE = (E - En) / max(abs(En), 1e-300)
        g, E = gn, En
        trace.append(E)
        if dE < opts.energy_tol:
            T, V, Q = op.parts(g)
            mu = T + V + 2 * Q
            res = float(np.max(np.abs(op.defect(g, mu)[1:-1])))
            if res < max(opts.tol, op.rounding_floor(g, mu)):
                converged = True
                break
        tau = min(2 * tau, tau_max)
    if not converged:
        T, V, Q = op.parts(g)
        res = float(np.max(np.abs(op.defect(g, T + V + 2 * Q)[1:-1])))
    return g, it, converged, res, np.array(trace)


def _finish(op, g, it, converged, res, trace, grid, m, kind, beta, opts, label):
    if np.any(g < 0):
        if np.max(-g) > 1e-12 * np.max(g):
            raise ConvergenceError(f"{label}: profile lost positivity")
        g = np.abs(g)
    imax = int(np.argmax(g))
    if imax in (0, grid.n - 1) and kind == "limiting":
        raise ConvergenceError(f"{label}: profile collapsed onto the boundary")
    sol = Solution1D(Profile1D(grid, g), op.breakdown(g), res, it, converged,
                     params=m, kind=kind, beta=beta, quartic=opts.quartic, energy_trace=trace)
    if not converged and opts.raise_on_fail:
        raise ConvergenceError(f"{label}: no convergence after {it} iterations "
                               f"(residual {res:.3e})", sol)
    return sol


def _initial(grid, alpha, init):
    if init is None:
        return (alpha / math.pi) ** 0.25 * np.exp(-0.5 * alpha * grid.y**2)
    if isinstance(init, Solution1D):
        init = init.profile
    if isinstance(init, Profile1D):
        if init.grid == grid:
            return np.array(init.values, dtype=float)
        return np.interp(grid.y, init.grid.y, init.values)
    return np.array(init, dtype=float)


def _limiting_operator(m, grid, quartic):
    return _Operator(grid, 0.5 * m.alpha**2 * grid.y**2, 1 / math.pi if quartic else 0.0)


def _weighted_operator(m, beta, grid, quartic):
    return _Operator(grid, potential_exact(grid.y, beta, m), 1 / math.pi if quartic else 0.0)


def minimize_gv(m, grid=None, opts=None, init=None):
    """Positive normalized minimizer of the limiting functional."""
    opts = opts or SolverOptions()
    grid = grid or limiting_grid(m)
    if grid.weight_kind != "unit":
        raise ValueError("the limiting problem needs a unit-weight grid")
    if min(-grid.lo, grid.hi) < 8 / math.sqrt(m.alpha) * (1 - 1e-12):
        raise ValueError("grid must cover [-8/sqrt(alpha), 8/sqrt(alpha)]")
    op = _limiting_operator(m, grid, opts.quartic)
    tau = opts.tau or 4.0 / m.alpha
    g, it, conv, res, trace = _descend(op, _initial(grid, m.alpha, init), opts, tau)
    return _finish(op, g, it, conv, res, trace, grid, m, "limiting", None, opts, "minimize_gv")


def minimize_gv_beta(m, beta, grid=None, opts=None, init=None):
    """Positive normalized minimizer of E_beta on [-eta, eta] (Neumann ends)."""
    opts = opts or SolverOptions()
    grid = grid or weighted_grid(m)
    if grid.weight_kind != "annular" or grid.eps != m.epsilon:
        raise ValueError("the weighted problem needs an annular grid with matching eps")
    op = _weighted_operator(m, beta, grid, opts.quartic)
    tau = opts.tau or 4.0 / m.alpha
    g, it, conv, res, trace = _descend(op, _initial(grid, m.alpha, init), opts, tau)
    return _finish(op, g, it, conv, res, trace, grid, m, "weighted", float(beta), opts,
                   "minimize_gv_beta")


def _check_normalized(p):
    nrm = p.norm()
    if abs(nrm - 1) > 1e-6:
        raise ValueError(f"profile is not normalized (norm {nrm:.9g})")


def energy_gv(p, m, quartic=True):
    """Energy breakdown of the limiting functional for a normalized profile."""
    if p.grid.weight_kind != "unit":
        raise ValueError("energy_gv needs a unit-weight grid")
    _check_normalized(p)
    return _limiting_operator(m, p.grid, quartic).breakdown(p.values)


def energy_gv_beta(p, beta, m, quartic=True):
    """Energy breakdown of E_beta for a profile normalized in (1 + eps^2 y) dy."""
    if p.grid.weight_kind != "annular":
        raise ValueError("energy_gv_beta needs an annular grid")
    _check_normalized(p)
    return _weighted_operator(m, beta, p.grid, quartic).breakdown(p.values)


def operator_for(sol, kind=None, beta=None):
    """Discrete Euler-Lagrange operator matching a solution."""
    kind = kind or sol.kind
    if kind == "limiting":
        return _limiting_operator(sol.params, sol.grid, sol.quartic)
    b = sol.beta if beta is None else beta
    return _weighted_operator(sol.params, b, sol.grid, sol.quartic)


def residual_variational(sol, kind=None, beta=None):
    """Sup over interior nodes of |H g - mu g| with mu = E + Q from the breakdown."""
    op = operator_for(sol, kind, beta)
    bd = op.breakdown(sol.g)
    return float(np.max(np.abs(op.defect(sol.g, bd.mu)[1:-1])))


def derivative(sol):
    """g' on the solution grid."""
    return differentiate(sol.g, sol.grid)


def virial_defect(sol):
    """2T - 2V + Q for a limiting solution (zero at the minimizer)."""
    b = sol.breakdown
    return 2 * b.t_kin - 2 * b.v_pot + b.q_int


def gaussian_profile(grid, alpha):
    """Harmonic ground state (alpha/pi)^(1/4) exp(-alpha y^2 / 2)."""
    return Profile1D(grid, (alpha / math.pi) ** 0.25 * np.exp(-0.5 * alpha * grid.y**2))
