"""Uniform 1D grids, trapezoid quadrature, finite differences and normalization.

Two measures are supported: the flat measure dy and the annular measure
(1 + eps^2 y) dy that appears when a thin ring of radius 1 + eps^2 y is
unrolled onto a line.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on [lo, hi] with n nodes.

    ``eps`` is None for the flat measure dy, otherwise the measure is
    (1 + eps^2 y) dy.
    """
    lo: float
    hi: float
    n: int
    eps: float | None = None

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)) or not self.lo < self.hi:
            raise ValueError(f"invalid grid range [{self.lo}, {self.hi}]")
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"grid needs an integer node count >= 3, got {self.n}")
        if self.eps is not None:
            if not 0 < self.eps < 1:
                raise ValueError(f"annular weight needs 0 < eps < 1, got {self.eps}")
            if 1 + self.eps**2 * self.lo <= 0:
                raise ValueError("annular weight 1 + eps^2 y is not positive on the grid")

    @property
    def weight_kind(self):
        return "unit" if self.eps is None else "annular"

    @property
    def h(self):
        return (self.hi - self.lo) / (self.n - 1)

    @cached_property
    def y(self):
        y = np.linspace(self.lo, self.hi, self.n)
        y.flags.writeable = False
        return y

    @cached_property
    def weight(self):
        """Density of the measure at the nodes (1 or 1 + eps^2 y)."""
        if self.eps is None:
            w = np.ones(self.n)
        else:
            w = 1.0 + self.eps**2 * self.y
        w.flags.writeable = False
        return w

    @cached_property
    def edge_weight(self):
        """Density of the measure at the cell midpoints."""
        if self.eps is None:
            w = np.ones(self.n - 1)
        else:
            w = 1.0 + self.eps**2 * 0.5 * (self.y[1:] + self.y[:-1])
        w.flags.writeable = False
        return w

    @cached_property
    def quad_weights(self):
        """Trapezoid weights times the measure density."""
        q = np.full(self.n, self.h)
        q[0] = q[-1] = 0.5 * self.h
        q *= self.weight
        q.flags.writeable = False
        return q

    def center_index(self):
        """Index of the node closest to y = 0."""
        return int(np.argmin(np.abs(self.y)))


@dataclass(frozen=True)
class Profile1D:
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"profile has shape {v.shape}, grid has {self.grid.n} nodes")
        object.__setattr__(self, "values", v)

    @property
    def y(self):
        return self.grid.y

    def norm(self):
        return np.sqrt(integrate(self.values**2, self.grid))


def make_grid(lo, hi, n, weight_kind="unit", eps=None):
    """Build a uniform grid; weight_kind is 'unit' or 'annular' (needs eps)."""
    if int(n) != n:
        raise ValueError(f"node count must be an integer, got {n}")
    if weight_kind == "unit":
        return Grid1D(float(lo), float(hi), int(n))
    if weight_kind == "annular":
        if eps is None:
            raise ValueError("annular weight needs eps")
        return Grid1D(float(lo), float(hi), int(n), float(eps))
    raise ValueError(f"unknown weight kind {weight_kind!r}")


def _check_len(f, grid):
    f = np.asarray(f)
    if f.shape[-1] != grid.n:
        raise ValueError(f"array of length {f.shape[-1]} does not match grid with {grid.n} nodes")
    return f


def integrate(f, grid):
    """Trapezoid rule against the grid's measure."""
    f = _check_len(f, grid)
    return f @ grid.quad_weights


def cumulative_integral(f, grid, from_right=False):
    """Running trapezoid integral of f (times the measure density).

    From the left the result is int_lo^y; from the right it is int_y^hi.
    """
    f = _check_len(f, grid) * grid.weight
    cells = 0.5 * grid.h * (f[1:] + f[:-1])
    out = np.zeros(grid.n)
    if from_right:
        out[:-1] = np.cumsum(cells[::-1])[::-1]
    else:
        out[1:] = np.cumsum(cells)
    return out


def differentiate(f, grid):
    """Central differences inside, second-order one-sided at the ends."""
    f = _check_len(f, grid)
    return np.gradient(f, grid.h, edge_order=2)


def normalize(p):
    """Rescale a profile to unit L2 norm in the grid's measure."""
    nrm = p.norm()
    if not np.isfinite(nrm) or nrm <= 0:
        raise ValueError("cannot normalize a zero profile")
    return Profile1D(p.grid, p.values / nrm)


def solve_tridiagonal(lower, diag, upper, rhs):
    """Thomas algorithm for many tridiagonal systems at once.

    The systems run along axis 0; every array may carry extra trailing axes
    that are broadcast together. ``lower`` and ``upper`` have length n-1.
    No pivoting, so the matrices should be diagonally dominant.
    """
    diag, rhs = np.broadcast_arrays(diag, rhs)
    n = diag.shape[0]
    cp = np.empty(diag.shape, dtype=np.result_type(diag, upper))
    dp = np.empty(rhs.shape, dtype=np.result_type(rhs, diag, lower, upper))
    cp[0] = upper[0] / diag[0]
    dp[0] = rhs[0] / diag[0]
    for i in range(1, n):
        den = diag[i] - lower[i - 1] * cp[i - 1]
        if i < n - 1:
            cp[i] = upper[i] / den
        dp[i] = (rhs[i] - lower[i - 1] * dp[i - 1]) / den
    x = dp
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x
