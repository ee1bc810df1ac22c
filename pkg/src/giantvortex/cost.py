"""Potential functions F, F^gv, cost functions K = g^2/2 + F, and bulk regions.

F^gv(y) = -2 omega0 int_y^inf t g_gv^2 dt for the limiting profile, and
F(y) = 2 omega0 int_{-eta}^y (1 + eps^2 t)^-1 (t + eps^2 t^2/2 - eps^2 beta*/(2 omega0)) g*^2 dt
at the optimal phase. Both vanish at the two ends of their interval (by
parity, respectively by the optimality condition) and have one interior
minimum where the integrand changes sign.

The primitives are accumulated from the nearer end on each side of that
minimum: every partial sum then adds terms of one sign, so small values of F
in the tails keep their relative accuracy and K can be sign-checked there.
The mismatch of the two one-sided sums is reported as ``boundary_defect``;
it equals the value of the one-sided primitive at the far end.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import differentiate


@dataclass(frozen=True)
class BulkRegion:
    kind: str          # "A_bulk" or "A_gt"
    lo: float
    hi: float
    threshold: float

    def contains(self, y):
        y = np.asarray(y)
        return (y >= self.lo) & (y <= self.hi)


@dataclass(frozen=True)
class CostCurve:
    kind: str                      # "limiting" or "weighted"
    ys: np.ndarray = field(repr=False)
    g: np.ndarray = field(repr=False)
    f_vals: np.ndarray = field(repr=False)
    k_vals: np.ndarray | None = field(default=None, repr=False)
    min_k: float = math.nan
    argmin_k: float = math.nan
    region: tuple = (math.nan, math.nan)
    boundary_defect: float = 0.0
    omega0: float = math.nan
    epsilon: float | None = None
    k_floor_ratio: float = math.nan      # min of K / g^2 over the region
    k_at_zero: float = math.nan
    k_at_zero_closed: float = math.nan

    def report(self):
        return dict(kind=self.kind, min_k=self.min_k, argmin=self.argmin_k,
                    region=list(self.region), omega0=self.omega0, epsilon=self.epsilon,
                    boundary_defect=self.boundary_defect, k_floor_ratio=self.k_floor_ratio)


def _corrected_cumulative(f, h, fp):
    """Left and right running trapezoid sums with the h^2/12 end correction."""
    cells = 0.5 * h * (f[1:] + f[:-1])
    left = np.zeros_like(f)
    left[1:] = np.cumsum(cells)
    right = np.zeros_like(f)
    right[:-1] = np.cumsum(cells[::-1])[::-1]
    left -= h**2 / 12 * (fp - fp[0])
    right -= h**2 / 12 * (fp[-1] - fp)
    return left, right


def _two_sided_primitive(f, grid):
    """Primitive of f vanishing at both ends, each side summed from its own end.

    Returns (F, defect) with defect = int_lo^hi f.
    """
    fp = differentiate(f, grid)
    left, right = _corrected_cumulative(f, grid.h, fp)
    k = int(np.argmin(left))
    F = np.where(np.arange(f.size) <= k, left, -right)
    return F, float(left[-1])


def potential_function_gv(sol, omega0=None):
    """F^gv on the limiting grid; its K part is left empty."""
    omega0 = sol.params.omega0 if omega0 is None else omega0
    y, g = sol.y, sol.g
    F, total = _two_sided_primitive(2 * omega0 * y * g**2, sol.grid)
    # the defining primitive is anchored at +inf, so its value at -Y_max is -total
    return CostCurve(kind="limiting", ys=y, g=g, f_vals=np.minimum(F, 0.0),
                     boundary_defect=-total, omega0=omega0,
                     region=(float(y[0]), float(y[-1])))


def potential_function_gv_alt(sol, omega0=None):
    """F^gv rewritten with the Euler-Lagrange equation (no quadrature)."""
    omega0 = sol.params.omega0 if omega0 is None else omega0
    s = sol.params.s
    c = omega0 * (s + 2)
    y, g = sol.y, sol.g
    gp = differentiate(g, sol.grid)
    mu = sol.breakdown.mu
    return -gp**2 / c + (omega0 * y**2 + g**2 / (math.pi * c) - 2 * mu / c) * g**2


def kgv_at_zero_closed(sol, omega0=None):
    """[1/2 + g(0)^2/(pi omega0 (s+2)) - 2 mu/(omega0 (s+2))] g(0)^2."""
    omega0 = sol.params.omega0 if omega0 is None else omega0
    c = omega0 * (sol.params.s + 2)
    g0 = sol.g[sol.grid.center_index()]
    return (0.5 + g0**2 / (math.pi * c) - 2 * sol.breakdown.mu / c) * g0**2


def _with_k(curve, region):
    K = 0.5 * curve.g**2 + curve.f_vals
    lo, hi = region
    mask = (curve.ys >= lo) & (curve.ys <= hi)
    if not np.any(mask):
        raise ValueError(f"probe region [{lo}, {hi}] contains no grid node")
    idx = np.nonzero(mask)[0]
    i = idx[np.argmin(K[idx])]
    g2 = curve.g[idx] ** 2
    pos = g2 > 0
    ratio = float(np.min(K[idx][pos] / g2[pos])) if np.any(pos) else math.nan
    return dict(k_vals=K, min_k=float(K[i]), argmin_k=float(curve.ys[i]),
                region=(float(lo), float(hi)), k_floor_ratio=ratio)


def cost_function_gv(sol, omega0=None, region=None):
    """K^gv = g^2/2 + F^gv with its minimum over ``region`` (default: whole grid)."""
    from dataclasses import replace
    curve = potential_function_gv(sol, omega0)
    region = region or (curve.ys[0], curve.ys[-1])
    c = sol.grid.center_index()
    extra = _with_k(curve, region)
    return replace(curve, **extra, k_at_zero=float(extra["k_vals"][c]),
                   k_at_zero_closed=float(kgv_at_zero_closed(sol, omega0)))


def potential_function_eps(op, m):
    """F at the optimal phase on [-eta, eta]; its K part is left empty."""
    sol = op.solution
    e2, O0, b = m.epsilon**2, m.omega0, op.beta_star
    y, g = sol.y, sol.g
    f = 2 * O0 * (y + 0.5 * e2 * y**2 - e2 * b / (2 * O0)) / (1 + e2 * y) * g**2
    F, total = _two_sided_primitive(f, sol.grid)
    return CostCurve(kind="weighted", ys=y, g=g, f_vals=np.minimum(F, 0.0),
                     boundary_defect=total, omega0=O0, epsilon=m.epsilon,
                     region=(float(y[0]), float(y[-1])))


def cost_function_eps(op, m, region=None):
    """K = g*^2/2 + F, probed on A_> unless another region is given."""
    from dataclasses import replace
    curve = potential_function_eps(op, m)
    if region is None:
        r = bulk_region(op.solution, m, "A_gt")
        region = (r.lo, r.hi)
    return replace(curve, **_with_k(curve, region))


def _level_interval(y, v, level):
    """Connected interval around argmax v where v >= level, ends interpolated."""
    i = int(np.argmax(v))
    if v[i] < level:
        raise ValueError(f"empty region: threshold {level:.6g} exceeds the maximum {v[i]:.6g}")
    lo_i = i
    while lo_i > 0 and v[lo_i - 1] >= level:
        lo_i -= 1
    hi_i = i
    while hi_i < len(v) - 1 and v[hi_i + 1] >= level:
        hi_i += 1
    lo = y[lo_i]
    if lo_i > 0:
        a, b = v[lo_i - 1], v[lo_i]
        lo = y[lo_i - 1] + (level - a) / (b - a) * (y[lo_i] - y[lo_i - 1])
    hi = y[hi_i]
    if hi_i < len(v) - 1:
        a, b = v[hi_i], v[hi_i + 1]
        hi = y[hi_i] + (a - level) / (a - b) * (y[hi_i + 1] - y[hi_i])
    return float(lo), float(hi)


def bulk_region(sol, m, kind="A_bulk", a=1.0, threshold=None):
    """A_bulk = {g_gv >= |ln eps|^-a} or A_gt = {g*^2 >= eta^6 max g*^2(+-eta)}.

    ``threshold`` overrides the defining level (on g for A_bulk, on g^2 for A_gt).
    """
    y, g = sol.y, sol.g
    if kind == "A_bulk":
        level = abs(math.log(m.epsilon)) ** (-a) if threshold is None else threshold
        lo, hi = _level_interval(y, g, level)
    elif kind == "A_gt":
        level = m.eta**6 * max(g[0] ** 2, g[-1] ** 2) if threshold is None else threshold
        lo, hi = _level_interval(y, g**2, level)
    else:
        raise ValueError(f"unknown region kind {kind!r}")
    return BulkRegion(kind=kind, lo=lo, hi=hi, threshold=float(level))


def sup_difference(curve, reference, region):
    """sup |K - K_ref| over region, with K_ref interpolated onto the curve's nodes."""
    from scipy.interpolate import CubicSpline
    lo, hi = region
    mask = (curve.ys >= lo) & (curve.ys <= hi)
    ref = CubicSpline(reference.ys, reference.k_vals)(curve.ys[mask])
    return float(np.max(np.abs(curve.k_vals[mask] - ref)))
