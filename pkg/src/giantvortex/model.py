"""Problem parameters, rescaling, trap potential, Thomas-Fermi profile and annulus.

Lengths are measured in units of the minimum point r_m of the effective
potential, so the condensate sits near x = 1. With Omega = omega0 / eps^4 the
giant-vortex annulus has width of order eps^2 and is unrolled onto the
coordinate y = (x - 1) / eps^2.
"""
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect, brentq
from scipy.special import binom


@dataclass(frozen=True)
class PhysicalParams:
    """Trap k r^s + (omega_osc^2 / 2) r^2 rotating at omega_rot; eps^-2 sets the coupling."""
    k: float
    s: float
    omega_rot: float
    omega_osc: float
    epsilon: float

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"trap stiffness k must be positive, got {self.k}")
        if not self.s > 2:
            raise ValueError(f"exponent s must exceed 2, got {self.s}")
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.omega_osc < 0:
            raise ValueError("omega_osc must be nonnegative")
        if not self.omega_rot > self.omega_osc:
            raise ValueError("untrapped: the rotation must exceed the harmonic trap frequency")

    @property
    def omega_phys(self):
        return math.sqrt(self.omega_rot**2 - self.omega_osc**2)


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless data: exponent s, speed coefficient omega0, eps and eta0."""
    s: float
    omega0: float
    epsilon: float
    eta0: float = 6.0

    def __post_init__(self):
        if not self.s > 2:
            raise ValueError(f"exponent s must exceed 2, got {self.s}")
        if not (self.omega0 > 0 and math.isfinite(self.omega0)):
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not self.eta0 > 2:
            raise ValueError(f"eta0 must exceed 2, got {self.eta0}")

    @property
    def alpha(self):
        """Harmonic frequency of the limiting 1D problem."""
        return self.omega0 * math.sqrt(self.s + 2)

    @property
    def Omega(self):
        """Rescaled angular velocity omega0 / eps^4."""
        return self.omega0 / self.epsilon**4

    @property
    def eta(self):
        """Half-width of the truncated annulus in the y variable."""
        return self.eta0 * abs(math.log(self.epsilon)) / (2 * math.sqrt(self.omega0))

    def replace(self, **kw):
        d = dict(s=self.s, omega0=self.omega0, epsilon=self.epsilon, eta0=self.eta0)
        d.update(kw)
        return ModelParams(**d)


@dataclass(frozen=True)
class TFProfile:
    mu_tf: float
    x_in: float
    x_out: float
    samples: np.ndarray  # shape (k, 2): columns x, rho

    @property
    def width(self):
        return self.x_out - self.x_in


def trap_potential_w(x, s):
    """W(x) = (x^s - 1)/s - (x^2 - 1)/2, nonnegative with its minimum W(1) = 0."""
    if not s > 2:
        raise ValueError(f"exponent s must exceed 2, got {s}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("W is defined for x >= 0 only")
    w = np.maximum(shifted_w_tail(x - 1.0, s), 0.0)
    return w if w.ndim else float(w)


_SERIES_RADIUS = 0.125
_SERIES_TERMS = 48


def shifted_w_tail(t, s, order=2, power=0):
    """Taylor tail sum_{j >= order} c_j t^(j - power) of W(1 + t) = sum_{j >= 2} c_j t^j.

    order=2, power=0 gives W(1 + t) itself. Near t = 0 the binomial series is
    summed directly, which avoids the cancellation in (x^s - 1)/s - (x^2 - 1)/2.
    """
    t = np.asarray(t, dtype=float)
    k = np.arange(2, _SERIES_TERMS + 2)
    c = binom(s, k) / s
    c[0] -= 0.5
    out = np.empty_like(t)
    small = np.abs(t) < _SERIES_RADIUS
    if np.any(small):
        ts = t[small]
        acc = np.zeros_like(ts)
        for cj in c[order - 2:][::-1]:
            acc = acc * ts + cj
        out[small] = acc * ts ** (order - power)
    big = ~small
    if np.any(big):
        tb = t[big]
        with np.errstate(divide="ignore"):
            w = np.expm1(s * np.log1p(tb)) / s - tb * (1.0 + 0.5 * tb)
        for j in range(2, order):
            w = w - c[j - 2] * tb**j
        out[big] = w / tb**power
    return out


def rescale_to_dimensionless(p):
    """Return (ModelParams, r_m) for physical parameters."""
    s, sk, om = p.s, p.s * p.k, p.omega_phys
    r_m = (om**2 / sk) ** (1.0 / (s - 2))
    Omega = sk ** (-2.0 / (s - 2)) * om ** ((s + 2) / (s - 2))
    return ModelParams(s=s, omega0=Omega * p.epsilon**4, epsilon=p.epsilon), r_m


def rescale_to_physical(m, k):
    """Inverse of rescale_to_dimensionless; omega_osc is not recoverable and set to 0."""
    if not k > 0:
        raise ValueError(f"trap stiffness k must be positive, got {k}")
    s = m.s
    om = m.Omega ** ((s - 2) / (s + 2)) * (s * k) ** (2.0 / (s + 2))
    return PhysicalParams(k=k, s=s, omega_rot=om, omega_osc=0.0, epsilon=m.epsilon)


def annulus_bounds(m):
    """Radii 1 -/+ eps^2 eta of the truncated annulus."""
    d = m.epsilon**2 * m.eta
    if 1 - d <= 0:
        raise ValueError(f"annulus inner radius 1 - eps^2 eta = {1 - d:.3g} is not positive")
    return 1.0 - d, 1.0 + d


def _w_primitive(x, s):
    """Antiderivative of x W(x)."""
    return x ** (s + 2) / (s * (s + 2)) - x**4 / 8 + (0.5 - 1.0 / s) * x**2 / 2


def _tf_support(level, s):
    """Interval where W(x) < level."""
    w = lambda x: trap_potential_w(x, s) - level
    w0 = 0.5 - 1.0 / s
    x_in = 0.0 if level >= w0 else brentq(w, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    hi = 2.0
    while w(hi) < 0:
        hi *= 2
    x_out = brentq(w, 1.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return x_in, x_out


def _tf_mass(mu, c, s):
    """int 2 pi x (mu - c W)/2 over the support, in closed form."""
    if mu <= 0:
        return 0.0
    x_in, x_out = _tf_support(mu / c, s)
    lin = 0.5 * mu * (x_out**2 - x_in**2) / 2
    quad = 0.5 * c * (_w_primitive(x_out, s) - _w_primitive(x_in, s))
    return 2 * math.pi * (lin - quad)


def tf_profile(m, n_samples=401):
    """Thomas-Fermi density rho = [mu - eps^2 Omega^2 W]_+ / 2 with unit mass."""
    eO = m.epsilon * m.Omega
    if eO < 10:
        warnings.warn(f"eps*Omega = {eO:.3g} is not large; the TF profile is a poor approximation",
                      stacklevel=2)
    c = eO**2
    mu_hi = c * trap_potential_w(2.0, m.s)
    if _tf_mass(mu_hi, c, m.s) < 1:
        raise RuntimeError("TF normalization cannot be met in the bracket [0, eps^2 Omega^2 W(2)]")
    mu = bisect(lambda mu: _tf_mass(mu, c, m.s) - 1.0, 0.0, mu_hi,
                xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)
    x_in, x_out = _tf_support(mu / c, m.s)
    x = np.linspace(x_in, x_out, n_samples)
    rho = np.maximum(0.5 * (mu - c * trap_potential_w(x, m.s)), 0.0)
    rho[0] = rho[-1] = 0.0
    return TFProfile(mu_tf=mu, x_in=x_in, x_out=x_out, samples=np.column_stack([x, rho]))


def tf_normalization(tf, m):
    """Mass of a TF profile recomputed in closed form (diagnostic)."""
    return _tf_mass(tf.mu_tf, (m.epsilon * m.Omega) ** 2, m.s)
