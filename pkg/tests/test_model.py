import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from giantvortex.model import (ModelParams, PhysicalParams, annulus_bounds, rescale_to_dimensionless,
                               rescale_to_physical, shifted_w_tail, tf_normalization, tf_profile,
                               trap_potential_w)


def test_w_examples():
    assert trap_potential_w(1.0, 4) == 0.0
    assert trap_potential_w(0.0, 4) == pytest.approx(0.25, abs=1e-15)
    assert trap_potential_w(2.0, 3) == pytest.approx(7 / 3 - 1.5, abs=1e-14)


def test_w_rejects_bad_input():
    with pytest.raises(ValueError):
        trap_potential_w(-0.1, 4)
    with pytest.raises(ValueError):
        trap_potential_w(1.0, 2.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 5), st.floats(2.05, 12))
def test_w_nonnegative(x, s):
    assert trap_potential_w(x, s) >= 0


@pytest.mark.parametrize("s", [2.5, 3, 4, 6.5])
@pytest.mark.parametrize("t", [-0.3, -0.126, -0.124, -1e-3, 1e-7, 0.05, 0.1249, 0.1251, 0.7])
def test_w_near_minimum_against_high_precision(s, t):
    mpmath.mp.dps = 50
    x = 1 + mpmath.mpf(t)
    ref = (x**s - 1) / s - (x**2 - 1) / 2
    assert float(shifted_w_tail(t, s)) == pytest.approx(float(ref), rel=1e-13, abs=1e-300)


def test_w_tail_orders():
    # sum_{j>=4} c_j t^(j-3) tends to c_4 t with c_4 = (s-1)(s-2)(s-3)/24
    s, t = 5.0, 1e-6
    assert float(shifted_w_tail(t, s, order=4, power=3)) == pytest.approx(
        (s - 1) * (s - 2) * (s - 3) / 24 * t, rel=1e-5)


def test_rescale_examples():
    p = PhysicalParams(k=1, s=4, omega_rot=math.sqrt(2), omega_osc=0, epsilon=0.1)
    assert rescale_to_dimensionless(p)[1] == pytest.approx(math.sqrt(0.5), rel=1e-14)
    p = PhysicalParams(k=0.25, s=4, omega_rot=1, omega_osc=0, epsilon=0.1)
    assert rescale_to_dimensionless(p)[1] == pytest.approx(1.0, rel=1e-14)


def test_rescale_to_physical_example():
    m = ModelParams(4, 1.0, 0.1)
    p = rescale_to_physical(m, 1.0)
    assert p.omega_osc == 0.0
    assert p.omega_rot == pytest.approx((1e4) ** (1 / 3) * 4 ** (1 / 3), rel=1e-13)
    assert rescale_to_dimensionless(p)[0].omega0 == pytest.approx(1.0, rel=1e-12)


def test_harmonic_part_reduces_rotation():
    p = PhysicalParams(k=1, s=4, omega_rot=1.5, omega_osc=0.5, epsilon=0.1)
    assert p.omega_phys == pytest.approx(math.sqrt(2), rel=1e-15)
    with pytest.raises(ValueError, match="untrapped"):
        PhysicalParams(k=1, s=4, omega_rot=0.5, omega_osc=0.5, epsilon=0.1)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 10), st.floats(2.2, 10), st.floats(0.2, 50), st.floats(0.02, 0.9))
def test_rescale_round_trip(k, s, om, eps):
    p = PhysicalParams(k=k, s=s, omega_rot=om, omega_osc=0.0, epsilon=eps)
    m, _ = rescale_to_dimensionless(p)
    back = rescale_to_physical(m, k)
    assert back.omega_rot == pytest.approx(om, rel=1e-12)
    assert (back.k, back.s, back.epsilon, back.omega_osc) == (k, s, eps, 0.0)


@pytest.mark.parametrize("kw", [dict(s=2.0), dict(omega0=0.0), dict(epsilon=1.0),
                                dict(epsilon=0.0), dict(eta0=2.0), dict(omega0=math.inf)])
def test_model_params_validation(kw):
    base = dict(s=4, omega0=1.0, epsilon=0.1)
    base.update(kw)
    with pytest.raises(ValueError):
        ModelParams(**base)


def test_eta_and_annulus():
    m = ModelParams(4, 1.0, 0.1, 6)
    assert m.eta == pytest.approx(3 * math.log(10), rel=1e-14)
    lo, hi = annulus_bounds(m)
    assert lo + hi == pytest.approx(2.0, abs=1e-15)
    assert ModelParams(4, 1.0, 0.999999).eta < 1e-5


def test_annulus_inner_radius_must_be_positive():
    with pytest.raises(ValueError):
        annulus_bounds(ModelParams(4, 1e-4, 0.6))


def _tf_mass_quadrature(tf, m):
    c = (m.epsilon * m.Omega) ** 2
    rho = lambda x: max(0.5 * (tf.mu_tf - c * trap_potential_w(x, m.s)), 0.0)
    val, _ = quad(lambda x: 2 * math.pi * x * rho(x), tf.x_in, tf.x_out, epsabs=1e-14,
                  epsrel=1e-13, limit=200)
    return val


def test_tf_normalization():
    m = ModelParams(4, 1.0, 0.2)
    tf = tf_profile(m)
    assert abs(tf_normalization(tf, m) - 1) < 1e-8
    assert abs(_tf_mass_quadrature(tf, m) - 1) < 1e-8
    assert tf.x_in < 1 < tf.x_out
    assert tf.samples.shape == (401, 2)
    assert np.all(tf.samples[:, 1] >= 0)


def test_tf_width_exponent():
    widths, scales = [], []
    for eps in (0.2, 0.1, 0.05):
        m = ModelParams(4, 1.0, eps)
        widths.append(tf_profile(m).width)
        scales.append(m.epsilon * m.Omega)
    slope = np.polyfit(np.log(scales), np.log(widths), 1)[0]
    assert abs(slope + 2 / 3) < 0.05


def test_tf_warns_when_not_thomas_fermi():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        tf = tf_profile(ModelParams(4, 0.5, 0.5))
    assert any("poor approximation" in str(x.message) for x in w)
    assert abs(tf_normalization(tf, ModelParams(4, 0.5, 0.5)) - 1) < 1e-8


def test_tf_bracket_failure():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(RuntimeError):
            tf_profile(ModelParams(4, 1e-4, 0.5))
