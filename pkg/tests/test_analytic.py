import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import erf, erfc

from critwave import (ExpTailKernel, IndicatorKernel, WeightG, exp_tail_heat,
                      exp_tail_heat_dt, g_weight, g_weight_dt, indicator_heat,
                      indicator_heat_dt, kpp_decay_rate, kpp_profile)
from critwave.errors import NoMonotoneWaveError, ValidationError


# ---------------------------------------------------------------------------
# exponential-tail kernel
# ---------------------------------------------------------------------------

def test_exp_tail_initial_condition():
    k = ExpTailKernel(B=0.7, q=0.3, D=2.0)
    x = np.linspace(-10, 10, 41)
    assert np.allclose(exp_tail_heat(0.0, x, k), 0.7 * np.exp(-0.3 * np.abs(x)))


def test_exp_tail_center_formula():
    # at x = 0 both half-line terms coincide: B exp(q^2 D t) erfc(q sqrt(D t))
    k = ExpTailKernel(B=0.7, q=0.3, D=2.0)
    for t in (0.5, 1.5, 7.0):
        expected = 0.7 * math.exp(0.09 * 2 * t) * erfc(0.3 * math.sqrt(2 * t))
        assert exp_tail_heat(t, 0.0, k) == pytest.approx(expected, rel=1e-13)


def test_exp_tail_quadrature_oracle():
    k = ExpTailKernel(B=0.7, q=0.3, D=2.0)

    def oracle(t, x):
        integrand = lambda y: (0.7 * math.exp(-0.3 * abs(y))
                               * math.exp(-(x - y) ** 2 / (4 * k.D * t))
                               / math.sqrt(4 * math.pi * k.D * t))
        return quad(integrand, -np.inf, np.inf, limit=200)[0]

    for t, x in ((0.5, 0.0), (2.0, 1.3), (5.0, -4.0), (10.0, 12.0)):
        assert exp_tail_heat(t, x, k) == pytest.approx(oracle(t, x), rel=1e-10)


def test_exp_tail_maximum_principle_and_large_time():
    k = ExpTailKernel(B=0.7, q=0.3, D=1.0)
    t = np.linspace(0.0, 1500.0, 40)[:, None]
    x = np.linspace(-4000.0, 4000.0, 201)[None, :]
    vals = exp_tail_heat(t, x, k)
    assert np.all(vals <= 0.7 + 1e-15)
    assert np.all(vals >= 0.0)
    assert np.all(np.isfinite(vals))


def test_exp_tail_time_derivative():
    k = ExpTailKernel(B=0.7, q=0.3, D=2.0)
    eps = 1e-6
    for t, x in ((1.0, 0.0), (3.0, 2.5), (8.0, -6.0)):
        fd = (exp_tail_heat(t + eps, x, k) - exp_tail_heat(t - eps, x, k)) / (2 * eps)
        assert exp_tail_heat_dt(t, x, k) == pytest.approx(fd, rel=1e-7, abs=1e-12)


def test_exp_tail_derivative_lower_bound():
    # s_t >= -s / (2t): the decay of the diffused exponential tail is subheat
    for D in (1.0, 2.0, 0.5):
        k = ExpTailKernel(B=1.0, q=0.0909, D=D)
        t = np.linspace(0.5, 2000.0, 200)[:, None]
        x = np.linspace(0.0, 3000.0, 300)[None, :]
        s = exp_tail_heat(t, x, k)
        st = exp_tail_heat_dt(t, x, k)
        assert float((st + s / (2.0 * t)).min()) >= 0.0


def test_exp_tail_validation():
    with pytest.raises(ValidationError):
        ExpTailKernel(B=0.0, q=1.0)
    with pytest.raises(ValidationError):
        ExpTailKernel(B=1.0, q=-1.0)
    k = ExpTailKernel(B=1.0, q=1.0)
    with pytest.raises(ValidationError):
        exp_tail_heat(-1.0, 0.0, k)


# ---------------------------------------------------------------------------
# indicator kernel
# ---------------------------------------------------------------------------

def test_indicator_center_formula():
    k = IndicatorKernel(B=0.5)
    for t in (0.25, 2.0, 9.0):
        assert indicator_heat(t, 0.0, k) == pytest.approx(0.5 * erf(1.0 / (2 * math.sqrt(t))), rel=1e-13)


def test_indicator_mass_conservation():
    k = IndicatorKernel(B=0.5)
    x = np.linspace(-80, 80, 20001)
    for t in (0.1, 1.0, 10.0, 50.0):
        mass = np.trapezoid(indicator_heat(t, x, k), x)
        assert mass == pytest.approx(2 * 0.5, rel=1e-10)


def test_indicator_initial_limits():
    k = IndicatorKernel(B=0.5)
    assert indicator_heat(0.0, 0.5, k) == 0.5
    assert indicator_heat(0.0, 1.5, k) == 0.0
    # t -> 0 recovers the plateau and the outside
    assert indicator_heat(1e-8, 0.5, k) == pytest.approx(0.5, abs=1e-12)
    assert indicator_heat(1e-8, 1.5, k) == pytest.approx(0.0, abs=1e-12)


def test_indicator_far_tail_positive():
    # the erfc-difference form must not cancel to zero where the exact value
    # is merely tiny
    k = IndicatorKernel(B=0.5)
    val = indicator_heat(58.0, 99.0, k)
    assert 0.0 < val < 1e-15


def test_indicator_time_derivative():
    k = IndicatorKernel(B=0.5)
    eps = 1e-6
    for t, x in ((0.5, 0.0), (2.0, 0.7), (6.0, -3.0)):
        fd = (indicator_heat(t + eps, x, k) - indicator_heat(t - eps, x, k)) / (2 * eps)
        assert indicator_heat_dt(t, x, k) == pytest.approx(fd, rel=1e-7, abs=1e-12)


# ---------------------------------------------------------------------------
# weight
# ---------------------------------------------------------------------------

def test_g_weight_values_and_monotonicity():
    # delta = 1 sits at the edge of what the envelopes use; the bare weight
    # accepts it and g(0) = e
    assert g_weight(0.0, 1.0) == pytest.approx(math.e, rel=1e-15)
    assert g_weight(1e9, 0.3) == pytest.approx(1.0, abs=1e-2)
    assert g_weight(1e9, 0.3) > 1.0
    t = np.linspace(0.0, 50.0, 200)
    g = g_weight(t, 0.25)
    assert np.all(np.diff(g) < 0.0)
    assert np.allclose(g_weight_dt(t, 0.25), -g * (1 + t) ** -1.25, rtol=1e-14)


def test_weight_record_validation():
    w = WeightG(delta=0.3)
    assert w.value(0.0) == pytest.approx(math.exp(1 / 0.3))
    with pytest.raises(ValidationError):
        WeightG(delta=0.6)
    with pytest.raises(ValidationError):
        WeightG(delta=0.0)
    with pytest.raises(ValidationError):
        g_weight(1.0, 0.0)


# ---------------------------------------------------------------------------
# KPP profiles
# ---------------------------------------------------------------------------

def test_decay_rate_values():
    assert kpp_decay_rate(1.0, 1.0, 2.0) == pytest.approx(math.sqrt(2.0) - 1.0, rel=1e-15)
    assert kpp_decay_rate(1.0, 0.75, 2.0) == pytest.approx((-2.0 + math.sqrt(7.0)) / 2.0, rel=1e-15)
    with pytest.raises(ValidationError):
        kpp_decay_rate(0.0, 1.0, 2.0)


@pytest.fixture(scope="module")
def minimal_wave():
    return kpp_profile(1.0, 1.0, 2.0)


def test_profile_shape(minimal_wave):
    w = minimal_wave
    assert np.all(np.diff(w.V) < 0.0)
    assert w.value(0.0) == pytest.approx(0.5, abs=1e-8)
    assert w.value(w.xi[0] - 50.0) == pytest.approx(1.0, abs=1e-8)
    assert w.value(w.xi[-1] + 30.0) == pytest.approx(0.0, abs=1e-7)
    assert w.M > 0.0


def test_profile_below_minimal_speed_rejected():
    with pytest.raises(NoMonotoneWaveError):
        kpp_profile(1.0, 1.0, 2.0 - 0.1)


def test_profile_ode_residual(minimal_wave):
    w = minimal_wave
    vpp = np.gradient(w.Vp, w.xi)
    res = vpp + w.c * w.Vp + w.r_eff * w.V * (1.0 - w.V)
    assert np.abs(res[5:-5]).max() < 1e-6


def test_profile_tail_rate(minimal_wave):
    w = minimal_wave
    tail = (1.0 - w.V > 1e-7) & (1.0 - w.V < 1e-4)
    slope = np.polyfit(w.xi[tail], np.log(1.0 - w.V[tail]), 1)[0]
    assert slope == pytest.approx(w.lam, rel=0.01)


def test_profile_second_derivative_consistency(minimal_wave):
    w = minimal_wave
    xi = np.linspace(-10, 10, 101)
    vpp = w.second_derivative(xi)
    expected = -(w.c * w.derivative(xi) + w.r_eff * w.value(xi) * (1 - w.value(xi))) / w.d
    assert np.allclose(vpp, expected, rtol=0, atol=1e-15)


def test_profile_supercritical_speed():
    w = kpp_profile(2.0, 0.75, 3.0)  # c > 2 sqrt(d r_eff) = sqrt(6)
    assert np.all(np.diff(w.V) < 0.0)
    assert w.lam == pytest.approx(kpp_decay_rate(2.0, 0.75, 3.0), rel=1e-12)
