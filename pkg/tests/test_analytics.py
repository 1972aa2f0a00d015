import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dissipator import analytics as an
from dissipator.model import DeviceParams
from dissipator.units import KELVIN_PER_RAD_PER_US, ghz, khz, mhz, to_mhz

rate = st.floats(1e-3, 1e3, allow_nan=False)
occ = st.floats(0.0, 5.0, allow_nan=False)


# -- exchange rates ----------------------------------------------------------

def test_parametric_coupling_examples():
    assert an.parametric_coupling(mhz(145), 0.0, ghz(2.95)) == 0.0
    g = an.parametric_coupling(mhz(145), mhz(130), ghz(2.95))
    assert to_mhz(g) == pytest.approx(145 * 130 / 2950, rel=1e-12)
    assert to_mhz(g) == pytest.approx(6.4, abs=0.05)
    assert an.parametric_coupling(mhz(145), mhz(260), ghz(2.95)) == pytest.approx(2 * g)
    with pytest.raises(ValueError):
        an.parametric_coupling(mhz(145), mhz(1), 0.0)
    with pytest.warns(RuntimeWarning):
        an.parametric_coupling(mhz(145), ghz(1.0), ghz(2.95))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        an.parametric_coupling(mhz(145), ghz(0.5), ghz(2.95))


def test_swap_rate():
    gc, eps, D = mhz(145), mhz(100), ghz(3.0)
    gp = an.parametric_coupling(gc, eps, D)
    assert an.swap_rate(0, gc, eps, D) == pytest.approx(gp)
    assert an.swap_rate(3, gc, eps, D) == pytest.approx(2 * gp)
    far = D + ghz(1.0)
    assert an.swap_rate(0, gc, eps, D, far) == pytest.approx(0.5 * ghz(1.0), rel=1e-3)
    with pytest.raises(ValueError):
        an.swap_rate(-1, gc, eps, D)


def test_rabi_probability():
    gc, eps, D = mhz(145), mhz(100), ghz(3.0)
    assert an.rabi_probability(0, gc, eps, D, D, 0.0) == 0.0
    for n in (0, 2):
        om = an.swap_rate(n, gc, eps, D, D)
        assert an.rabi_probability(n, gc, eps, D, D, math.pi / (2 * om)) == pytest.approx(1.0)
    t = np.linspace(0, 1, 5001)
    assert an.rabi_probability(0, gc, eps, D, D + mhz(5), t).max() < 1.0
    with pytest.raises(ValueError):
        an.rabi_probability(0, gc, eps, D, D, -1.0)


def test_effective_loss_examples():
    kd = mhz(60)
    assert an.effective_loss(0.0, kd).rate == 0.0
    crit = an.effective_loss(kd / 4, kd)
    assert crit.rate == pytest.approx(kd / 2) and crit.regime == an.CRITICAL
    g = kd / 40
    assert an.effective_loss(g, kd).rate == pytest.approx(4 * g ** 2 / kd, rel=0.01)
    assert an.effective_loss(kd, kd).regime == an.UNDERDAMPED
    assert an.effective_loss(g, kd).regime == an.OVERDAMPED
    with pytest.raises(ValueError):
        an.effective_loss(-1.0, kd)


def test_effective_loss_monotone_and_continuous():
    kd = mhz(60)
    gs = np.linspace(0, kd / 4, 2001)
    rates = np.array([an.effective_loss(g, kd).rate for g in gs])
    assert np.all(np.diff(rates) >= 0)
    below = an.effective_loss(kd / 4 * (1 - 1e-12), kd).rate
    assert below == pytest.approx(kd / 2, rel=1e-5)


def test_coupling_for_loss_inverts():
    kd = mhz(60)
    for g in (0.1, 5.0, 50.0):
        assert an.coupling_for_loss(an.effective_loss(g, kd).rate, kd) == pytest.approx(g, rel=1e-9)


# -- thermal occupation and temperature --------------------------------------

def test_thermal_occupation_examples():
    w = ghz(5.594)
    assert an.thermal_occupation(w, 0.115) == pytest.approx(0.107, rel=0.01)
    assert an.thermal_occupation(w, 0.077) == pytest.approx(0.032, rel=0.03)
    assert an.thermal_occupation(w, 1e-4) < 1e-100
    assert an.thermal_occupation(w, 0.0) == 0.0
    # independent evaluation from the constants table
    x = 47.9924e-3 * 5.594 / 0.115
    assert an.thermal_occupation(w, 0.115) == pytest.approx(1 / (math.exp(x) - 1), rel=1e-5)


def test_occupation_to_temperature_examples():
    w = ghz(5.594)
    assert an.occupation_to_temperature(w, 0.107) == pytest.approx(0.115, rel=0.01)
    assert an.occupation_to_temperature(w, 1 / (math.e - 1)) == pytest.approx(KELVIN_PER_RAD_PER_US * w)
    with pytest.raises(ValueError):
        an.occupation_to_temperature(w, 0.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(1.0, 20.0), st.floats(0.010, 0.300))
def test_temperature_round_trip(f_ghz, T):
    w = ghz(f_ghz)
    n = an.thermal_occupation(w, T)
    assert an.occupation_to_temperature(w, n) == pytest.approx(T, rel=1e-12)


def test_driven_cavity_temperature():
    p = DeviceParams(kappa_c=3.0)
    assert an.driven_cavity_temperature(p, 54.0) == pytest.approx(0.077, rel=0.02)
    assert an.driven_cavity_temperature(p, 0.0) == pytest.approx(p.T0)
    limit = p.omega_c / p.omega_diss * p.T_bath
    assert an.driven_cavity_temperature(p, math.inf) == pytest.approx(limit)
    assert an.driven_cavity_temperature(p, 1e12) == pytest.approx(limit, rel=1e-9)
    with pytest.raises(ValueError):
        an.driven_cavity_temperature(p.replace(kappa_c=0.0), 0.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1e4), st.floats(0.01, 0.3), st.floats(0.01, 0.3))
def test_cavity_temperature_is_weighted_mean(k, T0, Tb):
    p = DeviceParams(T0=T0, T_bath=Tb)
    T = an.driven_cavity_temperature(p, k)
    lo, hi = sorted([T0, p.omega_c / p.omega_diss * Tb])
    assert lo * (1 - 1e-12) <= T <= hi * (1 + 1e-12)


# -- dephasing ---------------------------------------------------------------

def test_photon_dephasing_examples():
    chi = khz(200)
    assert an.photon_dephasing(chi, khz(477), 0.107, 1) == pytest.approx(0.048, rel=0.05)
    assert an.photon_dephasing(chi, 57.0, 0.032, 1) == pytest.approx(0.0009, rel=0.10)
    assert an.photon_dephasing(chi, khz(477), 0.0, 2) == 0.0
    assert an.photon_dephasing(chi, 1.0, 1.0, 2) == pytest.approx(2 * an.photon_dephasing(chi, 1.0, 1.0, 1))
    with pytest.raises(ValueError):
        an.photon_dephasing(chi, 1.0, 1.0, 3)


def test_photon_dephasing_peaks_at_kappa_equal_chi():
    chi = khz(200)
    kappas = chi * np.logspace(-2, 2, 4001)
    vals = [an.photon_dephasing(chi, k, 1.0) for k in kappas]
    assert kappas[int(np.argmax(vals))] == pytest.approx(chi, rel=0.01)


def test_dephasing_budget():
    b = an.DephasingBudget(0.048, 0.124, 0.107, an.THERMAL)
    assert b.total == pytest.approx(0.172)
    with pytest.raises(ValueError):
        an.DephasingBudget(0.1, 0.1, 0.1, 3)
    with pytest.raises(ValueError):
        an.DephasingBudget(-0.1, 0.1, 0.1, 1)


def test_reset_curve_examples():
    chi, kc = khz(200), khz(477)
    assert an.reset_dephasing_curve(39.8, chi, kc, 50.9, 0.18, 1e3) == pytest.approx(0.18)
    t = an.recovery_time(39.8, chi, kc, 50.9, 0.18)
    assert t == pytest.approx(0.170, rel=0.20)
    g = an.reset_dephasing_curve(39.8, chi, kc, 50.9, 0.18, t)
    assert g == pytest.approx(1.05 * 0.18, rel=1e-9)
    # undriven: the measurement starts after an 80 ns free decay
    n_start = 39.8 * math.exp(-kc * 0.08)
    assert an.recovery_time(n_start, chi, kc, kc, 0.18) == pytest.approx(2.2, rel=0.25)
    assert an.recovery_time(0.0, chi, kc, kc, 0.18) == 0.0
    assert an.recovery_time(1.0, chi, kc, 0.0, 0.18) == math.inf


def test_reset_curve_monotone_and_bounded():
    tau = np.linspace(0, 5, 501)
    g = an.reset_dephasing_curve(39.8, khz(200), khz(477), 3.0, 0.18, tau)
    assert np.all(np.diff(g) < 0) and np.all(g >= 0.18)


# -- detailed balance --------------------------------------------------------

def test_bath_rates_validation():
    with pytest.raises(ValueError):
        an.BathRates(0.1, 0.0)
    with pytest.raises(ValueError):
        an.BathRates(-0.1, 1.0)
    assert an.BathRates.thermal(3.0, 0.1).occupation == pytest.approx(0.1)


def test_driven_balance_examples():
    cav, diss = an.BathRates(0.3, 3.0), an.BathRates(10.0, 377.0)
    r0 = an.driven_balance(cav, diss, 0.0)
    assert r0.n_c == pytest.approx(0.1) and r0.delta_n == 0.0
    equal = an.driven_balance(an.BathRates(0.3, 3.0), an.BathRates(37.7, 377.0), 50.0)
    assert equal.delta_n == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        an.driven_balance(cav, diss, -1.0)


@settings(max_examples=100, deadline=None)
@given(rate, occ, rate, occ, rate)
def test_cooling_sign_law_and_closed_form(cm, nc, dm, nd, k):
    cav, diss = an.BathRates(cm * nc, cm), an.BathRates(dm * nd, dm)
    res = an.driven_balance(cav, diss, k)
    closed = an.cooling_shift(cav, diss, k)
    assert res.delta_n == pytest.approx(closed, rel=1e-12, abs=1e-300)
    assert res.n_c - nc == pytest.approx(res.delta_n, rel=1e-6, abs=1e-12 * max(nc, nd, 1.0))
    if cm * diss.gamma_plus < cav.gamma_plus * dm and abs(nc - nd) > 1e-9:
        assert res.delta_n < 0 and an.cools(cav, diss)
    elif cm * diss.gamma_plus > cav.gamma_plus * dm and abs(nc - nd) > 1e-9:
        assert res.delta_n > 0 and not an.cools(cav, diss)


@settings(max_examples=50, deadline=None)
@given(rate, occ, rate, occ)
def test_balance_limits(cm, nc, dm, nd):
    cav, diss = an.BathRates(cm * nc, cm), an.BathRates(dm * nd, dm)
    assert an.driven_balance(cav, diss, 0.0).n_c == pytest.approx(nc, abs=1e-12)
    big = an.driven_balance(cav, diss, 1e12)
    assert abs(big.n_c - big.n_diss) < 1e-6 * max(nc, nd, 1.0)
    lo, hi = sorted([nc, nd])
    assert lo - 1e-9 <= big.n_c <= hi + 1e-9
    inf = an.driven_balance(cav, diss, math.inf)
    assert inf.n_c == pytest.approx(big.n_c, rel=1e-6, abs=1e-12)
