import math

import numpy as np
import pytest

from dissipator import analytics
from dissipator.experiments import (
    Axis,
    SweepGrid,
    crossing_gap,
    exchange_matrix,
    flux_spectroscopy,
    long_rows,
    refrigeration_experiment,
    reset_experiment,
    ringdown_rate,
    ringdown_spectroscopy,
)
from dissipator.model import DeviceParams, DriveSpec, epsilon_for_coupling
from dissipator.units import ghz, mhz


# -- grids -------------------------------------------------------------------

def test_grid_validation_and_points():
    grid = SweepGrid((Axis("omega_p", "rad/us", [1.0, 2.0]), ("g_p", "rad/us", [0.0, 1.0, 2.0])))
    assert grid.shape == (2, 3)
    assert grid.names == ("omega_p", "g_p")
    pts = list(grid.points())
    assert pts[0] == ((0, 0), {"omega_p": 1.0, "g_p": 0.0})
    assert len(long_rows(grid, np.zeros(grid.shape))) == 6
    with pytest.raises(ValueError):
        Axis("x", "", [])
    with pytest.raises(ValueError):
        Axis("x", "", [1.0, math.nan])
    with pytest.raises(ValueError):
        SweepGrid(())


def test_grid_overrides():
    grid = SweepGrid((Axis("g_p", "rad/us", [0.0, 1.0]),), {(1,): {"kappa_c": 6.0}})
    p = DeviceParams()
    assert grid.params_at(p, (0,)) is p or grid.params_at(p, (0,)) == p
    assert grid.params_at(p, (1,)).kappa_c == 6.0


# -- ringdown ----------------------------------------------------------------

def test_zero_drive_rate_is_cavity_linewidth():
    p = DeviceParams()
    assert ringdown_rate(p, 0.0)["rate"] == pytest.approx(3.0, rel=0.05)


def test_resonant_ringdown_range():
    fit = ringdown_rate(DeviceParams(), mhz(11))
    assert 50.0 <= fit["rate"] <= 60.0


def test_off_resonant_ringdown_near_linewidth():
    p = DeviceParams()
    fit = ringdown_rate(p, mhz(5.5), detuning=mhz(150))
    assert fit["rate"] == pytest.approx(p.kappa_c, rel=0.20)


@pytest.fixture(scope="module")
def ringdown_map():
    p = DeviceParams()
    d = abs(p.delta)
    grid = SweepGrid((Axis("omega_p", "rad/us", d + mhz(np.linspace(-150, 150, 7))),
                      Axis("g_p", "rad/us", mhz(np.linspace(0, 11, 11)))))
    return p, ringdown_spectroscopy(p, grid)


def test_ringdown_map_shape_and_resonance(ringdown_map):
    p, res = ringdown_map
    assert res.rates.shape == (7, 11)
    assert not res.failures
    assert np.all(res.rates >= 0)
    # the fastest ringdown sits on the resonance
    assert int(np.argmax(res.rates[:, -1])) == 3
    assert res.at(omega_p=abs(p.delta), g_p=0.0) == pytest.approx(p.kappa_c, rel=0.05)


def test_ringdown_linear_in_power(ringdown_map):
    p, res = ringdown_map
    g = res.grid.axis("g_p").values
    excess = res.rates[3] - p.kappa_c
    half = g <= g[-1] / math.sqrt(2)  # bottom half of the power axis
    x, y = g[half] ** 2, excess[half]
    coef = np.polyfit(x, y, 1)
    r2 = 1 - np.sum((y - np.polyval(coef, x)) ** 2) / np.sum((y - y.mean()) ** 2)
    assert r2 > 0.99


def test_ringdown_accepts_drive_amplitude_axis():
    p = DeviceParams()
    eps = epsilon_for_coupling(p, mhz(5))
    grid = SweepGrid((Axis("omega_p", "rad/us", [abs(p.delta)]), Axis("epsilon_p", "rad/us", [eps])))
    res = ringdown_spectroscopy(p, grid)
    assert res.rates[0, 0] == pytest.approx(ringdown_rate(p, mhz(5))["rate"], rel=1e-9)


def test_ringdown_failures_recorded():
    p = DeviceParams()
    grid = SweepGrid((Axis("omega_p", "rad/us", [abs(p.delta)]), Axis("g_p", "rad/us", [mhz(5)])),
                     {(0, 0): {"kappa_diss": -1.0}})
    res = ringdown_spectroscopy(p, grid)
    assert (0, 0) in res.failures and math.isnan(res.rates[0, 0])


@pytest.mark.parametrize("g_mhz", [3.0, 6.0])
def test_dissipator_loss_additive(g_mhz):
    added = []
    for kc in (0.3, 3.0):
        p = DeviceParams(kappa_c=kc)
        added.append(ringdown_rate(p, mhz(g_mhz))["rate"] - ringdown_rate(p, 0.0)["rate"])
    assert added[0] == pytest.approx(added[1], rel=0.05)


def test_thread_count_does_not_change_results():
    p = DeviceParams()
    grid = SweepGrid((Axis("omega_p", "rad/us", abs(p.delta) + mhz(np.array([-50.0, 0.0, 50.0]))),
                      Axis("g_p", "rad/us", mhz(np.array([2.0, 6.0])))))
    a = ringdown_spectroscopy(p, grid, threads=1)
    b = ringdown_spectroscopy(p, grid, threads=3)
    assert np.array_equal(a.rates, b.rates)
    assert a.rows() == b.rows()


# -- reset -------------------------------------------------------------------

TAU = np.linspace(0, 3, 3001)


def test_reset_driven_recovery():
    res = reset_experiment(DeviceParams(), mhz(10), 39.8, TAU)
    assert res.gamma_cav == pytest.approx(51.0, rel=0.05)
    assert res.recovery_time == pytest.approx(0.170, rel=0.20)
    assert res.recovery_time_grid >= res.recovery_time


def test_reset_undriven_recovery():
    res = reset_experiment(DeviceParams(), None, 39.8, TAU)
    assert res.gamma_cav == pytest.approx(3.0, rel=0.01)
    assert res.recovery_time == pytest.approx(2.2, rel=0.25)


def test_reset_empty_cavity_flat():
    res = reset_experiment(DeviceParams(), mhz(10), 0.0, TAU)
    assert np.allclose(res.gamma_2, 0.18)
    assert res.recovery_time == 0.0


def test_reset_accepts_drive_spec():
    p = DeviceParams()
    eps = epsilon_for_coupling(p, mhz(10))
    a = reset_experiment(p, DriveSpec(eps, abs(p.delta)), 39.8, TAU)
    assert a.gamma_cav == pytest.approx(reset_experiment(p, mhz(10), 39.8, TAU).gamma_cav, rel=1e-9)
    with pytest.raises(ValueError):
        reset_experiment(p, None, -1.0, TAU)


def test_reset_curve_decreasing():
    res = reset_experiment(DeviceParams(), mhz(10), 39.8, TAU)
    assert np.all(np.diff(res.gamma_2) <= 1e-15)


# -- refrigeration -----------------------------------------------------------

N_INJ = [0.0, 0.14, 0.35, 1.10]
G_P = mhz(np.linspace(0, 20, 21))


@pytest.fixture(scope="module")
def fridge():
    return refrigeration_experiment(DeviceParams(), G_P, N_INJ)


def test_refrigeration_zero_power(fridge):
    assert fridge.n_thermal[0, 0] == pytest.approx(0.107, rel=0.02)
    assert fridge.gamma_2e[0, 0] == pytest.approx(0.172, rel=0.10)
    assert fridge.gamma_2e[0, 3] == pytest.approx(0.980, rel=0.20)


def test_refrigeration_large_power_asymptote(fridge):
    assert fridge.gamma_2e[-1, 0] == pytest.approx(0.124, rel=0.02)


def test_refrigeration_monotone(fridge):
    assert np.all(np.diff(fridge.gamma_2e, axis=0) <= 1e-12)
    assert np.all(np.diff(fridge.gamma_2e, axis=1) >= 0)


def test_refrigeration_input_checks():
    with pytest.raises(ValueError):
        refrigeration_experiment(DeviceParams(), [-1.0], [0.0])
    with pytest.raises(ValueError):
        refrigeration_experiment(DeviceParams(), [0.0], [-0.1])


# -- flux spectroscopy -------------------------------------------------------

def test_crossing_gaps():
    p = DeviceParams()
    gap_c, _ = crossing_gap(p, "c")
    gap_f, _ = crossing_gap(p, "f")
    assert gap_c == pytest.approx(2 * mhz(118), rel=0.02)
    assert gap_f == pytest.approx(2 * mhz(535), rel=0.02)


def test_crossing_gap_matches_two_mode_limit():
    # with the filter removed the cavity crossing is a clean 2x2 problem
    p = DeviceParams()
    gap, phi = crossing_gap(p, "c", include_filter=False)
    M, _ = exchange_matrix(p, phi, include_filter=False)
    assert gap == pytest.approx(2 * abs(M[0, 1]), rel=0.01)


def test_far_from_crossings_branches_near_bare():
    # dissipator parked at the top of its band, far above cavity and filter
    p = DeviceParams()
    res = flux_spectroscopy(p, [0.0], include_filter=False)
    M, _ = exchange_matrix(p, 0.0, include_filter=False)
    shift = M[0, 1] ** 2 / (M[1, 1] - M[0, 0])
    lo = res.branches[0].min()
    assert abs(lo - (p.omega_c - shift)) < mhz(1)
    # switching couplings off recovers the bare spectrum exactly
    off = flux_spectroscopy(p.replace(g_c=0.0, g_f=0.0), [0.0, 0.2])
    assert np.allclose(np.sort(off.branches, axis=1), np.sort(off.bare, axis=1))


def test_branches_continuous():
    p = DeviceParams()
    phi = np.linspace(0, 0.5, 401)
    res = flux_spectroscopy(p, phi, include_qubit=True)
    step = np.abs(np.diff(res.branches, axis=0)).max(axis=0)
    bare_step = np.abs(np.diff(res.bare, axis=0)).max()
    assert np.all(step <= bare_step * 1.05 + 1e-9)
    assert set(res.labels) == set(res.modes)
