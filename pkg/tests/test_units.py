import math

import pytest

from dissipator import units
from dissipator.units import UnitError


def test_kappa_c_linewidth_is_the_ringdown_rate():
    assert units.parse_frequency("0.477 MHz") == pytest.approx(2.997, abs=5e-4)
    assert units.parse_frequency("477kHz") == pytest.approx(units.parse_frequency("0.477 MHz"), rel=1e-15)


@pytest.mark.parametrize("text,ghz", [("5.594 GHz", 5.594), ("5594MHz", 5.594), ("5594000 kHz", 5.594),
                                      ("5.594e9 Hz", 5.594)])
def test_frequency_suffixes(text, ghz):
    assert units.to_ghz(units.parse_frequency(text)) == pytest.approx(ghz, rel=1e-12)


@pytest.mark.parametrize("bad", ["5.594", 5.594, "5.594 GHzz", "GHz", "", True])
def test_frequency_requires_unit(bad):
    with pytest.raises(UnitError):
        units.parse_frequency(bad)


def test_other_quantities():
    assert units.parse_temperature("115 mK") == pytest.approx(0.115)
    assert units.parse_time("80 ns") == pytest.approx(0.08)
    assert units.parse_rate("3.0 /us") == 3.0
    assert units.parse_rate("0.9/ms") == pytest.approx(9e-4)
    with pytest.raises(UnitError):
        units.parse_temperature("115")


def test_hbar_over_kb_table_value():
    # hbar omega / k_B for 1 GHz
    assert units.MK_PER_GHZ == pytest.approx(47.9924, rel=1e-5)
    assert units.KELVIN_PER_RAD_PER_US * units.ghz(1.0) == pytest.approx(0.0479924, rel=1e-5)


def test_round_trip_and_hash():
    assert units.to_mhz(units.mhz(123.4)) == pytest.approx(123.4)
    assert units.ghz(1.0) == pytest.approx(2 * math.pi * 1e3)
    h = units.constants_hash()
    assert h == units.constants_hash() and len(h) == 64
