"""Unit conventions and physical constants.

Internally every frequency and rate is an angular quantity in rad/us, so a
linear frequency of 1 MHz is stored as 2*pi rad/us and a power-decay rate
quoted in 1/us enters unchanged.  Temperatures are kelvin.  Conversion from
the linear units used in configuration files happens here and nowhere else.
"""

import hashlib
import json
import math
import re

from scipy import constants as _sc

TWO_PI = 2.0 * math.pi

#: hbar / k_B in kelvin * seconds (CODATA via scipy.constants)
HBAR_OVER_KB = _sc.hbar / _sc.k

#: hbar * omega / k_B in kelvin for omega = 1 rad/us
KELVIN_PER_RAD_PER_US = HBAR_OVER_KB * 1e6

#: hbar * omega / k_B in millikelvin for omega/2pi = 1 GHz (~47.9924 mK)
MK_PER_GHZ = KELVIN_PER_RAD_PER_US * TWO_PI * 1e3 * 1e3

CONSTANTS = {
    "hbar": _sc.hbar,
    "k_B": _sc.k,
    "hbar_over_kB_K_s": HBAR_OVER_KB,
    "kelvin_per_rad_per_us": KELVIN_PER_RAD_PER_US,
    "mK_per_GHz": MK_PER_GHZ,
}

_FREQ_SCALE = {"ghz": 1e3, "mhz": 1.0, "khz": 1e-3, "hz": 1e-6}
_TEMP_SCALE = {"k": 1.0, "mk": 1e-3, "uk": 1e-6}
_TIME_SCALE = {"us": 1.0, "ns": 1e-3, "ms": 1e3, "s": 1e6}
_RATE_SCALE = {"/us": 1.0, "1/us": 1.0, "us^-1": 1.0, "/ms": 1e-3, "1/ms": 1e-3,
               "/ns": 1e3, "1/ns": 1e3, "/s": 1e-6, "1/s": 1e-6}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z/^\-0-9]+)\s*$")


class UnitError(ValueError):
    """Raised for a missing or unrecognised unit suffix."""


def ghz(f):
    """Linear frequency in GHz to angular rad/us."""
    return TWO_PI * 1e3 * f


def mhz(f):
    return TWO_PI * f


def khz(f):
    return TWO_PI * 1e-3 * f


def to_ghz(omega):
    """Angular rad/us to linear GHz."""
    return omega / (TWO_PI * 1e3)


def to_mhz(omega):
    return omega / TWO_PI


def _split(text):
    if isinstance(text, bool) or not isinstance(text, str):
        raise UnitError(f"expected a quantity string with a unit suffix, got {text!r}")
    m = _QUANTITY.match(text)
    if m is None:
        raise UnitError(f"cannot parse quantity {text!r}; expected e.g. '5.594 GHz'")
    return float(m.group(1)), m.group(2).lower()


def parse_frequency(text):
    """Parse ``'0.477 MHz'`` style strings into angular rad/us.

    Bare numbers are rejected: the unit suffix is mandatory.

    >>> round(parse_frequency("0.477 MHz"), 4)
    2.9971
    """
    value, unit = _split(text)
    if unit not in _FREQ_SCALE:
        raise UnitError(f"unknown frequency unit {unit!r} in {text!r} (use GHz, MHz, kHz or Hz)")
    return TWO_PI * value * _FREQ_SCALE[unit]


def parse_temperature(text):
    value, unit = _split(text)
    if unit not in _TEMP_SCALE:
        raise UnitError(f"unknown temperature unit {unit!r} in {text!r} (use K, mK or uK)")
    return value * _TEMP_SCALE[unit]


def parse_time(text):
    value, unit = _split(text)
    if unit not in _TIME_SCALE:
        raise UnitError(f"unknown time unit {unit!r} in {text!r} (use us, ns, ms or s)")
    return value * _TIME_SCALE[unit]


def parse_rate(text):
    """Parse a decay rate such as ``'3.0 /us'`` into 1/us (no 2*pi)."""
    value, unit = _split(text)
    if unit not in _RATE_SCALE:
        raise UnitError(f"unknown rate unit {unit!r} in {text!r} (use /us, /ms, /ns or /s)")
    return value * _RATE_SCALE[unit]


def constants_hash():
    """Stable digest of the constants table, recorded in run manifests."""
    blob = json.dumps(CONSTANTS, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()
