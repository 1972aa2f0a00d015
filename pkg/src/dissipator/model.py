"""Device parameters, Hamiltonians, drives and the flux calibration chain.

All quantities are angular frequencies in rad/us (see :mod:`dissipator.units`).
The default :class:`DeviceParams` mirror the measured device: cavity at
5.594 GHz, filter at 8.6 GHz, a flux-tunable dissipator spanning
4.2-15.3 GHz, couplings g_c = 145 MHz (at the filter bias), g_f = 535 MHz,
g_q = 53.9 MHz.
"""

from dataclasses import asdict, dataclass, fields, replace
import math

import numpy as np
from scipy.special import jv

from . import analytics
from .quantum import (
    BOSONIC,
    FEW_LEVEL,
    Operator,
    annihilation,
    few_level_op,
    number,
)
from .units import ghz, khz, mhz

CAVITY = "c"
DISSIPATOR = "d"
QUBIT = "q"

HAMILTONIAN = "hamiltonian"
FREQUENCY = "frequency"
LINEAR = "linear"
CONVENTIONS = (HAMILTONIAN, FREQUENCY, LINEAR)


@dataclass(frozen=True)
class DeviceParams:
    """Device parameters in rad/us (frequencies, rates) and kelvin.

    ``omega_diss`` is the static operating point of the dissipator (default:
    tuned onto the filter).  ``kappa_c`` ships as the 477 kHz linewidth; a
    500 kHz figure is also quoted for the same cavity, and 477 kHz is the one
    consistent with the measured 3.0 /us ringdown.  ``kappa_diss`` is only
    bounded experimentally (10-100 MHz); 60 MHz = kappa_f / 2 is the default.
    """

    omega_c: float = ghz(5.594)
    omega_q: float = ghz(3.368)
    omega_f: float = ghz(8.6)
    omega_diss_max: float = ghz(15.3)
    omega_diss: float = ghz(8.6)
    alpha_q: float = mhz(-172.0)
    alpha_diss: float = mhz(-350.0)
    g_q: float = mhz(53.9)
    g_c: float = mhz(145.0)
    g_f: float = mhz(535.0)
    kappa_c: float = khz(477.0)
    kappa_f: float = mhz(120.0)
    kappa_diss: float = mhz(60.0)
    chi: float = khz(200.0)
    d: float = 0.085
    T0: float = 0.115
    T_bath: float = 0.115
    diss_levels: int = 2

    def __post_init__(self):
        for name in ("omega_c", "omega_q", "omega_f", "omega_diss_max", "omega_diss"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("alpha_q", "alpha_diss"):
            if getattr(self, name) > 0:
                raise ValueError(f"{name} must be <= 0, got {getattr(self, name)}")
        for name in ("kappa_c", "kappa_f", "kappa_diss"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if not 0 <= self.d < 1:
            raise ValueError(f"junction asymmetry d must lie in [0, 1), got {self.d}")
        if self.T0 < 0 or self.T_bath < 0:
            raise ValueError("temperatures must be non-negative")
        if self.diss_levels not in (2, 3):
            raise ValueError(f"diss_levels must be 2 or 3, got {self.diss_levels}")

    def replace(self, **changes):
        return replace(self, **changes)

    @property
    def delta(self):
        """Cavity-dissipator detuning ``omega_c - omega_diss`` (signed)."""
        return self.omega_c - self.omega_diss

    def as_dict(self):
        return asdict(self)

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


@dataclass(frozen=True)
class CavityDrive:
    """Coherent cavity tone ``amplitude * cos(frequency t) (a + a^dag)``."""

    amplitude: float
    frequency: float
    envelope: str = "rect"
    start: float = 0.0
    stop: float = math.inf

    def __post_init__(self):
        if self.envelope not in ("rect", "off"):
            raise ValueError(f"envelope must be 'rect' or 'off', got {self.envelope!r}")
        if self.stop < self.start:
            raise ValueError("cavity drive stop time precedes start time")

    def envelope_value(self, t):
        if self.envelope == "off":
            return 0.0
        return 1.0 if self.start <= t < self.stop else 0.0


@dataclass(frozen=True)
class DriveSpec:
    """Parametric flux drive ``epsilon_p sin(omega_p t) sigma_z`` plus an optional cavity tone."""

    epsilon_p: float = 0.0
    omega_p: float = 0.0
    cavity_drive: CavityDrive = None

    def __post_init__(self):
        if self.epsilon_p < 0:
            raise ValueError(f"epsilon_p must be >= 0, got {self.epsilon_p}")
        if self.epsilon_p > 0 and not self.omega_p > 0:
            raise ValueError("omega_p must be positive when epsilon_p > 0")

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class TimeDependentTerm:
    """``coefficient(t) * operator``; calling it returns the Operator at time t.

    ``coefficient`` must be bounded by 1 in magnitude; ``frequency`` (angular)
    is used by the integrator to resolve the oscillation.
    """

    operator: Operator
    coefficient: object
    frequency: float = 0.0

    def __call__(self, t):
        return self.operator * float(self.coefficient(t))

    @property
    def space(self):
        return self.operator.space


@dataclass(frozen=True)
class SidebandCoupling:
    g_n: float
    detuning: float
    n: int
    argument: float
    convention: str


# -- flux tuning -------------------------------------------------------------

def flux_curve(phi, omega_max, alpha, d):
    """Asymmetric-SQUID transmon tuning curve.

    ``(omega_max - alpha) (cos^2 pi phi + d^2 sin^2 pi phi)^(1/4) + alpha``
    """
    phi = np.asarray(phi, dtype=float)
    c = np.cos(np.pi * phi)
    s = np.sin(np.pi * phi)
    out = (omega_max - alpha) * (c * c + d * d * s * s) ** 0.25 + alpha
    return out if out.ndim else float(out)


def flux_curve_slope(phi, omega_max, alpha, d):
    """Analytic ``d omega / d phi`` of :func:`flux_curve` (per flux quantum)."""
    phi = np.asarray(phi, dtype=float)
    u = np.cos(np.pi * phi) ** 2 + d * d * np.sin(np.pi * phi) ** 2
    du = -np.pi * np.sin(2 * np.pi * phi) * (1 - d * d)
    out = 0.25 * (omega_max - alpha) * u ** -0.75 * du
    return out if out.ndim else float(out)


def dissipator_frequency(params, phi):
    """Dissipator frequency at flux ``phi`` (flux quanta)."""
    return flux_curve(phi, params.omega_diss_max, params.alpha_diss, params.d)


def bias_for_frequency(params, omega):
    """Flux bias in [0, 0.5] at which the dissipator sits at ``omega``."""
    A = params.omega_diss_max - params.alpha_diss
    u = ((omega - params.alpha_diss) / A) ** 4
    d2 = params.d ** 2
    c2 = (u - d2) / (1 - d2)
    if not (0 <= c2 <= 1):
        lo = flux_curve(0.5, params.omega_diss_max, params.alpha_diss, params.d)
        raise ValueError(f"frequency {omega} outside the tuning range [{lo}, {params.omega_diss_max}]")
    return math.acos(math.sqrt(c2)) / math.pi


def flux_to_epsilon_p(params, phi_bias, flux_amplitude):
    """Frequency-modulation depth produced by a small flux tone.

    Linearised: ``|d omega_diss / d phi| * flux_amplitude``.  The returned value
    is the peak excursion of the dissipator transition frequency.
    """
    slope = flux_curve_slope(phi_bias, params.omega_diss_max, params.alpha_diss, params.d)
    return abs(slope) * flux_amplitude


def josephson_ratio(omega_ref, omega_now, alpha):
    """E_J(now) / E_J(ref) inferred from ``omega - alpha ~ sqrt(8 E_J E_C)``."""
    return ((omega_now - alpha) / (omega_ref - alpha)) ** 2


def coupling_from_ej_ratio(g_ref, ej_ratio):
    return g_ref * ej_ratio ** 0.25


def coupling_flux_correction(g_ref, omega_ref, omega_now, alpha=mhz(-350.0)):
    """Rescale a transmon coupling measured at ``omega_ref`` to ``omega_now``.

    g scales as E_J^(1/4), i.e. as ``sqrt((omega_now - alpha) / (omega_ref - alpha))``.
    """
    if not (omega_ref > 0 and omega_now > 0):
        raise ValueError("frequencies must be positive")
    return coupling_from_ej_ratio(g_ref, josephson_ratio(omega_ref, omega_now, alpha))


# -- Hamiltonians ------------------------------------------------------------

def _require(space, label, kind):
    if label not in space:
        raise ValueError(f"space {space} has no mode {label!r}")
    if space.mode(label).kind != kind:
        raise ValueError(f"mode {label!r} must be {kind}")


def _anharmonic(space, label, alpha):
    n = number(space, label).matrix
    return Operator(space, 0.5 * alpha * n @ (n - np.eye(len(n))))


def build_jc_hamiltonian(space, params, omega_diss=None, cavity=CAVITY, dissipator=DISSIPATOR):
    """Cavity-dissipator Hamiltonian including counter-rotating terms.

    ``omega_c a^dag a - (omega_diss / 2) sigma_z + g_c (a + a^dag)(sigma_+ + sigma_-)``,
    with ``(alpha_diss / 2) n (n - 1)`` added for a three-level dissipator and,
    when the space holds a ``'q'`` mode, a transmon qubit capacitively
    coupled to the cavity.
    """
    _require(space, cavity, BOSONIC)
    _require(space, dissipator, FEW_LEVEL)
    if omega_diss is None:
        omega_diss = params.omega_diss
    a = annihilation(space, cavity)
    x_c = a + a.dag()
    x_d = few_level_op(space, dissipator, "raise") + few_level_op(space, dissipator, "lower")
    H = (number(space, cavity) * params.omega_c
         - few_level_op(space, dissipator, "sigma_z") * (omega_diss / 2)
         + (x_c @ x_d) * params.g_c)
    if space.mode(dissipator).dim > 2:
        H = H + _anharmonic(space, dissipator, params.alpha_diss)
    if QUBIT in space:
        q = space.mode(QUBIT)
        b = few_level_op(space, QUBIT, "lower")
        H = H + number(space, QUBIT) * params.omega_q + (x_c @ (b + b.dag())) * params.g_q
        if q.dim > 2:
            H = H + _anharmonic(space, QUBIT, params.alpha_q)
    return H


def build_parametric_drive(space, drive, dissipator=DISSIPATOR):
    """``epsilon_p sin(omega_p t) sigma_z`` as a :class:`TimeDependentTerm`."""
    sz = few_level_op(space, dissipator, "sigma_z")
    eps, wp = drive.epsilon_p, drive.omega_p
    return TimeDependentTerm(sz * eps, lambda t: math.sin(wp * t), wp)


def build_cavity_drive(space, drive, cavity=CAVITY):
    """Lab-frame coherent tone on the cavity, or None when absent."""
    cd = drive.cavity_drive
    if cd is None or cd.envelope == "off":
        return None
    a = annihilation(space, cavity)
    w = cd.frequency
    return TimeDependentTerm((a + a.dag()) * cd.amplitude, lambda t: math.cos(w * t) * cd.envelope_value(t), w)


def bessel_argument(epsilon_p, omega_p, convention=HAMILTONIAN):
    """Argument of the sideband Bessel series for a given amplitude convention.

    ``'frequency'``: ``epsilon_p`` is the peak excursion of the dissipator
    frequency, so the phase modulation index is ``epsilon_p / omega_p``.
    ``'hamiltonian'``: ``epsilon_p`` multiplies ``sigma_z`` directly, which
    swings the transition frequency by ``2 epsilon_p``.
    """
    if convention == FREQUENCY:
        return epsilon_p / omega_p
    if convention == HAMILTONIAN:
        return 2.0 * epsilon_p / omega_p
    raise ValueError(f"unknown amplitude convention {convention!r}; expected {FREQUENCY!r} or {HAMILTONIAN!r}")


def effective_sideband_hamiltonian(params, drive, n_sideband, convention=FREQUENCY, omega_diss_mean=None):
    """Coupling and residual detuning of the ``n``-th drive sideband.

    ``g_n = g_c J_n(x)`` with ``x`` from :func:`bessel_argument`; the detuning
    is ``n omega_p - |omega_c - omega_diss_mean|``.
    """
    if n_sideband < 0:
        raise ValueError("n_sideband must be >= 0")
    mean = params.omega_diss if omega_diss_mean is None else omega_diss_mean
    delta = abs(params.omega_c - mean)
    if drive.epsilon_p == 0:
        x = 0.0
    else:
        x = bessel_argument(drive.epsilon_p, drive.omega_p, convention)
    return SidebandCoupling(
        g_n=float(params.g_c * jv(n_sideband, x)),
        detuning=float(n_sideband * drive.omega_p - delta),
        n=int(n_sideband),
        argument=float(x),
        convention=convention,
    )


def parametric_coupling(params, drive, convention=HAMILTONIAN, omega_diss_mean=None):
    """First-sideband exchange rate for ``drive``.

    ``'linear'`` evaluates ``g_c epsilon_p / |Delta|`` directly; the other
    conventions go through the Bessel series, which agrees with the linear form
    at small drive when ``epsilon_p`` is the ``sigma_z`` amplitude.
    """
    if convention == LINEAR:
        mean = params.omega_diss if omega_diss_mean is None else omega_diss_mean
        return analytics.parametric_coupling(params.g_c, drive.epsilon_p, abs(params.omega_c - mean))
    return effective_sideband_hamiltonian(params, drive, 1, convention, omega_diss_mean).g_n


def epsilon_for_coupling(params, g_p, convention=HAMILTONIAN, omega_p=None):
    """Drive amplitude producing first-sideband coupling ``g_p`` (inverse of :func:`parametric_coupling`)."""
    delta = abs(params.delta)
    if convention == LINEAR:
        return g_p * delta / params.g_c
    from scipy.optimize import brentq

    wp = delta if omega_p is None else omega_p
    target = g_p / params.g_c
    if target == 0:
        return 0.0
    if target >= jv(1, 1.8411837813406593):
        raise ValueError(f"g_p = {g_p} exceeds the maximum first-sideband coupling {0.5819 * params.g_c:.4g}")
    x = brentq(lambda z: jv(1, z) - target, 0.0, 1.8411837813406593, xtol=1e-15)
    return x * wp if convention == FREQUENCY else 0.5 * x * wp


def rotating_frame_hamiltonian(space, params, g_p, detuning=0.0, cavity=CAVITY, dissipator=DISSIPATOR):
    """Static exchange Hamiltonian in the frame co-rotating with the drive sideband.

    ``-detuning a^dag a + g_p (a^dag sigma_- + a sigma_+)`` plus the dissipator
    anharmonicity for three levels.  ``detuning`` is the sideband detuning
    ``omega_p - |Delta|`` of :func:`effective_sideband_hamiltonian`.
    """
    _require(space, cavity, BOSONIC)
    _require(space, dissipator, FEW_LEVEL)
    a = annihilation(space, cavity)
    sm = few_level_op(space, dissipator, "lower")
    H = number(space, cavity) * (-detuning) + (a.dag() @ sm + a @ sm.dag()) * g_p
    if space.mode(dissipator).dim > 2:
        H = H + _anharmonic(space, dissipator, params.alpha_diss)
    return H


def dressed_exchange_frequency(params, omega_diss=None, cutoff=4):
    """Dressed ``|e,0> - |g,1>`` splitting from exact diagonalisation.

    This is where the first sideband must sit for a resonant lab-frame drive;
    it differs from the bare detuning by the static dispersive shifts.
    """
    from .quantum import HilbertSpace, ModeSpec

    space = HilbertSpace([ModeSpec.bosonic(CAVITY, cutoff), ModeSpec.few_level(DISSIPATOR, params.diss_levels)])
    H = build_jc_hamiltonian(space, params, omega_diss).matrix
    evals, evecs = np.linalg.eigh(H)
    n_d = space.mode(DISSIPATOR).dim

    def dressed(nc, nd):
        idx = nc * n_d + nd
        return evals[np.argmax(np.abs(evecs[idx, :]) ** 2)]

    return abs(dressed(0, 1) - dressed(1, 0))


# -- dissipation -------------------------------------------------------------

def collapse_operators(space, params, include_thermal=False, cavity=CAVITY, dissipator=DISSIPATOR, omega_diss=None):
    """Weighted Lindblad operators for cavity and dissipator loss.

    Zero temperature: ``sqrt(kappa_c) a`` and ``sqrt(kappa_diss) sigma_-``.  With
    ``include_thermal`` each loss term becomes ``sqrt(kappa (1 + n))`` and a
    matching ``sqrt(kappa n)`` raising term is added, with n the Bose-Einstein
    occupation of that mode at its own frequency and bath temperature.
    """
    ops = []
    specs = []
    if cavity in space:
        specs.append((cavity, params.kappa_c, params.omega_c, params.T0))
    if dissipator in space:
        w = params.omega_diss if omega_diss is None else omega_diss
        specs.append((dissipator, params.kappa_diss, w, params.T_bath))
    for label, kappa, omega, temp in specs:
        if space.mode(label).kind == BOSONIC:
            low = annihilation(space, label)
        else:
            low = few_level_op(space, label, "lower")
        n_th = analytics.thermal_occupation(omega, temp) if include_thermal and temp > 0 else 0.0
        ops.append(low * math.sqrt(kappa * (1.0 + n_th)))
        if include_thermal:
            ops.append(low.dag() * math.sqrt(kappa * n_th))
    return ops


def thermal_collapse_pair(space, label, kappa, n_th):
    """Loss/gain pair for a single mode coupled to a bath with occupation ``n_th``."""
    if space.mode(label).kind == BOSONIC:
        low = annihilation(space, label)
    else:
        low = few_level_op(space, label, "lower")
    ops = [low * math.sqrt(kappa * (1.0 + n_th))]
    if n_th > 0:
        ops.append(low.dag() * math.sqrt(kappa * n_th))
    return ops



def static_purcell_loss(params, omega_diss=None):
    """Cavity loss inherited from the dissipator by static hybridisation.

    ``kappa_diss (g_c / Delta)^2``.  A lab-frame model with a flat dissipator
    bath contains this channel automatically; the rotating-frame exchange
    model does not, so it has to be added when the two are compared.  In the
    device the filter suppresses it at the cavity frequency.
    """
    w = params.omega_diss if omega_diss is None else omega_diss
    delta = params.omega_c - w
    if delta == 0:
        raise ValueError("cavity and dissipator are degenerate; hybridisation is not perturbative")
    return params.kappa_diss * (params.g_c / delta) ** 2


def rotating_frame_collapse(space, params, static_purcell=False, cavity=CAVITY, dissipator=DISSIPATOR):
    """Zero-temperature collapse set for :func:`rotating_frame_hamiltonian`.

    ``sqrt(kappa_c) a`` (when ``kappa_c > 0``) and ``sqrt(kappa_diss) sigma_-``;
    ``static_purcell`` adds ``sqrt(static_purcell_loss) a``.
    """
    a = annihilation(space, cavity)
    ops = []
    if params.kappa_c > 0:
        ops.append(a * math.sqrt(params.kappa_c))
    if static_purcell:
        ops.append(a * math.sqrt(static_purcell_loss(params)))
    ops.append(few_level_op(space, dissipator, "lower") * math.sqrt(params.kappa_diss))
    return ops
