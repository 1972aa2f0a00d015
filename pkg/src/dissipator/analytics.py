"""Closed-form predictions for parametrically driven cavity damping and cooling.

Rates are in 1/us, angular frequencies in rad/us, temperatures in kelvin.
These functions are the oracle layer that :mod:`dissipator.dynamics` is
checked against, and the engine behind the reset and refrigeration sweeps.
"""

from dataclasses import dataclass
import math
import warnings

import numpy as np

from .units import KELVIN_PER_RAD_PER_US

OVERDAMPED = "overdamped"
CRITICAL = "critical"
UNDERDAMPED = "underdamped"

THERMAL = 1
COHERENT = 2


@dataclass(frozen=True)
class DephasingBudget:
    gamma_phi_photon: float
    gamma_2_background: float
    n_bar: float
    m: int

    def __post_init__(self):
        if self.m not in (THERMAL, COHERENT):
            raise ValueError(f"m must be 1 (thermal) or 2 (coherent), got {self.m}")
        if self.gamma_phi_photon < 0 or self.gamma_2_background < 0:
            raise ValueError("dephasing rates must be non-negative")

    @property
    def total(self):
        return self.gamma_phi_photon + self.gamma_2_background


@dataclass(frozen=True)
class BathRates:
    """Photon addition (``gamma_plus``) and removal (``gamma_minus``) rates."""

    gamma_plus: float
    gamma_minus: float

    def __post_init__(self):
        if not self.gamma_minus > 0:
            raise ValueError(f"gamma_minus must be positive, got {self.gamma_minus}")
        if self.gamma_plus < 0:
            raise ValueError(f"gamma_plus must be non-negative, got {self.gamma_plus}")

    @classmethod
    def thermal(cls, kappa, n_bar):
        """Rates of a mode damped at ``kappa`` into a bath with occupation ``n_bar``."""
        return cls(gamma_plus=kappa * n_bar, gamma_minus=kappa)

    @property
    def occupation(self):
        return self.gamma_plus / self.gamma_minus


@dataclass(frozen=True)
class LossRate:
    rate: float
    regime: str


@dataclass(frozen=True)
class BalanceResult:
    n_c: float
    n_diss: float
    delta_n: float


def parametric_coupling(g_c, epsilon_p, delta):
    """Drive-induced exchange rate ``g_c epsilon_p / Delta``.

    Warns when ``epsilon_p / Delta > 0.2``, outside the small-drive regime.
    """
    if delta == 0:
        raise ValueError("detuning Delta must be non-zero")
    if abs(epsilon_p / delta) > 0.2:
        warnings.warn(f"epsilon_p / Delta = {abs(epsilon_p / delta):.3f} > 0.2: "
                      "first-order exchange rate is unreliable", RuntimeWarning, stacklevel=2)
    return g_c * epsilon_p / abs(delta)


def swap_rate(n, g_c, epsilon_p, delta, omega_p=None):
    """Rabi frequency of the ``|g, n+1> <-> |e, n>`` exchange.

    On resonance (``omega_p`` None or equal to ``|Delta|``) this is
    ``sqrt(n+1) g_c epsilon_p / Delta``; otherwise
    ``0.5 sqrt((omega_p - Delta)^2 + delta_omega^2)`` with
    ``delta_omega = -2 sqrt(n+1) g_c epsilon_p / Delta``.
    """
    if n < 0:
        raise ValueError("photon number n must be >= 0")
    d_omega = transition_amplitude(n, g_c, epsilon_p, delta)
    mismatch = 0.0 if omega_p is None else omega_p - abs(delta)
    return 0.5 * math.hypot(mismatch, d_omega)


def transition_amplitude(n, g_c, epsilon_p, delta):
    """First-order matrix element of the drive between dressed states."""
    return -2.0 * math.sqrt(n + 1) * g_c * epsilon_p / abs(delta)


def rabi_probability(n, g_c, epsilon_p, delta, omega_p, t):
    """Transition probability ``(g_c eps / (Delta Omega))^2 sin^2(Omega t)``.

    The ``sqrt(n+1)`` enhancement is carried inside the transition amplitude,
    so on resonance the prefactor is exactly one for every ``n``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    omega_r = swap_rate(n, g_c, epsilon_p, delta, omega_p)
    if omega_r == 0:
        return np.zeros_like(t) if t.ndim else 0.0
    amp = 0.5 * abs(transition_amplitude(n, g_c, epsilon_p, delta))
    p = (amp / omega_r) ** 2 * np.sin(omega_r * t) ** 2
    return p if p.ndim else float(p)


def effective_loss(g_p, kappa_diss):
    """Cavity population decay rate induced through the lossy dissipator.

    Overdamped (``g_p < kappa_diss / 4``):
    ``(kappa_diss - sqrt(kappa_diss^2 - 16 g_p^2)) / 2``.  At and above the
    critical coupling the population decays at ``kappa_diss / 2``.
    """
    if g_p < 0:
        raise ValueError("g_p must be >= 0")
    if not kappa_diss > 0:
        raise ValueError("kappa_diss must be positive")
    disc = kappa_diss ** 2 - 16.0 * g_p ** 2
    if disc > 0:
        return LossRate(0.5 * (kappa_diss - math.sqrt(disc)), OVERDAMPED)
    regime = CRITICAL if disc == 0 else UNDERDAMPED
    return LossRate(0.5 * kappa_diss, regime)


def coupling_for_loss(kappa_eff, kappa_diss):
    """Invert the overdamped branch of :func:`effective_loss`."""
    if not 0 <= kappa_eff <= kappa_diss / 2:
        raise ValueError(f"kappa_eff must lie in [0, kappa_diss/2], got {kappa_eff}")
    return math.sqrt(kappa_eff * (kappa_diss - kappa_eff)) / 2.0


def thermal_occupation(omega, T):
    """Bose-Einstein occupation ``1 / (exp(hbar omega / k_B T) - 1)``."""
    omega = np.asarray(omega, dtype=float)
    T = np.asarray(T, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("omega must be positive")
    if np.any(T < 0):
        raise ValueError("temperature must be non-negative")
    with np.errstate(divide="ignore", over="ignore"):
        x = KELVIN_PER_RAD_PER_US * omega / T
        n = 1.0 / np.expm1(x)
    n = np.where(T == 0, 0.0, n)
    return n if n.ndim else float(n)


def occupation_to_temperature(omega, n_bar):
    """Temperature whose Bose-Einstein occupation at ``omega`` equals ``n_bar``."""
    n_bar = np.asarray(n_bar, dtype=float)
    if np.any(n_bar <= 0):
        raise ValueError("n_bar must be positive")
    T = KELVIN_PER_RAD_PER_US * np.asarray(omega, dtype=float) / np.log1p(1.0 / n_bar)
    return T if T.ndim else float(T)


def effective_bath_temperature(omega_c, omega_diss, T_bath):
    """Temperature seen by the cavity through the frequency-converting drive."""
    return omega_c / omega_diss * T_bath


def driven_cavity_temperature(params, kappa_eff, omega_diss=None):
    """Two-bath cavity temperature.

    ``(kappa_c T0 + kappa_eff (omega_c / omega_diss) T_bath) / (kappa_c + kappa_eff)``
    """
    if kappa_eff < 0:
        raise ValueError("kappa_eff must be >= 0")
    total = params.kappa_c + kappa_eff
    if total == 0:
        raise ValueError("kappa_c + kappa_eff is zero; cavity temperature undefined")
    w_d = params.omega_diss if omega_diss is None else omega_diss
    if math.isinf(kappa_eff):
        return effective_bath_temperature(params.omega_c, w_d, params.T_bath)
    t_eff = effective_bath_temperature(params.omega_c, w_d, params.T_bath)
    return (params.kappa_c * params.T0 + kappa_eff * t_eff) / total


def dephasing_per_photon(chi, kappa, m=THERMAL):
    return m * chi ** 2 * kappa / (chi ** 2 + kappa ** 2)


def photon_dephasing(chi, kappa, n_bar, m=THERMAL):
    """Photon-shot-noise dephasing ``m chi^2 kappa / (chi^2 + kappa^2) n_bar``.

    ``m = 1`` for thermal and ``m = 2`` for coherent cavity states.
    """
    if m not in (THERMAL, COHERENT):
        raise ValueError(f"m must be 1 (thermal) or 2 (coherent), got {m}")
    return dephasing_per_photon(chi, kappa, m) * n_bar


def reset_dephasing_curve(n_bar0, chi, kappa_c, gamma_cav, gamma_2_0, tau):
    """Qubit decoherence rate after a readout pulse, ``tau`` into the reset.

    ``2 n0 chi^2 kappa_c / (chi^2 + kappa_c^2) exp(-gamma_cav tau) + Gamma_2^0``
    """
    for name, v in (("n_bar0", n_bar0), ("kappa_c", kappa_c), ("gamma_cav", gamma_cav), ("gamma_2_0", gamma_2_0)):
        if v < 0:
            raise ValueError(f"{name} must be non-negative")
    tau = np.asarray(tau, dtype=float)
    out = dephasing_per_photon(chi, kappa_c, COHERENT) * n_bar0 * np.exp(-gamma_cav * tau) + gamma_2_0
    return out if out.ndim else float(out)


def recovery_time(n_bar0, chi, kappa_c, gamma_cav, gamma_2_0, threshold=0.05):
    """Time at which :func:`reset_dephasing_curve` is within ``threshold`` of Gamma_2^0."""
    excess = dephasing_per_photon(chi, kappa_c, COHERENT) * n_bar0
    target = threshold * gamma_2_0
    if excess <= target:
        return 0.0
    if gamma_cav == 0:
        return math.inf
    return math.log(excess / target) / gamma_cav


def driven_balance(cavity, dissipator, kappa_eff):
    """Steady photon numbers of a cavity and dissipator exchanging at ``kappa_eff``.

    Solves the coupled detailed-balance pair
    ``n_c = (g_c+ + k n_d) / (g_c- + k)`` and ``n_d = (g_d+ + k n_c) / (g_d- + k)``.
    ``delta_n`` is the change from the undriven cavity occupation; negative
    means the drive cools the cavity.  ``kappa_eff = inf`` returns the
    strong-exchange limit.
    """
    cp, cm = cavity.gamma_plus, cavity.gamma_minus
    dp, dm = dissipator.gamma_plus, dissipator.gamma_minus
    if kappa_eff < 0:
        raise ValueError("kappa_eff must be >= 0")
    if math.isinf(kappa_eff):
        n_c = (dp + cp) / (cm + dm)
        return BalanceResult(n_c, n_c, n_c - cp / cm)
    den = cm * dm + kappa_eff * (cm + dm)
    if den == 0:
        raise ValueError("zero denominator in detailed balance")
    n_c = (cp * dm + kappa_eff * (dp + cp)) / den
    n_d = (dp + kappa_eff * n_c) / (dm + kappa_eff)
    # n_c - cp / cm over a common denominator; avoids cancellation at small kappa_eff
    delta = kappa_eff * (cm * dp - cp * dm) / (cm * den)
    return BalanceResult(n_c, n_d, delta)


def cooling_shift(cavity, dissipator, kappa_eff):
    """Closed form of ``n_c - n_0``: ``k (g_c- g_d+ - g_c+ g_d-) / (g_c- [g_d- k + g_c- (g_d- + k)])``.

    The bracket is written with ``g_c-`` in the second term; this is what the
    two balance equations imply, and it is checked against
    :func:`driven_balance` in the tests.
    """
    cp, cm = cavity.gamma_plus, cavity.gamma_minus
    dp, dm = dissipator.gamma_plus, dissipator.gamma_minus
    return kappa_eff * (cm * dp - cp * dm) / (cm * (dm * kappa_eff + cm * (dm + kappa_eff)))


def cools(cavity, dissipator):
    """True when driving lowers the cavity occupation."""
    return cavity.gamma_minus * dissipator.gamma_plus < cavity.gamma_plus * dissipator.gamma_minus
