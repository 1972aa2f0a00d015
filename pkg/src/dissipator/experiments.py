"""Numerical versions of the measurement campaigns: ringdown maps, reset, refrigeration, flux spectroscopy.

Every sweep is a grid of independent points.  Points may run on a thread
pool; results are always assembled by grid index so the output does not
depend on scheduling.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import minimize_scalar

from . import analytics
from .calibration import FitError, fit_exponential
from .dynamics import LindbladSystem, NumericalError, evolve
from .model import (
    CAVITY,
    DISSIPATOR,
    HAMILTONIAN,
    DriveSpec,
    bias_for_frequency,
    build_jc_hamiltonian,
    build_parametric_drive,
    collapse_operators,
    coupling_flux_correction,
    dressed_exchange_frequency,
    dissipator_frequency,
    parametric_coupling,
    rotating_frame_collapse,
    rotating_frame_hamiltonian,
)
from .quantum import DensityMatrix, HilbertSpace, ModeSpec, fock_dm, number

RESET_GAP = 0.080  # us between readout pulse and drive window
RESET_GAMMA_2_0 = 0.18
ECHO_GAMMA_2_0 = 0.124


@dataclass(frozen=True)
class Axis:
    name: str
    unit: str
    values: np.ndarray

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.values, dtype=float))
        if v.ndim != 1 or v.size == 0:
            raise ValueError(f"axis {self.name!r} must be a non-empty 1-d array")
        if not np.all(np.isfinite(v)):
            raise ValueError(f"axis {self.name!r} contains non-finite values")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class SweepGrid:
    """Up to two named axes plus optional per-point parameter overrides.

    ``overrides`` maps a grid index tuple to a dict of
    :class:`~dissipator.model.DeviceParams` field replacements.
    """

    axes: tuple
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        axes = tuple(a if isinstance(a, Axis) else Axis(*a) for a in self.axes)
        if not 1 <= len(axes) <= 2:
            raise ValueError(f"a sweep has one or two axes, got {len(axes)}")
        names = [a.name for a in axes]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate axis names {names}")
        object.__setattr__(self, "axes", axes)

    @property
    def shape(self):
        return tuple(len(a) for a in self.axes)

    @property
    def names(self):
        return tuple(a.name for a in self.axes)

    def axis(self, name):
        for a in self.axes:
            if a.name == name:
                return a
        raise KeyError(f"no axis named {name!r}; have {self.names}")

    def points(self):
        """Yield ``(index, {axis_name: value})`` in C order."""
        for idx in np.ndindex(*self.shape):
            yield idx, {a.name: float(a.values[i]) for a, i in zip(self.axes, idx)}

    def params_at(self, params, idx):
        over = self.overrides.get(tuple(idx))
        return params.replace(**over) if over else params


def _run_grid(grid, task, threads=1):
    points = list(grid.points())
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outs = list(pool.map(lambda p: task(*p), points))
    else:
        outs = [task(*p) for p in points]
    return {idx: out for (idx, _), out in zip(points, outs)}


def long_rows(grid, values, uncertainties=None):
    """Long-format rows ``(axis1, axis2, value, uncertainty)`` in grid order.

    One-axis grids get ``axis2 = nan``.
    """
    rows = []
    for idx, coords in grid.points():
        c = list(coords.values())
        a1 = c[0]
        a2 = c[1] if len(c) > 1 else float("nan")
        u = float("nan") if uncertainties is None else float(uncertainties[idx])
        rows.append((a1, a2, float(values[idx]), u))
    return rows


@dataclass
class FrameComparison:
    times: np.ndarray
    lab: np.ndarray
    rotating: np.ndarray
    g_p: float
    kappa_eff: float

    @property
    def relative_rms(self):
        """RMS difference over the RMS of the rotating-frame curve."""
        return float(np.sqrt(np.mean((self.lab - self.rotating) ** 2) / np.mean(self.rotating ** 2)))


def frame_comparison(params, eps_ratio, span=3.0, n_times=61, cutoff=3):
    """Cavity ringdown from one photon in the lab frame and in the rotating frame.

    The lab frame evolves the full Jaynes-Cummings Hamiltonian with the
    dissipator frequency modulated at the dressed exchange frequency, depth
    ``eps_ratio * |Delta|``.  The rotating frame uses the resulting exchange
    rate (Hamiltonian convention) and adds the static Purcell loss the lab
    frame carries through hybridisation.  Both run over ``span / kappa_eff``.
    """
    delta = abs(params.delta)
    drive = DriveSpec(eps_ratio * delta, dressed_exchange_frequency(params))
    g_p = parametric_coupling(params, drive, HAMILTONIAN)
    k_eff = analytics.effective_loss(g_p, params.kappa_diss).rate
    space = HilbertSpace([ModeSpec.bosonic(CAVITY, cutoff), ModeSpec.few_level(DISSIPATOR, params.diss_levels)])
    rho0 = DensityMatrix.product(space, {CAVITY: fock_dm(cutoff, 1)})
    t = np.linspace(0.0, span / k_eff, n_times)
    n_op = {"n": number(space, CAVITY)}
    lab = LindbladSystem(build_jc_hamiltonian(space, params), collapse_operators(space, params),
                         (build_parametric_drive(space, drive),))
    rot = LindbladSystem(rotating_frame_hamiltonian(space, params, g_p),
                         rotating_frame_collapse(space, params, static_purcell=True))
    n_lab = evolve(lab, rho0, t, n_op)["n"]
    n_rot = evolve(rot, rho0, t, n_op)["n"]
    return FrameComparison(t, n_lab, n_rot, g_p, k_eff)


# -- ringdown spectroscopy ---------------------------------------------------

@dataclass
class RingdownResult:
    """Fitted cavity population decay rate at every grid point (1/us)."""

    grid: SweepGrid
    rates: np.ndarray
    uncertainties: np.ndarray
    r_squared: np.ndarray
    failures: dict = field(default_factory=dict)

    def rows(self):
        return long_rows(self.grid, self.rates, self.uncertainties)

    def at(self, **coords):
        idx = tuple(int(np.argmin(np.abs(a.values - coords[a.name]))) for a in self.grid.axes)
        return float(self.rates[idx])


def _point_coupling(params, coords):
    if "g_p" in coords:
        return coords["g_p"]
    if "epsilon_p" in coords:
        omega_p = coords.get("omega_p", abs(params.delta))
        return parametric_coupling(params, DriveSpec(coords["epsilon_p"], omega_p), HAMILTONIAN)
    raise KeyError("grid needs a 'g_p' or 'epsilon_p' axis")


def ringdown_trace(params, g_p, detuning=0.0, t_max=None, n_times=61, cutoff=2, static_purcell=False):
    """Cavity ``<n>(t)`` from one photon under the rotating-frame exchange model."""
    space = HilbertSpace([ModeSpec.bosonic(CAVITY, cutoff), ModeSpec.few_level(DISSIPATOR, params.diss_levels)])
    H = rotating_frame_hamiltonian(space, params, g_p, detuning)
    system = LindbladSystem(H, rotating_frame_collapse(space, params, static_purcell))
    rho0 = DensityMatrix.product(space, {CAVITY: fock_dm(cutoff, 1)})
    if t_max is None:
        t_max = 5.0 / (params.kappa_c + analytics.effective_loss(g_p, params.kappa_diss).rate)
    t = np.linspace(0.0, t_max, n_times)
    return evolve(system, rho0, t, {"n": number(space, CAVITY)},
                  metadata={"g_p": g_p, "detuning": detuning})


def ringdown_rate(params, g_p, detuning=0.0, n_times=61, cutoff=2, window=5.0, transient=0.5, max_refits=3):
    """Exponential rate of the simulated ringdown.

    The fit covers ``[transient, transient + window] / rate``: the first part
    of the trace is dropped because the exchange starts with zero slope and
    would bias a single exponential low.  The window is refitted around the
    fitted rate when it differs from the initial guess by more than 25%.
    """
    guess = params.kappa_c + analytics.effective_loss(g_p, params.kappa_diss).rate
    for _ in range(max_refits):
        tr = ringdown_trace(params, g_p, detuning, (window + transient) / guess, n_times, cutoff)
        keep = tr.times >= transient / guess
        fit = fit_exponential(tr.times[keep], tr["n"][keep])
        rate = fit["rate"]
        if not rate > 0 or abs(rate - guess) < 0.25 * guess:
            break
        guess = rate
    return fit


def ringdown_spectroscopy(params, grid, n_times=61, cutoff=2, threads=1):
    """Cavity ringdown rate over parametric drive frequency and strength.

    ``grid`` needs an ``omega_p`` axis (rad/us) and a ``g_p`` or
    ``epsilon_p`` axis.  Each point evolves the rotating-frame exchange
    model with sideband detuning ``omega_p - |Delta|`` from one cavity
    photon and fits ``<n>(t)``; failures are recorded and leave ``nan``.
    """
    if "omega_p" not in grid.names:
        raise ValueError(f"ringdown grid needs an 'omega_p' axis, got {grid.names}")

    def task(idx, coords):
        try:
            p = grid.params_at(params, idx)
            g_p = _point_coupling(p, coords)
            fit = ringdown_rate(p, g_p, coords["omega_p"] - abs(p.delta), n_times, cutoff)
            return fit["rate"], fit.error("rate"), fit.r_squared, None
        except (FitError, NumericalError, ValueError) as exc:
            return math.nan, math.nan, math.nan, f"{type(exc).__name__}: {exc}"

    outs = _run_grid(grid, task, threads)
    rates = np.full(grid.shape, np.nan)
    errs = np.full(grid.shape, np.nan)
    r2 = np.full(grid.shape, np.nan)
    failures = {}
    for idx, (r, e, q, msg) in outs.items():
        rates[idx], errs[idx], r2[idx] = r, e, q
        if msg:
            failures[idx] = msg
    return RingdownResult(grid, rates, errs, r2, failures)


# -- cavity reset ------------------------------------------------------------

@dataclass
class ResetResult:
    tau: np.ndarray
    gamma_2: np.ndarray
    n_bar: np.ndarray
    gamma_cav: float
    recovery_time: float
    recovery_time_grid: float

    def rows(self):
        return [(float(t), float("nan"), float(g), float("nan")) for t, g in zip(self.tau, self.gamma_2)]


def reset_experiment(params, drive, n_bar0, tau_grid, gamma_2_0=RESET_GAMMA_2_0, gap=RESET_GAP, threshold=0.05):
    """Qubit decoherence rate after readout, with or without the reset drive.

    Parameters
    ----------
    drive : float, DriveSpec or None
        Exchange rate ``g_p`` (rad/us), a drive converted with the
        Hamiltonian-amplitude convention, or None for passive decay.  The
        drive is assumed resonant.
    n_bar0 : float
        Cavity photons left by the readout pulse.
    tau_grid : array_like
        Delay after the start of the drive window (us).
    gap : float
        Free decay at ``kappa_c`` between readout and drive window.

    Returns
    -------
    ResetResult
        ``recovery_time`` is the continuous crossing of ``(1 + threshold)
        Gamma_2^0``; ``recovery_time_grid`` is the first grid delay below it.
    """
    if n_bar0 < 0:
        raise ValueError("n_bar0 must be >= 0")
    if drive is None:
        g_p = 0.0
    elif isinstance(drive, DriveSpec):
        g_p = parametric_coupling(params, drive, HAMILTONIAN)
    else:
        g_p = float(drive)
    kappa_eff = analytics.effective_loss(g_p, params.kappa_diss).rate if g_p > 0 else 0.0
    gamma_cav = params.kappa_c + kappa_eff
    n_start = n_bar0 * math.exp(-params.kappa_c * gap)
    tau = np.asarray(tau_grid, dtype=float)
    g2 = analytics.reset_dephasing_curve(n_start, params.chi, params.kappa_c, gamma_cav, gamma_2_0, tau)
    g2 = np.atleast_1d(g2)
    n = n_start * np.exp(-gamma_cav * tau)
    t_rec = analytics.recovery_time(n_start, params.chi, params.kappa_c, gamma_cav, gamma_2_0, threshold)
    ok = np.nonzero(g2 <= (1.0 + threshold) * gamma_2_0 * (1 + 1e-12))[0]
    t_grid_rec = float(tau[ok[0]]) if ok.size else math.inf
    return ResetResult(tau, g2, n, gamma_cav, t_rec, t_grid_rec)


# -- refrigeration -----------------------------------------------------------

@dataclass
class RefrigerationResult:
    grid: SweepGrid
    gamma_2e: np.ndarray
    n_thermal: np.ndarray
    n_coherent: np.ndarray
    kappa_eff: np.ndarray

    def rows(self):
        return long_rows(self.grid, self.gamma_2e)


def refrigeration_experiment(params, g_p_values, cavity_drive_n_bar, gamma_2_0=ECHO_GAMMA_2_0):
    """Echo decoherence rate versus exchange rate and injected coherent photons.

    The cavity photon number splits into a thermal part (cavity and
    dissipator each tied to their own bath) and a coherent part (photons
    injected at rate ``kappa_c n_inj`` with a cold dissipator).  Each part
    runs through :func:`~dissipator.analytics.driven_balance` and dephases
    the qubit with its own statistics: ``m = 1`` thermal, ``m = 2`` coherent.
    The total linewidth ``kappa_c + kappa_eff`` sets the per-photon rate.
    """
    grid = SweepGrid((Axis("g_p", "rad/us", g_p_values), Axis("n_inj", "photons", cavity_drive_n_bar)))
    n_c0 = analytics.thermal_occupation(params.omega_c, params.T0)
    n_d0 = analytics.thermal_occupation(params.omega_diss, params.T_bath)
    cav_th = analytics.BathRates.thermal(params.kappa_c, n_c0)
    diss_th = analytics.BathRates.thermal(params.kappa_diss, n_d0)
    diss_cold = analytics.BathRates(0.0, params.kappa_diss)
    shape = grid.shape
    g2e, n_th, n_coh, k_eff = (np.empty(shape) for _ in range(4))
    for (i, j), coords in grid.points():
        g_p = coords["g_p"]
        if g_p < 0:
            raise ValueError("g_p must be >= 0")
        n_inj = coords["n_inj"]
        if n_inj < 0:
            raise ValueError("injected photon number must be >= 0")
        k = analytics.effective_loss(g_p, params.kappa_diss).rate if g_p > 0 else 0.0
        kappa = params.kappa_c + k
        th = analytics.driven_balance(cav_th, diss_th, k).n_c
        coh = analytics.driven_balance(analytics.BathRates(params.kappa_c * n_inj, params.kappa_c), diss_cold, k).n_c
        g2e[i, j] = (gamma_2_0
                     + analytics.photon_dephasing(params.chi, kappa, th, analytics.THERMAL)
                     + analytics.photon_dephasing(params.chi, kappa, coh, analytics.COHERENT))
        n_th[i, j], n_coh[i, j], k_eff[i, j] = th, coh, k
    return RefrigerationResult(grid, g2e, n_th, n_coh, k_eff)


# -- flux spectroscopy -------------------------------------------------------

@dataclass
class SpectroscopyResult:
    """Eigenfrequencies (rad/us) tracked as continuous branches over flux.

    ``labels[k]`` is the bare mode that dominates branch ``k`` at the first
    flux point; ``bare`` holds the uncoupled frequencies in ``modes`` order.
    """

    phi: np.ndarray
    branches: np.ndarray
    bare: np.ndarray
    labels: tuple
    modes: tuple = ()

    def rows(self):
        return [(float(p), float(k), float(w), float("nan"))
                for p, ws in zip(self.phi, self.branches) for k, w in enumerate(ws)]


def _mode_table(include_filter, include_qubit):
    labels = [CAVITY] + (["f"] if include_filter else []) + (["q"] if include_qubit else []) + [DISSIPATOR]
    return labels


def exchange_matrix(params, phi, include_filter=True, include_qubit=False):
    """Single-excitation Hamiltonian of the exchange-coupled linear modes at flux ``phi``.

    Dissipator couplings follow the junction-energy scaling from the
    operating point ``params.omega_diss``.
    """
    labels = _mode_table(include_filter, include_qubit)
    w_d = dissipator_frequency(params, phi)
    freqs = {CAVITY: params.omega_c, "f": params.omega_f, "q": params.omega_q, DISSIPATOR: w_d}
    M = np.diag([freqs[k] for k in labels]).astype(float)
    pos = {k: i for i, k in enumerate(labels)}
    i_d = pos[DISSIPATOR]
    M[pos[CAVITY], i_d] = M[i_d, pos[CAVITY]] = coupling_flux_correction(params.g_c, params.omega_diss, w_d, params.alpha_diss)
    if include_filter:
        M[pos["f"], i_d] = M[i_d, pos["f"]] = coupling_flux_correction(params.g_f, params.omega_diss, w_d, params.alpha_diss)
    if include_qubit:
        M[pos["q"], pos[CAVITY]] = M[pos[CAVITY], pos["q"]] = params.g_q
    return M, labels


def flux_spectroscopy(params, phi_grid, include_filter=True, include_qubit=False):
    """Eigenfrequency branches over a flux sweep.

    Branches are tracked by maximum eigenvector overlap with the previous
    flux point (frequency proximity breaks ties), so they stay continuous
    through avoided crossings.  Branch ``k`` starts on the ``k``-th
    eigenvector at the first flux point.
    """
    phi = np.asarray(phi_grid, dtype=float)
    if phi.ndim != 1 or phi.size == 0:
        raise ValueError("phi_grid must be a non-empty 1-d array")
    n = len(_mode_table(include_filter, include_qubit))
    branches = np.empty((phi.size, n))
    bare = np.empty((phi.size, n))
    prev_vecs = prev_vals = None
    for i, p in enumerate(phi):
        M, labels = exchange_matrix(params, p, include_filter, include_qubit)
        bare[i] = np.diag(M)
        vals, vecs = np.linalg.eigh(M)
        if prev_vecs is not None:
            overlap = np.abs(prev_vecs.T @ vecs) ** 2
            score = overlap - 1e-9 * np.abs(prev_vals[:, None] - vals[None, :])
            order = np.empty(n, dtype=int)
            free = set(range(n))
            for k in np.argsort(-score.max(axis=1)):
                j = max(free, key=lambda c: score[k, c])
                order[k] = j
                free.remove(j)
            vals, vecs = vals[order], vecs[:, order]
        else:
            first = tuple(labels[int(np.argmax(np.abs(vecs[:, k])))] for k in range(n))
        branches[i] = vals
        prev_vecs, prev_vals = vecs, vals
    return SpectroscopyResult(phi, branches, bare, first, tuple(labels))


def crossing_gap(params, mode, include_filter=True, include_qubit=False, window=0.05):
    """Minimum splitting where the dissipator crosses ``mode`` (``'c'`` or ``'f'``).

    Returns ``(gap, phi_min)``; the gap is between the two eigenvalues whose
    midpoint lies nearest the bare mode frequency.
    """
    w_mode = {CAVITY: params.omega_c, "f": params.omega_f}[mode]
    phi0 = bias_for_frequency(params, w_mode)

    def gap(p):
        vals = np.linalg.eigvalsh(exchange_matrix(params, p, include_filter, include_qubit)[0])
        mids = 0.5 * (vals[1:] + vals[:-1])
        k = int(np.argmin(np.abs(mids - w_mode)))
        return vals[k + 1] - vals[k]

    lo, hi = max(phi0 - window, 0.0), min(phi0 + window, 0.5)
    res = minimize_scalar(gap, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    return float(res.fun), float(res.x)


def dissipator_range(params):
    """Lowest and highest reachable dissipator frequencies."""
    return dissipator_frequency(params, 0.5), params.omega_diss_max
