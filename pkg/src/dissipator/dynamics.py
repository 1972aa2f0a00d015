"""Lindblad master-equation evolution, steady states and coherent ringdown.

States are propagated as row-major vectorised density matrices under the
Liouvillian superoperator.  Integration uses fixed-step fourth-order
Runge-Kutta; for time-independent systems the one-step RK4 map is a fixed
matrix polynomial, which is built once and reused (identical arithmetic to
stepping, far fewer Python calls).
"""

from dataclasses import dataclass, field
import csv
import io
import math

import numpy as np
import scipy.linalg as sla

from .quantum import DensityMatrix, Operator, SpaceMismatchError

MAX_PHASE_PER_STEP = 0.05
MIN_STEPS_PER_PERIOD = 40
TRACE_DRIFT_TOL = 1e-6
STEADY_RESIDUAL_TOL = 1e-9


class NumericalError(RuntimeError):
    """Integration or linear-algebra failure (step too large, instability, degeneracy)."""


@dataclass(frozen=True)
class LindbladSystem:
    """``H_static + sum_k h_time_dependent[k](t)`` with pre-weighted collapse operators.

    ``h_time_dependent`` entries are either :class:`~dissipator.model.TimeDependentTerm`
    objects (fast path) or arbitrary callables ``t -> Operator`` whose norm
    is assumed bounded by ``td_norm_bound``.
    """

    h_static: Operator
    collapse: tuple = ()
    h_time_dependent: tuple = ()
    td_norm_bound: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "collapse", tuple(self.collapse))
        td = self.h_time_dependent
        if td is None:
            td = ()
        elif callable(td) and not isinstance(td, (list, tuple)):
            td = (td,)
        object.__setattr__(self, "h_time_dependent", tuple(td))
        space = self.h_static.space
        for op in self.collapse:
            if op.space != space:
                raise SpaceMismatchError("collapse operator on a different space than the Hamiltonian")
        for term in self.h_time_dependent:
            if hasattr(term, "operator") and term.operator.space != space:
                raise SpaceMismatchError("time-dependent term on a different space than the Hamiltonian")
        if not self.h_static.is_hermitian(1e-9 * max(1.0, np.abs(self.h_static.matrix).max())):
            raise ValueError("static Hamiltonian is not hermitian")

    @property
    def space(self):
        return self.h_static.space

    @property
    def is_time_dependent(self):
        return len(self.h_time_dependent) > 0


@dataclass
class ExpectationTrace:
    times: np.ndarray
    values: dict
    metadata: dict = field(default_factory=dict)
    states: list = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1:
            raise ValueError("times must be one-dimensional")
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        self.values = {k: np.asarray(v, dtype=float) for k, v in self.values.items()}
        for k, v in self.values.items():
            if v.shape != self.times.shape:
                raise ValueError(f"observable {k!r} has {v.shape} samples, expected {self.times.shape}")

    def __getitem__(self, label):
        return self.values[label]

    def to_csv(self, path=None):
        """Write ``t`` then one column per observable; returns the text if ``path`` is None."""
        buf = io.StringIO(newline="")
        writer = csv.writer(buf, lineterminator="\n")
        labels = list(self.values)
        writer.writerow(["t"] + labels)
        for i, t in enumerate(self.times):
            writer.writerow([repr(float(t))] + [repr(float(self.values[k][i])) for k in labels])
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
        return path

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], np.array(rows[1:], dtype=float)
        if header[0] != "t":
            raise ValueError(f"first column must be 't', got {header[0]!r}")
        return cls(body[:, 0], {h: body[:, i + 1] for i, h in enumerate(header[1:])})


@dataclass(frozen=True)
class CoherentState:
    alpha: complex

    @property
    def n_bar(self):
        return abs(self.alpha) ** 2

    def decayed(self, kappa, t):
        """Amplitude decays at kappa / 2 under linear loss at power rate kappa."""
        return CoherentState(self.alpha * math.exp(-0.5 * kappa * t))


# -- superoperators ----------------------------------------------------------

def _commutator_super(h):
    eye = np.eye(h.shape[0])
    return -1j * (np.kron(h, eye) - np.kron(eye, h.T))


def _dissipator_super(c):
    eye = np.eye(c.shape[0])
    cdc = c.conj().T @ c
    return np.kron(c, c.conj()) - 0.5 * np.kron(cdc, eye) - 0.5 * np.kron(eye, cdc.T)


def liouvillian(system, include_time_dependent=False, t=0.0):
    """Dense Liouvillian acting on row-major ``vec(rho)``."""
    L = _commutator_super(system.h_static.matrix)
    for c in system.collapse:
        L = L + _dissipator_super(c.matrix)
    if include_time_dependent:
        for term in system.h_time_dependent:
            L = L + _commutator_super(term(t).matrix)
    return L


def hamiltonian_scale(h):
    """Half the spectral spread of ``h``: its norm after the optimal identity shift."""
    ev = np.linalg.eigvalsh(0.5 * (h + h.conj().T))
    return 0.5 * (ev[-1] - ev[0])


def max_step(system):
    """Largest RK4 step allowed by the phase-per-step and samples-per-period rules."""
    h_norm = hamiltonian_scale(system.h_static.matrix)
    freqs = []
    for term in system.h_time_dependent:
        if hasattr(term, "operator"):
            h_norm += hamiltonian_scale(term.operator.matrix)
            if term.frequency > 0:
                freqs.append(term.frequency)
        else:
            h_norm += system.td_norm_bound
    rate = h_norm
    for c in system.collapse:
        cdc = c.matrix.conj().T @ c.matrix
        rate = max(rate, float(np.linalg.eigvalsh(cdc)[-1]))
    limits = [MAX_PHASE_PER_STEP / rate] if rate > 0 else [math.inf]
    for w in freqs:
        limits.append(2 * math.pi / (MIN_STEPS_PER_PERIOD * w))
    return min(limits)


def _rk4_map(L, h):
    hL = h * L
    n = L.shape[0]
    P = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, 5):
        term = term @ hL / k
        P = P + term
    return P


def _observable_rows(observables, dim):
    # Tr(rho O) = sum_ij rho_ij O_ji = vec(rho) . vec(O^T)
    return np.array([op.matrix.T.reshape(dim * dim) for op in observables])


def _normalise_observables(observables):
    if observables is None:
        return [], []
    if isinstance(observables, dict):
        return list(observables.keys()), list(observables.values())
    observables = list(observables)
    return [f"O{i}" for i in range(len(observables))], observables


def evolve(system, rho0, t_grid, observables=None, metadata=None, store_states=False, step=None):
    """Integrate the master equation and record observables on ``t_grid``.

    Parameters
    ----------
    system : LindbladSystem
    rho0 : DensityMatrix
        State at ``t_grid[0]``.
    t_grid : array_like
        Strictly increasing sample times in us.
    observables : dict or list of Operator
        ``{label: operator}``; a list is labelled ``O0, O1, ...``.
    step : float, optional
        Upper bound on the step; the mandated stability limit still applies.

    Returns
    -------
    ExpectationTrace
        Real parts of ``Tr(rho(t) O)``; ``states`` holds density matrices when
        ``store_states`` is set.  ``metadata`` gains ``max_step_us`` and the
        largest trace error seen before renormalisation, ``max_trace_drift``.

    Raises
    ------
    NumericalError
        If the trace drifts by more than 1e-6 or the state becomes non-finite.
    """
    if rho0.space != system.space:
        raise SpaceMismatchError("initial state and system live on different spaces")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise ValueError("t_grid must be a non-empty 1-d array")
    if t_grid.size > 1 and np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    labels, ops = _normalise_observables(observables)
    dim = system.space.total_dim
    for op in ops:
        if op.space != system.space:
            raise SpaceMismatchError("observable on a different space than the system")
    obs_rows = _observable_rows(ops, dim) if ops else np.zeros((0, dim * dim))
    trace_row = np.eye(dim).reshape(dim * dim)

    h_max = max_step(system)
    if step is not None:
        h_max = min(h_max, step)

    L0 = liouvillian(system)
    td_terms = [t for t in system.h_time_dependent if hasattr(t, "operator")]
    generic = [t for t in system.h_time_dependent if not hasattr(t, "operator")]
    L_td = [_commutator_super(t.operator.matrix) for t in td_terms]
    coeffs = [t.coefficient for t in td_terms]

    def rhs(t, v):
        out = L0 @ v
        for Lk, ck in zip(L_td, coeffs):
            c = ck(t)
            if c != 0.0:
                out = out + c * (Lk @ v)
        for g in generic:
            out = out + _commutator_super(g(t).matrix) @ v
        return out

    v = np.array(rho0.matrix, dtype=complex).reshape(dim * dim)
    values = np.empty((len(ops), t_grid.size))
    states = [] if store_states else None
    map_cache = {}
    worst_drift = [0.0]

    def record(i, v):
        tr = trace_row @ v
        if not np.all(np.isfinite(v)):
            raise NumericalError(f"state became non-finite at t = {t_grid[i]}")
        drift = abs(tr - 1.0)
        worst_drift[0] = max(worst_drift[0], drift)
        if drift > TRACE_DRIFT_TOL:
            raise NumericalError(f"trace drifted by {drift:.2e} at t = {t_grid[i]}; step too large")
        v = v / tr
        if ops:
            values[:, i] = np.real(obs_rows @ v)
        if store_states:
            states.append(DensityMatrix(system.space, v.reshape(dim, dim), validate=False))
        return v

    v = record(0, v)
    for i in range(1, t_grid.size):
        t0, t1 = t_grid[i - 1], t_grid[i]
        n = max(1, math.ceil((t1 - t0) / h_max - 1e-9))
        h = (t1 - t0) / n
        if system.is_time_dependent:
            t = t0
            for _ in range(n):
                k1 = rhs(t, v)
                k2 = rhs(t + 0.5 * h, v + 0.5 * h * k1)
                k3 = rhs(t + 0.5 * h, v + 0.5 * h * k2)
                k4 = rhs(t + h, v + h * k3)
                v = v + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
                t += h
        else:
            key = (n, round(h, 15))
            P = map_cache.get(key)
            if P is None:
                P = np.linalg.matrix_power(_rk4_map(L0, h), n)
                map_cache[key] = P
            v = P @ v
        v = record(i, v)

    meta = dict(metadata or {})
    meta.setdefault("max_step_us", h_max)
    meta["max_trace_drift"] = worst_drift[0]
    return ExpectationTrace(t_grid, dict(zip(labels, values)), meta, states)


def steady_state(system, degeneracy_tol=1e-10):
    """Null vector of the Liouvillian, normalised to unit trace.

    Raises
    ------
    ValueError
        For time-dependent systems.
    NumericalError
        If the null space is degenerate or the residual exceeds 1e-9.
    """
    if system.is_time_dependent:
        raise ValueError("steady_state needs a time-independent (rotating-frame) system")
    dim = system.space.total_dim
    L = liouvillian(system)
    s = sla.svdvals(L)
    scale = max(s[0], 1.0)
    if s[-2] < degeneracy_tol * scale:
        raise NumericalError(f"degenerate steady state: two singular values below {degeneracy_tol * scale:.2e}; "
                             "the system likely has decoupled sectors")
    # solve L v = 0 with the trace condition replacing one redundant row
    A = L.copy()
    b = np.zeros(dim * dim, dtype=complex)
    trace_row = np.eye(dim).reshape(dim * dim)
    A[0, :] = trace_row
    b[0] = 1.0
    v = sla.solve(A, b)
    rho = v.reshape(dim, dim)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    residual = np.linalg.norm(L @ rho.reshape(dim * dim))
    if residual > STEADY_RESIDUAL_TOL * scale:
        raise NumericalError(f"steady-state residual {residual:.2e} too large")
    return DensityMatrix(system.space, rho, validate=False)


def steady_state_residual(system, state):
    dim = system.space.total_dim
    return float(np.linalg.norm(liouvillian(system) @ state.matrix.reshape(dim * dim)))


def coherent_ringdown(n_bar0, kappa_total, t_grid, metadata=None):
    """Mean photon number and amplitude of a coherent state under linear loss.

    ``n(t) = n0 exp(-kappa t)``, ``|alpha(t)| = sqrt(n0) exp(-kappa t / 2)``.
    Exact for a linear cavity, so it replaces density-matrix evolution at
    large photon numbers.
    """
    if n_bar0 < 0:
        raise ValueError("n_bar0 must be >= 0")
    t = np.asarray(t_grid, dtype=float)
    n = n_bar0 * np.exp(-kappa_total * t)
    amp = math.sqrt(n_bar0) * np.exp(-0.5 * kappa_total * t)
    meta = {"n_bar0": n_bar0, "kappa_total": kappa_total}
    meta.update(metadata or {})
    return ExpectationTrace(t, {"n": n, "amplitude": amp}, meta)
