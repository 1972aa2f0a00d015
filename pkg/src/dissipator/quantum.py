"""Labelled tensor-product Hilbert spaces and dense operator algebra.

Everything is a dense complex matrix.  The largest spaces used here are a
few hundred states (cavity cutoff <= 64, dissipator <= 3 levels, optional
qubit), where sparse storage buys nothing.  Kronecker products always follow
the mode order fixed when the :class:`HilbertSpace` is created.

Few-level modes use the ground-state-first basis ``|g>, |e>, |f>, ...`` with
``sigma_z = diag(+1, -1)`` on two levels, so ``-(w/2) sigma_z`` puts ``|g>``
at energy ``-w/2``.
"""

from dataclasses import dataclass
from functools import reduce
import warnings

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-9
POSITIVITY_TOL = 1e-9
CUTOFF_POPULATION_TOL = 1e-6

BOSONIC = "bosonic"
FEW_LEVEL = "few-level"


class SpaceMismatchError(ValueError):
    pass


class CutoffWarning(RuntimeWarning):
    """Population in the top Fock levels is large enough to distort results."""


def _frozen(arr):
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ModeSpec:
    label: str
    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in (BOSONIC, FEW_LEVEL):
            raise ValueError(f"mode kind must be {BOSONIC!r} or {FEW_LEVEL!r}, got {self.kind!r}")
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError(f"mode {self.label!r}: dim must be an integer >= 2, got {self.dim}")

    @classmethod
    def bosonic(cls, label, cutoff):
        return cls(label, BOSONIC, int(cutoff))

    @classmethod
    def few_level(cls, label, levels=2):
        return cls(label, FEW_LEVEL, int(levels))


class HilbertSpace:
    """Ordered tensor product of modes.

    Examples
    --------
    >>> space = HilbertSpace([ModeSpec.bosonic("c", 4), ModeSpec.few_level("d")])
    >>> space.total_dim
    8
    """

    def __init__(self, modes):
        modes = tuple(modes)
        if not modes:
            raise ValueError("a Hilbert space needs at least one mode")
        labels = [m.label for m in modes]
        if len(set(labels)) != len(labels):
            raise ValueError(f"mode labels must be unique, got {labels}")
        self._modes = modes
        self._index = {m.label: i for i, m in enumerate(modes)}

    @property
    def modes(self):
        return self._modes

    @property
    def dims(self):
        return tuple(m.dim for m in self._modes)

    @property
    def total_dim(self):
        return int(np.prod(self.dims))

    @property
    def labels(self):
        return tuple(self._index)

    def mode(self, label):
        try:
            return self._modes[self._index[label]]
        except KeyError:
            raise KeyError(f"no mode labelled {label!r}; space has {list(self._index)}") from None

    def position(self, label):
        self.mode(label)
        return self._index[label]

    def __contains__(self, label):
        return label in self._index

    def __eq__(self, other):
        return isinstance(other, HilbertSpace) and self._modes == other._modes

    def __hash__(self):
        return hash(self._modes)

    def __repr__(self):
        inner = ", ".join(f"{m.label}:{m.kind}[{m.dim}]" for m in self._modes)
        return f"HilbertSpace({inner})"

    def identity(self):
        return Operator(self, np.eye(self.total_dim))


class Operator:
    """Dense operator bound to a :class:`HilbertSpace`. Immutable."""

    __slots__ = ("_space", "_matrix")

    def __init__(self, space, matrix):
        matrix = _frozen(matrix)
        n = space.total_dim
        if matrix.shape != (n, n):
            raise ValueError(f"matrix shape {matrix.shape} does not match space dimension {n}")
        self._space = space
        self._matrix = matrix

    @property
    def space(self):
        return self._space

    @property
    def matrix(self):
        return self._matrix

    def _check(self, other):
        if other.space != self._space:
            raise SpaceMismatchError(f"operators live on different spaces: {self._space} vs {other.space}")

    def __add__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self._space, self._matrix + other._matrix)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self._space, self._matrix - other._matrix)
        return NotImplemented

    def __neg__(self):
        return Operator(self._space, -self._matrix)

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return Operator(self._space, self._matrix * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Operator(self._space, self._matrix / scalar)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self._space, self._matrix @ other._matrix)
        return NotImplemented

    def dag(self):
        return Operator(self._space, self._matrix.conj().T)

    def commutator(self, other):
        return self @ other - other @ self

    def is_hermitian(self, tol=HERMITIAN_TOL):
        return bool(np.max(np.abs(self._matrix - self._matrix.conj().T)) <= tol)

    def is_unitary(self, tol=HERMITIAN_TOL):
        n = self._matrix.shape[0]
        return bool(np.max(np.abs(self._matrix @ self._matrix.conj().T - np.eye(n))) <= tol)

    def eigvalsh(self):
        return np.linalg.eigvalsh(self._matrix)

    def __repr__(self):
        return f"Operator({self._space!r})"


class DensityMatrix:
    """Validated density matrix on a :class:`HilbertSpace`.

    Construction checks hermiticity (max element deviation <= 1e-10), unit
    trace (within 1e-9) and positivity (eigenvalues >= -1e-9).
    """

    __slots__ = ("_space", "_matrix")

    def __init__(self, space, matrix, validate=True):
        matrix = _frozen(matrix)
        n = space.total_dim
        if matrix.shape != (n, n):
            raise ValueError(f"matrix shape {matrix.shape} does not match space dimension {n}")
        self._space = space
        self._matrix = matrix
        if validate:
            self.validate()

    @property
    def space(self):
        return self._space

    @property
    def matrix(self):
        return self._matrix

    def validate(self, hermitian_tol=HERMITIAN_TOL, trace_tol=TRACE_TOL, positivity_tol=POSITIVITY_TOL):
        rho = self._matrix
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > hermitian_tol:
            raise ValueError(f"density matrix not hermitian: max deviation {herm:.3e}")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > trace_tol:
            raise ValueError(f"density matrix trace {tr!r} differs from 1 by more than {trace_tol}")
        lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
        if lam < -positivity_tol:
            raise ValueError(f"density matrix has negative eigenvalue {lam:.3e}")
        return self

    @classmethod
    def from_ket(cls, space, psi):
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(space, np.outer(psi, psi.conj()))

    @classmethod
    def product(cls, space, local_states):
        """Product state from ``{label: local density matrix or ket}``.

        Modes missing from the mapping start in their ground state.
        """
        factors = []
        for mode in space.modes:
            local = local_states.get(mode.label)
            if local is None:
                local = basis(mode.dim, 0)
            local = np.asarray(local, dtype=complex)
            if local.ndim == 1:
                local = np.outer(local, local.conj())
            if local.shape != (mode.dim, mode.dim):
                raise ValueError(f"local state for {mode.label!r} has shape {local.shape}, expected {(mode.dim,) * 2}")
            factors.append(local)
        return cls(space, reduce(np.kron, factors))

    def reduced(self, label):
        """Reduced density matrix of one mode (partial trace over the rest)."""
        k = self._space.position(label)
        dims = self._space.dims
        n = len(dims)
        order = [k] + [i for i in range(n) if i != k]
        rho = self._matrix.reshape(dims + dims).transpose(order + [n + i for i in order])
        d = dims[k]
        rest = self._space.total_dim // d
        return np.einsum("iaja->ij", rho.reshape(d, rest, d, rest))

    def populations(self, label):
        return np.real(np.diag(self.reduced(label)))

    def __repr__(self):
        return f"DensityMatrix({self._space!r})"


def basis(dim, n):
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return v


def fock_dm(dim, n):
    v = basis(dim, n)
    return np.outer(v, v.conj())


def coherent_ket(dim, alpha):
    """Truncated coherent state with Poisson amplitudes, renormalised."""
    from scipy.special import gammaln

    n = np.arange(dim)
    log_mag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha) + 1e-300) - 0.5 * gammaln(n + 1)
    amp = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))
    if alpha == 0:
        amp = basis(dim, 0)
    return amp / np.linalg.norm(amp)


def thermal_dm(dim, n_bar):
    """Truncated Bose-Einstein state, renormalised on the retained levels."""
    if n_bar <= 0:
        return fock_dm(dim, 0)
    ratio = n_bar / (1.0 + n_bar)
    p = ratio ** np.arange(dim)
    return np.diag(p / p.sum()).astype(complex)


def _local_ladder(dim):
    return np.diag(np.sqrt(np.arange(1, dim)), k=1).astype(complex)


def embed(space, mode_label, local_matrix):
    """Embed a single-mode matrix into the full space (identity elsewhere)."""
    mode = space.mode(mode_label)
    local = np.asarray(local_matrix, dtype=complex)
    if local.shape != (mode.dim, mode.dim):
        raise ValueError(f"local matrix shape {local.shape} does not match mode {mode_label!r} dim {mode.dim}")
    factors = [local if m.label == mode_label else np.eye(m.dim) for m in space.modes]
    return Operator(space, reduce(np.kron, factors))


def annihilation(space, mode_label):
    """Truncated bosonic lowering operator ``a`` on ``mode_label``."""
    mode = space.mode(mode_label)
    if mode.kind != BOSONIC:
        raise ValueError(f"mode {mode_label!r} is {mode.kind}, not bosonic")
    return embed(space, mode_label, _local_ladder(mode.dim))


def creation(space, mode_label):
    return annihilation(space, mode_label).dag()


def number(space, mode_label):
    mode = space.mode(mode_label)
    return embed(space, mode_label, np.diag(np.arange(mode.dim)))


def few_level_op(space, mode_label, which):
    """Ladder, number or ``sigma_z`` operator on a few-level mode.

    ``which`` is one of ``'raise'``, ``'lower'``, ``'sigma_z'``, ``'number'``.
    For more than two levels ``sigma_z`` is generalised as ``1 - 2n`` so that
    ``-(w/2) sigma_z`` remains an evenly spaced ladder before anharmonicity.
    """
    mode = space.mode(mode_label)
    if mode.kind != FEW_LEVEL:
        raise ValueError(f"mode {mode_label!r} is {mode.kind}, not few-level")
    lower = _local_ladder(mode.dim)
    n = np.arange(mode.dim)
    local = {
        "lower": lower,
        "raise": lower.T.copy(),
        "number": np.diag(n),
        "sigma_z": np.diag(1.0 - 2.0 * n),
    }
    try:
        return embed(space, mode_label, local[which])
    except KeyError:
        raise ValueError(f"unknown few-level operator {which!r}; expected one of {sorted(local)}") from None


def lowering(space, mode_label):
    """``a`` for bosonic modes, ``sigma_-`` for few-level ones."""
    if space.mode(mode_label).kind == BOSONIC:
        return annihilation(space, mode_label)
    return few_level_op(space, mode_label, "lower")


def expectation(state, op):
    """``Tr(rho O)`` as a complex number."""
    if state.space != op.space:
        raise SpaceMismatchError(f"state on {state.space} but operator on {op.space}")
    return complex(np.sum(state.matrix * op.matrix.T))


def top_fock_population(state, mode_label, levels=2):
    pops = state.populations(mode_label)
    return float(pops[-levels:].sum() / pops.sum())


def check_cutoff(state, mode_label, tol=CUTOFF_POPULATION_TOL, warn=True):
    """Flag a state whose top-two Fock populations exceed ``tol``.

    Returns True when the truncation is considered safe.
    """
    pop = top_fock_population(state, mode_label)
    ok = pop <= tol
    if not ok and warn:
        warnings.warn(f"mode {mode_label!r}: top-two Fock population {pop:.2e} exceeds {tol:.0e}; "
                      "raise the cutoff", CutoffWarning, stacklevel=2)
    return ok
