import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dissipator.quantum import (
    CutoffWarning,
    DensityMatrix,
    HilbertSpace,
    ModeSpec,
    Operator,
    SpaceMismatchError,
    annihilation,
    check_cutoff,
    coherent_ket,
    creation,
    embed,
    expectation,
    few_level_op,
    fock_dm,
    number,
    thermal_dm,
)


def space(*dims):
    modes = []
    for i, d in enumerate(dims):
        modes.append(ModeSpec.bosonic(f"m{i}", d) if d > 0 else ModeSpec.few_level(f"q{i}", -d))
    return HilbertSpace(modes)


def test_mode_spec_validation():
    with pytest.raises(ValueError):
        ModeSpec.bosonic("a", 1)
    with pytest.raises(ValueError):
        HilbertSpace([ModeSpec.bosonic("a", 3), ModeSpec.few_level("a", 2)])
    sp = space(3, -2, 4)
    assert sp.total_dim == 24 and sp.dims == (3, 2, 4)


def test_annihilation_small_cutoffs():
    assert np.array_equal(annihilation(space(2), "m0").matrix, [[0, 1], [0, 0]])
    a3 = annihilation(space(3), "m0").matrix
    assert np.allclose(np.diag(a3, 1), [1, math.sqrt(2)])
    assert np.allclose(np.diag(number(space(4), "m0").matrix), [0, 1, 2, 3])


def test_annihilation_rejects_few_level_and_unknown():
    sp = space(3, -2)
    with pytest.raises(ValueError):
        annihilation(sp, "q1")
    with pytest.raises(KeyError):
        annihilation(sp, "nope")


def test_few_level_conventions():
    sp = space(-2)
    assert np.allclose(few_level_op(sp, "q0", "sigma_z").matrix, np.diag([1, -1]))
    lower, raise_ = few_level_op(sp, "q0", "lower"), few_level_op(sp, "q0", "raise")
    g = np.array([1, 0])
    assert np.allclose((lower @ raise_).matrix @ g, g)
    r3 = few_level_op(space(-3), "q0", "raise").matrix
    assert np.allclose(np.diag(r3, 1), 0) and np.allclose(np.diag(r3, -1), [1, math.sqrt(2)])
    assert np.allclose(np.diag(few_level_op(space(-3), "q0", "number").matrix), [0, 1, 2])


@pytest.mark.parametrize("n", [2, 3, 5, 9])
def test_truncated_commutator(n):
    sp = space(n, -2)
    a = annihilation(sp, "m0")
    c = a.commutator(a.dag()).matrix
    local = np.eye(n)
    local[-1, -1] = -(n - 1)
    assert np.allclose(c, np.kron(local, np.eye(2)), atol=1e-12)


def test_embed_properties():
    sp = space(3, -2)
    assert np.allclose(embed(sp, "m0", np.eye(3)).matrix, np.eye(6))
    a, s = annihilation(sp, "m0"), few_level_op(sp, "q1", "lower")
    assert np.allclose(a.commutator(s).matrix, 0)
    with pytest.raises(ValueError):
        embed(sp, "m0", np.eye(2))


def test_mode_order_follows_kronecker_order():
    sp = space(3, -2)
    a = annihilation(sp, "m0").matrix
    assert np.allclose(a, np.kron(np.diag([1, math.sqrt(2)], 1), np.eye(2)))


def test_expectation_examples():
    sp = space(6)
    n = number(sp, "m0")
    vac = DensityMatrix(sp, fock_dm(6, 0))
    assert expectation(vac, n) == 0
    assert expectation(DensityMatrix(sp, fock_dm(6, 2)), n) == pytest.approx(2)
    sp40 = space(40)
    coh = DensityMatrix.from_ket(sp40, coherent_ket(40, 2.0))
    assert expectation(coh, number(sp40, "m0")).real == pytest.approx(4.0, abs=1e-6)


def test_space_mismatch():
    with pytest.raises(SpaceMismatchError):
        expectation(DensityMatrix(space(3), fock_dm(3, 0)), number(space(4), "m0"))
    with pytest.raises(SpaceMismatchError):
        annihilation(space(3), "m0") + annihilation(space(4), "m0")


def test_density_matrix_validation():
    sp = space(2)
    with pytest.raises(ValueError):
        DensityMatrix(sp, np.diag([0.6, 0.6]))
    with pytest.raises(ValueError):
        DensityMatrix(sp, np.diag([1.1, -0.1]))
    with pytest.raises(ValueError):
        DensityMatrix(sp, np.array([[0.5, 0.1], [0.2, 0.5]]))


def test_product_and_reduced_state():
    sp = space(3, -2)
    rho = DensityMatrix.product(sp, {"m0": fock_dm(3, 1), "q1": np.diag([0.25, 0.75])})
    assert np.allclose(rho.reduced("m0"), fock_dm(3, 1))
    assert np.allclose(rho.reduced("q1"), np.diag([0.25, 0.75]))
    assert np.allclose(rho.populations("q1"), [0.25, 0.75])


def test_cutoff_check_warns():
    sp = space(4)
    rho = DensityMatrix(sp, thermal_dm(4, 1.0))
    with pytest.warns(CutoffWarning):
        assert not check_cutoff(rho, "m0")
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert check_cutoff(DensityMatrix(sp, fock_dm(4, 0)), "m0")


def test_operators_are_immutable():
    op = annihilation(space(3), "m0")
    with pytest.raises(ValueError):
        op.matrix[0, 1] = 5


def random_hermitian(rng, n):
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return m + m.conj().T


def random_state(rng, n):
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = m @ m.conj().T
    return rho / np.trace(rho)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_expectation_linearity(seed, x, y):
    rng = np.random.default_rng(seed)
    sp = space(3, -2)
    A, B = Operator(sp, random_hermitian(rng, 6)), Operator(sp, random_hermitian(rng, 6))
    r1, r2 = random_state(rng, 6), random_state(rng, 6)
    s1, s2 = DensityMatrix(sp, r1), DensityMatrix(sp, r2)
    lhs = expectation(s1, A * x + B * y)
    assert lhs == pytest.approx(x * expectation(s1, A) + y * expectation(s1, B), abs=1e-9)
    mix = DensityMatrix(sp, 0.3 * r1 + 0.7 * r2)
    assert expectation(mix, A) == pytest.approx(0.3 * expectation(s1, A) + 0.7 * expectation(s2, A), abs=1e-9)
    assert expectation(s1, sp.identity()) == pytest.approx(1.0)
    assert abs(expectation(s1, A).imag) < 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 4), st.integers(2, 3))
def test_embed_preserves_spectrum(seed, d0, d1):
    rng = np.random.default_rng(seed)
    sp = HilbertSpace([ModeSpec.bosonic("a", d0), ModeSpec.few_level("b", d1)])
    M = random_hermitian(rng, d1)
    ev = np.sort(embed(sp, "b", M).eigvalsh())
    expected = np.sort(np.repeat(np.linalg.eigvalsh(M), d0))
    assert np.allclose(ev, expected, atol=1e-10)
