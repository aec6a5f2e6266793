import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geomphase.spin import (
    SpinJ,
    anti_hermiticity_defect,
    build_spin_operators,
    commutator,
    hermitian_eigendecomposition,
    matrix_exponential,
    unitarity_defect,
)
from conftest import taylor_expm

spins = st.integers(min_value=1, max_value=7).map(SpinJ)


def test_spin_validation():
    assert SpinJ(3).j == 1.5 and SpinJ(3).dim == 4
    assert str(SpinJ(3)) == "3/2" and str(SpinJ(2)) == "1"
    assert SpinJ.from_j(1.5) == SpinJ(3)
    for bad in (0, -1, 1.5):
        with pytest.raises(ValueError):
            SpinJ(bad)


def test_spin_one_matrices():
    o = build_spin_operators(SpinJ(2))
    np.testing.assert_allclose(o.jz, np.diag([-1, 0, 1]), atol=1e-15)
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(o.jx, [[0, s, 0], [s, 0, s], [0, s, 0]], atol=1e-15)


def test_spin_three_halves_matrices():
    o = build_spin_operators(SpinJ(3))
    np.testing.assert_allclose(np.diag(o.jz), [-1.5, -0.5, 0.5, 1.5])
    np.testing.assert_allclose(np.diag(o.jx, 1), [np.sqrt(3) / 2, 1, np.sqrt(3) / 2])
    # sign convention of the printed J_y
    assert o.jy[0, 1] == pytest.approx(1j * np.sqrt(3) / 2)


def test_spin_half_is_pauli():
    o = build_spin_operators(SpinJ(1))
    np.testing.assert_allclose(o.jx, [[0, 0.5], [0.5, 0]])


def test_operators_are_read_only():
    o = build_spin_operators(SpinJ(2))
    with pytest.raises(ValueError):
        o.jx[0, 0] = 1


@given(spins)
def test_lie_algebra(j):
    o = build_spin_operators(j)
    tol = 1e-12
    assert np.abs(commutator(o.jx, o.jy) - 1j * o.jz).max() < tol
    assert np.abs(commutator(o.jy, o.jz) - 1j * o.jx).max() < tol
    assert np.abs(commutator(o.jz, o.jx) - 1j * o.jy).max() < tol
    assert np.abs(commutator(o.jz, o.jplus) - o.jplus).max() < tol
    assert np.abs(commutator(o.jplus, o.jminus) - 2 * o.jz).max() < tol
    casimir = o.jx @ o.jx + o.jy @ o.jy + o.jz @ o.jz
    assert np.abs(casimir - j.j * (j.j + 1) * np.eye(j.dim)).max() < tol


def test_expm_zero_is_identity():
    np.testing.assert_allclose(matrix_exponential(np.zeros((3, 3), complex)), np.eye(3))


def test_expm_pi_jy_spin_half():
    a = 1j * np.pi * build_spin_operators(SpinJ(1)).jy
    expected = taylor_expm(a, 30)
    np.testing.assert_allclose(matrix_exponential(a), expected, atol=1e-12)
    # m ascending here; flipping to m descending gives the textbook (0, 1; -1, 0)
    np.testing.assert_allclose(matrix_exponential(a), [[0, -1], [1, 0]], atol=1e-12)
    np.testing.assert_allclose(matrix_exponential(a)[::-1, ::-1], [[0, 1], [-1, 0]], atol=1e-12)


def test_expm_diagonal():
    out = matrix_exponential(np.diag([1j, -1j]))
    np.testing.assert_allclose(out, np.diag([np.exp(1j), np.exp(-1j)]), atol=1e-15)


def _random_anti_hermitian(rng, d, scale=3.0):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (m - m.conj().T) / 2


def test_expm_matches_series_on_general_and_anti_hermitian(rng):
    for d in (2, 3, 4):
        a = _random_anti_hermitian(rng, d, 1.0)
        np.testing.assert_allclose(matrix_exponential(a), taylor_expm(a), atol=1e-12)
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        np.testing.assert_allclose(matrix_exponential(g), taylor_expm(g, 80), atol=1e-10)


@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_expm_anti_hermitian_is_unitary(d, seed):
    a = _random_anti_hermitian(np.random.default_rng(seed), d, 10.0)
    assert unitarity_defect(matrix_exponential(a)) < 1e-12


def test_expm_stack_matches_individual(rng):
    stack = np.stack([_random_anti_hermitian(rng, 3) for _ in range(5)])
    out = matrix_exponential(stack)
    for a, u in zip(stack, out):
        np.testing.assert_allclose(u, taylor_expm(a), atol=1e-11)


def test_expm_rejects_bad_input():
    with pytest.raises(ValueError):
        matrix_exponential(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        matrix_exponential(np.array([[np.nan, 0], [0, 0]]))


def test_eigendecomposition_examples():
    vals, _ = hermitian_eigendecomposition(np.diag([3.0, 1.0, 2.0]).astype(complex))
    np.testing.assert_allclose(vals, [1, 2, 3])
    jx = build_spin_operators(SpinJ(2)).jx
    # characteristic polynomial of J_x (j=1) is -l^3 + l
    np.testing.assert_allclose(hermitian_eigendecomposition(jx)[0], np.sort(np.roots([-1, 0, 1, 0]).real), atol=1e-14)
    jz = build_spin_operators(SpinJ(3)).jz
    np.testing.assert_allclose(hermitian_eigendecomposition(jz)[0], [-1.5, -0.5, 0.5, 1.5])


def test_eigendecomposition_rejects_non_hermitian():
    with pytest.raises(ValueError):
        hermitian_eigendecomposition(np.array([[0, 1], [0, 0]], complex))


def test_anti_hermiticity_defect():
    assert anti_hermiticity_defect(1j * np.eye(2)) == 0
    assert anti_hermiticity_defect(np.eye(2)) == 2
