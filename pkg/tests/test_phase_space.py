import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_free
from hamlift.phase_space import (
    PhaseSpacePoint,
    QuadraticGeneratingFunction,
    dual_generating,
    free_factorization,
    generating_to_symplectic,
    is_symplectic,
    standard_symplectic,
    symplectic_form,
    symplectic_residual,
    symplectic_to_generating,
)

finite = st.floats(-10, 10, allow_nan=False)


def test_standard_symplectic_n1():
    np.testing.assert_array_equal(standard_symplectic(1).J, [[0, 1], [-1, 0]])


def test_standard_symplectic_n2_blocks():
    J = standard_symplectic(2).J
    I2 = np.eye(2)
    np.testing.assert_array_equal(J, np.block([[0 * I2, I2], [-I2, 0 * I2]]))


def test_j_squared_is_minus_identity():
    J = standard_symplectic(3).J
    np.testing.assert_array_equal(J @ J, -np.eye(6))


@pytest.mark.parametrize("n", [0, -1])
def test_standard_symplectic_rejects_bad_n(n):
    with pytest.raises(ValueError):
        standard_symplectic(n)


def test_symplectic_form_basis_pair():
    # J z . z' with J = [[0,1],[-1,0]]: Jz = (0, -1) for z = (1, 0)
    Jz = np.array([[0, 1], [-1, 0]]) @ np.array([1.0, 0.0])
    assert symplectic_form([1.0, 0.0], [0.0, 1.0]) == pytest.approx(Jz @ [0.0, 1.0]) == -1.0


def test_symplectic_form_accepts_points():
    z = PhaseSpacePoint(np.array([1.0]), np.array([0.0]))
    zp = PhaseSpacePoint(np.array([0.0]), np.array([1.0]))
    assert symplectic_form(z, zp) == -1.0


def test_symplectic_form_dimension_mismatch():
    with pytest.raises(ValueError):
        symplectic_form([1.0, 0.0], [1.0, 0.0, 0.0, 0.0])


@given(st.lists(finite, min_size=4, max_size=4), st.lists(finite, min_size=4, max_size=4),
       st.floats(-5, 5))
def test_symplectic_form_antisymmetric_bilinear(z, zp, c):
    z, zp = np.array(z), np.array(zp)
    assert symplectic_form(z, z) == pytest.approx(0.0, abs=1e-12)
    assert symplectic_form(z, zp) == pytest.approx(-symplectic_form(zp, z), abs=1e-10)
    assert symplectic_form(c * z, zp) == pytest.approx(c * symplectic_form(z, zp), abs=1e-9)


def test_is_symplectic_examples():
    assert is_symplectic(np.eye(4))
    assert is_symplectic(np.diag([2.0, 0.5]))
    S = np.diag([2.0, 2.0])
    assert not is_symplectic(S)
    # S^T J S = 4 J by hand
    J = standard_symplectic(1).J
    np.testing.assert_allclose(S.T @ J @ S, 4 * J)


def test_is_symplectic_rejects_odd_shape():
    with pytest.raises(ValueError):
        symplectic_residual(np.eye(3))


def test_generating_fourier_is_j():
    W = QuadraticGeneratingFunction(0.0, 1.0, 0.0)
    np.testing.assert_array_equal(generating_to_symplectic(W), [[0, 1], [-1, 0]])


def test_generating_fourier_n2():
    W = QuadraticGeneratingFunction(np.zeros((2, 2)), np.eye(2), np.zeros((2, 2)))
    np.testing.assert_array_equal(generating_to_symplectic(W), standard_symplectic(2).J)


def test_generating_unit_triple_is_shear():
    W = QuadraticGeneratingFunction(1.0, 1.0, 1.0)
    np.testing.assert_allclose(generating_to_symplectic(W), [[1, 1], [0, 1]])


def test_minus_identity_l_gives_minus_j():
    # W(x, x') = x.x' means L = -I, which projects to -J
    W = QuadraticGeneratingFunction(0.0, -1.0, 0.0)
    np.testing.assert_array_equal(generating_to_symplectic(W), [[0, -1], [1, 0]])


def test_generating_rejects_singular_l():
    with pytest.raises(ValueError):
        QuadraticGeneratingFunction(0.0, 0.0, 0.0)


def test_generating_rejects_asymmetric_p():
    with pytest.raises(ValueError):
        QuadraticGeneratingFunction([[0, 1], [0, 0]], np.eye(2), np.zeros((2, 2)))


def test_maslov_default_branch():
    assert QuadraticGeneratingFunction(0.0, 2.0, 0.0).m == 0
    assert QuadraticGeneratingFunction(0.0, -2.0, 0.0).m == 1
    assert QuadraticGeneratingFunction(0.0, 1.0, 0.0, m=6).m == 2


@pytest.mark.parametrize("seed", range(10))
def test_generating_output_symplectic(seed):
    rng = np.random.default_rng(seed)
    for n in (1, 2, 3):
        assert is_symplectic(generating_to_symplectic(random_free(rng, n)), 1e-12)


def test_dual_examples():
    d = dual_generating(QuadraticGeneratingFunction(0.0, 1.0, 0.0))
    np.testing.assert_array_equal(d.P, [[0.0]])
    np.testing.assert_array_equal(d.L, [[-1.0]])
    np.testing.assert_array_equal(d.Q, [[0.0]])
    d = dual_generating(QuadraticGeneratingFunction(1.0, 1.0, 1.0))
    for M in (d.P, d.L, d.Q):
        np.testing.assert_array_equal(M, [[-1.0]])


@pytest.mark.parametrize("seed", range(5))
def test_dual_involution_and_inverse(seed):
    rng = np.random.default_rng(seed)
    W = random_free(rng, 2)
    W2 = dual_generating(dual_generating(W))
    for a, b in ((W.P, W2.P), (W.L, W2.L), (W.Q, W2.Q)):
        np.testing.assert_array_equal(a, b)
    assert W2.m == W.m
    prod = generating_to_symplectic(W) @ generating_to_symplectic(dual_generating(W))
    np.testing.assert_allclose(prod, np.eye(4), atol=1e-12 * max(1, np.max(np.abs(prod))))


def test_symplectic_to_generating_roundtrip(rng):
    W = random_free(rng, 2)
    W2 = symplectic_to_generating(generating_to_symplectic(W))
    np.testing.assert_allclose(W2.P, W.P, atol=1e-10)
    np.testing.assert_allclose(W2.L, W.L, atol=1e-10)
    np.testing.assert_allclose(W2.Q, W.Q, atol=1e-10)


def test_symplectic_to_generating_rejects_non_free():
    with pytest.raises(ValueError):
        symplectic_to_generating(np.eye(2))


def _product(S):
    W1, W2 = free_factorization(S)
    return generating_to_symplectic(W1) @ generating_to_symplectic(W2)


@pytest.mark.parametrize("S", [
    np.array([[0.0, 1.0], [-1.0, 0.0]]),
    np.eye(2),
    np.array([[1.0, 0.0], [1.0, 1.0]]),
    np.eye(4),
], ids=["J", "identity", "shear", "identity4"])
def test_free_factorization_examples(S):
    np.testing.assert_allclose(_product(S), S, atol=1e-10)


def test_free_factorization_random_products():
    rng = np.random.default_rng(7)
    for _ in range(100):
        n = int(rng.integers(1, 3))
        S = generating_to_symplectic(random_free(rng, n, 0.5)) @ generating_to_symplectic(random_free(rng, n, 0.5))
        np.testing.assert_allclose(_product(S), S, atol=1e-10 * max(1.0, np.max(np.abs(S))) ** 2)


def test_free_factorization_rejects_non_symplectic():
    with pytest.raises(ValueError):
        free_factorization(np.diag([2.0, 2.0]))


def test_point_roundtrip():
    p = PhaseSpacePoint.from_vector([1.0, 2.0, 3.0, 4.0])
    assert p.n == 2
    np.testing.assert_array_equal(p.z, [1, 2, 3, 4])
    with pytest.raises(ValueError):
        PhaseSpacePoint(np.array([1.0]), np.array([np.nan]))
