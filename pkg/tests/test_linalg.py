import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unient import gates
from unient.errors import NotNormal, NotUnitary
from unient.linalg import (
    TOL_RECON,
    eig_normal,
    is_unitary,
    kron,
    principal_phase,
    principal_sqrt_unitary,
    singular_values,
)

from conftest import random_complex


def test_kron_identity():
    np.testing.assert_array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_uniform_vectors():
    v = kron(gates.fourier(3).matrix[:, 0], gates.fourier(4).matrix[:, 0])
    assert v.shape == (12, 1)
    np.testing.assert_allclose(v.ravel(), np.full(12, 12**-0.5), atol=1e-15)


def test_kron_shape_and_entries(rng):
    a = random_complex(rng, 2, 3)
    b = random_complex(rng, 2, 2)
    k = kron(a, b)
    assert k.shape == (4, 6)
    for i, j, p, q in np.ndindex(2, 3, 2, 2):
        assert k[i * 2 + p, j * 2 + q] == pytest.approx(a[i, j] * b[p, q], abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(1, 3), st.integers(1, 3))
def test_kron_mixed_product(seed, p, q, r):
    rng = np.random.default_rng(seed)
    a, c = random_complex(rng, p, q), random_complex(rng, q, r)
    b, d = random_complex(rng, r, p), random_complex(rng, p, q)
    np.testing.assert_allclose(kron(a @ c, b @ d), kron(a, b) @ kron(c, d), atol=1e-10)



def test_eig_clock_four():
    dec = eig_normal(gates.clock_z(4).matrix)
    np.testing.assert_allclose(np.sort_complex(dec.eigenvalues), np.sort_complex(np.array([1, 1j, -1, -1j])), atol=1e-12)


def test_eig_identity():
    dec = eig_normal(np.eye(5))
    np.testing.assert_allclose(dec.eigenvalues, np.ones(5), atol=1e-14)


def test_eig_shift_two():
    # hand diagonalization: (1,1)/sqrt2 -> +1, (1,-1)/sqrt2 -> -1
    dec = eig_normal(np.array([[0, 1], [1, 0]]))
    np.testing.assert_allclose(dec.eigenvalues, [1, -1], atol=1e-14)  # phases 0 then pi


@pytest.mark.parametrize("name", ["X12", "Z12", "F12", "Y12", "F16", "UH", "UE3"])
def test_eig_contract(name):
    u = gates.builtin(name).matrix
    dec = eig_normal(u)
    v = dec.eigenvectors
    assert np.linalg.norm(u - dec.reconstruct()) <= 1e-10
    assert np.linalg.norm(v.conj().T @ v - np.eye(len(u))) <= 1e-10
    phases = principal_phase(dec.eigenvalues)
    assert np.all(np.diff(np.round(phases, 9)) >= 0)


def test_eig_deterministic():
    u = gates.fourier(16).matrix
    a, b = eig_normal(u), eig_normal(u)
    assert a.eigenvalues.tobytes() == b.eigenvalues.tobytes()
    assert a.eigenvectors.tobytes() == b.eigenvectors.tobytes()


def test_eig_rejects_non_normal():
    with pytest.raises(NotNormal):
        eig_normal(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_sqrt_identity():
    np.testing.assert_allclose(principal_sqrt_unitary(np.eye(6)), np.eye(6), atol=1e-14)


def test_sqrt_branch_cut():
    # theta = pi sits on the principal branch and goes to +i
    s = principal_sqrt_unitary(np.diag([1, -1]))
    np.testing.assert_allclose(s, np.diag([1, 1j]), atol=1e-14)


def test_sqrt_branch_is_stable_under_rounding():
    u = np.diag([1, np.exp(-1j * (math.pi - 1e-13))])
    np.testing.assert_allclose(principal_sqrt_unitary(u)[1, 1], 1j, atol=1e-9)


@pytest.mark.parametrize("name", ["X12", "Z12", "F12", "Y12", "X16", "Y16", "F16"])
def test_sqrt_squares_back(name):
    u = gates.builtin(name).matrix
    s = principal_sqrt_unitary(u)
    assert is_unitary(s, 1e-9)
    assert np.linalg.norm(s @ s - u) <= TOL_RECON


def test_sqrt_rejects_non_unitary():
    with pytest.raises(NotUnitary):
        principal_sqrt_unitary(2 * np.eye(2))


@pytest.mark.parametrize(
    "m, expected",
    [
        (np.eye(2), [1, 1]),
        (np.full((2, 2), 0.5), [1, 0]),
        (np.diag([2**-0.5, 2**-0.5]), [2**-0.5, 2**-0.5]),
    ],
)
def test_singular_values(m, expected):
    np.testing.assert_allclose(singular_values(m), expected, atol=1e-15)


def test_singular_values_frobenius(rng):
    m = random_complex(rng, 4, 7)
    sv = singular_values(m)
    assert np.all(np.diff(sv) <= 0)
    assert abs((sv**2).sum() - np.linalg.norm(m) ** 2) <= 1e-10 * np.linalg.norm(m) ** 2


@pytest.mark.parametrize("name", gates.BUILTIN_NAMES)
def test_unitary_singular_values_are_one(name):
    np.testing.assert_allclose(singular_values(gates.builtin(name).matrix), 1.0, atol=1e-9)


def test_is_unitary():
    assert is_unitary(gates.fourier(12).matrix, 1e-10)
    assert not is_unitary(2 * np.eye(2), 1e-10)
    assert is_unitary(gates.hadamard_uh().matrix, 1e-10)
