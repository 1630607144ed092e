import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from stshape.stlinalg import (ContractError, DimensionError, SingularMatrixError,
                              hermitian_max_eigpair, hpd_solve, hpd_whiten, kron)

from conftest import crandn, random_code, random_hpd


def kron_loop(a, b):
    out = np.zeros(len(a) * len(b), dtype=complex)
    for i in range(len(a)):
        for j in range(len(b)):
            out[i * len(b) + j] = a[i] * b[j]
    return out


def power_iteration(a, iters=10_000):
    # shift so the wanted eigenvalue is also the largest in magnitude
    shift = np.linalg.norm(a)
    b = a + shift * np.eye(a.shape[0])
    v = np.ones(a.shape[0], dtype=complex)
    for _ in range(iters):
        v = b @ v
        v /= np.linalg.norm(v)
    return np.vdot(v, a @ v).real


class TestKron:
    def test_identity_factor(self):
        np.testing.assert_array_equal(kron([1], [2, 3j]), [2, 3j])

    def test_symmetric_case(self):
        r = 1 / np.sqrt(2)
        np.testing.assert_allclose(kron([r, r], [1, 0]), [r, 0, r, 0])

    def test_matches_double_loop(self, rng):
        a, b = crandn(rng, 4), crandn(rng, 4)
        np.testing.assert_allclose(kron(a, b), kron_loop(a, b), rtol=0, atol=1e-15)

    def test_empty_operand(self):
        with pytest.raises(DimensionError):
            kron([], [1.0])

    def test_rejects_nan(self):
        with pytest.raises(ContractError):
            kron([np.nan], [1.0])


complex_vec = arrays(np.complex128, st.integers(1, 6),
                     elements=st.complex_numbers(max_magnitude=1e3, allow_nan=False,
                                                 allow_infinity=False))


@given(complex_vec, complex_vec)
def test_kron_norm_multiplicative(a, b):
    lhs = np.linalg.norm(kron(a, b))
    rhs = np.linalg.norm(a) * np.linalg.norm(b)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


class TestMaxEigpair:
    def test_diagonal(self):
        lam, q = hermitian_max_eigpair(np.diag([2.0, 1.0]))
        assert lam == pytest.approx(2.0)
        np.testing.assert_allclose(q, [1, 0], atol=1e-15)

    def test_identity_picks_first_basis_vector(self):
        lam, q = hermitian_max_eigpair(np.eye(4))
        assert lam == pytest.approx(1.0)
        np.testing.assert_allclose(q, [1, 0, 0, 0], atol=1e-15)

    def test_against_power_iteration(self, rng):
        x = crandn(rng, 8, 8)
        a = x + x.conj().T
        lam, q = hermitian_max_eigpair(a)
        assert lam == pytest.approx(power_iteration(a), abs=1e-6)

    def test_residual_and_phase(self, rng):
        a = random_hpd(rng, 10)
        lam, q = hermitian_max_eigpair(a)
        assert np.linalg.norm(a @ q - lam * q) <= 1e-8 * np.linalg.norm(a)
        assert np.linalg.norm(q) == pytest.approx(1.0)
        lead = q[np.argmax(np.abs(q) > 1e-12)]
        assert lead.imag == 0.0 and lead.real > 0

    def test_degenerate_space_is_basis_independent(self, rng):
        u, _ = np.linalg.qr(crandn(rng, 6, 6))
        a = u @ np.diag([3, 3, 3, 1, 1, 0.5]) @ u.conj().T
        _, q1 = hermitian_max_eigpair(a)
        _, q2 = hermitian_max_eigpair(a.copy())
        np.testing.assert_array_equal(q1, q2)
        assert np.linalg.norm(a @ q1 - 3 * q1) < 1e-10

    def test_rayleigh_dominance(self, rng):
        x = crandn(rng, 8, 8)
        a = x + x.conj().T
        lam, _ = hermitian_max_eigpair(a)
        for _ in range(100):
            q = crandn(rng, 8)
            q /= np.linalg.norm(q)
            assert lam >= np.vdot(q, a @ q).real - 1e-12

    def test_rejects_non_hermitian(self, rng):
        with pytest.raises(ContractError):
            hermitian_max_eigpair(crandn(rng, 3, 3))


class TestHpdSolve:
    def test_identity(self, rng):
        b = crandn(rng, 5)
        np.testing.assert_allclose(hpd_solve(np.eye(5), b), b)

    def test_diagonal(self):
        np.testing.assert_allclose(hpd_solve(np.diag([2.0, 4.0]), [2.0, 4.0]), [1, 1])

    def test_against_eigendecomposition_inverse(self, rng):
        a = random_hpd(rng, 16)
        b = crandn(rng, 16)
        vals, vecs = np.linalg.eigh(a)
        oracle = vecs @ np.diag(1 / vals) @ vecs.conj().T @ b
        x = hpd_solve(a, b)
        np.testing.assert_allclose(x, oracle, rtol=1e-9, atol=1e-12)
        assert np.linalg.norm(a @ x - b) <= 1e-8 * np.linalg.norm(a) * np.linalg.norm(x)

    def test_recovers_x(self, rng):
        for _ in range(20):
            a = random_hpd(rng, 12)
            x = crandn(rng, 12, 3)
            assert np.linalg.norm(hpd_solve(a, a @ x) - x) <= 1e-8 * np.linalg.norm(x)

    def test_singular_matrix_named(self):
        a = np.diag([1.0, 1e-14])
        with pytest.raises(SingularMatrixError, match='occupancy'):
            hpd_solve(a, [1.0, 1.0], name='occupancy')

    def test_whiten_gives_quadratic_form(self, rng):
        a = random_hpd(rng, 8)
        g = crandn(rng, 8)
        z = hpd_whiten(a, g)
        assert np.vdot(z, z).real == pytest.approx(np.vdot(g, hpd_solve(a, g)).real,
                                                   rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_mixed_product_identity(seed):
    rng = np.random.default_rng(seed)
    l = int(rng.integers(1, 7))
    s = random_code(rng, l).s
    h = crandn(rng, 4, 4)
    lhs = np.kron(s.conj()[None, :], h.conj()) @ np.kron(s[:, None], h.T)
    assert np.linalg.norm(lhs - h.conj() @ h.T) <= 1e-10
