import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from hdsynth.circuit import increment
from hdsynth.numerics import (
    NotUnitaryError,
    csd,
    haar_random_unitary,
    is_unitary,
    qr_decompose,
    spectral_decompose_unitary,
    svd,
)


def ginibre(dim, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))


def fro(a):
    return float(np.linalg.norm(a))


class TestQR:
    def test_identity(self):
        q, r = qr_decompose(np.eye(4))
        np.testing.assert_allclose(q, np.eye(4), atol=1e-15)
        np.testing.assert_allclose(r, np.eye(4), atol=1e-15)

    def test_positive_diagonal_input(self):
        q, r = qr_decompose(np.diag([2.0, 3.0]))
        np.testing.assert_allclose(q, np.eye(2), atol=1e-15)
        np.testing.assert_allclose(r, np.diag([2.0, 3.0]), atol=1e-15)

    def test_ginibre_reconstruction(self):
        a = ginibre(5, 11)
        q, r = qr_decompose(a)
        assert fro(q @ r - a) <= 1e-11 * np.sqrt(5)
        assert is_unitary(q, 1e-12)
        assert np.allclose(np.tril(r, -1), 0)
        d = np.diagonal(r)
        assert np.all(d.real >= 0) and np.all(d.imag == 0)

    def test_rejects_rectangular(self):
        with pytest.raises(ValueError):
            qr_decompose(np.ones((2, 3)))


class TestSVD:
    def test_identity(self):
        _, s, _ = svd(np.eye(3))
        np.testing.assert_allclose(s, [1, 1, 1])

    def test_diag(self):
        _, s, _ = svd(np.diag([0.0, 2.0]))
        np.testing.assert_allclose(s, [2, 0])

    def test_unitary_has_unit_singular_values(self):
        u = haar_random_unitary(6, 4)
        a, s, b = svd(u)
        np.testing.assert_allclose(s, np.ones(6), atol=1e-10)
        assert fro(a @ np.diag(s) @ b.conj().T - u) <= 1e-10 * np.sqrt(6)


class TestSpectral:
    def test_identity(self):
        sd = spectral_decompose_unitary(np.eye(3))
        np.testing.assert_allclose(sd.phases, 0, atol=1e-15)

    def test_qubit_not(self):
        # eigenvalues of [[0,1],[1,0]] are +1 and -1
        sd = spectral_decompose_unitary(increment(2))
        np.testing.assert_allclose(sorted(np.abs(sd.phases)), [0, np.pi], atol=1e-12)
        assert np.all(sd.phases > -np.pi) and np.all(sd.phases <= np.pi)

    def test_haar_reconstruction(self):
        u = haar_random_unitary(4, 8)
        sd = spectral_decompose_unitary(u)
        assert fro(sd.reconstruct() - u) <= 1e-10 * 2
        assert is_unitary(sd.eigvecs)

    def test_degenerate_eigenvalues_keep_unitary_eigvecs(self):
        w = haar_random_unitary(5, 2)
        u = w @ np.diag(np.exp(1j * np.array([0.3, 0.3, 0.3, -1.0, -1.0]))) @ w.conj().T
        sd = spectral_decompose_unitary(u)
        assert is_unitary(sd.eigvecs)
        assert fro(sd.reconstruct() - u) <= 1e-10 * np.sqrt(5)

    def test_rejects_non_unitary(self):
        with pytest.raises(NotUnitaryError) as info:
            spectral_decompose_unitary(np.diag([1.0, 2.0]))
        assert info.value.defect == pytest.approx(3.0)

    @settings(max_examples=30, deadline=None)
    @given(dim=st.integers(1, 6), seed=st.integers(0, 2**32))
    def test_second_pass_no_worse(self, dim, seed):
        u = haar_random_unitary(dim, seed)
        first = spectral_decompose_unitary(u).reconstruct()
        second = spectral_decompose_unitary(first).reconstruct()
        e1, e2 = fro(first - u), fro(second - u)
        assert e2 <= 2 * e1 + 1e-15


class TestCSD:
    def test_identity(self):
        f = csd(np.eye(6), 2)
        np.testing.assert_allclose(f.thetas, 0)
        for a in (f.u1 @ f.v1, f.u2 @ f.v2):
            np.testing.assert_allclose(a, np.eye(a.shape[0]), atol=1e-14)

    def test_block_diagonal(self):
        a, b = haar_random_unitary(2, 1), haar_random_unitary(4, 2)
        f = csd(scipy.linalg.block_diag(a, b), 2)
        np.testing.assert_allclose(f.thetas, 0, atol=1e-12)
        np.testing.assert_allclose(f.u1 @ f.v1, a, atol=1e-12)
        np.testing.assert_allclose(f.u2 @ f.v2, b, atol=1e-12)

    def test_haar_4_6(self):
        x = haar_random_unitary(10, 77)
        f = csd(x, 4)
        assert fro(f.reconstruct() - x) <= 1e-9 * np.sqrt(10)
        assert np.all(f.thetas >= 0) and np.all(f.thetas <= np.pi / 2)

    @pytest.mark.parametrize("p,q", [(2, 2), (2, 4), (4, 6), (6, 9)])
    def test_reconstruction_many_samples(self, p, q):
        dim = p + q
        for seed in range(100):
            x = haar_random_unitary(dim, 1000 * p + seed)
            f = csd(x, p)
            assert fro(f.reconstruct() - x) <= 1e-9 * np.sqrt(dim)
            for factor in (f.u1, f.u2, f.v1, f.v2):
                assert is_unitary(factor)

    def test_partially_degenerate(self):
        # mixes a generic block with exact zeros in the off-diagonal part
        x = np.eye(8, dtype=complex)
        x[1:5, 1:5] = haar_random_unitary(4, 3)
        f = csd(x, 3)
        assert fro(f.reconstruct() - x) <= 1e-12
        x = np.eye(8, dtype=complex)[[5, 1, 2, 3, 4, 0, 6, 7]]
        f = csd(x, 3)
        assert fro(f.reconstruct() - x) <= 1e-12
        np.testing.assert_allclose(sorted(f.thetas), [0, 0, np.pi / 2], atol=1e-12)

    @pytest.mark.parametrize("p", [0, 4, 6])
    def test_rejects_bad_partition(self, p):
        with pytest.raises(ValueError):
            csd(np.eye(6), p)

    def test_rejects_non_unitary(self):
        with pytest.raises(NotUnitaryError):
            csd(2 * np.eye(4), 2)


class TestHaar:
    def test_scalar(self):
        u = haar_random_unitary(1, 123)
        assert u.shape == (1, 1)
        assert abs(abs(u[0, 0]) - 1) < 1e-15

    def test_deterministic(self):
        a, b = haar_random_unitary(4, 42), haar_random_unitary(4, 42)
        assert a.tobytes() == b.tobytes()

    def test_unitary(self):
        u = haar_random_unitary(8, 7)
        assert fro(u @ u.conj().T - np.eye(8)) <= 1e-12 * np.sqrt(8)

    def test_trace_moment(self):
        # E|tr U|^2 = 1 under the Haar measure on U(d), d >= 1
        vals = np.array([abs(np.trace(haar_random_unitary(4, s))) ** 2 for s in range(1000)])
        se = vals.std(ddof=1) / np.sqrt(len(vals))
        assert abs(vals.mean() - 1) <= 3 * se
