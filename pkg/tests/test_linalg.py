import numpy as np
import pytest
from hypothesis import given, strategies as st

from sparseisar import linalg
from sparseisar.errors import DimensionError

from conftest import random_hermitian


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
@pytest.mark.parametrize("n", [1, 2, 5, 16])
def test_eig_reconstructs(method, n, rng):
    a = random_hermitian(rng, n)
    eig = linalg.hermitian_eig(a, method)
    np.testing.assert_allclose(eig.reconstruct(), a, atol=1e-8 * np.linalg.norm(a))
    v = eig.eigenvectors
    np.testing.assert_allclose(v.conj().T @ v, np.eye(n), atol=1e-10)
    assert np.all(np.diff(eig.eigenvalues) >= 0)


@given(st.integers(2, 12), st.integers(0, 2**31 - 1))
def test_jacobi_matches_lapack(n, seed):
    a = random_hermitian(np.random.default_rng(seed), n)
    w_j = linalg.hermitian_eig(a, "jacobi").eigenvalues
    w_l = linalg.hermitian_eig(a, "lapack").eigenvalues
    np.testing.assert_allclose(w_j, w_l, atol=1e-9 * max(1, np.abs(w_l).max()))


def test_jacobi_diagonal_and_degenerate():
    d = np.diag([3.0, 1.0, 1.0, -2.0]).astype(complex)
    eig = linalg.jacobi_eigh(d)
    np.testing.assert_allclose(eig.eigenvalues, [-2, 1, 1, 3])
    np.testing.assert_allclose(eig.reconstruct(), d, atol=1e-12)


def test_round_robin_covers_all_pairs():
    for n in (2, 5, 8):
        seen = set()
        for p, q in linalg._round_robin(n):
            assert len(set(p) | set(q)) == 2 * len(p)
            seen |= set(zip(p.tolist(), q.tolist()))
        assert seen == {(i, j) for i in range(n) for j in range(i + 1, n)}


def test_eig_rejects_non_square():
    with pytest.raises(DimensionError):
        linalg.hermitian_eig(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        linalg.hermitian_eig(np.eye(2), "qr")


@pytest.mark.parametrize("max_rank", [None, 1])
def test_psd_projection_is_nearest(max_rank, rng):
    a = random_hermitian(rng, 12)
    p = linalg.psd_project(a, max_rank=max_rank)
    assert np.linalg.eigvalsh(p).min() >= -1e-10
    best = np.linalg.norm(a - p)
    for _ in range(50):
        g = rng.standard_normal((12, 3)) + 1j * rng.standard_normal((12, 3))
        cand = p + 0.1 * g @ g.conj().T
        assert np.linalg.norm(a - cand) >= best - 1e-12


def test_psd_project_keeps_psd_and_kills_nsd(rng):
    g = rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2))
    psd = g @ g.conj().T
    np.testing.assert_allclose(linalg.psd_project(psd), psd, atol=1e-12)
    np.testing.assert_allclose(linalg.psd_project(-psd), 0, atol=1e-12)


@pytest.mark.parametrize("pad", [1, 2, 4])
def test_dft2_fft_matches_direct(pad, rng):
    x = rng.standard_normal((5, 7)) + 1j * rng.standard_normal((5, 7))
    np.testing.assert_allclose(linalg.dft2(x, pad), linalg.dft2(x, pad, "direct"), atol=1e-12)


def test_dft2_parseval_and_inverse(rng):
    x = rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4))
    s = linalg.dft2(x, 3)
    assert np.linalg.norm(s) == pytest.approx(np.linalg.norm(x))
    np.testing.assert_allclose(linalg.idft2(s, x.shape), x, atol=1e-12)


def test_dft2_centres_zero_frequency():
    s = linalg.dft2(np.ones((4, 4)), 2)
    assert np.unravel_index(np.argmax(np.abs(s)), s.shape) == (4, 4)


def test_dft2_rejects_bad_padding():
    with pytest.raises(ValueError):
        linalg.dft2(np.ones((2, 2)), 1.5)
