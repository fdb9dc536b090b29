import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from sparseisar.errors import DimensionError, ParameterError
from sparseisar.metrics import MetricReport, gaussian_window, mse, psnr, ssim

images = arrays(np.float64, (16, 16), elements=st.floats(0, 1))


def test_mse_examples(rng):
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    assert mse(a, a) == 0.0
    assert mse(np.zeros((3, 3)), np.ones((3, 3), dtype=complex)) == 1.0
    with pytest.raises(DimensionError):
        mse(np.zeros(3), np.zeros(4))


@given(st.integers(0, 2**31 - 1))
def test_mse_triangle(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (rng.standard_normal(10) + 1j * rng.standard_normal(10) for _ in range(3))
    assert mse(a, c) <= 2 * (mse(a, b) + mse(b, c)) + 1e-12


def test_psnr_examples():
    ref = np.zeros((10, 10))
    ref[0, 0] = 1.0
    est = ref + 0.1  # every pixel off by 0.1 -> mse 0.01
    assert mse(ref, est) == pytest.approx(0.01)
    assert psnr(ref, est) == pytest.approx(20.0, abs=1e-12)
    assert psnr(ref, ref) == np.inf
    with pytest.raises(ParameterError):
        psnr(np.zeros((2, 2)), np.ones((2, 2)))


def test_psnr_scale_invariant_and_monotone(rng):
    ref = rng.random((12, 12))
    est = ref + 0.05 * rng.standard_normal((12, 12))
    assert psnr(3.0 * ref, 3.0 * est) == pytest.approx(psnr(ref, est))
    worse = ref + 0.1 * rng.standard_normal((12, 12))
    assert (mse(ref, worse) > mse(ref, est)) == (psnr(ref, worse) < psnr(ref, est))


def test_ssim_identity_and_checkerboard():
    i, j = np.indices((32, 32))
    board = ((i + j) % 2).astype(float)
    assert abs(ssim(board, board) - 1.0) <= 1e-12
    assert ssim(board, 1 - board) < 0.5


@given(images, images)
def test_ssim_symmetric_and_bounded(a, b):
    a = a.copy()
    a[0, 0] = 1.0
    b = b.copy()
    b[0, 0] = 1.0  # equal dynamic range so the constants agree both ways
    s = ssim(a, b)
    assert -1 <= s <= 1
    assert abs(s - ssim(b, a)) <= 1e-12


def test_ssim_one_only_for_identical(rng):
    a = rng.random((20, 20))
    b = a.copy()
    b[10, 10] += 0.3
    assert ssim(a, a) == pytest.approx(1.0, abs=1e-12)
    assert ssim(a, b) < 1 - 1e-6


def test_ssim_errors():
    with pytest.raises(DimensionError):
        ssim(np.ones((8, 8)), np.ones((8, 8)))
    with pytest.raises(ParameterError):
        ssim(np.zeros((12, 12)), np.ones((12, 12)))


def test_ssim_matches_naive_window(rng):
    """Reference implementation: explicit loop over every valid 11x11 window."""
    a, b = rng.random((14, 13)), rng.random((14, 13))
    w = gaussian_window()
    L = a.max()
    c1, c2 = (0.01 * L) ** 2, (0.03 * L) ** 2
    vals = []
    for i in range(14 - 10):
        for j in range(13 - 10):
            x, y = a[i:i + 11, j:j + 11], b[i:i + 11, j:j + 11]
            mx, my = np.sum(w * x), np.sum(w * y)
            vx = np.sum(w * (x - mx) ** 2)
            vy = np.sum(w * (y - my) ** 2)
            cxy = np.sum(w * (x - mx) * (y - my))
            vals.append((2 * mx * my + c1) * (2 * cxy + c2) / ((mx**2 + my**2 + c1) * (vx + vy + c2)))
    assert ssim(a, b) == pytest.approx(np.mean(vals), abs=1e-12)


def test_report_aggregate():
    reps = [MetricReport(1.0, 10.0, 0.5), MetricReport(3.0, 20.0, 0.7)]
    agg = MetricReport.aggregate(reps)
    assert (agg.mse, agg.psnr_db, agg.ssim, agg.n_trials) == (2.0, 15.0, pytest.approx(0.6), 2)
    with pytest.raises(ParameterError):
        MetricReport.aggregate([])
