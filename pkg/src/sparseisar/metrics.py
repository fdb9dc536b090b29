"""MSE, PSNR and SSIM between reference and recovered data or images."""

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import convolve2d

from .errors import DimensionError, ParameterError

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _pair(ref, est):
    ref = np.asarray(ref)
    est = np.asarray(est)
    if ref.shape != est.shape:
        raise DimensionError(f"shape mismatch: {ref.shape} vs {est.shape}")
    return ref, est


def mse(ref, est):
    """Mean squared magnitude of ``ref - est``; works for complex arrays."""
    ref, est = _pair(ref, est)
    return float(np.mean(np.abs(ref - est) ** 2))


def psnr(ref, est):
    """``10 log10(peak^2 / mse)`` with ``peak = max |ref|``; identical inputs give ``inf``."""
    ref, est = _pair(ref, est)
    peak = float(np.max(np.abs(ref)))
    if peak == 0:
        raise ParameterError("PSNR is undefined for an all-zero reference")
    err = mse(ref, est)
    if err == 0:
        return np.inf
    return float(10 * np.log10(peak**2 / err))


def gaussian_window(size=SSIM_WINDOW, sigma=SSIM_SIGMA):
    x = np.arange(size) - (size - 1) / 2
    g = np.exp(-(x**2) / (2 * sigma**2))
    g /= g.sum()
    return np.outer(g, g)


def ssim_map(ref, est):
    """Local SSIM over every fully contained 11 x 11 Gaussian window."""
    ref, est = _pair(ref, est)
    ref = ref.astype(float)
    est = est.astype(float)
    if ref.ndim != 2 or min(ref.shape) < SSIM_WINDOW:
        raise DimensionError(f"images must be 2D and at least {SSIM_WINDOW} pixels per side")
    dyn = float(ref.max())
    if dyn <= 0:
        raise ParameterError("SSIM needs a reference with a positive maximum")
    c1 = (SSIM_K1 * dyn) ** 2
    c2 = (SSIM_K2 * dyn) ** 2
    win = gaussian_window()

    def filt(img):
        return convolve2d(img, win, mode="valid")

    mu_x = filt(ref)
    mu_y = filt(est)
    sxx = filt(ref * ref) - mu_x * mu_x
    syy = filt(est * est) - mu_y * mu_y
    sxy = filt(ref * est) - mu_x * mu_y
    num = (2 * mu_x * mu_y + c1) * (2 * sxy + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (sxx + syy + c2)
    return num / den


def ssim(ref, est):
    """Mean structural similarity; dynamic range taken as ``max(ref)``."""
    return float(np.mean(ssim_map(ref, est)))


@dataclass
class MetricReport:
    mse: float
    psnr_db: float
    ssim: float
    n_trials: int = 1
    per_trial: list = field(default_factory=list)

    @classmethod
    def aggregate(cls, reports):
        reports = list(reports)
        if not reports:
            raise ParameterError("nothing to aggregate")
        return cls(
            mse=float(np.mean([r.mse for r in reports])),
            psnr_db=float(np.mean([r.psnr_db for r in reports])),
            ssim=float(np.mean([r.ssim for r in reports])),
            n_trials=len(reports),
            per_trial=reports,
        )
