"""2D MUSIC with forward spatial smoothing on zero-filled data."""

import math

import numpy as np

from .. import linalg
from ..errors import DimensionError, OrderError
from ..imaging import Detection, frequencies_to_positions, top_peaks
from ..model import atom, default_params


def _data(z_obs, mask):
    z = np.asarray(z_obs, dtype=complex)
    if z.ndim != 2:
        raise DimensionError("z_obs must be an N x M matrix")
    if mask.nm_total != z.size:
        raise DimensionError(f"mask covers {mask.nm_total} samples, data has {z.size}")
    filled = np.zeros(z.size, dtype=complex)
    filled[mask.observed] = z.ravel()[mask.observed]
    return filled.reshape(z.shape)


def subarray_shape(n, m):
    return math.ceil(n / 2), math.ceil(m / 2)


def smoothed_covariance(data, sub):
    """Average of ``y y^H`` over every ``sub``-sized window ``y`` (row-major flattened)."""
    n, m = data.shape
    l1, l2 = sub
    windows = np.lib.stride_tricks.sliding_window_view(data, (l1, l2))
    ys = windows.reshape(-1, l1 * l2)
    return ys.T @ ys.conj() / ys.shape[0]


def pseudospectrum(z_obs, mask, K, grid=128):
    """MUSIC pseudospectrum on a ``grid`` x ``grid`` sampling of the frequency torus.

    Entry ``[i, j]`` belongs to the atom ``exp(j(w_n n + w_m m))`` with
    ``w = 2 pi (i, j) / grid``.
    """
    data = _data(z_obs, mask)
    sub = subarray_shape(*data.shape)
    if K >= sub[0] * sub[1]:
        raise OrderError(f"model order {K} must be below the subarray size {sub[0] * sub[1]}")
    cov = smoothed_covariance(data, sub)
    eig = linalg.hermitian_eig(cov)
    noise = eig.eigenvectors[:, : sub[0] * sub[1] - K]
    stack = noise.T.reshape(-1, *sub)
    den = np.sum(np.abs(np.fft.fft2(stack, s=(grid, grid))) ** 2, axis=0)
    return 1.0 / np.maximum(den, np.finfo(float).tiny)


def music2d(z_obs, mask, cfg, params=None):
    """Scatterer estimates and re-synthesised echo from 2D MUSIC.

    ``params`` only converts frequencies to metres; the returned ``r_hat``
    does not depend on it.  Missing samples are zero-filled.
    """
    data = _data(z_obs, mask)
    n, m = data.shape
    params = params or default_params(n, m)
    K = cfg.model_order_K
    if K == 0:
        return [], np.zeros(n * m, dtype=complex)
    spec = pseudospectrum(data, mask, K, cfg.music_grid)
    freqs = top_peaks(spec, K)
    positions = frequencies_to_positions(freqs, params)
    atoms = np.array([atom(x, y, params).ravel() for x, y in positions]).T
    obs = mask.observed
    amps, *_ = np.linalg.lstsq(atoms[obs], data.ravel()[obs], rcond=None)
    detections = [Detection(float(x), float(y), complex(a)) for (x, y), a in zip(positions, amps)]
    return detections, atoms @ amps
