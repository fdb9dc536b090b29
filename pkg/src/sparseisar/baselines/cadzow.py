"""Cadzow denoising: alternating rank-K truncation and two-level Hankel averaging."""

import math

import numpy as np

from .. import linalg
from ..errors import DimensionError, OrderError


def pencil(n, m):
    return math.ceil((n + 1) / 2), math.ceil((m + 1) / 2)


def _hankel_index(shape, pen):
    n, m = shape
    p1, p2 = pen
    q1, q2 = n - p1 + 1, m - p2 + 1
    i1, i2 = np.divmod(np.arange(p1 * p2), p2)
    j1, j2 = np.divmod(np.arange(q1 * q2), q2)
    return (i1[:, None] + j1[None, :]) * m + (i2[:, None] + j2[None, :])


def lift(data, pen=None):
    """Two-level Hankel matrix ``H[(i1, i2), (j1, j2)] = X[i1 + j1, i2 + j2]``."""
    data = np.asarray(data)
    pen = pen or pencil(*data.shape)
    return data.ravel()[_hankel_index(data.shape, pen)]


def delift(h, shape, pen=None):
    """Average each anti-diagonal orbit of ``h`` back into an N x M matrix."""
    pen = pen or pencil(*shape)
    idx = _hankel_index(shape, pen).ravel()
    size = shape[0] * shape[1]
    counts = np.bincount(idx, minlength=size)
    h = np.asarray(h).ravel()
    re = np.bincount(idx, weights=h.real, minlength=size)
    im = np.bincount(idx, weights=h.imag, minlength=size)
    return ((re + 1j * im) / counts).reshape(shape)


def truncate_rank(h, K, method="lapack"):
    """Frobenius-nearest rank-``K`` matrix, from the eigenpairs of ``[[0, H], [H^H, 0]]``.

    The dilation has eigenvalues ``+-s_i`` with eigenvectors ``[u_i; v_i] / sqrt 2``,
    so the top ``K`` of them give ``sum s_i u_i v_i^H``.
    """
    p, q = h.shape
    dil = np.zeros((p + q, p + q), dtype=complex)
    dil[:p, p:] = h
    dil[p:, :p] = h.conj().T
    eig = linalg.hermitian_eig(dil, method)
    top = slice(p + q - K, p + q)
    w = np.maximum(eig.eigenvalues[top], 0.0)
    vecs = eig.eigenvectors[:, top]
    left, right = vecs[:p], vecs[p:]
    return 2 * (left * w) @ right.conj().T


def cadzow(z_obs, mask, cfg, trace=None):
    """Structure-restored estimate after ``cfg.cadzow_iters`` rounds.

    Each round lifts the current estimate, truncates to rank K, averages back
    to an N x M matrix and re-imposes the observed samples.  The returned
    echo is the averaged matrix of the last round before re-imposition, so
    observed samples are denoised too.  ``trace`` (a list) collects each
    round's structure-restored matrix.
    """
    z = np.asarray(z_obs, dtype=complex)
    if z.ndim != 2:
        raise DimensionError("z_obs must be an N x M matrix")
    if mask.nm_total != z.size:
        raise DimensionError(f"mask covers {mask.nm_total} samples, data has {z.size}")
    shape = z.shape
    pen = pencil(*shape)
    rank_bound = min(pen[0] * pen[1], (shape[0] - pen[0] + 1) * (shape[1] - pen[1] + 1))
    K = cfg.model_order_K
    if K > rank_bound:
        raise OrderError(f"model order {K} exceeds the Hankel rank bound {rank_bound}")
    if K == 0:
        return np.zeros(z.size, dtype=complex)
    obs = mask.observed
    current = np.zeros(z.size, dtype=complex)
    current[obs] = z.ravel()[obs]
    current = current.reshape(shape)
    restored = current
    for _ in range(cfg.cadzow_iters):
        restored = delift(truncate_rank(lift(current, pen), K), shape, pen)
        if trace is not None:
            trace.append(restored)
        current = restored.copy().ravel()
        current[obs] = z.ravel()[obs]
        current = current.reshape(shape)
    return restored.ravel()
