"""Smoothed-l0 recovery over an oversampled 2D DFT dictionary."""

import numpy as np

from ..errors import DimensionError


def dictionary(shape, factor):
    """Columns ``exp(j 2 pi (k1 n / G1 + k2 m / G2))`` on a ``(factor N) x (factor M)`` grid.

    Rows are flattened ``(n, m)``, columns flattened ``(k1, k2)``; ``A A^H = G1 G2 I``.
    """
    n, m = shape
    g1, g2 = factor * n, factor * m
    f1 = np.exp(2j * np.pi * np.outer(np.arange(n), np.arange(g1)) / g1)
    f2 = np.exp(2j * np.pi * np.outer(np.arange(m), np.arange(g2)) / g2)
    return np.kron(f1, f2)


def sl0(z_obs, mask, cfg, trace=None):
    """Sparse grid coefficients and ``r_hat = A s``.

    Starting from the minimum-norm solution, each smoothness level ``sigma``
    takes ``cfg.sl0_inner_steps`` steps ``s <- s - mu s exp(-|s|^2 / 2 sigma^2)``,
    each followed by projection back onto ``{s : A_obs s = z_obs}``.  The level
    shrinks geometrically from ``2 max |s_0|`` until it falls below
    ``sl0_sigma_min_ratio`` times its start.  ``trace`` (a list) collects
    ``(sigma, number of |s| > sigma)`` after each level.
    """
    z = np.asarray(z_obs, dtype=complex)
    if z.ndim != 2:
        raise DimensionError("z_obs must be an N x M matrix")
    if mask.nm_total != z.size:
        raise DimensionError(f"mask covers {mask.nm_total} samples, data has {z.size}")
    g = int(cfg.sl0_grid_factor)
    grid = (g * z.shape[0], g * z.shape[1])
    full = dictionary(z.shape, g)
    obs = mask.observed
    a = full[obs]
    a_h = a.conj().T / (grid[0] * grid[1])
    y = z.ravel()[obs]
    s = a_h @ y
    peak = np.max(np.abs(s)) if s.size else 0.0
    if peak == 0:
        return np.zeros(grid, dtype=complex), np.zeros(z.size, dtype=complex)
    sigma = 2 * peak
    sigma_min = cfg.sl0_sigma_min_ratio * sigma
    while sigma > sigma_min:
        for _ in range(cfg.sl0_inner_steps):
            s = s - cfg.sl0_mu * s * np.exp(-np.abs(s) ** 2 / (2 * sigma**2))
            s = s - a_h @ (a @ s - y)
        if trace is not None:
            trace.append((sigma, int(np.count_nonzero(np.abs(s) > sigma))))
        sigma *= cfg.sl0_sigma_decay
    return s.reshape(grid), full @ s
