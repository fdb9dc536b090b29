"""Two-level Hermitian Toeplitz matrices parameterised by a 2D lag array.

For an N x M grid vectorised row-major (flat index ``n*M + m``) the matrix
``T(u)`` has entry ``u[n - n', m - m']`` at position ``((n, m), (n', m'))``:
an N x N block-Toeplitz arrangement of M x M Toeplitz blocks.

The adjoint implemented here averages each lag orbit instead of summing it.
With orbit sizes ``w[p, q] = (N - |p|)(M - |q|)`` this is the adjoint of
``T`` under the weighted inner product ``<u, v>_w = sum w * conj(u) * v``, and
it is an exact left inverse of ``T``.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionError, StructureError
from .linalg import hermitian_eig

SYMMETRY_TOL = 1e-12


@lru_cache(maxsize=32)
def _lag_index(n, m):
    """Flat lag index of every matrix entry, plus orbit sizes."""
    nn = np.repeat(np.arange(n), m)
    mm = np.tile(np.arange(m), n)
    p = nn[:, None] - nn[None, :] + (n - 1)
    q = mm[:, None] - mm[None, :] + (m - 1)
    idx = p * (2 * m - 1) + q
    idx.setflags(write=False)
    counts = np.bincount(idx.ravel(), minlength=(2 * n - 1) * (2 * m - 1))
    counts = counts.reshape(2 * n - 1, 2 * m - 1).astype(float)
    counts.setflags(write=False)
    return idx, counts


def orbit_sizes(n, m):
    return _lag_index(n, m)[1]


@dataclass(frozen=True)
class ToeplitzParam:
    """Lag array of shape ``(2N-1, 2M-1)``; ``lags[N-1+p, M-1+q]`` is lag ``(p, q)``."""

    lags: np.ndarray

    def __post_init__(self):
        lags = np.asarray(self.lags, dtype=complex)
        if lags.ndim != 2 or lags.shape[0] % 2 == 0 or lags.shape[1] % 2 == 0:
            raise DimensionError(f"lag array must have odd shape (2N-1, 2M-1), got {lags.shape}")
        object.__setattr__(self, "lags", lags)

    @property
    def dims(self):
        return (self.lags.shape[0] + 1) // 2, (self.lags.shape[1] + 1) // 2

    def __getitem__(self, pq):
        p, q = pq
        n, m = self.dims
        return self.lags[n - 1 + p, m - 1 + q]

    def symmetry_error(self):
        return float(np.max(np.abs(self.lags - self.lags[::-1, ::-1].conj())))

    @classmethod
    def zeros(cls, n, m):
        return cls(np.zeros((2 * n - 1, 2 * m - 1), dtype=complex))


def atom_lags(omega_n, omega_m, n, m, amplitude=1.0):
    """Lags of ``amplitude * a a^H`` for the atom ``a[n, m] = exp(j(omega_n n + omega_m m))``."""
    p = np.arange(-(n - 1), n)[:, None]
    q = np.arange(-(m - 1), m)[None, :]
    return ToeplitzParam(amplitude * np.exp(1j * (omega_n * p + omega_m * q)))


def build_toeplitz(u, check=True):
    """Dense NM x NM two-level Toeplitz matrix ``T(u)``."""
    if check and u.symmetry_error() > SYMMETRY_TOL * max(1.0, np.max(np.abs(u.lags))):
        raise StructureError(f"lag array is not Hermitian-symmetric (error {u.symmetry_error():.3g})")
    n, m = u.dims
    idx, _ = _lag_index(n, m)
    return u.lags.ravel()[idx]


def toeplitz_adjoint(g, dims):
    """Orbit-averaged lags of ``G``: the weighted adjoint and left inverse of ``T``."""
    g = np.asarray(g)
    n, m = dims
    if g.shape != (n * m, n * m):
        raise DimensionError(f"expected a {n * m} x {n * m} matrix, got {g.shape}")
    idx, counts = _lag_index(n, m)
    flat = idx.ravel()
    nl = counts.size
    sums = np.bincount(flat, weights=g.real.ravel(), minlength=nl) + 1j * np.bincount(
        flat, weights=g.imag.ravel(), minlength=nl
    )
    return ToeplitzParam(sums.reshape(counts.shape) / counts)


def weighted_inner(u, v):
    """``<u, v>_w``: the lag inner product under which the averaging adjoint is exact."""
    n, m = u.dims
    return np.sum(orbit_sizes(n, m) * np.conj(u.lags) * v.lags)


def default_epsilon(u_prev):
    """0.1 * largest eigenvalue of T(u_prev) plus a 1e-8 floor."""
    lam = hermitian_eig(build_toeplitz(u_prev, check=False)).eigenvalues
    return 0.1 * max(lam[-1], 0.0) + 1e-8


def weight_matrix(u_prev, epsilon=None):
    """Reweighting matrix ``(T(u_prev)_+ + epsilon I)^{-1}``.

    Negative eigenvalues of ``T(u_prev)`` are clamped at zero first, so the
    result is Hermitian positive definite with eigenvalues in ``(0, 1/epsilon]``.
    """
    t = build_toeplitz(u_prev, check=False)
    eig = hermitian_eig(t)
    lam = np.maximum(eig.eigenvalues, 0.0)
    if epsilon is None:
        epsilon = 0.1 * lam[-1] + 1e-8
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    v = eig.eigenvectors
    w = (v / (lam + epsilon)) @ v.conj().T
    return 0.5 * (w + w.conj().T)
