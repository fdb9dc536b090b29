"""Dense complex kernels: Hermitian eigendecomposition, PSD projection, 2D DFT.

Two eigensolvers are provided.  ``"lapack"`` calls the LAPACK divide and
conquer driver and is what the solvers use; ``"jacobi"`` is a cyclic
(round-robin ordered) complex Jacobi iteration kept as an independent
implementation for cross-checking and for environments without LAPACK.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _square(a):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return a


def hermitian_part(a):
    a = _square(a)
    return 0.5 * (a + a.conj().T)


def _round_robin(n):
    """Disjoint index pairings covering every (p, q) once per n-1 rounds."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
        if pairs:
            p, q = np.array(pairs).T
            rounds.append((p, q))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(a, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi eigendecomposition of a Hermitian matrix.

    Each round applies n/2 disjoint 2x2 unitary rotations at once; a sweep
    is n-1 rounds.  Stops when the off-diagonal Frobenius norm drops below
    ``tol * ||A||_F``.
    """
    a = hermitian_part(a).astype(complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    if n == 1:
        return EigenDecomposition(a.real.diagonal().copy(), v)
    scale = np.linalg.norm(a)
    rounds = _round_robin(n)
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.linalg.norm(a) ** 2 - np.sum(np.abs(a.diagonal()) ** 2), 0.0))
        if off <= tol * scale:
            break
        for p, q in rounds:
            app = a[p, p].real
            aqq = a[q, q].real
            apq = a[p, q]
            mag = np.abs(apq)
            live = mag > 1e-300
            phase = np.where(live, apq / np.where(live, mag, 1.0), 1.0)
            # real symmetric Jacobi angle on [[app, |apq|], [|apq|, aqq]]
            with np.errstate(over="ignore"):
                tau = np.where(live, (aqq - app) / (2 * np.where(live, mag, 1.0)), 0.0)
            # tau may be inf for a negligible |apq|; the angle is then zero
            t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
            t = np.where(live, t, 0.0)
            c = 1 / np.sqrt(1 + t * t)
            s = t * c
            # U = diag(1, conj(phase)) @ [[c, s], [-s, c]]
            u00, u01 = c, s
            u10, u11 = -s * phase.conj(), c * phase.conj()
            cp, cq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = cp * u00 + cq * u10
            a[:, q] = cp * u01 + cq * u11
            rp, rq = a[p, :].copy(), a[q, :].copy()
            a[p, :] = np.conj(u00)[:, None] * rp + np.conj(u10)[:, None] * rq
            a[q, :] = np.conj(u01)[:, None] * rp + np.conj(u11)[:, None] * rq
            vp, vq = v[:, p].copy(), v[:, q].copy()
            v[:, p] = vp * u00 + vq * u10
            v[:, q] = vp * u01 + vq * u11
    w = a.diagonal().real
    order = np.argsort(w, kind="stable")
    return EigenDecomposition(w[order].copy(), v[:, order])


def hermitian_eig(a, method="lapack"):
    """Eigenvalues (ascending) and unitary eigenvectors of ``(A + A^H) / 2``."""
    if method == "jacobi":
        return jacobi_eigh(a)
    if method != "lapack":
        raise ValueError(f"unknown eigensolver {method!r}")
    h = hermitian_part(a)
    w, v = scipy.linalg.eigh(h, driver="evd", check_finite=False)
    return EigenDecomposition(w, v)


def positive_eigenpairs(a, method="lapack", max_rank=None):
    """Eigenpairs of the Hermitian part of ``A`` with strictly positive eigenvalues.

    ``max_rank`` is a hint about how many to expect; below a quarter of the
    dimension LAPACK is asked for the positive part of the spectrum only.
    """
    h = hermitian_part(a)
    if method == "jacobi":
        eig = jacobi_eigh(h)
        w, v = eig.eigenvalues, eig.eigenvectors
    elif max_rank is not None and max_rank < h.shape[0] // 4:
        w, v = scipy.linalg.eigh(
            h, driver="evr", subset_by_value=(0.0, np.inf), check_finite=False
        )
    else:
        w, v = scipy.linalg.eigh(h, driver="evd", check_finite=False)
    keep = w > 0
    return w[keep], v[:, keep]


def psd_project(a, method="lapack", max_rank=None):
    """Frobenius-nearest positive semidefinite matrix to the Hermitian part of ``A``."""
    w, v = positive_eigenpairs(a, method, max_rank)
    n = np.shape(a)[0]
    if w.size == 0:
        return np.zeros((n, n), dtype=complex)
    out = (v * w) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def _padded_shape(shape, zero_pad):
    if int(zero_pad) != zero_pad or zero_pad < 1:
        raise ValueError(f"zero_pad must be an integer >= 1, got {zero_pad}")
    return shape[0] * int(zero_pad), shape[1] * int(zero_pad)


def dft_matrix(n_out, n_in):
    k = np.arange(n_out)[:, None]
    j = np.arange(n_in)[None, :]
    return np.exp(-2j * np.pi * k * j / n_out)


def dft2(data, zero_pad=1, method="fft"):
    """Centred, unitary 2D DFT of ``data`` zero-padded by an integer factor.

    Scaling is ``1/sqrt(P*Q)`` for the padded size ``P x Q``, so the transform
    preserves the Frobenius norm for every padding factor.  The zero
    frequency sits at index ``(P//2, Q//2)``.
    """
    data = np.asarray(data, dtype=complex)
    p, q = _padded_shape(data.shape, zero_pad)
    if method == "fft":
        spec = np.fft.fft2(data, s=(p, q))
    elif method == "direct":
        spec = dft_matrix(p, data.shape[0]) @ data @ dft_matrix(q, data.shape[1]).T
    else:
        raise ValueError(f"unknown dft method {method!r}")
    return np.fft.fftshift(spec) / np.sqrt(p * q)


def idft2(spectrum, shape=None):
    """Inverse of :func:`dft2`; ``shape`` crops away the zero padding."""
    spectrum = np.asarray(spectrum, dtype=complex)
    p, q = spectrum.shape
    data = np.fft.ifft2(np.fft.ifftshift(spectrum)) * np.sqrt(p * q)
    if shape is not None:
        data = data[: shape[0], : shape[1]]
    return data
