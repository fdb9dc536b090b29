"""Range/cross-range images and scatterer lists from recovered echoes.

Image axes: ``pixels[i, j]`` is cross-range ``x_axis[i]`` and range
``y_axis[j]``, both ascending.  A scatterer at ``(x, y)`` produces the phase
ramp ``exp(-j (a x n + b y m))`` where ``(a, b) = params.phase_steps()``, so
the DFT bin ``k`` along an axis of padded length ``P`` maps to
``-2 pi k / (a P)`` metres (and likewise for range).
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import linalg
from .model import atom
from .toeplitz import build_toeplitz

RANK_THRESHOLD = 1e-6


@dataclass(frozen=True)
class IsarImage:
    pixels: np.ndarray
    x_axis: np.ndarray
    y_axis: np.ndarray
    normalized: bool

    @property
    def extent(self):
        return (self.x_axis[0], self.x_axis[-1], self.y_axis[0], self.y_axis[-1])

    def peak_position(self):
        i, j = np.unravel_index(np.argmax(self.pixels), self.pixels.shape)
        return self.x_axis[i], self.y_axis[j]


class Detection(NamedTuple):
    x: float
    y: float
    amplitude: complex


def _axis(n_pad, step):
    """Metric coordinate of each centred DFT bin and the ascending order."""
    k = np.arange(n_pad) - n_pad // 2
    if step == 0:
        coords = k.astype(float)
    else:
        coords = -2 * np.pi * k / (step * n_pad)
    order = np.argsort(coords, kind="stable")
    return coords[order], order


def form_image(r_hat, params, zero_pad=4, normalize=True):
    """Magnitude of the centred, zero-padded 2D DFT of the N x M echo."""
    r = np.asarray(r_hat, dtype=complex).reshape(params.shape)
    spec = np.abs(linalg.dft2(r, zero_pad))
    ax, ay = params.phase_steps()
    x_axis, ix = _axis(spec.shape[0], ax)
    y_axis, iy = _axis(spec.shape[1], ay)
    pixels = spec[np.ix_(ix, iy)]
    peak = pixels.max()
    scaled = bool(normalize and peak > 0)
    if scaled:
        pixels = pixels / peak
    return IsarImage(pixels, x_axis, y_axis, scaled)


def resynthesize(detections, params):
    """Echo matrix implied by a detection list (the atoms weighted by amplitudes)."""
    out = np.zeros(params.shape, dtype=complex)
    for d in detections:
        out += d.amplitude * atom(d.x, d.y, params)
    return out


def _wrap(w):
    return (w + np.pi) % (2 * np.pi) - np.pi


def _parabolic(left, mid, right):
    den = left - 2 * mid + right
    if den >= 0:
        return 0.0
    return float(np.clip(0.5 * (left - right) / den, -0.5, 0.5))


def top_peaks(spec, count):
    """Angular frequencies of the ``count`` largest local maxima of a spectrum on the 2D torus.

    ``spec[i, j]`` is sampled at ``(2 pi i / P, 2 pi j / Q)``; each peak is
    refined by per-axis parabolic interpolation and wrapped to ``[-pi, pi)``.
    """
    p, q = spec.shape
    is_max = np.ones_like(spec, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                is_max &= spec >= np.roll(np.roll(spec, di, axis=0), dj, axis=1)
    cand = np.flatnonzero(is_max)
    cand = cand[np.argsort(spec.ravel()[cand], kind="stable")[::-1]][:count]
    out = []
    for flat in cand:
        i, j = divmod(int(flat), q)
        di = _parabolic(spec[(i - 1) % p, j], spec[i, j], spec[(i + 1) % p, j]) if p > 2 else 0.0
        dj = _parabolic(spec[i, (j - 1) % q], spec[i, j], spec[i, (j + 1) % q]) if q > 2 else 0.0
        out.append((_wrap(2 * np.pi * (i + di) / p), _wrap(2 * np.pi * (j + dj) / q)))
    return out


def projection_spectrum(vectors, shape, grid):
    """``sum_j |v_j^H a(w)|^2`` on a ``grid`` sampling of the torus, one flattened vector per column."""
    n, m = shape
    stack = vectors.T.reshape(-1, n, m)
    return np.sum(np.abs(np.fft.fft2(stack, s=grid)) ** 2, axis=0)


def subspace_peaks(vectors, shape, count, zero_pad=8):
    """Strongest ``count`` peaks of the projection of atoms ``exp(j(w_n n + w_m m))`` onto span(vectors)."""
    n, m = shape
    spec = projection_spectrum(vectors, shape, (n * zero_pad, m * zero_pad)) / (n * m)
    return top_peaks(spec, count)


def frequencies_to_positions(freqs, params):
    ax, ay = params.phase_steps()
    pos = []
    for wn, wm in freqs:
        x = -wn / ax if ax > 0 else 0.0
        y = -wm / ay if ay > 0 else 0.0
        pos.append((x, y))
    return pos


def _amplitudes_from_lags(u, freqs):
    n, m = u.dims
    p = np.arange(-(n - 1), n)
    q = np.arange(-(m - 1), m)
    cols = [np.exp(1j * (wn * p[:, None] + wm * q[None, :])).ravel() for wn, wm in freqs]
    coef, *_ = np.linalg.lstsq(np.array(cols).T, u.lags.ravel(), rcond=None)
    return coef


def extract_scatterers(u_hat, K, params, data=None, mask=None, zero_pad=8):
    """Scatterer positions read from the eigenstructure of ``T(u_hat)``.

    Eigenvectors whose eigenvalues exceed ``1e-6 * lambda_max`` span the
    signal subspace (at most ``K`` of them).  Frequencies are the peaks of the
    subspace projection spectrum.  Amplitudes are least-squares fits to the
    masked ``data`` when given, otherwise to the lag array itself (which for
    a noiseless atomic decomposition returns the atom weights).
    """
    if K < 1:
        return []
    eig = linalg.hermitian_eig(build_toeplitz(u_hat, check=False))
    lam = eig.eigenvalues
    if lam[-1] <= 0:
        return []
    keep = np.flatnonzero(lam > RANK_THRESHOLD * lam[-1])[::-1][:K]
    vecs = eig.eigenvectors[:, keep]
    freqs = subspace_peaks(vecs, params.shape, len(keep), zero_pad)
    positions = frequencies_to_positions(freqs, params)
    if data is not None:
        obs = np.arange(params.nm) if mask is None else mask.observed
        cols = np.array([atom(x, y, params).ravel()[obs] for x, y in positions]).T
        amps, *_ = np.linalg.lstsq(cols, np.asarray(data).ravel()[obs], rcond=None)
    else:
        amps = _amplitudes_from_lags(u_hat, freqs)
    return [Detection(float(x), float(y), complex(a)) for (x, y), a in zip(positions, amps)]


def write_pgm(path, image):
    """16-bit binary PGM (rows = cross-range) plus a ``.txt`` sidecar with the extent."""
    pix = np.asarray(image.pixels, dtype=float)
    peak = pix.max()
    scaled = np.zeros_like(pix) if peak <= 0 else pix / peak
    data = np.round(scaled * 65535).astype(">u2")
    rows, cols = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n65535\n".encode("ascii"))
        fh.write(data.tobytes())
    with open(str(path) + ".txt", "w") as fh:
        x0, x1, y0, y1 = (float(v) for v in image.extent)
        fh.write(f"extent = {x0!r} {x1!r} {y0!r} {y1!r}\n")
        fh.write(f"shape = {rows} {cols}\n")
        fh.write(f"normalized = {str(bool(image.normalized or peak > 0)).lower()}\n")
        fh.write(f"peak = {float(peak)!r}\n")


def read_pgm(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    parts = raw.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    cols, rows, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    body = parts[4]
    dtype = ">u2" if maxval > 255 else "u1"
    return np.frombuffer(body, dtype=dtype).reshape(rows, cols)


def write_detections(path, detections):
    with open(path, "w") as fh:
        fh.write("x,y,amplitude_abs,amplitude_re,amplitude_im\n")
        for d in detections:
            a = complex(d.amplitude)
            fh.write(f"{d.x!r},{d.y!r},{abs(a)!r},{a.real!r},{a.imag!r}\n")
