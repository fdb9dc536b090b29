"""Scenes, radar grids and the dechirped two-dimensional echo model.

A data matrix is a plain ``complex128`` array of shape ``(N, M)``: row ``n``
is the observation angle, column ``m`` the frequency step.  The flat index
used by aperture masks is ``n * M + m`` (row-major), which is also the
vectorisation order used by the Toeplitz and solver modules.

Random draws use NumPy's PCG64 bit generator seeded through a
``SeedSequence`` of ``(seed, stream)``, so masks and noise reproduce across
platforms and the mask and noise streams stay independent for equal seeds.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, FormatError, ParameterError

C0 = 299792458.0

MASK_STREAM = 0
NOISE_STREAM = 1


@dataclass(frozen=True)
class RadarParams:
    """Stepped-frequency radar grid after motion compensation.

    Attributes:
        f0: carrier frequency of the first step (Hz)
        delta_f: frequency step (Hz)
        M: number of frequency steps
        N: number of observation angles
        theta_span: total rotation angle over the N angles (rad)
        c: propagation speed (m/s)
    """

    f0: float
    delta_f: float
    M: int
    N: int
    theta_span: float
    c: float = C0

    def __post_init__(self):
        if self.M < 1 or self.N < 1:
            raise ParameterError(f"N and M must be >= 1, got N={self.N}, M={self.M}")
        if not self.f0 > 0:
            raise ParameterError(f"f0 must be positive, got {self.f0}")
        if self.delta_f < 0:
            raise ParameterError(f"delta_f must be non-negative, got {self.delta_f}")
        if not self.theta_span > 0:
            raise ParameterError(f"theta_span must be positive, got {self.theta_span}")
        if not self.c > 0:
            raise ParameterError(f"c must be positive, got {self.c}")

    @property
    def shape(self):
        return (self.N, self.M)

    @property
    def nm(self):
        return self.N * self.M

    @property
    def angles(self):
        if self.N == 1:
            return np.zeros(1)
        return np.arange(self.N) * (self.theta_span / (self.N - 1))

    @property
    def frequencies(self):
        return self.f0 + np.arange(self.M) * self.delta_f

    @property
    def bandwidth(self):
        return self.M * self.delta_f

    def phase_steps(self):
        """Per-sample phase increments (rad) along angle and frequency for unit x and y."""
        dtheta = self.theta_span / (self.N - 1) if self.N > 1 else 0.0
        return 4 * np.pi * self.f0 * dtheta / self.c, 4 * np.pi * self.delta_f / self.c

    def extent(self):
        """Unambiguous (cross-range, range) window widths in metres."""
        ax, ay = self.phase_steps()
        wx = 2 * np.pi / ax if ax > 0 else np.inf
        wy = 2 * np.pi / ay if ay > 0 else np.inf
        return wx, wy

    def resolution(self):
        """Nominal (cross-range, range) resolution cells in metres."""
        wx, wy = self.extent()
        return wx / self.N, wy / self.M


def default_params(N=40, M=40, theta_span=0.05):
    """X-band preset: 10 GHz start frequency, 500 MHz total bandwidth.

    The 0.4 us pulse width of the reference waveform only matters for the
    time-domain chirp, which is not modelled; it is recorded here for
    provenance.  ``theta_span`` and the N x M split are local choices.
    """
    return RadarParams(f0=10e9, delta_f=500e6 / M, M=M, N=N, theta_span=theta_span)


DEFAULT_PULSE_WIDTH = 0.4e-6


@dataclass(frozen=True)
class Scene:
    """Point scatterers as rows of ``(x, y, sigma)``."""

    scatterers: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))

    def __post_init__(self):
        arr = np.asarray(self.scatterers, dtype=float).reshape(-1, 3)
        if np.any(arr[:, 2] <= 0):
            raise ParameterError("scatterer reflectivities must be > 0")
        arr.setflags(write=False)
        object.__setattr__(self, "scatterers", arr)

    def __len__(self):
        return self.scatterers.shape[0]

    @property
    def x(self):
        return self.scatterers[:, 0]

    @property
    def y(self):
        return self.scatterers[:, 1]

    @property
    def sigma(self):
        return self.scatterers[:, 2]

    def __or__(self, other):
        return Scene(np.vstack([self.scatterers, other.scatterers]))


def quadcopter_scene():
    """Synthetic cross-shaped quadcopter: a 5-point body, four arms, rotor hubs.

    29 scatterers inside a 1 m x 1 m box.  Only meant for demo images; the
    geometry is invented.
    """
    pts = [(0.0, 0.0, 1.5)]
    for k, (dx, dy) in enumerate([(1, 0), (0, 1), (-1, 0), (0, -1)]):
        pts.append((0.07 * dx, 0.07 * dy, 1.2 - 0.1 * k))
    diag = np.array([(1, 1), (-1, 1), (-1, -1), (1, -1)]) / np.sqrt(2)
    for k, (ux, uy) in enumerate(diag):
        for j, rad in enumerate((0.14, 0.21, 0.28, 0.35)):
            pts.append((rad * ux, rad * uy, 0.6 + 0.1 * j + 0.05 * k))
        # rotor hub pair straddling the arm tip
        for s in (-1, 1):
            pts.append((0.42 * ux - s * 0.05 * uy, 0.42 * uy + s * 0.05 * ux, 1.0 + 0.1 * k))
    return Scene(np.array(pts))


def sparse_scene(params, n_scatterers, seed=0, min_separation=2.0, fill=0.7):
    """Random off-grid scatterers separated by at least ``min_separation`` cells.

    Positions are drawn uniformly inside the central ``fill`` fraction of the
    unambiguous window, reflectivities uniformly in [0.5, 1.5].
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 7])))
    wx, wy = params.extent()
    dx, dy = params.resolution()
    if not np.isfinite(wx):
        wx, dx = 1.0, 1.0
    if not np.isfinite(wy):
        wy, dy = 1.0, 1.0
    pts = []
    for _ in range(100000):
        if len(pts) == n_scatterers:
            break
        x = (rng.random() - 0.5) * fill * wx
        y = (rng.random() - 0.5) * fill * wy
        if all(np.hypot((x - p[0]) / dx, (y - p[1]) / dy) >= min_separation for p in pts):
            pts.append((x, y, 0.5 + rng.random()))
    else:
        raise ParameterError("could not place scatterers with the requested separation")
    return Scene(np.array(pts).reshape(-1, 3))


@dataclass(frozen=True)
class ApertureMask:
    """Observed flat indices (ascending, unique) into the NM vectorisation."""

    observed: np.ndarray
    nm_total: int

    def __post_init__(self):
        obs = np.asarray(self.observed, dtype=np.int64).ravel()
        if obs.size < 1:
            raise ParameterError("an aperture mask needs at least one observed sample")
        if obs.min() < 0 or obs.max() >= self.nm_total:
            raise ParameterError("mask indices out of range")
        if np.any(np.diff(obs) <= 0):
            uniq = np.unique(obs)
            if uniq.size != obs.size:
                raise ParameterError("mask indices must be unique")
            obs = uniq
        obs.setflags(write=False)
        object.__setattr__(self, "observed", obs)

    def __len__(self):
        return self.observed.size

    def as_bool(self, shape=None):
        out = np.zeros(self.nm_total, dtype=bool)
        out[self.observed] = True
        return out if shape is None else out.reshape(shape)

    @classmethod
    def full(cls, nm_total):
        return cls(np.arange(nm_total), nm_total)


def angle_freq_params(params):
    """Phase-rate vectors ``(h_n, h_m)`` in rad/m along angle and frequency.

    The angle term uses ``f0`` in place of ``f_m`` (small-angle approximation);
    the frequency term keeps the exact ``f_m``.
    """
    h_n = 4 * np.pi * params.f0 * params.angles / params.c
    h_m = 4 * np.pi * params.frequencies / params.c
    return h_n, h_m


def atom(x, y, params):
    """Unit-modulus N x M echo of a single scatterer at ``(x, y)``."""
    h_n, h_m = angle_freq_params(params)
    return np.exp(-1j * h_n[:, None] * x - 1j * h_m[None, :] * y)


def synthesize_echo(scene, params):
    """Noiseless dechirped echo matrix of ``scene`` on the grid of ``params``."""
    h_n, h_m = angle_freq_params(params)
    if len(scene) == 0:
        return np.zeros(params.shape, dtype=complex)
    # (K, N) and (K, M) phase factors, combined with an einsum over scatterers
    pn = np.exp(-1j * np.outer(scene.x, h_n))
    pm = np.exp(-1j * np.outer(scene.y, h_m))
    return np.einsum("k,kn,km->nm", scene.sigma.astype(complex), pn, pm)


def _rng(seed, stream):
    if seed < 0:
        raise ParameterError(f"seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), stream])))


def random_mask(nm_total, n_observed, seed):
    """Uniformly random sparse aperture of ``n_observed`` out of ``nm_total`` samples."""
    if not 1 <= n_observed <= nm_total:
        raise ParameterError(f"n_observed must lie in [1, {nm_total}], got {n_observed}")
    if n_observed == nm_total:
        return ApertureMask.full(nm_total)
    idx = _rng(seed, MASK_STREAM).choice(nm_total, size=n_observed, replace=False)
    return ApertureMask(np.sort(idx), nm_total)


def signal_power(data, mask):
    flat = np.asarray(data).ravel()
    return float(np.mean(np.abs(flat[mask.observed]) ** 2))


def noise_variance(data, mask, snr_db):
    """Complex noise variance that yields ``snr_db`` over the observed entries."""
    if np.isposinf(snr_db):
        return 0.0
    p_sig = signal_power(data, mask)
    if p_sig == 0:
        raise ParameterError("observed signal power is zero; cannot scale noise to an SNR")
    return p_sig / 10 ** (snr_db / 10)


def add_awgn(data, mask, snr_db, seed):
    """Observed entries plus circular complex Gaussian noise; the rest zeroed.

    ``snr_db = inf`` disables the noise.
    """
    data = np.asarray(data, dtype=complex)
    if mask.nm_total != data.size:
        raise DimensionError(f"mask covers {mask.nm_total} samples, data has {data.size}")
    var = noise_variance(data, mask, snr_db)
    out = np.zeros(data.size, dtype=complex)
    obs = data.ravel()[mask.observed]
    if var > 0:
        g = _rng(seed, NOISE_STREAM).standard_normal((2, len(mask)))
        obs = obs + np.sqrt(var / 2) * (g[0] + 1j * g[1])
    out[mask.observed] = obs
    return out.reshape(data.shape)


# Binary data files: 12-byte magic, u32 version, u32 N, u32 M, then (re, im) f64 pairs.
DATA_MAGIC = b"SPISAR-DATA\x00"
DATA_VERSION = 1
_HEADER = struct.Struct("<12sIII")


def write_data(path, data):
    data = np.asarray(data, dtype=complex)
    if data.ndim != 2:
        raise DimensionError("data matrix must be two-dimensional")
    n, m = data.shape
    payload = np.empty((n, m, 2), dtype="<f8")
    payload[..., 0] = data.real
    payload[..., 1] = data.imag
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(DATA_MAGIC, DATA_VERSION, n, m))
        fh.write(payload.tobytes())


def read_data(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: file too short for a data header")
    magic, version, n, m = _HEADER.unpack_from(raw)
    if magic != DATA_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != DATA_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    body = raw[_HEADER.size:]
    if len(body) != 16 * n * m:
        raise FormatError(f"{path}: expected {16 * n * m} payload bytes, found {len(body)}")
    pairs = np.frombuffer(body, dtype="<f8").reshape(n, m, 2)
    return pairs[..., 0] + 1j * pairs[..., 1]


def write_mask(path, mask):
    with open(path, "w") as fh:
        fh.write(f"# aperture mask nm_total={mask.nm_total} observed={len(mask)}\n")
        fh.write("\n".join(str(i) for i in mask.observed))
        fh.write("\n")


def read_mask(path):
    nm_total = None
    idx = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    if tok.startswith("nm_total="):
                        nm_total = int(tok.split("=", 1)[1])
                continue
            idx.append(int(line))
    if nm_total is None:
        raise FormatError(f"{path}: missing nm_total header")
    return ApertureMask(np.array(idx, dtype=np.int64), nm_total)
