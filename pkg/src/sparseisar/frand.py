"""Reweighted atomic-norm denoising of sparse-aperture echoes by ADMM.

The program solved in every reweighting round is::

    minimise    ||r_O - z_O||^2 + lam * (Re Tr(W T(u)) / NM + t)
    subject to  [[T(u), r], [r^H, t]]  is positive semidefinite

with ``T(u)`` the two-level Toeplitz matrix of ``toeplitz.py``.  The trace is
divided by NM so that, for ``W = I``, ``(Tr(T)/NM + t) / 2`` is exactly the
atomic norm of ``r`` (and ``t`` the sum of scatterer amplitudes at the
optimum); ``lam`` is therefore on the usual soft-thresholding scale.

The first round uses ``W = I``.  Each later round sets
``W = (T(u_prev) + eps I)^{-1}`` from the previous round's lags, rescaled to
mean eigenvalue one so that directions the previous round found empty keep
the first-round penalty while recovered directions are penalised less.

Internally the iteration runs on the congruence-balanced variables
``T(u) / sqrt(NM)`` and ``t * sqrt(NM)`` (same PSD constraint, comparable
magnitudes in both diagonal blocks).  In those variables the penalty reads
``lam / sqrt(NM) * (Re Tr(W T) + t)``; :class:`SolverState` holds them, and
:func:`solve` maps ``u`` and ``t`` back before returning.

Each ADMM iteration minimises the augmented Lagrangian exactly over
``(t, u, r)`` with ``(Z, Lambda)`` fixed, projects the bordered matrix
shifted by ``Lambda / rho`` onto the PSD cone to get ``Z``, and then takes a
dual ascent step on ``Lambda``.  ``Z0``/``Lambda0`` denote the leading
NM x NM block, ``Z1``/``Lambda1`` the last column without its final entry,
and ``Ztt``/``Lambda_tt`` the bottom-right scalar.
"""

import csv
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import linalg
from .errors import DimensionError, ParameterError, SolverError
from .toeplitz import ToeplitzParam, build_toeplitz, toeplitz_adjoint, weighted_inner, weight_matrix


@dataclass(frozen=True)
class SolverConfig:
    """FRAND parameters.

    ``tol_primal``/``tol_dual`` default to ``1e-6 * sqrt(NM)`` when None.
    The reweighting floor is
    ``eps = epsilon_scale * lambda_max(T(u_prev)) + epsilon_lam * lam + epsilon_floor``;
    the ``lam`` term keeps noise-level components of a low-SNR first round
    from being promoted.
    """

    lam: float = 1.0
    rho: float = 1.0
    max_iters: int = 1000
    tol_primal: float = None
    tol_dual: float = None
    reweight_rounds: int = 3
    epsilon_scale: float = 0.1
    epsilon_floor: float = 1e-8
    epsilon_lam: float = 0.5
    weighting_enabled: bool = True
    normalize_weight: bool = True
    warm_start: bool = True

    def __post_init__(self):
        if not self.lam > 0:
            raise ParameterError(f"lam must be positive, got {self.lam}")
        if not self.rho > 0:
            raise ParameterError(f"rho must be positive, got {self.rho}")
        if self.max_iters < 1:
            raise ParameterError("max_iters must be >= 1")
        if self.reweight_rounds < 1:
            raise ParameterError("reweight_rounds must be >= 1")
        for name in ("tol_primal", "tol_dual"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise ParameterError(f"{name} must be positive, got {val}")
        if self.epsilon_scale < 0 or self.epsilon_lam < 0 or not self.epsilon_floor > 0:
            raise ParameterError("epsilon terms must be non-negative and epsilon_floor > 0")

    def tolerances(self, nm):
        default = 1e-6 * np.sqrt(nm)
        return (self.tol_primal or default, self.tol_dual or default)


@dataclass
class SolverState:
    t: float
    u: ToeplitzParam
    r: np.ndarray
    Z: np.ndarray
    Lambda: np.ndarray
    iteration: int = 0
    primal_residual: float = np.inf
    dual_residual: float = np.inf
    rank: int = None


@dataclass
class SolveResult:
    r_hat: np.ndarray
    u_hat: ToeplitzParam
    t_hat: float
    primal_residuals: np.ndarray
    dual_residuals: np.ndarray
    objectives: np.ndarray
    iterations_run: int
    wall_time: float
    rounds: list = field(default_factory=list)
    converged: bool = False

    def data_matrix(self, shape):
        return self.r_hat.reshape(shape)

    def write_diagnostics(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", "primal", "dual", "objective"])
            for i, (p, d, o) in enumerate(
                zip(self.primal_residuals, self.dual_residuals, self.objectives), start=1
            ):
                w.writerow([i, repr(float(p)), repr(float(d)), repr(float(o))])


def select_lambda(snr_db, sigma_n, nm, calibration=1.0):
    """Regularisation weight ``calibration * sigma_n * sqrt(NM log NM)``.

    When ``sigma_n`` is None it is derived from ``snr_db`` assuming unit
    signal power per sample.
    """
    if sigma_n is None:
        sigma_n = 0.0 if np.isposinf(snr_db) else 10 ** (-snr_db / 20)
    if sigma_n < 0:
        raise ParameterError("sigma_n must be non-negative")
    if nm <= 1:
        return 0.0
    return calibration * sigma_n * np.sqrt(nm * np.log(nm))


def bordered(u, r, t):
    """The (NM+1) x (NM+1) matrix ``[[T(u), r], [r^H, t]]``."""
    nm = r.size
    out = np.empty((nm + 1, nm + 1), dtype=complex)
    out[:nm, :nm] = build_toeplitz(u, check=False)
    out[:nm, nm] = r
    out[nm, :nm] = r.conj()
    out[nm, nm] = t
    return out


def objective(r, u, t, z_flat, mask, lam, w_lags=None):
    """``||r_O - z_O||^2 + lam * (Re Tr(W T(u)) + t)`` in balanced variables.

    ``lam`` here is the balanced weight ``cfg.lam / sqrt(NM)``; ``w_lags`` is
    the orbit-averaged adjoint of ``W`` (None means identity).
    """
    obs = mask.observed
    fid = float(np.sum(np.abs(r[obs] - z_flat[obs]) ** 2))
    n, m = u.dims
    if w_lags is None:
        trace = n * m * u[0, 0].real
    else:
        trace = weighted_inner(w_lags, u).real
    return fid + lam * (trace + t)


def initial_state(z_flat, mask, dims):
    nm = z_flat.size
    r = np.zeros(nm, dtype=complex)
    r[mask.observed] = z_flat[mask.observed]
    zero = np.zeros((nm + 1, nm + 1), dtype=complex)
    return SolverState(t=0.0, u=ToeplitzParam.zeros(*dims), r=r, Z=zero, Lambda=zero.copy())


def _check_inputs(z_obs, mask):
    z_obs = np.asarray(z_obs, dtype=complex)
    if z_obs.ndim != 2:
        raise DimensionError("z_obs must be an N x M matrix")
    if mask.nm_total != z_obs.size:
        raise DimensionError(f"mask covers {mask.nm_total} samples, data has {z_obs.size}")
    return z_obs


def admm_iterate(state, z_obs, mask, W, cfg, w_lags=None):
    """One ADMM sweep: exact (t, u, r) block update, PSD projection, dual step.

    ``W`` is the weighting matrix or None for the identity.  ``w_lags`` may
    carry its precomputed orbit average.
    """
    z_obs = _check_inputs(z_obs, mask)
    dims = z_obs.shape
    z_flat = z_obs.ravel()
    nm = z_flat.size
    lam, rho = cfg.lam, cfg.rho
    Z, L = state.Z, state.Lambda

    u = toeplitz_adjoint(Z[:nm, :nm] + L[:nm, :nm] / rho, dims)
    lam_b = lam / np.sqrt(nm)
    t = Z[nm, nm].real + (L[nm, nm].real - lam_b) / rho
    shrink = lam_b / rho
    if W is None:
        u.lags[dims[0] - 1, dims[1] - 1] -= shrink
    else:
        if w_lags is None:
            w_lags = toeplitz_adjoint(W, dims)
        u = ToeplitzParam(u.lags - shrink * w_lags.lags)

    r = Z[:nm, nm] + L[:nm, nm] / rho
    obs = mask.observed
    r[obs] = (z_flat[obs] + L[:nm, nm][obs] + rho * Z[:nm, nm][obs]) / (1 + rho)

    B = bordered(u, r, t)
    hint = None if state.rank is None else state.rank + 8
    w_pos, v_pos = linalg.positive_eigenpairs(B - L / rho, max_rank=hint)
    Z_new = (v_pos * w_pos) @ v_pos.conj().T
    Z_new = 0.5 * (Z_new + Z_new.conj().T)
    diff = Z_new - B
    L_new = L + rho * diff
    L_new = 0.5 * (L_new + L_new.conj().T)

    primal = float(np.linalg.norm(diff))
    dual = float(rho * np.linalg.norm(Z_new - Z))
    if not (np.isfinite(primal) and np.isfinite(dual)):
        raise SolverError(f"ADMM diverged at iteration {state.iteration + 1}", state.iteration + 1)
    return SolverState(
        t=t,
        u=u,
        r=r,
        Z=Z_new,
        Lambda=L_new,
        iteration=state.iteration + 1,
        primal_residual=primal,
        dual_residual=dual,
        rank=int(w_pos.size),
    )


def run_round(state, z_obs, mask, W, cfg, trace=None):
    """ADMM iterations until both residuals fall under tolerance or ``max_iters``."""
    dims = z_obs.shape
    nm = z_obs.size
    tol_p, tol_d = cfg.tolerances(nm)
    w_lags = None if W is None else toeplitz_adjoint(W, dims)
    z_flat = z_obs.ravel()
    converged = False
    for _ in range(cfg.max_iters):
        state = admm_iterate(state, z_obs, mask, W, cfg, w_lags=w_lags)
        if trace is not None:
            trace.append(
                (
                    state.primal_residual,
                    state.dual_residual,
                    objective(state.r, state.u, state.t, z_flat, mask, cfg.lam / np.sqrt(nm), w_lags),
                )
            )
        if state.primal_residual <= tol_p and state.dual_residual <= tol_d:
            converged = True
            break
    return state, converged


def solve(z_obs, mask, cfg=SolverConfig()):
    """Denoise and complete the masked echo ``z_obs``.

    Returns the final round's estimate together with per-iteration residual
    and objective traces concatenated over all rounds.
    """
    z_obs = _check_inputs(z_obs, mask)
    dims = z_obs.shape
    z_flat = z_obs.ravel()
    start = time.perf_counter()
    state = initial_state(z_flat, mask, dims)
    trace = []
    rounds = []
    W = None
    n_rounds = cfg.reweight_rounds if cfg.weighting_enabled else 1
    converged = False
    for k in range(n_rounds):
        if k > 0:
            W = reweighting_matrix(state.u, cfg)
            if not cfg.warm_start:
                fresh = initial_state(z_flat, mask, dims)
                state = replace(fresh, iteration=state.iteration)
        before = len(trace)
        state, converged = run_round(state, z_obs, mask, W, cfg, trace)
        rounds.append({"round": k + 1, "iterations": len(trace) - before, "converged": converged})
    arr = np.array(trace).reshape(-1, 3)
    root = np.sqrt(z_obs.size)
    return SolveResult(
        r_hat=state.r.copy(),
        u_hat=ToeplitzParam(state.u.lags * root),
        t_hat=float(state.t / root),
        primal_residuals=arr[:, 0],
        dual_residuals=arr[:, 1],
        objectives=arr[:, 2],
        iterations_run=len(trace),
        wall_time=time.perf_counter() - start,
        rounds=rounds,
        converged=converged,
    )


def reweighting_matrix(u, cfg):
    """``(T(u) + eps I)^{-1}`` with the configured floor, optionally rescaled to mean eigenvalue 1."""
    lam_max = linalg.hermitian_eig(build_toeplitz(u, check=False)).eigenvalues[-1]
    lam_b = cfg.lam / np.sqrt(u.dims[0] * u.dims[1])
    eps = cfg.epsilon_scale * max(lam_max, 0.0) + cfg.epsilon_lam * lam_b + cfg.epsilon_floor
    W = weight_matrix(u, eps)
    if cfg.normalize_weight:
        W = W * (W.shape[0] / np.trace(W).real)
    return W
