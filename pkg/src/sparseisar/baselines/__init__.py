"""Comparison reconstructors: 2D MUSIC, Cadzow denoising and SL0.

Every method takes ``(z_obs, mask, cfg)`` with ``z_obs`` an N x M matrix
(entries off the mask are ignored) and produces a complex ``r_hat`` of length
N*M in the same row-major order as the FRAND solver.  The algorithm modules
are imported on first use so that loading this package stays cheap.
"""

import importlib
from dataclasses import dataclass, replace

from ..errors import ParameterError

METHODS = ("music", "cadzow", "sl0")

_MODULES = {"music": "music", "cadzow": "cadzow", "sl0": "sl0"}
_FUNCTIONS = {"music": "music2d", "cadzow": "cadzow", "sl0": "sl0"}


@dataclass(frozen=True)
class BaselineConfig:
    """Tunable parameters for the baselines; only the fields of ``method`` are validated."""

    method: str = "music"
    model_order_K: int = 3
    music_grid: int = 128
    cadzow_iters: int = 20
    sl0_sigma_decay: float = 0.9
    sl0_inner_steps: int = 3
    sl0_grid_factor: int = 2
    sl0_mu: float = 2.0
    sl0_sigma_min_ratio: float = 1e-6

    def __post_init__(self):
        if self.method not in METHODS:
            raise ParameterError(f"unknown baseline {self.method!r}; valid: {', '.join(METHODS)}")
        if self.method in ("music", "cadzow") and self.model_order_K < 0:
            raise ParameterError("model_order_K must be >= 0")
        if self.method == "music" and self.music_grid < 2:
            raise ParameterError("music_grid must be >= 2")
        if self.method == "cadzow" and self.cadzow_iters < 1:
            raise ParameterError("cadzow_iters must be >= 1")
        if self.method == "sl0":
            if not 0 < self.sl0_sigma_decay < 1:
                raise ParameterError("sl0_sigma_decay must lie in (0, 1)")
            if self.sl0_inner_steps < 1:
                raise ParameterError("sl0_inner_steps must be >= 1")
            if int(self.sl0_grid_factor) != self.sl0_grid_factor or self.sl0_grid_factor < 1:
                raise ParameterError("sl0_grid_factor must be an integer >= 1")
            if self.sl0_mu <= 0:
                raise ParameterError("sl0_mu must be positive")
            if not 0 < self.sl0_sigma_min_ratio < 1:
                raise ParameterError("sl0_sigma_min_ratio must lie in (0, 1)")

    def with_method(self, method):
        return replace(self, method=method)


def get_method(name):
    """The reconstruction function for ``name``, importing its module lazily."""
    if name not in METHODS:
        raise ParameterError(f"unknown baseline {name!r}; valid: {', '.join(METHODS)}")
    module = importlib.import_module(f"{__name__}.{_MODULES[name]}")
    return getattr(module, _FUNCTIONS[name])


def reconstruct(z_obs, mask, cfg, params=None):
    """Run ``cfg.method`` and return only ``r_hat``."""
    fn = get_method(cfg.method)
    if cfg.method == "music":
        return fn(z_obs, mask, cfg, params=params)[1]
    if cfg.method == "sl0":
        return fn(z_obs, mask, cfg)[1]
    return fn(z_obs, mask, cfg)
