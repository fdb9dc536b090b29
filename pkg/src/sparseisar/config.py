"""Plain-text experiment files.

Grammar (``#`` starts a comment, blank lines are ignored)::

    [section]
    key = value

Recognised sections are ``radar``, ``scene``, ``solver``, ``music``,
``cadzow``, ``sl0`` and ``experiment``.  Inside ``[scene]`` a line of three
numbers ``x y sigma`` adds an explicit scatterer; otherwise ``preset``
selects ``quadcopter`` or ``sparse`` (with ``count``, ``seed``,
``min_separation``).  List values are comma separated.
"""

from dataclasses import dataclass, field, fields

import numpy as np

from .errors import FormatError, ParameterError
from .model import C0, RadarParams, Scene, quadcopter_scene, sparse_scene

SECTIONS = ("radar", "scene", "solver", "music", "cadzow", "sl0", "experiment")
BASELINE_KEYS = {
    "model_order_k", "music_grid", "cadzow_iters", "sl0_sigma_decay",
    "sl0_inner_steps", "sl0_grid_factor", "sl0_mu", "sl0_sigma_min_ratio",
}
# [solver] keys are checked against SolverConfig when the section is used
KEYS = {
    "radar": {"n", "m", "f0", "bandwidth", "delta_f", "theta_span", "c"},
    "scene": {"preset", "count", "seed", "min_separation"},
    "music": BASELINE_KEYS,
    "cadzow": BASELINE_KEYS,
    "sl0": BASELINE_KEYS,
    "experiment": {
        "methods", "snr", "samples", "trials", "base_seed", "output_dir",
        "workers", "record_time", "bench_reps",
    },
}


@dataclass
class ConfigFile:
    sections: dict = field(default_factory=dict)
    scatterers: list = field(default_factory=list)

    def section(self, name):
        return self.sections.get(name, {})


def parse_config(text, source="<config>"):
    cfg = ConfigFile()
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if line.startswith("["):
            if not line.endswith("]"):
                raise FormatError(f"{where}: malformed section header {raw!r}")
            current = line[1:-1].strip().lower()
            if current not in SECTIONS:
                raise FormatError(f"{where}: unknown section [{current}]")
            cfg.sections.setdefault(current, {})
            continue
        if current is None:
            raise FormatError(f"{where}: entry outside any section")
        if "=" in line:
            key, value = (part.strip() for part in line.split("=", 1))
            if not key:
                raise FormatError(f"{where}: empty key")
            if current in KEYS and key.lower() not in KEYS[current]:
                raise FormatError(f"{where}: unknown key {key!r} in [{current}]")
            cfg.sections[current][key.lower()] = value
        elif current == "scene":
            parts = line.split()
            try:
                row = [float(p) for p in parts]
            except ValueError:
                raise FormatError(f"{where}: expected 'x y sigma', got {raw!r}") from None
            if len(row) != 3:
                raise FormatError(f"{where}: expected 3 numbers, got {len(row)}")
            cfg.scatterers.append(row)
        else:
            raise FormatError(f"{where}: expected 'key = value', got {raw!r}")
    return cfg


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read(), str(path))


def as_bool(value):
    v = str(value).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ParameterError(f"not a boolean: {value!r}")


def as_list(value, kind=float):
    items = [v.strip() for v in str(value).split(",") if v.strip()]
    if not items:
        raise ParameterError("empty list")
    return [kind(v) for v in items]


def as_snr(value):
    v = str(value).strip().lower()
    return np.inf if v in ("inf", "+inf", "noiseless") else float(v)


def radar_params(cfg, N=16, M=16):
    sec = cfg.section("radar")
    n = int(sec.get("n", N))
    m = int(sec.get("m", M))
    bandwidth = float(sec.get("bandwidth", 500e6))
    return RadarParams(
        f0=float(sec.get("f0", 10e9)),
        delta_f=float(sec.get("delta_f", bandwidth / m)),
        M=m,
        N=n,
        theta_span=float(sec.get("theta_span", 0.05)),
        c=float(sec.get("c", C0)),
    )


def scene_from(cfg, params):
    sec = cfg.section("scene")
    if cfg.scatterers:
        return Scene(np.array(cfg.scatterers, dtype=float))
    preset = sec.get("preset", "quadcopter").lower()
    if preset == "quadcopter":
        return quadcopter_scene()
    if preset == "sparse":
        return sparse_scene(
            params,
            int(sec.get("count", 3)),
            seed=int(sec.get("seed", 0)),
            min_separation=float(sec.get("min_separation", 2.0)),
        )
    raise ParameterError(f"unknown scene preset {preset!r}; valid: quadcopter, sparse")


def _typed(cls, values, skip=()):
    """Convert string ``values`` to the field types of dataclass ``cls``."""
    out = {}
    known = {f.name.lower(): f for f in fields(cls)}
    for key, raw in values.items():
        if key in skip:
            continue
        f = known.get(key)
        if f is None:
            raise ParameterError(f"unknown {cls.__name__} field {key!r}")
        default = f.default
        if isinstance(default, bool):
            out[f.name] = as_bool(raw)
        elif isinstance(default, int):
            out[f.name] = int(raw)
        elif isinstance(default, str):
            out[f.name] = raw
        else:
            out[f.name] = None if raw.lower() == "none" else float(raw)
    return out


def solver_options(cfg):
    """``(SolverConfig kwargs, lambda calibration or None for an explicit lam)``."""
    from .frand import SolverConfig

    sec = dict(cfg.section("solver"))
    calibration = float(sec.pop("calibration", 1.0))
    if sec.get("lam", "auto").lower() == "auto":
        sec.pop("lam", None)
        return _typed(SolverConfig, sec), calibration
    return _typed(SolverConfig, sec), None


def baseline_options(cfg, method):
    """Keyword arguments for the baseline config of ``method`` (without importing it)."""
    sec = cfg.section(method)
    out = {}
    for key, raw in sec.items():
        if key in ("sl0_sigma_decay", "sl0_mu", "sl0_sigma_min_ratio"):
            out[key] = float(raw)
        elif key == "model_order_k":
            out["model_order_K"] = int(raw)
        else:
            out[key] = int(raw)
    return out
