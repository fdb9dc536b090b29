"""Monte-Carlo sweeps and timing benchmarks over methods, SNRs and sample counts.

Trial ``t`` of every cell uses seed ``base_seed + t`` for both the aperture
mask and the noise, so all methods, SNRs and sample counts of one trial see
the same random draws (a paired design) and serial and parallel runs give
identical numbers.  Baseline modules are only imported when a baseline is
requested.
"""

import csv
import io
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import frand, metrics
from .errors import IsarError, ParameterError
from .imaging import form_image
from .model import add_awgn, noise_variance, random_mask, synthesize_echo

SCHEMA_VERSION = 1
METHODS = ("frand", "music", "cadzow", "sl0")
SWEEP_COLUMNS = (
    "method", "snr_db", "n_samples", "trial", "mse_data", "mse_image",
    "psnr_db", "ssim", "seconds", "status",
)
BENCH_COLUMNS = ("method", "n_samples", "reps", "median_s", "mean_s", "var_s", "min_s", "max_s", "status")
# lambda used when the data are noiseless (the selection rule gives zero)
NOISELESS_LAM = 1e-3
IMAGE_ZERO_PAD = 4
# ADMM budget per reweighting round for desk-scale sweeps; the estimates
# change by well under one standard error beyond about 30 iterations
DESK_SOLVER = {"max_iters": 30}


@dataclass
class Experiment:
    params: object
    scene: object
    methods: tuple = ("frand",)
    snr_grid: tuple = (10.0,)
    sample_grid: tuple = (80,)
    trials: int = 1
    base_seed: int = 0
    output_dir: str = "."
    solver: dict = field(default_factory=dict)
    # None means ``solver["lam"]`` is used as given
    lam_calibration: float = 1.0
    baseline: dict = field(default_factory=dict)
    workers: int = 1
    record_time: bool = False
    bench_reps: int = 5

    def __post_init__(self):
        self.methods = tuple(self.methods)
        self.snr_grid = tuple(float(s) for s in self.snr_grid)
        self.sample_grid = tuple(int(s) for s in self.sample_grid)
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if not self.methods or not self.snr_grid or not self.sample_grid:
            raise ParameterError("methods, snr_grid and sample_grid must be nonempty")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ParameterError(f"unknown method {bad[0]!r}; valid: {', '.join(METHODS)}")
        for n in self.sample_grid:
            if not 1 <= n <= self.params.nm:
                raise ParameterError(f"sample count {n} outside [1, {self.params.nm}]")
        if self.bench_reps < 5:
            raise ParameterError("bench_reps must be >= 5")

    def seed(self, trial):
        return self.base_seed + trial


def experiment_from_config(cfg, **overrides):
    """Build an :class:`Experiment` from a parsed config file."""
    from .config import as_bool, as_list, as_snr, baseline_options, radar_params, scene_from, solver_options

    params = radar_params(cfg)
    sec = cfg.section("experiment")
    solver, calibration = solver_options(cfg)
    kwargs = dict(
        params=params,
        scene=scene_from(cfg, params),
        methods=tuple(as_list(sec.get("methods", "frand"), str)),
        snr_grid=tuple(as_list(sec.get("snr", "10"), as_snr)),
        sample_grid=tuple(as_list(sec.get("samples", str(params.nm)), int)),
        trials=int(sec.get("trials", 1)),
        base_seed=int(sec.get("base_seed", 0)),
        output_dir=sec.get("output_dir", "."),
        solver=solver,
        lam_calibration=calibration,
        baseline={m: baseline_options(cfg, m) for m in ("music", "cadzow", "sl0")},
        workers=int(sec.get("workers", 1)),
        record_time=as_bool(sec.get("record_time", "false")),
        bench_reps=int(sec.get("bench_reps", 5)),
    )
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return Experiment(**kwargs)


def trial_data(exp, snr_db, n_samples, trial, truth=None):
    """Mask, noisy observation and noise standard deviation for one trial."""
    truth = synthesize_echo(exp.scene, exp.params) if truth is None else truth
    seed = exp.seed(trial)
    mask = random_mask(exp.params.nm, n_samples, seed)
    z = add_awgn(truth, mask, snr_db, seed)
    sigma = math.sqrt(noise_variance(truth, mask, snr_db))
    return mask, z, sigma


def frand_config(exp, snr_db, sigma, n_observed):
    """Solver settings for one trial; lambda follows the noise level unless fixed in ``exp.solver``."""
    opts = dict(exp.solver)
    if exp.lam_calibration is not None or "lam" not in opts:
        lam = frand.select_lambda(snr_db, sigma, n_observed, exp.lam_calibration or 1.0)
        opts["lam"] = lam if lam > 0 else NOISELESS_LAM
    return frand.SolverConfig(**opts)


def reconstruct(exp, method, z, mask, snr_db, sigma):
    """``r_hat`` (length NM) from any method."""
    if method == "frand":
        cfg = frand_config(exp, snr_db, sigma, len(mask))
        return frand.solve(z, mask, cfg).r_hat
    from . import baselines

    opts = dict(exp.baseline.get(method, {}))
    opts.setdefault("model_order_K", len(exp.scene))
    cfg = baselines.BaselineConfig(method=method, **opts)
    return baselines.reconstruct(z, mask, cfg, params=exp.params)


def evaluate(truth, r_hat, params):
    """(mse_data, mse_image, psnr_db, ssim) of an estimate against the clean echo."""
    r_hat = np.asarray(r_hat).reshape(params.shape)
    ref = form_image(truth, params, IMAGE_ZERO_PAD).pixels
    est = form_image(r_hat, params, IMAGE_ZERO_PAD).pixels
    return (
        metrics.mse(truth, r_hat),
        metrics.mse(ref, est),
        metrics.psnr(ref, est),
        metrics.ssim(ref, est),
    )


def _run_trial(task):
    exp, method, snr_db, n_samples, trial = task
    truth = synthesize_echo(exp.scene, exp.params)
    mask, z, sigma = trial_data(exp, snr_db, n_samples, trial, truth)
    start = time.perf_counter()
    try:
        r_hat = reconstruct(exp, method, z, mask, snr_db, sigma)
        if not np.all(np.isfinite(r_hat)):
            raise FloatingPointError("non-finite estimate")
        values = evaluate(truth, r_hat, exp.params)
        status = "ok"
    except (IsarError, np.linalg.LinAlgError, FloatingPointError) as exc:
        values = (math.nan,) * 4
        status = f"error:{type(exc).__name__}"
    seconds = time.perf_counter() - start
    return dict(
        method=method, snr_db=snr_db, n_samples=n_samples, trial=trial,
        mse_data=values[0], mse_image=values[1], psnr_db=values[2], ssim=values[3],
        seconds=seconds, status=status,
    )


def _map(fn, tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _aggregate(rows):
    ok = [r for r in rows if r["status"] == "ok"]
    first = rows[0]
    agg = dict(method=first["method"], snr_db=first["snr_db"], n_samples=first["n_samples"], trial="mean")
    for key in ("mse_data", "mse_image", "psnr_db", "ssim", "seconds"):
        agg[key] = float(np.mean([r[key] for r in ok])) if ok else math.nan
    failed = len(rows) - len(ok)
    agg["status"] = "ok" if not failed else f"failed:{failed}/{len(rows)}"
    return agg


def sweep_rows(exp):
    """Per-trial rows followed by one aggregate row for every (method, snr, n_samples) cell."""
    cells = [(m, s, n) for m in exp.methods for s in exp.snr_grid for n in exp.sample_grid]
    tasks = [(exp, m, s, n, t) for m, s, n in cells for t in range(exp.trials)]
    results = _map(_run_trial, tasks, exp.workers)
    out = []
    for i in range(len(cells)):
        block = results[i * exp.trials:(i + 1) * exp.trials]
        out.extend(block)
        out.append(_aggregate(block))
    return out


def _fmt(value):
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def sweep_csv(rows, record_time=False):
    buf = io.StringIO()
    buf.write(f"# sparseisar sweep schema v{SCHEMA_VERSION}\n")
    buf.write("# mse_data: complex N x M echo; mse_image/psnr_db/ssim: max-normalised magnitude images\n")
    buf.write(
        f"# ssim: gaussian window {metrics.SSIM_WINDOW}x{metrics.SSIM_WINDOW} sigma {metrics.SSIM_SIGMA}, "
        f"K1 {metrics.SSIM_K1}, K2 {metrics.SSIM_K2}, L = max(reference)\n"
    )
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        vals = [_fmt(row[c]) for c in SWEEP_COLUMNS]
        if not record_time:
            vals[SWEEP_COLUMNS.index("seconds")] = ""
        writer.writerow(vals)
    return buf.getvalue()


def run_sweep(exp, path=None):
    """Run the sweep and write its CSV (``output_dir/sweep.csv`` by default); returns the path.

    Wall-clock seconds are left blank unless ``exp.record_time`` is set so
    that equal experiments produce byte-identical files.
    """
    rows = sweep_rows(exp)
    path = path or os.path.join(exp.output_dir, "sweep.csv")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(sweep_csv(rows, exp.record_time))
    return path


def bench_rows(exp):
    """Wall-clock seconds per (method, n_samples) at the first SNR of the grid, trial 0 data."""
    snr = exp.snr_grid[0]
    truth = synthesize_echo(exp.scene, exp.params)
    rows = []
    for method in exp.methods:
        for n in exp.sample_grid:
            mask, z, sigma = trial_data(exp, snr, n, 0, truth)
            times = []
            status = "ok"
            try:
                reconstruct(exp, method, z, mask, snr, sigma)  # warm-up, discarded
                for _ in range(exp.bench_reps):
                    start = time.perf_counter()
                    reconstruct(exp, method, z, mask, snr, sigma)
                    times.append(time.perf_counter() - start)
            except (IsarError, np.linalg.LinAlgError, FloatingPointError) as exc:
                status = f"error:{type(exc).__name__}"
            if times:
                stats = (
                    statistics.median(times), statistics.fmean(times), statistics.variance(times),
                    min(times), max(times),
                )
            else:
                stats = (math.nan,) * 5
            rows.append(dict(zip(BENCH_COLUMNS, (method, n, len(times)) + stats + (status,))))
    return rows


def run_bench(exp, path=None):
    rows = bench_rows(exp)
    path = path or os.path.join(exp.output_dir, "bench.csv")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# sparseisar bench schema v{SCHEMA_VERSION}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BENCH_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in BENCH_COLUMNS])
    return path


def read_sweep(path):
    """Rows of a sweep CSV as dicts of strings, comment lines skipped."""
    with open(path, newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    return list(csv.DictReader(lines))
