"""Command line entry point: simulate, solve, sweep, bench, render."""

import argparse
import os
import sys

import numpy as np

from .errors import IsarError

METHODS = ("frand", "music", "cadzow", "sl0")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _method(value):
    if value not in METHODS:
        raise argparse.ArgumentTypeError(
            f"unknown method {value!r}; valid methods: {', '.join(METHODS)}"
        )
    return value


def _snr(value):
    from .config import as_snr

    try:
        return as_snr(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an SNR in dB: {value!r}") from None


def build_parser():
    p = _Parser(prog="sparseisar", description="Sparse-aperture ISAR simulation and reconstruction.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="experiment file (see README for the grammar)")
        sp.add_argument("--seed", type=int, help="base seed (overrides the config)")
        sp.add_argument("--out", default=".", help="output directory")

    sp = sub.add_parser("simulate", help="synthesise a masked, noisy echo")
    common(sp)
    sp.add_argument("--snr", type=_snr, help="SNR in dB ('inf' for noiseless)")
    sp.add_argument("--samples", type=int, help="number of observed samples")

    sp = sub.add_parser("solve", help="reconstruct an echo and form its image")
    common(sp)
    sp.add_argument("--data", required=True, help="data file written by simulate")
    sp.add_argument("--mask", help="mask file (default: every sample observed)")
    sp.add_argument("--method", type=_method, default="frand")
    sp.add_argument("--snr", type=_snr, help="SNR in dB used to set lambda (default from config or 10)")
    sp.add_argument("--zero-pad", type=int, default=4)

    for name, text in (("sweep", "Monte-Carlo metric sweep"), ("bench", "timing benchmark")):
        sp = sub.add_parser(name, help=text)
        common(sp)
        sp.add_argument("--method", type=_method, action="append", help="restrict to a method (repeatable)")
        sp.add_argument("--snr", type=_snr, action="append", help="restrict the SNR grid (repeatable)")
        sp.add_argument("--samples", type=int, action="append", help="restrict the sample grid (repeatable)")
        sp.add_argument("--trials", type=int)
        sp.add_argument("--workers", type=int)
        if name == "sweep":
            sp.add_argument("--record-time", action="store_true", help="fill the seconds column")

    sp = sub.add_parser("render", help="write a PGM image of an echo file")
    common(sp)
    sp.add_argument("--data", required=True)
    sp.add_argument("--zero-pad", type=int, default=4)
    return p


def _load(args):
    from .config import ConfigFile, load_config

    return load_config(args.config) if args.config else ConfigFile()


def _cmd_simulate(args, cfg):
    from .config import as_list, as_snr, radar_params, scene_from
    from .model import add_awgn, random_mask, synthesize_echo, write_data, write_mask

    params = radar_params(cfg)
    scene = scene_from(cfg, params)
    sec = cfg.section("experiment")
    seed = args.seed if args.seed is not None else int(sec.get("base_seed", 0))
    snr = args.snr if args.snr is not None else as_list(sec.get("snr", "inf"), as_snr)[0]
    n = args.samples if args.samples is not None else as_list(sec.get("samples", str(params.nm)), int)[0]
    truth = synthesize_echo(scene, params)
    mask = random_mask(params.nm, n, seed)
    z = add_awgn(truth, mask, snr, seed)
    os.makedirs(args.out, exist_ok=True)
    write_data(os.path.join(args.out, "data.bin"), z)
    write_data(os.path.join(args.out, "truth.bin"), truth)
    write_mask(os.path.join(args.out, "mask.txt"), mask)
    print(f"wrote {params.N}x{params.M} echo with {len(mask)} observed samples to {args.out}")


def _cmd_solve(args, cfg):
    from . import harness
    from .config import as_list, as_snr
    from .imaging import extract_scatterers, form_image, write_detections, write_pgm
    from .model import ApertureMask, read_data, read_mask, write_data

    z = read_data(args.data)
    mask = read_mask(args.mask) if args.mask else ApertureMask.full(z.size)
    exp = harness.experiment_from_config(cfg)
    if exp.params.shape != z.shape:
        from .config import radar_params

        exp.params = radar_params(cfg, *z.shape) if not cfg.section("radar") else exp.params
        if exp.params.shape != z.shape:
            raise IsarError(f"data shape {z.shape} does not match the configured radar grid")
    sec = cfg.section("experiment")
    snr = args.snr if args.snr is not None else as_list(sec.get("snr", "10"), as_snr)[0]
    obs = z.ravel()[mask.observed]
    power = float(np.mean(np.abs(obs) ** 2)) if obs.size else 0.0
    # observed power is signal plus noise; split it according to the SNR
    sigma = 0.0 if np.isinf(snr) else float(np.sqrt(power / (1 + 10 ** (snr / 10))))
    os.makedirs(args.out, exist_ok=True)
    if args.method == "frand":
        from . import frand

        result = frand.solve(z, mask, harness.frand_config(exp, snr, sigma, len(mask)))
        r_hat = result.r_hat
        dets = extract_scatterers(result.u_hat, len(exp.scene), exp.params, data=z, mask=mask)
        result.write_diagnostics(os.path.join(args.out, "diagnostics.csv"))
    elif args.method == "music":
        from .baselines import BaselineConfig, get_method

        opts = dict(exp.baseline.get("music", {}))
        opts.setdefault("model_order_K", len(exp.scene))
        dets, r_hat = get_method("music")(z, mask, BaselineConfig("music", **opts), params=exp.params)
    else:
        r_hat = harness.reconstruct(exp, args.method, z, mask, snr, sigma)
        dets = None
    write_data(os.path.join(args.out, "r_hat.bin"), np.asarray(r_hat).reshape(z.shape))
    image = form_image(r_hat, exp.params, args.zero_pad)
    write_pgm(os.path.join(args.out, "image.pgm"), image)
    if dets is not None:
        write_detections(os.path.join(args.out, "scatterers.csv"), dets)
    px, py = image.peak_position()
    print(f"{args.method}: image peak at x={px:.3f} m, y={py:.3f} m; outputs in {args.out}")


def _experiment(args, cfg):
    from . import harness

    return harness.experiment_from_config(
        cfg,
        methods=tuple(args.method) if args.method else None,
        snr_grid=tuple(args.snr) if args.snr else None,
        sample_grid=tuple(args.samples) if args.samples else None,
        trials=args.trials,
        workers=args.workers,
        base_seed=args.seed,
        output_dir=args.out,
        record_time=True if getattr(args, "record_time", False) else None,
    )


def _cmd_sweep(args, cfg):
    from . import harness

    path = harness.run_sweep(_experiment(args, cfg))
    print(f"wrote {path}")


def _cmd_bench(args, cfg):
    from . import harness

    path = harness.run_bench(_experiment(args, cfg))
    print(f"wrote {path}")


def _cmd_render(args, cfg):
    from .config import radar_params
    from .imaging import form_image, write_pgm
    from .model import read_data

    r = read_data(args.data)
    params = radar_params(cfg, *r.shape)
    if params.shape != r.shape:
        raise IsarError(f"data shape {r.shape} does not match the configured radar grid")
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "image.pgm")
    write_pgm(path, form_image(r, params, args.zero_pad))
    print(f"wrote {path}")


COMMANDS = {
    "simulate": _cmd_simulate,
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "bench": _cmd_bench,
    "render": _cmd_render,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
    except UsageError as exc:
        print(exc, file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        cfg = _load(args)
        COMMANDS[args.command](args, cfg)
    except (IsarError, OSError, ValueError) as exc:
        print(f"sparseisar {args.command}: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # anything else is still a runtime failure, not a usage error
        print(f"sparseisar {args.command}: unexpected {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
