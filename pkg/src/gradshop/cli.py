"""Command line entry point.

Exit codes: 0 success, 1 usage or parse error, 2 data-domain error,
3 I/O error.
"""
import argparse
import csv
import json
import logging
import sys

import numpy as np

from . import pfm
from .config import METHODS, ConfigError, RunConfig
from .dls import dls_reconstruct
from .fields import GradientField, NormalMap
from .integrate import integrate_dct
from .metrics import rmse_aligned, ssim
from .photometric import (ImageStack, LightingSet, SignConvention, estimate_normals,
                          normals_to_gradients)
from .sweep import SweepSpec, format_csv, run_sweep
from .synthdata import SynthSpec, add_noise_snr, make_surface, scaled_noise

log = logging.getLogger("gradshop")

EXIT_USAGE, EXIT_DATA, EXIT_IO = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_synth(args):
    z, g = make_surface(SynthSpec(args.kind, args.rows, args.cols, args.amplitude))
    pfm.write_pfm(args.surface, z.values)
    pfm.write_pfm(args.gx, g.gx)
    pfm.write_pfm(args.gy, g.gy)


def cmd_noise(args):
    g = GradientField(pfm.read_pfm(args.gx), pfm.read_pfm(args.gy))
    noisy = add_noise_snr(g, args.snr_db, args.seed)
    pfm.write_pfm(args.out_gx, noisy.gx)
    pfm.write_pfm(args.out_gy, noisy.gy)
    noise = np.sqrt(np.sum((noisy.gx - g.gx) ** 2) + np.sum((noisy.gy - g.gy) ** 2))
    print(f"realized_snr_db {20 * np.log10(g.norm() / noise):.12f}")


def add_image_noise(images, snr_db, seed):
    """Gaussian noise on the whole stack at an exact realized SNR, clipped at 0."""
    I = images.images
    s = np.linalg.norm(I)
    if s == 0:
        raise ValueError("SNR is undefined for an all-zero image stack")
    noise = scaled_noise(s, np.random.default_rng(seed).standard_normal(I.shape), snr_db)
    return ImageStack(np.maximum(I + noise, 0.0))


def cmd_normals(args):
    lights = LightingSet(pfm.read_lights(args.lights))
    images = ImageStack(pfm.read_image_stack(args.images))
    if images.count != lights.count:
        raise ValueError(f"{images.count} images but {lights.count} light directions")
    if args.snr_db is not None:
        images = add_image_noise(images, args.snr_db, args.seed)
    nmap = estimate_normals(images, lights, shadow_threshold=args.shadow_threshold)
    pfm.write_pfm(args.out, nmap.vectors)
    if nmap.degenerate_mask.any():
        log.warning("%d degenerate pixels", int(nmap.degenerate_mask.sum()))


def _load_run_config(args):
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    kw = {}
    if args.method is not None:
        kw["method"] = args.method
    sign = cfg.sign
    if args.flip_x is not None or args.flip_y is not None:
        sign = SignConvention(
            cfg.sign.flip_x if args.flip_x is None else args.flip_x,
            cfg.sign.flip_y if args.flip_y is None else args.flip_y,
        )
    dls = cfg.dls if args.seed is None else cfg.dls.with_(seed=args.seed)
    return RunConfig(kw.get("method", cfg.method), dls, cfg.ssim, sign)


def cmd_reconstruct(args):
    cfg = _load_run_config(args)
    if args.normals:
        vectors = pfm.read_pfm(args.normals)
        if vectors.ndim != 3:
            raise ValueError("normals file must be a 3-channel PFM")
        g = normals_to_gradients(NormalMap(vectors), cfg.sign)
    elif args.gx and args.gy:
        g = GradientField(pfm.read_pfm(args.gx), pfm.read_pfm(args.gy))
    else:
        raise UsageError("give either --normals or both --gx and --gy")
    if cfg.method == "dctls":
        z = integrate_dct(g)
        trace_rows = []
    else:
        z, _, _, trace = dls_reconstruct(g, cfg.dls)
        trace_rows = trace.rows()
    pfm.write_pfm(args.out, z.values)
    if args.trace:
        _write_csv(args.trace, ["iteration", "objective", "data_term", "patch_fit", "l0", "rel_change"],
                   [[i, repr(r["objective"]), repr(r["data_term"]), repr(r["patch_fit"]), r["l0"],
                     repr(r["rel_change"])] for i, r in enumerate(trace_rows)])


def cmd_eval(args):
    cand = pfm.read_pfm(args.candidate)
    ref = pfm.read_pfm(args.reference)
    if cand.shape != ref.shape or cand.ndim != 2:
        raise ValueError(f"candidate {cand.shape} and reference {ref.shape} must be matching 1-channel grids")
    cfg = RunConfig.load(args.config).ssim if args.config else RunConfig().ssim
    s, r = ssim(cand, ref, cfg), rmse_aligned(cand, ref)
    _write_csv(args.out, ["ssim", "rmse_aligned"], [[repr(s), repr(r)]])
    print(f"ssim {s:.6f} rmse_aligned {r:.6g}")


def cmd_sweep(args):
    with open(args.spec) as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{args.spec}: {e}") from e
    spec = SweepSpec.from_dict(doc)
    rows = run_sweep(spec, args.threads)
    with open(args.out, "w", newline="") as f:
        f.write(format_csv(rows, timing=args.timing))


def build_parser():
    p = _Parser(prog="gradshop", description="Surface reconstruction from noisy gradient fields.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="write a synthetic surface and its analytic gradients")
    s.add_argument("kind", choices=("tent", "vase"))
    s.add_argument("rows", type=int)
    s.add_argument("cols", type=int)
    s.add_argument("surface")
    s.add_argument("gx")
    s.add_argument("gy")
    s.add_argument("--amplitude", type=float, default=1.0)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("noise", help="add Gaussian noise to a gradient field at an exact SNR")
    s.add_argument("gx")
    s.add_argument("gy")
    s.add_argument("out_gx")
    s.add_argument("out_gy")
    s.add_argument("--snr-db", type=float, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_noise)

    s = sub.add_parser("normals", help="photometric stereo on a directory of PFM images")
    s.add_argument("images", help="directory of 1-channel PFMs, sorted by name")
    s.add_argument("lights", help="text file, one 'x y z' direction per line")
    s.add_argument("--out", required=True)
    s.add_argument("--snr-db", type=float, default=None)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--shadow-threshold", type=float, default=None)
    s.set_defaults(func=cmd_normals)

    s = sub.add_parser("reconstruct", help="integrate gradients or normals into a surface")
    s.add_argument("--method", choices=None, default=None)
    s.add_argument("--gx")
    s.add_argument("--gy")
    s.add_argument("--normals")
    s.add_argument("--config")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--flip-x", action=argparse.BooleanOptionalAction, default=None)
    s.add_argument("--flip-y", action=argparse.BooleanOptionalAction, default=None)
    s.add_argument("--out", required=True)
    s.add_argument("--trace")
    s.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("eval", help="SSIM and aligned RMSE of a surface against a reference")
    s.add_argument("candidate")
    s.add_argument("reference")
    s.add_argument("--out", required=True)
    s.add_argument("--config")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("sweep", help="run a synthetic benchmark grid")
    s.add_argument("spec")
    s.add_argument("--out", required=True)
    s.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $GRADSHOP_THREADS or 1)")
    s.add_argument("--timing", action=argparse.BooleanOptionalAction, default=True,
                   help="record wall_ms (disable for byte-reproducible output)")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "method", None) is not None and args.method not in METHODS:
        print(f"gradshop: error: unknown method {args.method!r}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args.func(args)
    except (UsageError, ConfigError) as e:
        print(f"gradshop: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"gradshop: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"gradshop: error: {e}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
