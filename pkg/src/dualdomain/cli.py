"""``dualdomain`` command line: phantom, simulate, mask, reconstruct, evaluate.

Exit codes: 0 success, 1 usage or parameter error, 2 I/O or format error,
3 numerical abort during reconstruction.
"""
from __future__ import annotations

import argparse
import glob
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .ddo import NumericalAbort, ReconConfig, reconstruct
from .detect import column_rule, detect_mask
from .grid import ParameterError, SizeError
from .metrics import evaluate
from .motion import SeverityPreset, corrupt, sample_motion
from .phantom import generate_phantom

log = logging.getLogger("dualdomain")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_ABORT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; the contract here reserves 2 for I/O
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_image(path) -> np.ndarray:
    arr = io.read_ddt(path)
    if np.iscomplexobj(arr):
        raise io.FormatError(f"{path}: expected a real image, found complex data")
    return arr.astype(np.float64)


def _read_kspace(path) -> np.ndarray:
    arr = io.read_ddt(path)
    if not np.iscomplexobj(arr):
        raise io.FormatError(f"{path}: expected complex k-space, found real data")
    return arr


def cmd_phantom(args) -> int:
    img = generate_phantom(args.kind.replace("-", "_"), args.size, args.seed)
    io.write_ddt(args.out, img)
    return EXIT_OK


def cmd_simulate(args) -> int:
    clean = _read_image(args.input)
    preset = SeverityPreset.named(args.severity, args.max_rot_deg, args.mm_per_px)
    trace = sample_motion(preset, clean.shape[0], args.seed)
    kspace, mask = corrupt(clean, trace)
    io.write_ddt(args.out, kspace)
    if args.mask_out:
        io.write_mask(args.mask_out, mask)
    if args.motion_log:
        io.write_motion_log(args.motion_log, trace, seed=args.seed, preset=args.severity)
    log.info("%d motion events, %d of %d lines corrupted", trace.n_events, mask.count, len(mask))
    return EXIT_OK


def cmd_mask(args) -> int:
    if args.method == "oracle":
        if not args.motion_log:
            raise UsageError("--method oracle needs --motion-log")
        mask = io.read_motion_log(args.motion_log).gt_mask()
        if args.input:
            n = io.read_ddt(args.input).shape[0]
            if n != len(mask):
                raise SizeError(f"motion log covers {len(mask)} lines, k-space has {n}")
    elif args.method == "detector":
        if not args.input:
            raise UsageError("--method detector needs --input")
        mask = detect_mask(_read_kspace(args.input), z=args.threshold_z)
    else:
        if not args.mask_in:
            raise UsageError("--method external needs --mask-in (a probability map)")
        prob = _read_image(args.mask_in)
        mask = column_rule(prob, args.column_frac)
    io.write_mask(args.out, mask)
    log.info("%d of %d lines flagged", mask.count, len(mask))
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    f_o = _read_kspace(args.input)
    mask = io.read_mask(args.mask)
    boundaries = ()
    if args.motion_log:
        boundaries = io.read_motion_log(args.motion_log).boundaries
    cfg = ReconConfig(epochs=args.epochs, lr=args.lr, lowpass_fraction=args.lowpass_frac, seed=args.seed)
    try:
        result = reconstruct(f_o, mask, cfg, boundaries=boundaries)
    except NumericalAbort as exc:
        ckpt = args.checkpoint or f"{args.out}.ckpt"
        if exc.checkpoint is not None:
            io.write_checkpoint(ckpt, exc.checkpoint)
        print(f"numerical abort at epoch {exc.epoch}: {exc}; last checkpoint: {ckpt}", file=sys.stderr)
        return EXIT_ABORT
    io.write_ddt(args.out, result.image)
    if args.log:
        io.write_training_log(args.log, result.log)
    if args.checkpoint:
        io.write_checkpoint(args.checkpoint, result.params)
    log.info("final total loss %.6g", result.log[-1].total)
    return EXIT_OK


def _expand(pattern: str) -> list[str]:
    paths = sorted(glob.glob(pattern))
    if not paths:
        raise FileNotFoundError(f"no file matches {pattern!r}")
    return paths


def metric_report(pairs) -> dict:
    """Per-image metrics plus mean and population std of each metric."""
    images = []
    for recon_path, ref_path in pairs:
        x = _read_image(recon_path)
        ref = _read_image(ref_path)
        if x.shape != ref.shape:
            raise SizeError(f"{recon_path} is {x.shape}, {ref_path} is {ref.shape}")
        images.append({"recon": str(recon_path), "ref": str(ref_path), **evaluate(x, ref).as_percent()})
    keys = ("psnr_db", "ssim_pct", "haarpsi_pct", "vif_pct")
    aggregate = {k: {"mean": float(np.mean([r[k] for r in images])),
                     "std": float(np.std([r[k] for r in images]))} for k in keys}
    return {"images": images, "aggregate": aggregate, "std": "population", "vif_variant": "pixel"}


def cmd_evaluate(args) -> int:
    recons = _expand(args.recon)
    refs = _expand(args.ref)
    if len(refs) == 1 and len(recons) > 1:
        refs = refs * len(recons)
    if len(recons) != len(refs):
        raise UsageError(f"{len(recons)} reconstructions but {len(refs)} references")
    report = metric_report(zip(recons, refs))
    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    p = _Parser(prog="dualdomain", description=__doc__.splitlines()[0], parents=[common])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("phantom", parents=[common], help="write a synthetic test image")
    s.add_argument("--kind", choices=("shepp-logan", "smooth-random", "shepp_logan", "smooth_random"),
                   default="shepp-logan")
    s.add_argument("--size", type=int, default=128)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_phantom)

    s = sub.add_parser("simulate", parents=[common], help="corrupt an image with rigid inter-shot motion")
    s.add_argument("--input", required=True)
    s.add_argument("--severity", choices=("light", "heavy"), default="light")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--mask-out")
    s.add_argument("--motion-log")
    s.add_argument("--max-rot-deg", type=float, default=10.0)
    s.add_argument("--mm-per-px", type=float, default=1.0)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("mask", parents=[common], help="produce a motion-line mask")
    s.add_argument("--input", help="observed k-space (detector; optional shape check for oracle)")
    s.add_argument("--method", choices=("oracle", "detector", "external"), required=True)
    s.add_argument("--motion-log", help="motion log written by simulate (oracle)")
    s.add_argument("--mask-in", help="per-sample probability map (external)")
    s.add_argument("--threshold-z", type=float, default=None,
                   help="robust outlier rule instead of the symmetry tolerance (detector)")
    s.add_argument("--column-frac", type=float, default=0.30)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_mask)

    s = sub.add_parser("reconstruct", parents=[common], help="fit the dual INR to an observed k-space")
    s.add_argument("--input", required=True)
    s.add_argument("--mask", required=True)
    s.add_argument("--epochs", type=int, default=250)
    s.add_argument("--lr", type=float, default=5e-4)
    s.add_argument("--lowpass-frac", type=float, default=0.125)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--log")
    s.add_argument("--motion-log", help="known event boundaries used to split flagged lines into segments")
    s.add_argument("--checkpoint", help="where to write parameters (also used on numerical abort)")
    s.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("evaluate", parents=[common], help="image-quality report against references")
    s.add_argument("--recon", required=True, help="file or glob")
    s.add_argument("--ref", required=True, help="file or glob (sorted order pairs with --recon)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_evaluate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"dualdomain: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (io.FormatError, OSError) as exc:
        print(f"dualdomain: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ParameterError, SizeError) as exc:
        print(f"dualdomain: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalAbort as exc:
        print(f"dualdomain: numerical abort: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
