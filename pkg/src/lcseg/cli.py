"""Command-line interface: every pipeline stage as a subcommand.

Exit codes: 0 success, 1 usage error, 2 runtime error, 3 success with a
degenerate-segmentation warning.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bat, histeq, metrics, watershed as ws
from .config import PipelineConfig, load_config
from .image import PhantomSpec, generate_phantom, read_pgm, write_overlay, write_pgm
from .pipeline import PipelineError, run_pipeline, scale_to_255, write_outputs
from .wavelet import enhance_scales, iuwt_decompose

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_DEGENERATE = 3


class _Parser(argparse.ArgumentParser):
    """argparse parser that reports usage errors with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _read_mask(path) -> np.ndarray:
    return read_pgm(path) > 0


def _parse_kept(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.replace(" ", "").split(",") if tok)


def _load_pipeline_config(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_synth(args) -> int:
    spec = PhantomSpec(
        width=args.size,
        height=args.size,
        beam_period=args.period,
        beam_width=args.beam_width,
        noise_sigma=args.noise,
        rng_seed=args.seed,
    )
    image, mask = generate_phantom(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_pgm(image, out / "image.pgm")
    write_pgm(mask.astype(np.uint8) * 255, out / "truth.pgm")
    print(f"wrote {out / 'image.pgm'} and {out / 'truth.pgm'}")
    return EXIT_OK


def _cmd_decompose(args) -> int:
    image = read_pgm(args.input)
    pyramid = iuwt_decompose(image, args.levels)
    kept = _parse_kept(args.kept) if args.kept else tuple(range(1, args.levels + 1))
    enhanced = enhance_scales(pyramid, kept)
    write_pgm(enhanced, args.out)
    if args.dump_planes:
        plane_dir = Path(args.dump_planes)
        plane_dir.mkdir(parents=True, exist_ok=True)
        for j, plane in enumerate(pyramid.details, start=1):
            write_pgm(_rescale8(plane), plane_dir / f"detail_{j}.pgm")
        write_pgm(_rescale8(pyramid.smooth), plane_dir / "smooth.pgm")
    print(f"wrote {args.out}")
    return EXIT_OK


def _rescale8(plane: np.ndarray) -> np.ndarray:
    lo, hi = plane.min(), plane.max()
    if hi == lo:
        return np.zeros(plane.shape, dtype=np.uint8)
    return np.clip(np.floor((plane - lo) / (hi - lo) * 255.0 + 0.5), 0, 255).astype(
        np.uint8
    )


def _cmd_optimize(args) -> int:
    cfg = _load_pipeline_config(args)
    image = read_pgm(args.input)
    threshold, state = bat.optimize_threshold(image, cfg.bat)
    if args.out_csv:
        bat.write_convergence_csv(state, args.out_csv)
    print(f"threshold {threshold}")
    print(f"best_fitness {state.best_fitness:.6g}")
    return EXIT_OK


def _cmd_equalize(args) -> int:
    image = read_pgm(args.input)
    write_pgm(histeq.equalize(image), args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_segment(args) -> int:
    image = read_pgm(args.input)
    scaled = scale_to_255(ws.gradient_magnitude(image))
    labels = ws.watershed_segment(scaled, ws.WatershedParams(h_min=args.h_min))
    mask = ws.labels_to_mask(labels, image, fixed_threshold=args.fixed_threshold)
    if args.out_labels:
        write_pgm(np.minimum(labels, 255).astype(np.uint8), args.out_labels)
    if args.out_mask:
        write_pgm(mask.astype(np.uint8) * 255, args.out_mask)
    if args.out_overlay:
        write_overlay(image, ws.mask_boundary(mask), args.out_overlay)
    print(f"basins {labels.max()}")
    if mask.all() or not mask.any():
        print("warning: degenerate segmentation (single-class mask)", file=sys.stderr)
        return EXIT_DEGENERATE
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    pred = _read_mask(args.pred)
    truth = _read_mask(args.truth)
    pred_img = read_pgm(args.pred_img) if args.pred_img else pred.astype(np.uint8) * 255
    truth_img = (
        read_pgm(args.truth_img) if args.truth_img else truth.astype(np.uint8) * 255
    )
    report = metrics.full_report(pred, truth, pred_img, truth_img)
    sys.stdout.write(metrics.report_table(report))
    if args.out_csv:
        Path(args.out_csv).write_text(metrics.report_csv(report), encoding="utf-8")
    return EXIT_OK


def _cmd_roc(args) -> int:
    score = read_pgm(args.score)
    truth = _read_mask(args.truth)
    baseline = read_pgm(args.baseline)
    opt_curve, base_curve = metrics.roc_sweep(score, truth, baseline)
    Path(args.out_csv).write_text(
        metrics.roc_csv(opt_curve, score, truth), encoding="utf-8"
    )
    Path(args.out_baseline_csv).write_text(
        metrics.roc_csv(base_curve, baseline, truth), encoding="utf-8"
    )
    print(f"auc {opt_curve.auc:.6g}")
    print(f"baseline_auc {base_curve.auc:.6g}")
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = _load_pipeline_config(args)
    image = read_pgm(args.input)
    truth = _read_mask(args.truth) if args.truth else None
    result = run_pipeline(image, truth, cfg)
    out_dir = args.out or cfg.output_dir
    written = write_outputs(result, out_dir, dump=args.dump)
    print(f"threshold {result.threshold}")
    print(f"basins {result.labels.max()}")
    if result.report is not None:
        sys.stdout.write(metrics.report_table(result.report))
        if result.roc is not None:
            print(f"auc {result.roc[0].auc:.6g}")
            print(f"baseline_auc {result.roc[1].auc:.6g}")
    print(f"wrote {len(written)} files to {out_dir}")
    if result.degenerate:
        print("warning: degenerate segmentation (single-class mask)", file=sys.stderr)
        return EXIT_DEGENERATE
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lcseg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a lattice phantom with ground truth")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--period", type=int, default=32)
    p.add_argument("--beam-width", type=int, default=10)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("decompose", help="wavelet decomposition / enhancement")
    p.add_argument("--input", required=True)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--kept", default=None, help="comma-separated kept scales")
    p.add_argument("--out", required=True, help="enhanced image path")
    p.add_argument("--dump-planes", default=None, help="directory for plane dumps")
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("optimize", help="bat-optimize the intensity threshold")
    p.add_argument("--input", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-csv", default=None, help="convergence curve CSV")
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("equalize", help="histogram-equalize an image")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_equalize)

    p = sub.add_parser("segment", help="gradient watershed segmentation")
    p.add_argument("--input", required=True)
    p.add_argument("--h-min", type=float, default=5.0)
    p.add_argument(
        "--fixed-threshold",
        type=int,
        default=None,
        help="classify basins by mean >= threshold instead of Otsu",
    )
    p.add_argument("--out-labels", default=None)
    p.add_argument("--out-mask", default=None)
    p.add_argument("--out-overlay", default=None)
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser("evaluate", help="compare a predicted mask to ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--pred-img", default=None)
    p.add_argument("--truth-img", default=None)
    p.add_argument("--out-csv", default=None)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("roc", help="threshold-sweep ROC of score vs baseline images")
    p.add_argument("--score", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--baseline", required=True)
    p.add_argument("--out-csv", default="roc.csv")
    p.add_argument("--out-baseline-csv", default="roc_baseline.csv")
    p.set_defaults(func=_cmd_roc)

    p = sub.add_parser("run", help="full pipeline")
    p.add_argument("--input", required=True)
    p.add_argument("--truth", default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--dump", action="store_true", help="dump extra intermediates")
    p.set_defaults(func=_cmd_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
