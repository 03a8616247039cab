"""Command line front end.

``matra-pipeline run`` processes one PGM (or a directory of them) end to
end; the stage subcommands run a single step each; ``synth`` renders ground-
truthed synthetic pages.  Exit codes: 0 success, 1 processing error, 2 usage
error.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
from dataclasses import replace

from .binarize import (
    GlobalThresholdConfig,
    LocalThresholdConfig,
    NIBLACK_K,
    SAUVOLA_K,
)
from .denoise import DenoiseConfig, denoise_binary, median_filter
from .deskew import deskew_page, estimate_skew
from .errors import PgmError
from .layout import rlsa_segment
from .pipeline import (
    BINARIZE_METHODS,
    PipelineConfig,
    StageFlags,
    binarize_image,
    emit_json,
    run_pipeline,
    write_atomic,
)
from .raster import BinaryImage, GrayImage, Rect, load_pgm, save_pgm
from .segment import SegmentConfig
from .synthgen import PageSpec, render_page, truth_to_dict


def _add_binarize_flags(p: argparse.ArgumentParser):
    p.add_argument("--method", choices=BINARIZE_METHODS, default="otsu")
    p.add_argument("--threshold", type=int, default=128,
                   help="fixed threshold for --method global (0-255)")
    p.add_argument("--window", type=int, default=15,
                   help="odd window size for niblack/sauvola")
    p.add_argument("--k", type=float, default=None,
                   help="local threshold factor (default -0.2 niblack, 0.34 sauvola)")
    p.add_argument("--R", type=float, default=128.0,
                   help="sauvola dynamic range normalizer")


def _add_denoise_flags(p: argparse.ArgumentParser):
    p.add_argument("--median", type=int, default=0, metavar="N",
                   help="odd median window; 0 disables the median pass")
    p.add_argument("--speck-alpha", type=float, default=0.05)
    p.add_argument("--dot-protect", type=lambda v: v.lower() in ("1", "true", "yes"),
                   default=True, metavar="BOOL")


def _add_deskew_flags(p: argparse.ArgumentParser):
    p.add_argument("--max-skew", type=float, default=15.0)
    p.add_argument("--skew-step", type=float, default=0.1)
    p.add_argument("--no-deskew", action="store_true")


def _add_layout_flags(p: argparse.ArgumentParser):
    p.add_argument("--rlsa-h", type=int, default=None)
    p.add_argument("--rlsa-v", type=int, default=None)
    p.add_argument("--layout-only", action="store_true",
                   help="emit block JSON and stop")


def _add_segment_flags(p: argparse.ArgumentParser):
    p.add_argument("--beta", type=float, default=0.25,
                   help="word gap threshold as a fraction of line height")
    p.add_argument("--gamma", type=float, default=0.85,
                   help="headline-bar extension ratio")
    p.add_argument("--baseline-tol", type=int, default=2)
    p.add_argument("--tau", type=int, default=0,
                   help="blank-row ink tolerance for line splitting")
    p.add_argument("--dump-glyphs", default=None, metavar="DIR")


def _config_from_args(args) -> PipelineConfig:
    # subcommands carry only their own flag groups; everything else defaults
    get = lambda name, default: getattr(args, name, default)
    method = get("method", "otsu")
    k = get("k", None)
    if k is None:
        k = SAUVOLA_K if method == "sauvola" else NIBLACK_K
    median = get("median", 0)
    return PipelineConfig(
        method=method,
        global_threshold=GlobalThresholdConfig(get("threshold", 128)),
        local_threshold=LocalThresholdConfig(get("window", 15), k, get("R", 128.0)),
        denoise=DenoiseConfig(
            median_window=median if median else 3,
            speck_alpha=get("speck_alpha", 0.05),
            dot_protect=get("dot_protect", True),
        ),
        max_skew=get("max_skew", 15.0),
        skew_step=get("skew_step", 0.1),
        smear_h=get("rlsa_h", None),
        smear_v=get("rlsa_v", None),
        segment=SegmentConfig(
            blank_row_tolerance=get("tau", 0),
            word_gap_factor=get("beta", 0.25),
            matra_extend_ratio=get("gamma", 0.85),
            baseline_touch_tolerance=get("baseline_tol", 2),
        ),
        stages=StageFlags(
            deskew=not get("no_deskew", False),
            median=bool(median),
        ),
        debug_dir=get("debug_dir", None),
        dump_glyphs=get("dump_glyphs", None),
    )


def _load_gray(path: str) -> GrayImage:
    with open(path, "rb") as fh:
        return load_pgm(fh.read())


def _load_binary(path: str) -> BinaryImage:
    return BinaryImage(_load_gray(path).pixels < 128)


def _emit(text: str, out: str | None):
    if out:
        write_atomic(out, text.encode())
    else:
        sys.stdout.write(text)


def _process_one(path: str, cfg: PipelineConfig, out_path: str | None):
    gray = _load_gray(path)
    result = run_pipeline(gray, cfg, source=os.path.basename(path))
    _emit(emit_json(result), out_path)


def _cmd_run(args) -> int:
    cfg = _config_from_args(args)
    if os.path.isdir(args.input):
        if not args.out:
            raise SystemExit("--out directory is required for batch input")
        os.makedirs(args.out, exist_ok=True)
        pages = sorted(p for p in os.listdir(args.input) if p.endswith(".pgm"))
        jobs = [(os.path.join(args.input, p), cfg,
                 os.path.join(args.out, p[:-4] + ".json")) for p in pages]
        if args.jobs > 1:
            with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as ex:
                list(ex.map(_process_one, *zip(*jobs)))
        else:
            for job in jobs:
                _process_one(*job)
        return 0
    if args.layout_only:
        binary = binarize_image(_load_gray(args.input), cfg)
        if cfg.stages.denoise and binary.ink_count:
            binary = denoise_binary(binary, cfg.denoise, use_median=cfg.stages.median)
        layout = rlsa_segment(binary, cfg.smear_h, cfg.smear_v)
        doc = [{"bbox": [b.bbox.x, b.bbox.y, b.bbox.w, b.bbox.h], "kind": b.kind,
                "ink_density": round(b.ink_density, 4),
                "mean_run": round(b.mean_run, 4)} for b in layout.blocks]
        _emit(json.dumps(doc, indent=1) + "\n", args.out)
        return 0
    _process_one(args.input, cfg, args.out)
    return 0


def _cmd_binarize(args) -> int:
    cfg = _config_from_args(args)
    binary = binarize_image(_load_gray(args.input), cfg)
    _write_pgm(binary, args.out)
    return 0


def _cmd_denoise(args) -> int:
    gray = _load_gray(args.input)
    if args.median:
        gray = median_filter(gray, args.median)
    binary = BinaryImage(gray.pixels < 128)
    cfg = DenoiseConfig(median_window=args.median if args.median else 3,
                        speck_alpha=args.speck_alpha,
                        dot_protect=args.dot_protect)
    out = denoise_binary(binary, cfg)
    _write_pgm(out, args.out)
    return 0


def _cmd_deskew(args) -> int:
    gray = _load_gray(args.input)
    binary = BinaryImage(gray.pixels < 128)
    est = estimate_skew(binary, args.max_skew, args.skew_step)
    corrected = deskew_page(gray, est)
    _write_pgm(corrected, args.out)
    print(f"theta {est.theta_degrees:.4f} score {est.score:.4f}", file=sys.stderr)
    return 0


def _cmd_layout(args) -> int:
    binary = _load_binary(args.input)
    layout = rlsa_segment(binary, args.rlsa_h, args.rlsa_v)
    doc = [{"bbox": [b.bbox.x, b.bbox.y, b.bbox.w, b.bbox.h], "kind": b.kind,
            "ink_density": round(b.ink_density, 4),
            "mean_run": round(b.mean_run, 4)} for b in layout.blocks]
    _emit(json.dumps(doc, indent=1) + "\n", args.out)
    return 0


def _cmd_segment(args) -> int:
    # single stage: the whole page is treated as one text block
    cfg = _config_from_args(args)
    gray = _load_gray(args.input)
    cfg = replace(cfg, stages=StageFlags(denoise=False, deskew=False, layout=False,
                                         median=False))
    result = run_pipeline(gray, cfg, source=os.path.basename(args.input))
    _emit(emit_json(result), args.out)
    return 0


def _cmd_synth(args) -> int:
    with open(args.spec) as fh:
        raw = json.load(fh)
    if "image_block" in raw and raw["image_block"] is not None:
        raw["image_block"] = Rect(*raw["image_block"])
    for key in ("words_per_line", "glyphs_per_word"):
        if key in raw and isinstance(raw[key], list):
            raw[key] = tuple(raw[key])
    os.makedirs(args.out_dir, exist_ok=True)
    base_seed = raw.get("seed", 0)
    for i in range(args.count):
        spec = PageSpec(**{**raw, "seed": base_seed + i})
        gray, truth = render_page(spec)
        stem = os.path.join(args.out_dir, f"page_{i:03d}")
        write_atomic(stem + ".pgm", save_pgm(gray))
        write_atomic(stem + ".truth.json",
                     (json.dumps(truth_to_dict(truth), indent=1) + "\n").encode())
    return 0


def _write_pgm(img, out: str | None):
    data = save_pgm(img)
    if out:
        write_atomic(out, data)
    else:
        sys.stdout.buffer.write(data)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matra-pipeline",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="full pipeline on a page or directory")
    run.add_argument("input")
    run.add_argument("--out", default=None)
    run.add_argument("--debug-dir", default=None)
    run.add_argument("--jobs", type=int, default=1)
    _add_binarize_flags(run)
    _add_denoise_flags(run)
    _add_deskew_flags(run)
    _add_layout_flags(run)
    _add_segment_flags(run)

    b = sub.add_parser("binarize", help="binarize a grayscale PGM")
    b.add_argument("input")
    b.add_argument("--out", default=None)
    _add_binarize_flags(b)

    d = sub.add_parser("denoise", help="clean a binarized PGM")
    d.add_argument("input")
    d.add_argument("--out", default=None)
    _add_denoise_flags(d)

    k = sub.add_parser("deskew", help="estimate skew and rotate the page")
    k.add_argument("input")
    k.add_argument("--out", default=None)
    _add_deskew_flags(k)

    l = sub.add_parser("layout", help="emit text/non-text block JSON")
    l.add_argument("input")
    l.add_argument("--out", default=None)
    l.add_argument("--rlsa-h", type=int, default=None)
    l.add_argument("--rlsa-v", type=int, default=None)

    s = sub.add_parser("segment", help="segment a page as one text block")
    s.add_argument("input")
    s.add_argument("--out", default=None)
    s.add_argument("--debug-dir", default=None)
    _add_binarize_flags(s)
    _add_segment_flags(s)

    y = sub.add_parser("synth", help="render ground-truthed synthetic pages")
    y.add_argument("--spec", required=True, help="JSON file of page parameters")
    y.add_argument("--out-dir", required=True)
    y.add_argument("--count", type=int, default=1)

    return parser


_COMMANDS = {
    "run": _cmd_run,
    "binarize": _cmd_binarize,
    "denoise": _cmd_denoise,
    "deskew": _cmd_deskew,
    "layout": _cmd_layout,
    "segment": _cmd_segment,
    "synth": _cmd_synth,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (PgmError, ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
