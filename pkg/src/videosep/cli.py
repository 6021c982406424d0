"""Command-line interface: separate, synth, bench, iterate.

Exit codes: 0 on success, 1 on I/O or data errors, 2 on invalid flags.
Every run writes a ``run.json`` manifest (subcommand, flags, package
version) next to its outputs so results can be reproduced.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, bench, rpca
from .dmd import FrameMatrix, iterate_dmd, separate
from .errors import FormatError
from .synthetic import SyntheticVideoSpec, generate
from .video import (
    METRICS_HEADER,
    FrameSequence,
    SegmentPlan,
    downsample,
    frames_from_matrix,
    frames_to_matrix,
    load_pgm_sequence,
    segment_spans,
    write_pgm,
    write_pgm_sequence,
)

DEFAULT_SEGMENT_LENGTH = 30
DEFAULT_BRIGHTEN = 10.0


def _comma_ints(text: str) -> list[int]:
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("list must not be empty")
    return values


def _geometry(text: str) -> tuple[int, int]:
    try:
        w, h = (int(tok) for tok in text.lower().split("x"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from exc
    if w < 1 or h < 1:
        raise argparse.ArgumentTypeError(f"dimensions must be positive: {text!r}")
    return w, h


def _write_manifest(out_dir: Path, command: str, args: argparse.Namespace) -> None:
    flags = {
        k: (str(v) if isinstance(v, Path) else v)
        for k, v in vars(args).items()
        if k != "func"
    }
    manifest = {"command": command, "flags": flags, "version": __version__}
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "run.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))


def _load_input(args: argparse.Namespace) -> FrameSequence:
    seq = load_pgm_sequence(args.input)
    if args.skip_frames:
        if args.skip_frames >= len(seq) - 1:
            raise ValueError(
                f"--skip-frames {args.skip_frames} leaves fewer than 2 of "
                f"{len(seq)} frames"
            )
        seq = FrameSequence(frames=seq.frames[args.skip_frames :], frame_rate=seq.frame_rate)
    if args.downsample is not None:
        seq = downsample(seq, *args.downsample)
    return seq


def _separate_segment(method, x, args):
    """Run one method on one segment, returning (low, sparse, wall_seconds)."""
    t0 = time.perf_counter()
    if method == "dmd":
        result = separate(x, max_rank=args.rank, omega_threshold=args.omega_threshold)
        low, sparse = result.low_rank, result.sparse
    else:
        lam = args.lam if args.lam is not None else rpca.default_lambda(x.n, x.m)
        solution = rpca.solve_pcp(rpca.PcpProblem(x=x.values, lam=lam))
        low, sparse = solution.low_rank, solution.sparse
    wall = time.perf_counter() - t0
    if args.threshold is not None:
        sparse = np.where(np.abs(sparse) >= args.threshold, sparse, 0.0)
    return low, sparse, wall


def _write_separation(out_dir, seq, spans, results, brighten):
    """Write background/ and foreground/ trees using global frame numbering."""
    h, w = seq.height, seq.width
    for (start, stop), (low, sparse, _) in zip(spans, results):
        bg = FrameSequence(frames=frames_from_matrix(np.clip(low, 0, 1), h, w))
        fg = FrameSequence(frames=frames_from_matrix(np.clip(sparse, 0, 1), h, w))
        write_pgm_sequence(bg, Path(out_dir) / "background", start_index=start)
        write_pgm_sequence(fg, Path(out_dir) / "foreground", brighten=brighten, start_index=start)


def cmd_separate(args: argparse.Namespace) -> int:
    seq = _load_input(args)
    plan = SegmentPlan(length=args.frames_per_segment)
    spans = segment_spans(len(seq), plan)
    methods = ["dmd", "rpca"] if args.method == "both" else [args.method]

    out = Path(args.out)
    rows = []
    for method in methods:
        segments = [frames_to_matrix(seq, a, b) for a, b in spans]
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(
                pool.map(lambda x: _separate_segment(method, x, args), segments)
            )
        tree = out if len(methods) == 1 else out / method
        _write_separation(tree, seq, spans, results, args.brighten)
        for seg_idx, ((start, stop), (_, sparse, wall)) in enumerate(zip(spans, results)):
            for t in range(stop - start):
                rows.append(
                    (seg_idx, start + t, method, float(np.mean(sparse[:, t])), wall)
                )

    with (out / "metrics.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_HEADER.split(","))
        for seg_idx, frame, method, mean_bg, wall in rows:
            writer.writerow([seg_idx, frame, method, f"{mean_bg:.9g}", f"{wall:.9g}"])
    _write_manifest(out, "separate", args)
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    spec = SyntheticVideoSpec(seed=args.seed)
    seq, truth = generate(spec)
    out = Path(args.out)
    write_pgm_sequence(seq, out / "frames")
    mask_seq = FrameSequence(frames=truth.foreground_masks.astype(np.float64))
    write_pgm_sequence(mask_seq, out / "masks")
    out.mkdir(parents=True, exist_ok=True)
    write_pgm(out / "background.pgm", truth.background)
    metadata = {
        "seed": spec.seed,
        "frames": spec.frames,
        "width": spec.width,
        "height": spec.height,
        "mean_background_intensity": float(truth.background.mean()),
        "trajectories": truth.trajectories,
    }
    (out / "groundtruth.json").write_text(json.dumps(metadata, indent=2))
    _write_manifest(out, "synth", args)
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    seq = _load_input(args)
    records = bench.run_sweep(
        seq,
        pixel_grid=args.pixels,
        segment_grid=args.segments,
        methods=args.methods,
        repetitions=args.repetitions,
        lam=args.lam,
    )
    if not records:
        print("all sweep cells failed", file=sys.stderr)
        return 1

    fits: dict[str, bench.FitResult] = {}
    for method in args.methods:
        mine = [r for r in records if r.method == method]
        at_n = [r for r in mine if r.n == max(args.pixels)]
        if len({r.m for r in at_n}) >= 3:
            fits[f"{method} vs segment size"] = bench.fit_power(at_n, exponent=2)
        at_m = [r for r in mine if r.m == max(args.segments)]
        if len({r.n for r in at_m}) >= 3:
            fits[f"{method} vs pixel count"] = bench.fit_power(at_m, exponent=1)

    out = Path(args.out)
    bench.emit_report(records, fits, out)
    _write_manifest(out.resolve().parent, "bench", args)
    return 0


def cmd_iterate(args: argparse.Namespace) -> int:
    seq = _load_input(args)
    plan = SegmentPlan(length=args.frames_per_segment)
    spans = segment_spans(len(seq), plan)
    segments = [frames_to_matrix(seq, a, b) for a, b in spans]

    def run(x: FrameMatrix):
        t0 = time.perf_counter()
        result, trace = iterate_dmd(
            x,
            iterations=args.iterations,
            max_rank=args.rank,
            omega_threshold=args.omega_threshold,
        )
        return result, trace, time.perf_counter() - t0

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        outcomes = list(pool.map(run, segments))

    out = Path(args.out)
    results = [(r.low_rank, r.sparse, wall) for r, _, wall in outcomes]
    _write_separation(out, seq, spans, results, args.brighten)
    with (out / "error_trace.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["segment", "iteration", "error"])
        for seg_idx, (_, trace, _) in enumerate(outcomes):
            for i, err in enumerate(trace, start=1):
                writer.writerow([seg_idx, i, f"{err:.9g}"])
    _write_manifest(out, "iterate", args)
    return 0


def _add_common_separation_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="directory of PGM frames")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--frames-per-segment", type=int, default=DEFAULT_SEGMENT_LENGTH, metavar="M")
    p.add_argument("--rank", type=int, default=None, metavar="L",
                   help="truncation rank (default: segment length - 1)")
    p.add_argument("--omega-threshold", type=float, default=1e-2, metavar="W",
                   help="|omega| cutoff for background modes")
    p.add_argument("--lambda", dest="lam", type=float, default=None, metavar="LAM",
                   help="RPCA sparsity weight (default: 1/sqrt(max(n,m)))")
    p.add_argument("--brighten", type=float, default=DEFAULT_BRIGHTEN, metavar="B",
                   help="foreground brightening factor for output frames")
    p.add_argument("--skip-frames", type=int, default=0, metavar="K",
                   help="drop the first K frames (e.g. video preambles)")
    p.add_argument("--downsample", type=_geometry, default=None, metavar="WxH")
    p.add_argument("--threshold", type=float, default=None, metavar="T",
                   help="zero sparse pixels below this intensity (default off)")
    p.add_argument("--jobs", type=int, default=1, metavar="N",
                   help="segments processed in parallel")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="videosep",
        description="Background/foreground video separation via DMD, with an "
        "RPCA reference solver and benchmarking tools.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("separate", help="separate a PGM sequence into background/foreground")
    _add_common_separation_flags(p)
    p.add_argument("--method", choices=("dmd", "rpca", "both"), default="dmd")
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("synth", help="generate the synthetic benchmark video")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=SyntheticVideoSpec().seed)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="timing sweep over resolutions and segment sizes")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True, help="report CSV path")
    p.add_argument("--pixels", type=_comma_ints, required=True, metavar="LIST")
    p.add_argument("--segments", type=_comma_ints, required=True, metavar="LIST")
    p.add_argument("--methods", type=lambda s: [m for m in s.split(",") if m],
                   default=list(bench.METHODS), metavar="LIST")
    p.add_argument("--repetitions", type=int, default=3)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--skip-frames", type=int, default=0)
    p.add_argument("--downsample", type=_geometry, default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("iterate", help="iterated DMD separation with error trace")
    _add_common_separation_flags(p)
    p.add_argument("--iterations", type=int, required=True, metavar="I")
    p.set_defaults(func=cmd_iterate)

    return parser


def _validate(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    checks = [
        ("frames_per_segment", lambda v: v >= 2, "--frames-per-segment must be >= 2"),
        ("rank", lambda v: v >= 1, "--rank must be >= 1"),
        ("omega_threshold", lambda v: v >= 0, "--omega-threshold must be >= 0"),
        ("lam", lambda v: v > 0, "--lambda must be positive"),
        ("brighten", lambda v: v >= 0, "--brighten must be >= 0"),
        ("skip_frames", lambda v: v >= 0, "--skip-frames must be >= 0"),
        ("threshold", lambda v: v >= 0, "--threshold must be >= 0"),
        ("jobs", lambda v: v >= 1, "--jobs must be >= 1"),
        ("iterations", lambda v: v >= 1, "--iterations must be >= 1"),
        ("repetitions", lambda v: v >= 3, "--repetitions must be >= 3"),
        ("methods", lambda v: bool(v) and set(v) <= set(bench.METHODS),
         f"--methods must name from {bench.METHODS}"),
    ]
    for name, ok, message in checks:
        value = getattr(args, name, None)
        if value is not None and not ok(value):
            parser.error(message)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(parser, args)
    try:
        return args.func(args)
    except (OSError, FormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
