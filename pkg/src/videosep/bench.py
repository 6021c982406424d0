"""Wall-clock timing sweeps of the separation methods and scaling-law fits.

Each sweep cell (pixel count n, segment length m, method) times the full
separation of the first m frames at resolution n: one discarded warm-up,
then the mean of at least three repetitions on a monotonic clock.  Cells run
strictly sequentially so they do not disturb each other's timings.

Scaling fits are one-parameter power laws through the origin, t = c * s^e,
fitted on raw values (not log space), with R^2 = 1 - SS_res / SS_tot.
"""

from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import dmd, rpca
from .errors import FitError
from .video import METRICS_HEADER, FrameSequence, downsample, frames_to_matrix

logger = logging.getLogger(__name__)

METHODS = ("dmd", "rpca")


@dataclass(frozen=True)
class TimingRecord:
    """Mean wall-clock seconds for one (method, n, m) sweep cell."""

    method: str
    n: int
    m: int
    seconds: float
    repetitions: int
    mean_sparse_intensity: float = math.nan


@dataclass(frozen=True)
class FitResult:
    """Power-law fit t = c * s^exponent with its coefficient of determination."""

    model: str
    c: float
    r_squared: float


def resolution_for_pixels(n: int, source_w: int, source_h: int) -> tuple[int, int]:
    """Pick the divisor pair w*h = n closest to the source aspect ratio."""
    if n < 1:
        raise ValueError(f"pixel count must be >= 1, got {n}")
    aspect = source_w / source_h
    best: tuple[int, int] | None = None
    best_gap = math.inf
    for h in range(1, int(math.isqrt(n)) + 1):
        if n % h:
            continue
        for w, hh in ((n // h, h), (h, n // h)):
            if w > source_w or hh > source_h:
                continue
            gap = abs(w / hh - aspect)
            if gap < best_gap:
                best, best_gap = (w, hh), gap
    if best is None:
        raise ValueError(
            f"no {source_w}x{source_h}-compatible resolution with {n} pixels"
        )
    return best


def _run_method(method: str, x: dmd.FrameMatrix, lam: float | None) -> np.ndarray:
    """One full separation; returns the sparse matrix."""
    if method == "dmd":
        return dmd.separate(x).sparse
    if method == "rpca":
        problem = rpca.PcpProblem(
            x=x.values, lam=lam if lam is not None else rpca.default_lambda(x.n, x.m)
        )
        return rpca.solve_pcp(problem).sparse
    raise ValueError(f"unknown method {method!r}")


def run_sweep(
    video: FrameSequence,
    pixel_grid: Sequence[int],
    segment_grid: Sequence[int],
    methods: Sequence[str] = METHODS,
    repetitions: int = 3,
    lam: float | None = None,
) -> list[TimingRecord]:
    """Time every (n, m, method) cell; failed cells are logged and skipped."""
    if not pixel_grid or not segment_grid:
        raise ValueError("pixel and segment grids must be non-empty")
    if not methods:
        raise ValueError("methods list must be non-empty")
    if repetitions < 3:
        raise ValueError(f"need at least 3 repetitions, got {repetitions}")
    if len(video) < max(segment_grid):
        raise ValueError(
            f"video has {len(video)} frames, largest segment needs {max(segment_grid)}"
        )

    records: list[TimingRecord] = []
    for n in pixel_grid:
        try:
            w, h = resolution_for_pixels(n, video.width, video.height)
            scaled = downsample(video, w, h)
        except ValueError as exc:
            logger.warning("skipping pixel count %d: %s", n, exc)
            continue
        for m in segment_grid:
            x = frames_to_matrix(scaled, 0, m)
            for method in methods:
                try:
                    sparse = _run_method(method, x, lam)  # discarded warm-up
                    elapsed = []
                    for _ in range(repetitions):
                        t0 = time.perf_counter()
                        sparse = _run_method(method, x, lam)
                        elapsed.append(time.perf_counter() - t0)
                except Exception as exc:
                    logger.warning("cell (%s, n=%d, m=%d) failed: %s", method, n, m, exc)
                    continue
                records.append(
                    TimingRecord(
                        method=method,
                        n=n,
                        m=m,
                        seconds=float(np.mean(elapsed)),
                        repetitions=repetitions,
                        mean_sparse_intensity=float(np.mean(sparse)),
                    )
                )
    return records


def fit_power(records: Sequence[TimingRecord], exponent: int) -> FitResult:
    """Least-squares fit of t = c * s^exponent through the origin.

    The fitted variable s is whichever of pixel count / segment length varies
    across the records; exactly one of them must.
    """
    if exponent not in (1, 2):
        raise ValueError(f"exponent must be 1 or 2, got {exponent}")
    if len(records) < 3:
        raise FitError(f"need at least 3 records, got {len(records)}")

    ns = {r.n for r in records}
    ms = {r.m for r in records}
    if len(ns) > 1 and len(ms) > 1:
        raise FitError("both pixel count and segment length vary; fix one")
    if len(ns) > 1:
        s = np.array([r.n for r in records], dtype=np.float64)
    elif len(ms) > 1:
        s = np.array([r.m for r in records], dtype=np.float64)
    else:
        raise FitError("fitted variable is constant across records")

    t = np.array([r.seconds for r in records], dtype=np.float64)
    se = s**exponent
    c = float((t * se).sum() / (se * se).sum())
    ss_res = float(((t - c * se) ** 2).sum())
    ss_tot = float(((t - t.mean()) ** 2).sum())
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    model = "c*s" if exponent == 1 else "c*s^2"
    return FitResult(model=model, c=c, r_squared=r_squared)


def emit_report(
    records: Sequence[TimingRecord],
    fits: dict[str, FitResult],
    path,
    tsv_dir=None,
) -> None:
    """Write the metrics CSV plus fit and speedup summaries as comment lines.

    Data rows use the standard metrics header with segment = m and
    frame = n.  Speedup lines report rpca_seconds / dmd_seconds for every
    cell both methods completed.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_HEADER.split(","))
        for r in records:
            writer.writerow(
                [r.m, r.n, r.method, f"{r.mean_sparse_intensity:.9g}", f"{r.seconds:.9g}"]
            )
        for label, fit in fits.items():
            fh.write(
                f"# fit {label}: model={fit.model} c={fit.c:.6g} "
                f"r_squared={fit.r_squared:.6f}\n"
            )
        by_cell: dict[tuple[int, int], dict[str, float]] = {}
        for r in records:
            by_cell.setdefault((r.n, r.m), {})[r.method] = r.seconds
        for (n, m), cell in sorted(by_cell.items()):
            if "dmd" in cell and "rpca" in cell:
                fh.write(
                    f"# speedup n={n} m={m} "
                    f"rpca_over_dmd={cell['rpca'] / cell['dmd']:.3f}\n"
                )

    if tsv_dir is not None:
        tsv_dir = Path(tsv_dir)
        tsv_dir.mkdir(parents=True, exist_ok=True)
        for method in sorted({r.method for r in records}):
            rows = [r for r in records if r.method == method]
            with (tsv_dir / f"{method}.tsv").open("w") as fh:
                fh.write("n\tm\tseconds\n")
                for r in rows:
                    fh.write(f"{r.n}\t{r.m}\t{r.seconds:.9g}\n")
