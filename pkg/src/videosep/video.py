"""Frame ingestion, downsampling, segmentation and on-disk formats.

Frames live as normalized grayscale grids in [0, 1].  A segment stacks
consecutive frames as columns of a matrix, each frame flattened in row-major
pixel order; ``frames_from_matrix`` inverts that exactly.

On-disk formats:
  * frames: binary PGM (P5), one file per frame, named ``frame_%06d.pgm``;
  * matrices: magic ``DMDV``, u32-LE rows, u32-LE cols, 4 reserved zero
    bytes, then rows*cols IEEE-754 LE doubles in column-major order;
  * metrics: CSV with header ``segment,frame,method,mean_bg_intensity,wall_seconds``.
"""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dmd import FrameMatrix
from .errors import FormatError, InsufficientFramesError, UnsupportedError

MATRIX_MAGIC = b"DMDV"
MATRIX_HEADER = struct.Struct("<4sII4x")  # magic, rows, cols, reserved
METRICS_HEADER = "segment,frame,method,mean_bg_intensity,wall_seconds"

_FRAME_INDEX_RE = re.compile(r"(\d+)")


@dataclass(frozen=True)
class FrameSequence:
    """Ordered stack of equally sized grayscale frames.

    ``frames`` has shape (count, height, width) with intensities in [0, 1].
    ``frame_rate`` is informational only; segment timing uses frame counts.
    """

    frames: np.ndarray
    frame_rate: float = 1.0

    def __post_init__(self):
        arr = np.array(self.frames, dtype=np.float64)  # own copy, frozen below
        if arr.ndim != 3 or arr.shape[0] < 1:
            raise ValueError(
                f"frames must be a non-empty (count, height, width) stack, "
                f"got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("frames contain non-finite intensities")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("intensities must lie in [0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "frames", arr)

    def __len__(self) -> int:
        return self.frames.shape[0]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]


@dataclass(frozen=True)
class SegmentPlan:
    """How to cut a sequence into segments of ``length`` frames.

    A trailing window shorter than ``min_length`` is merged into the previous
    segment instead of being emitted on its own.
    """

    length: int
    stride: int | None = None
    min_length: int = 2

    def __post_init__(self):
        if self.length < 2:
            raise ValueError(f"segment length must be >= 2, got {self.length}")
        if self.stride is None:
            object.__setattr__(self, "stride", self.length)
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")
        if self.min_length < 2:
            raise ValueError(f"min_length must be >= 2, got {self.min_length}")


def read_pgm(path) -> np.ndarray:
    """Read one binary PGM (P5) file into a [0, 1] grid."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise OSError(f"cannot read PGM frame {path}: {exc}") from exc

    # Header: "P5", width, height, maxval as whitespace-separated tokens,
    # '#' comments allowed, then a single whitespace byte before the raster.
    pos = 0
    tokens = []
    while len(tokens) < 4:
        if pos >= len(data):
            raise FormatError(f"{path}: truncated PGM header")
        ch = data[pos : pos + 1]
        if ch.isspace():
            pos += 1
        elif ch == b"#":
            eol = data.find(b"\n", pos)
            pos = len(data) if eol < 0 else eol + 1
        else:
            end = pos
            while end < len(data) and not data[end : end + 1].isspace():
                end += 1
            tokens.append(data[pos:end])
            pos = end
    pos += 1  # single whitespace after maxval

    if tokens[0] != b"P5":
        raise FormatError(f"{path}: not a binary PGM (magic {tokens[0]!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise FormatError(f"{path}: malformed PGM header") from exc
    if width < 1 or height < 1 or not 0 < maxval <= 65535:
        raise FormatError(f"{path}: invalid PGM dimensions or maxval")

    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    expected = width * height * dtype.itemsize
    raster = data[pos : pos + expected]
    if len(raster) != expected:
        raise FormatError(
            f"{path}: expected {expected} raster bytes, found {len(raster)}"
        )
    grid = np.frombuffer(raster, dtype=dtype).reshape(height, width)
    return grid.astype(np.float64) / maxval


def write_pgm(path, grid: np.ndarray, maxval: int = 255) -> None:
    """Write a [0, 1] grid as binary PGM with the given maxval."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 2:
        raise ValueError(f"grid must be 2-D, got shape {grid.shape}")
    if not 0 < maxval <= 65535:
        raise ValueError(f"maxval must be in [1, 65535], got {maxval}")
    quantized = np.floor(np.clip(grid, 0.0, 1.0) * maxval + 0.5)
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    header = f"P5\n{grid.shape[1]} {grid.shape[0]}\n{maxval}\n".encode("ascii")
    Path(path).write_bytes(header + quantized.astype(dtype).tobytes())


def load_pgm_sequence(path, frame_rate: float = 1.0) -> FrameSequence:
    """Load all PGM frames under a directory (or matching a glob pattern).

    Frames are ordered by the numeric index embedded in each filename.
    """
    path = Path(path)
    if path.is_dir():
        files = list(path.glob("*.pgm"))
    else:
        files = [Path(f) for f in path.parent.glob(path.name)]
    if not files:
        raise OSError(f"no PGM frames found at {path}")

    def index_of(f: Path) -> tuple[int, str]:
        match = _FRAME_INDEX_RE.search(f.stem)
        return (int(match.group(1)) if match else -1, f.name)

    files.sort(key=index_of)
    grids = [read_pgm(f) for f in files]
    shape = grids[0].shape
    for f, g in zip(files, grids):
        if g.shape != shape:
            raise FormatError(
                f"{f}: frame is {g.shape[1]}x{g.shape[0]}, expected "
                f"{shape[1]}x{shape[0]}"
            )
    return FrameSequence(frames=np.stack(grids), frame_rate=frame_rate)


def write_pgm_sequence(
    f: FrameSequence, directory, brighten: float = 1.0, start_index: int = 0
) -> None:
    """Write frames as ``frame_%06d.pgm``, scaling intensities by ``brighten``.

    Stored byte value is round(clamp(intensity * brighten, 0, 1) * 255).
    """
    if brighten < 0:
        raise ValueError(f"brighten must be >= 0, got {brighten}")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for i in range(len(f)):
        grid = np.clip(f.frames[i] * brighten, 0.0, 1.0)
        write_pgm(directory / f"frame_{start_index + i:06d}.pgm", grid)


def downsample(f: FrameSequence, target_w: int, target_h: int) -> FrameSequence:
    """Box-filter (area average) downsampling to target_w x target_h."""
    if target_w < 1 or target_h < 1:
        raise ValueError(f"target dimensions must be >= 1, got {target_w}x{target_h}")
    if target_w > f.width or target_h > f.height:
        raise UnsupportedError(
            f"upsampling {f.width}x{f.height} -> {target_w}x{target_h} "
            "is not supported"
        )
    w_rows = _area_weights(f.height, target_h)
    w_cols = _area_weights(f.width, target_w)
    frames = np.einsum("ij,fjk,lk->fil", w_rows, f.frames, w_cols, optimize=True)
    return FrameSequence(frames=np.clip(frames, 0.0, 1.0), frame_rate=f.frame_rate)


def _area_weights(source: int, target: int) -> np.ndarray:
    """target x source matrix averaging source cells into equal-width bins."""
    ratio = source / target
    weights = np.zeros((target, source))
    for i in range(target):
        start = i * ratio
        end = (i + 1) * ratio
        k0, k1 = int(np.floor(start)), int(np.ceil(end))
        for k in range(k0, min(k1, source)):
            overlap = min(end, k + 1) - max(start, k)
            if overlap > 0:
                weights[i, k] = overlap / ratio
    return weights


def frames_to_matrix(f: FrameSequence, start: int, stop: int, dt: float = 1.0) -> FrameMatrix:
    """Vectorize frames[start:stop] into columns (row-major pixel scan)."""
    block = f.frames[start:stop]
    values = block.reshape(block.shape[0], -1).T
    return FrameMatrix(values=values, dt=dt)


def frames_from_matrix(x, height: int, width: int) -> np.ndarray:
    """Invert the vectorization: columns back to (count, height, width)."""
    values = np.asarray(x.values if isinstance(x, FrameMatrix) else x)
    if values.shape[0] != height * width:
        raise ValueError(
            f"matrix has {values.shape[0]} rows, expected {height * width}"
        )
    return values.T.reshape(-1, height, width)


def segment_spans(total: int, plan: SegmentPlan) -> list[tuple[int, int]]:
    """Frame index ranges [start, stop) the plan cuts a sequence into."""
    if total < 2:
        raise InsufficientFramesError(f"need at least 2 frames, got {total}")
    spans: list[tuple[int, int]] = []
    start = 0
    while start < total:
        stop = min(start + plan.length, total)
        if stop - start < plan.min_length and spans:
            # Merge the short trailing window into the previous segment.
            spans[-1] = (spans[-1][0], total)
            break
        spans.append((start, stop))
        if stop == total:
            break
        start += plan.stride
    return spans


def segment(f: FrameSequence, plan: SegmentPlan) -> list[FrameMatrix]:
    """Cut the sequence into FrameMatrix segments according to the plan."""
    return [frames_to_matrix(f, a, b) for a, b in segment_spans(len(f), plan)]


def write_matrix_binary(x: FrameMatrix, path) -> None:
    """Serialize a frame matrix in the DMDV binary format (bit-exact)."""
    header = MATRIX_HEADER.pack(MATRIX_MAGIC, x.n, x.m)
    body = np.asarray(x.values, dtype="<f8").flatten(order="F").tobytes()
    Path(path).write_bytes(header + body)


def read_matrix_binary(path) -> FrameMatrix:
    """Read a DMDV matrix file back into a FrameMatrix."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise OSError(f"cannot read matrix file {path}: {exc}") from exc
    if len(data) < MATRIX_HEADER.size:
        raise FormatError(f"{path}: file too short for a matrix header")
    magic, rows, cols = MATRIX_HEADER.unpack_from(data)
    if magic != MATRIX_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    expected = MATRIX_HEADER.size + rows * cols * 8
    if len(data) != expected:
        raise FormatError(
            f"{path}: expected {expected} bytes for {rows}x{cols}, got {len(data)}"
        )
    values = np.frombuffer(data, dtype="<f8", offset=MATRIX_HEADER.size)
    return FrameMatrix(values=values.reshape((rows, cols), order="F"))
