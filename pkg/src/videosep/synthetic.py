"""Deterministic synthetic surveillance video with known ground truth.

A 300-frame, 100x100 clip over a static uniform-random background with three
moving objects:

  1. a 7x7 black square (white corner pixels, white plus sign) patrolling the
     inside edge of the frame counter-clockwise at 4 px/frame, starting at
     the top-left corner and present in every frame;
  2. a light-gray filled circle, 9 px diameter, appearing at frame 25 near
     the left edge, moving up-left at 2 px/frame per axis, bouncing downward
     off a horizontal wall a fifth of the way down the frame, then drifting
     out of view;
  3. a 13x13 transparent square outlined in black with a black X through it,
     entering at frame 50 from the right edge at 6 px/frame horizontal and
     1 px/frame vertical, reflecting off every frame edge and never leaving.

Objects are drawn in that order, later objects burying earlier ones.  The
ground truth records the background grid and, per frame, the boolean mask of
pixels covered by any drawn object pixel (the see-through interior of the
crossed square shows background and is not masked).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .video import FrameSequence

DEFAULT_SEED = 7

FRAME_COUNT = 300
FRAME_SIZE = 100

SQUARE_SIZE = 7
SQUARE_SPEED = 4

CIRCLE_RADIUS = 4  # 9 px diameter
CIRCLE_INTENSITY = 0.75
CIRCLE_ENTRY_FRAME = 25
CIRCLE_ENTRY = (32, 16)  # (row, col) center at entry
CIRCLE_SPEED = 2

BOX_HALF = 6  # 13 x 13
BOX_ENTRY_FRAME = 50
BOX_ENTRY = (25, 105)  # (row, col) center at entry, sliding in from the right
BOX_VELOCITY = (1, -6)  # (rows, cols) per frame


@dataclass(frozen=True)
class SyntheticVideoSpec:
    """Parameters of the constructed video (object constants are fixed)."""

    frames: int = FRAME_COUNT
    width: int = FRAME_SIZE
    height: int = FRAME_SIZE
    seed: int = DEFAULT_SEED


@dataclass(frozen=True)
class GroundTruth:
    """Static background, per-frame foreground masks and object trajectories."""

    background: np.ndarray
    foreground_masks: np.ndarray
    trajectories: dict = field(default_factory=dict)


def _square_patrol_position(frame: int, limit: int) -> tuple[int, int]:
    """Top-left (row, col) of the patrolling square at the given frame.

    The square hugs the frame edge counter-clockwise (down the left edge
    first); each of the four legs is ``limit`` pixels long.
    """
    d = (SQUARE_SPEED * frame) % (4 * limit)
    if d < limit:
        return d, 0
    if d < 2 * limit:
        return limit, d - limit
    if d < 3 * limit:
        return limit - (d - 2 * limit), limit
    return 0, limit - (d - 3 * limit)


def _square_stamp() -> np.ndarray:
    """7x7 intensity stamp: black body, white corners, white plus sign."""
    stamp = np.zeros((SQUARE_SIZE, SQUARE_SIZE))
    for r in (0, SQUARE_SIZE - 1):
        for c in (0, SQUARE_SIZE - 1):
            stamp[r, c] = 1.0
    mid = SQUARE_SIZE // 2
    stamp[mid, 1:-1] = 1.0
    stamp[1:-1, mid] = 1.0
    return stamp


def _disc_offsets() -> tuple[np.ndarray, np.ndarray]:
    dr, dc = np.mgrid[-CIRCLE_RADIUS : CIRCLE_RADIUS + 1, -CIRCLE_RADIUS : CIRCLE_RADIUS + 1]
    inside = dr * dr + dc * dc <= CIRCLE_RADIUS * CIRCLE_RADIUS
    return dr[inside], dc[inside]


def _box_stroke_offsets() -> tuple[np.ndarray, np.ndarray]:
    """Relative (row, col) offsets of the crossed square's border and X."""
    size = 2 * BOX_HALF + 1
    i, j = np.mgrid[0:size, 0:size]
    stroke = (i == 0) | (i == size - 1) | (j == 0) | (j == size - 1)
    stroke |= (i == j) | (i + j == size - 1)
    return i[stroke] - BOX_HALF, j[stroke] - BOX_HALF


def _simulate_circle(frames: int, height: int) -> dict[int, tuple[int, int]]:
    """Center positions per frame while any circle pixel is on screen."""
    wall = height // 5
    row, col = CIRCLE_ENTRY
    vr = vc = -CIRCLE_SPEED
    positions: dict[int, tuple[int, int]] = {}
    for frame in range(CIRCLE_ENTRY_FRAME, frames):
        if col < -CIRCLE_RADIUS:
            break  # fully off screen heading left; it never returns
        positions[frame] = (row, col)
        row += vr
        col += vc
        if row <= wall and vr < 0:
            vr = CIRCLE_SPEED
            if row < wall:
                row = 2 * wall - row
    return positions


def _simulate_box(frames: int, height: int, width: int) -> dict[int, tuple[int, int]]:
    """Center positions per frame of the bouncing crossed square."""
    row, col = BOX_ENTRY
    vr, vc = BOX_VELOCITY
    lo = BOX_HALF
    row_hi = height - 1 - BOX_HALF
    col_hi = width - 1 - BOX_HALF
    col_bounce_armed = False
    positions: dict[int, tuple[int, int]] = {}
    for frame in range(BOX_ENTRY_FRAME, frames):
        positions[frame] = (row, col)
        row += vr
        col += vc
        if row > row_hi:
            row, vr = 2 * row_hi - row, -vr
        elif row < lo:
            row, vr = 2 * lo - row, -vr
        if col <= col_hi:
            col_bounce_armed = True  # fully inside; edges are solid from now on
        if col_bounce_armed:
            if col > col_hi:
                col, vc = 2 * col_hi - col, -vc
            elif col < lo:
                col, vc = 2 * lo - col, -vc
    return positions


def _stamp(frame, mask, rows, cols, values) -> None:
    """Write stamp pixels into the frame and mask, clipping at the borders."""
    h, w = frame.shape
    keep = (rows >= 0) & (rows < h) & (cols >= 0) & (cols < w)
    frame[rows[keep], cols[keep]] = np.broadcast_to(values, rows.shape)[keep]
    mask[rows[keep], cols[keep]] = True


def generate(spec: SyntheticVideoSpec) -> tuple[FrameSequence, GroundTruth]:
    """Render the video and its ground truth; identical seeds give identical bytes."""
    h, w = spec.height, spec.width
    rng = np.random.default_rng(spec.seed)
    background = rng.random((h, w))

    square_stamp = _square_stamp()
    square_rel = np.mgrid[0:SQUARE_SIZE, 0:SQUARE_SIZE]
    disc_dr, disc_dc = _disc_offsets()
    box_dr, box_dc = _box_stroke_offsets()

    circle_pos = _simulate_circle(spec.frames, h)
    box_pos = _simulate_box(spec.frames, h, w)
    patrol_limit = min(h, w) - SQUARE_SIZE

    frames = np.empty((spec.frames, h, w))
    masks = np.zeros((spec.frames, h, w), dtype=bool)
    square_track = []
    for k in range(spec.frames):
        frame = background.copy()
        mask = masks[k]

        r0, c0 = _square_patrol_position(k, patrol_limit)
        square_track.append([k, r0, c0])
        _stamp(frame, mask, square_rel[0] + r0, square_rel[1] + c0, square_stamp)

        if k in circle_pos:
            r, c = circle_pos[k]
            _stamp(frame, mask, disc_dr + r, disc_dc + c, CIRCLE_INTENSITY)

        if k in box_pos:
            r, c = box_pos[k]
            _stamp(frame, mask, box_dr + r, box_dc + c, 0.0)

        frames[k] = frame

    trajectories = {
        "square_patrol": square_track,
        "circle": [[k, r, c] for k, (r, c) in sorted(circle_pos.items())],
        "crossed_box": [[k, r, c] for k, (r, c) in sorted(box_pos.items())],
    }
    truth = GroundTruth(
        background=background, foreground_masks=masks, trajectories=trajectories
    )
    return FrameSequence(frames=frames), truth


def mean_background_intensity_error(s, gt: GroundTruth, segment_frames) -> float:
    """Mean |sparse| over true-background pixels of the segment's first m-1 frames.

    ``s`` is the n x m sparse matrix of a segment whose columns correspond to
    the global frame indices in ``segment_frames``.  The last frame is where
    the decomposition parks its misfit, so it is excluded, matching how the
    separation error is scored.
    """
    values = np.asarray(getattr(s, "values", s), dtype=np.float64)
    indices = list(segment_frames)
    n_pixels = gt.background.size
    if values.ndim != 2 or values.shape != (n_pixels, len(indices)):
        raise DimensionError(
            f"sparse matrix shape {values.shape} does not match "
            f"{n_pixels} pixels x {len(indices)} frames"
        )
    if len(indices) < 2:
        raise DimensionError("segment must cover at least 2 frames")

    total = 0.0
    count = 0
    for t, frame_index in enumerate(indices[:-1]):
        bg = ~gt.foreground_masks[frame_index].ravel()
        total += float(np.abs(values[bg, t]).sum())
        count += int(bg.sum())
    return total / count
