"""Dynamic mode decomposition and the background/foreground split built on it.

A video segment is a matrix whose columns are vectorized frames.  DMD fits a
linear one-step propagator to consecutive frame pairs and diagonalizes it:
each mode is a spatial image with a complex frequency omega whose real part
is growth/decay and whose imaginary part is oscillation.  Modes with
|omega| ~ 0 are static in time and form the background; everything else is
foreground motion.  One SVD plus one small eigenproblem plus one linear
solve — no iteration.

The split itself works on elementwise magnitudes: the sparse estimate is
``X - |L_raw|``, its negative residuals are folded back into the low-rank
side, and the pair then sums to X exactly with both parts nonnegative.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateDataError, InsufficientFramesError
from .linalg import eig_dense, least_squares, thin_svd

logger = logging.getLogger(__name__)

DEFAULT_OMEGA_THRESHOLD = 1e-2
DEFAULT_RANK_TOLERANCE = 1e-12


@dataclass(frozen=True)
class FrameMatrix:
    """n x m matrix of vectorized frames; column j is the frame at time j*dt.

    Entries are normalized intensities in [0, 1].  At least two frames are
    required (DMD pairs consecutive snapshots).
    """

    values: np.ndarray
    dt: float = 1.0

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64)  # own copy, frozen below
        if arr.ndim != 2:
            raise ValueError(f"frame matrix must be 2-D, got shape {arr.shape}")
        if arr.shape[1] < 2:
            raise InsufficientFramesError(
                f"need at least 2 frames, got {arr.shape[1]}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("frame matrix contains non-finite entries")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError(
                f"intensities must lie in [0, 1], got range "
                f"[{arr.min():.6g}, {arr.max():.6g}]"
            )
        if not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class DmdDecomposition:
    """Modes, eigenvalues, frequencies and amplitudes of one DMD fit.

    ``modes`` is n x ell (one spatial mode per column); ``eigenvalues`` are
    the one-step multipliers mu; ``frequencies`` are omega = log(mu)/dt on
    the principal branch (a zero eigenvalue maps to real part -inf and is
    treated as fully decayed); ``amplitudes`` solve
    ``modes @ amplitudes = first frame`` in the least-squares sense.
    """

    modes: np.ndarray
    eigenvalues: np.ndarray
    frequencies: np.ndarray
    amplitudes: np.ndarray
    rank: int
    dt: float = 1.0

    @property
    def decayed(self) -> np.ndarray:
        """Boolean mask of nilpotent (mu = 0) modes."""
        return self.eigenvalues == 0


@dataclass(frozen=True)
class SeparationResult:
    """Nonnegative background/foreground pair with ``low_rank + sparse = X``."""

    low_rank: np.ndarray
    sparse: np.ndarray
    background_mode_indices: frozenset = field(default_factory=frozenset)


def dmd_decompose(
    x: FrameMatrix,
    max_rank: int | None = None,
    rank_tolerance: float = DEFAULT_RANK_TOLERANCE,
) -> DmdDecomposition:
    """Fit a DMD model to the segment.

    The snapshot pairs are X1 = frames 1..m-1 and X2 = frames 2..m.  The
    propagator is diagonalized in the ell-dimensional left-singular basis of
    X1, where ell = min(max_rank, numerical rank); ``max_rank`` defaults to
    m - 1.  Modes are lifted back to pixel space as U @ W.
    """
    m = x.m
    if max_rank is None:
        max_rank = m - 1
    if not 1 <= max_rank <= m - 1:
        raise ValueError(f"max_rank must be in [1, {m - 1}], got {max_rank}")

    x1 = x.values[:, :-1]
    x2 = x.values[:, 1:]
    if not x1.any():
        raise DegenerateDataError("snapshot block X1 is identically zero")

    svd = thin_svd(x1, rank_tolerance)
    ell = min(max_rank, svd.rank)
    u = svd.u[:, :ell]
    sigma = svd.sigma[:ell]
    v = svd.v[:, :ell]

    # Projected propagator: U* X2 V Sigma^{-1}, similar to the full operator.
    propagator = u.conj().T @ x2 @ (v / sigma)
    mu, w = eig_dense(propagator)
    modes = u.astype(np.complex128) @ w
    amplitudes = least_squares(modes, x.values[:, 0].astype(np.complex128))
    with np.errstate(divide="ignore"):
        omega = np.log(mu.astype(np.complex128)) / x.dt

    return DmdDecomposition(
        modes=modes,
        eigenvalues=mu,
        frequencies=omega,
        amplitudes=amplitudes,
        rank=ell,
        dt=x.dt,
    )


def reconstruct(
    d: DmdDecomposition,
    times: Sequence[float],
    mode_indices: Sequence[int] | None = None,
) -> np.ndarray:
    """Evaluate sum_j b_j * phi_j * exp(omega_j t) at the requested times.

    Returns an n x len(times) complex matrix.  ``mode_indices`` restricts the
    sum to a subset of modes (used for the background-only reconstruction).
    Fully decayed modes contribute their amplitude at t = 0 and nothing after.
    """
    t = np.asarray(times, dtype=np.float64)
    if t.ndim != 1:
        t = t.reshape(-1)
    if not np.all(np.isfinite(t)):
        raise ValueError("times must be finite")

    if mode_indices is None:
        idx = np.arange(d.rank)
    else:
        idx = np.asarray(sorted(mode_indices), dtype=np.intp)

    omega = d.frequencies[idx]
    with np.errstate(invalid="ignore", over="ignore"):
        dynamics = np.exp(np.outer(omega, t))
    decayed = d.decayed[idx]
    if decayed.any():
        dynamics[decayed] = np.where(t == 0.0, 1.0, 0.0)

    weighted = d.amplitudes[idx, None] * dynamics
    return d.modes[:, idx] @ weighted


def select_background_modes(
    d: DmdDecomposition, omega_threshold: float = DEFAULT_OMEGA_THRESHOLD
) -> frozenset:
    """Indices of modes with |omega| at or below the threshold.

    If no mode qualifies, falls back to the single mode of smallest |omega|
    (lowest index on ties) so a background always exists.  Fully decayed
    modes have |omega| = inf and are never chosen ahead of a live mode.
    """
    if omega_threshold < 0:
        raise ValueError(f"omega_threshold must be >= 0, got {omega_threshold}")
    magnitude = np.abs(d.frequencies)
    selected = np.nonzero(magnitude <= omega_threshold)[0]
    if selected.size == 0:
        selected = np.array([int(np.argmin(magnitude))])
    return frozenset(int(j) for j in selected)


def redistribute_residual(
    x: np.ndarray, lowrank_abs: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Split X against a nonnegative background estimate, keeping both parts >= 0.

    The raw sparse part is ``X - lowrank_abs``; its negative entries R are
    moved into the low-rank side (low = R + lowrank_abs, sparse = raw - R),
    which preserves low + sparse = X exactly.  Rounding can still leave
    low-rank entries a hair below zero; those are clamped and the defect is
    pushed into the sparse side so additivity survives.
    """
    sparse_raw = x - lowrank_abs
    r = np.minimum(sparse_raw, 0.0)
    low = r + lowrank_abs
    sparse = sparse_raw - r

    negative = low < 0.0
    if negative.any():
        defect = low[negative].sum()
        logger.debug(
            "clamped %d negative low-rank entries (total %.3e)",
            int(negative.sum()),
            defect,
        )
        sparse[negative] += low[negative]
        low[negative] = 0.0
    return low, sparse


def separate(
    x: FrameMatrix,
    max_rank: int | None = None,
    omega_threshold: float = DEFAULT_OMEGA_THRESHOLD,
    rank_tolerance: float = DEFAULT_RANK_TOLERANCE,
) -> SeparationResult:
    """Background/foreground separation of one segment.

    Reconstructs the background modes over frame times 0..m-1, takes the
    elementwise modulus as the low-rank estimate, and redistributes negative
    residuals so that low_rank + sparse = X with both factors nonnegative.
    """
    d = dmd_decompose(x, max_rank=max_rank, rank_tolerance=rank_tolerance)
    background = select_background_modes(d, omega_threshold)
    times = np.arange(x.m) * x.dt
    lowrank_raw = reconstruct(d, times, mode_indices=background)
    low, sparse = redistribute_residual(x.values, np.abs(lowrank_raw))
    return SeparationResult(
        low_rank=low, sparse=sparse, background_mode_indices=background
    )


def iterate_dmd(
    x: FrameMatrix,
    iterations: int,
    max_rank: int | None = None,
    omega_threshold: float = DEFAULT_OMEGA_THRESHOLD,
    rank_tolerance: float = DEFAULT_RANK_TOLERANCE,
    error_fn: Callable[[np.ndarray], float] | None = None,
) -> tuple[SeparationResult, list[float]]:
    """Apply the separation repeatedly to the surviving sparse component.

    Each pass after the first separates the previous sparse matrix, moving
    newly found static content into the accumulated low-rank part; the sparse
    estimate therefore shrinks entrywise and any pixelwise error metric is
    nonincreasing.  ``error_fn`` maps a sparse matrix to the per-iteration
    error; without one the mean sparse intensity is used as a proxy.  The
    sparse matrix is already in [0, 1] by construction, so it is re-fed
    without rescaling.  Once the sparse snapshot block is identically zero
    the trace simply repeats (nothing is left to extract).
    """
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    if error_fn is None:
        def error_fn(s: np.ndarray) -> float:
            return float(np.mean(s))

    low_total = np.zeros_like(x.values)
    current = x.values
    background: frozenset = frozenset()
    trace: list[float] = []
    for i in range(iterations):
        if i > 0 and not current[:, :-1].any():
            # Nothing left to decompose; remaining iterations are no-ops.
            trace.extend(error_fn(current) for _ in range(iterations - i))
            break
        result = separate(
            FrameMatrix(current, dt=x.dt),
            max_rank=max_rank,
            omega_threshold=omega_threshold,
            rank_tolerance=rank_tolerance,
        )
        if i == 0:
            background = result.background_mode_indices
        low_total += result.low_rank
        current = result.sparse
        trace.append(error_fn(current))

    return (
        SeparationResult(
            low_rank=low_total, sparse=current, background_mode_indices=background
        ),
        trace,
    )
