"""Shared fixtures: pinned BLAS threads and session-wide test videos."""

from __future__ import annotations

import numpy as np
import pytest
from threadpoolctl import threadpool_limits

from videosep import FrameSequence, SyntheticVideoSpec, generate


@pytest.fixture(scope="session", autouse=True)
def single_threaded_blas():
    """Pin BLAS to one thread: thread-pool spin-up otherwise dominates the
    small-matrix timings the scaling-law assertions depend on."""
    with threadpool_limits(limits=1):
        yield


@pytest.fixture(scope="session")
def synthetic_video():
    """The 300-frame constructed benchmark video and its ground truth."""
    return generate(SyntheticVideoSpec())


@pytest.fixture(scope="session")
def timing_video():
    """120x96, 100 frames: static noise background plus a moving bright block."""
    rng = np.random.default_rng(3)
    h, w, count = 96, 120, 100
    background = rng.random((h, w))
    frames = np.empty((count, h, w))
    for k in range(count):
        frame = background.copy()
        r, c = (5 + 2 * k) % (h - 12), (3 * k) % (w - 12)
        frame[r : r + 12, c : c + 12] = 0.9
        frames[k] = frame
    return FrameSequence(frames=frames)
