"""Background/foreground separation for grayscale video.

DMD-based separation (one SVD, one small eigenproblem, one linear solve per
segment), a reference robust-PCA solver for quality and timing comparison,
a deterministic synthetic benchmark video with ground truth, and a timing
harness with power-law scaling fits.
"""

__version__ = "0.1.0"

from .dmd import (
    DmdDecomposition,
    FrameMatrix,
    SeparationResult,
    dmd_decompose,
    iterate_dmd,
    reconstruct,
    select_background_modes,
    separate,
)
from .rpca import PcpProblem, PcpSolution, default_lambda, solve_pcp
from .synthetic import (
    GroundTruth,
    SyntheticVideoSpec,
    generate,
    mean_background_intensity_error,
)
from .video import (
    FrameSequence,
    SegmentPlan,
    downsample,
    frames_from_matrix,
    frames_to_matrix,
    load_pgm_sequence,
    read_matrix_binary,
    segment,
    write_matrix_binary,
    write_pgm_sequence,
)

__all__ = [
    "DmdDecomposition",
    "FrameMatrix",
    "FrameSequence",
    "GroundTruth",
    "PcpProblem",
    "PcpSolution",
    "SegmentPlan",
    "SeparationResult",
    "SyntheticVideoSpec",
    "default_lambda",
    "dmd_decompose",
    "downsample",
    "frames_from_matrix",
    "frames_to_matrix",
    "generate",
    "iterate_dmd",
    "load_pgm_sequence",
    "mean_background_intensity_error",
    "read_matrix_binary",
    "reconstruct",
    "segment",
    "select_background_modes",
    "separate",
    "solve_pcp",
    "write_matrix_binary",
    "write_pgm_sequence",
]
