"""Robust PCA by principal component pursuit, solved with inexact ALM.

Solves ``min ||L||_* + lambda ||S||_1  subject to  X = L + S`` by
alternating singular-value thresholding on L with elementwise soft
shrinkage on S, updating the Lagrange multiplier in between.

References:
    Candes, Li, Ma, Wright. "Robust principal component analysis?"
    Journal of the ACM 58(3), 2011.
    Lin, Chen, Ma. "The augmented Lagrange multiplier method for exact
    recovery of corrupted low-rank matrices." arXiv:1009.5055, 2010.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import as_matrix

DEFAULT_TOLERANCE = 1e-7
DEFAULT_MAX_ITERATIONS = 1000

# Standard inexact-ALM schedule: mu_0 = 1.25/sigma_1(X), growth 1.5, cap 1e7*mu_0.
MU_SCALE = 1.25
RHO = 1.5
MU_CAP_FACTOR = 1e7


def default_lambda(n: int, m: int) -> float:
    """Sparsity weight 1/sqrt(max(n, m)) for an n x m matrix."""
    if n < 1 or m < 1:
        raise ValueError(f"matrix dimensions must be >= 1, got {n} x {m}")
    return 1.0 / math.sqrt(max(n, m))


def shrink(x, tau):
    """Soft threshold sign(x) * max(|x| - tau, 0), elementwise."""
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def svt(a, tau: float) -> np.ndarray:
    """Singular value thresholding: soft-shrink the spectrum of a."""
    arr = as_matrix(a)
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    u, s, vh = np.linalg.svd(arr, full_matrices=False)
    return (u * shrink(s, tau)) @ vh


@dataclass(frozen=True)
class PcpProblem:
    """One principal-component-pursuit instance."""

    x: np.ndarray
    lam: float
    tolerance: float = DEFAULT_TOLERANCE
    max_iterations: int = DEFAULT_MAX_ITERATIONS

    def __post_init__(self):
        object.__setattr__(self, "x", as_matrix(self.x, "data matrix"))
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ValueError(
                f"max_iterations must be >= 1, got {self.max_iterations}"
            )


@dataclass(frozen=True)
class PcpSolution:
    """Separation plus convergence metadata.

    ``final_residual`` is ||X - L - S||_F / ||X||_F; ``residual_history``
    holds it per iteration for convergence diagnostics.
    """

    low_rank: np.ndarray
    sparse: np.ndarray
    iterations_used: int
    final_residual: float
    converged: bool
    residual_history: list = field(default_factory=list)


def solve_pcp(p: PcpProblem) -> PcpSolution:
    """Run inexact ALM until the feasibility residual drops below tolerance.

    Non-convergence within the iteration budget is reported through the
    ``converged`` flag, not an exception.
    """
    x = p.x
    norm_fro = float(np.linalg.norm(x))
    if norm_fro == 0.0:
        zero = np.zeros_like(x)
        return PcpSolution(
            low_rank=zero,
            sparse=zero.copy(),
            iterations_used=1,
            final_residual=0.0,
            converged=True,
            residual_history=[0.0],
        )

    sigma1 = float(np.linalg.norm(x, 2))
    mu = MU_SCALE / sigma1
    mu_cap = mu * MU_CAP_FACTOR
    y = x / max(sigma1, float(np.abs(x).max()) / p.lam)
    low = np.zeros_like(x)
    sparse = np.zeros_like(x)

    history: list[float] = []
    residual = math.inf
    iterations = 0
    for iterations in range(1, p.max_iterations + 1):
        low = svt(x - sparse + y / mu, 1.0 / mu)
        sparse = shrink(x - low + y / mu, p.lam / mu)
        gap = x - low - sparse
        y = y + mu * gap
        mu = min(RHO * mu, mu_cap)
        residual = float(np.linalg.norm(gap)) / norm_fro
        history.append(residual)
        if residual <= p.tolerance:
            break

    return PcpSolution(
        low_rank=low,
        sparse=sparse,
        iterations_used=iterations,
        final_residual=residual,
        converged=residual <= p.tolerance,
        residual_history=history,
    )
