"""Principal component pursuit solver and its operators."""

from __future__ import annotations

import numpy as np
import pytest

from videosep.rpca import PcpProblem, default_lambda, shrink, solve_pcp, svt


def low_rank_plus_spikes(n, m, seed, spike_fraction=0.01, spike_value=0.9):
    """Rank-1 matrix in [0, 1] corrupted by a few bright pixels."""
    rng = np.random.default_rng(seed)
    low = np.outer(0.2 + 0.6 * rng.random(n), 0.5 + 0.5 * rng.random(m))
    sparse = np.zeros((n, m))
    sparse[rng.random((n, m)) < spike_fraction] = spike_value
    return low, sparse


class TestDefaultLambda:
    def test_surveillance_frame_size(self):
        assert default_lambda(11520, 30) == pytest.approx(9.32e-3, abs=5e-6)

    def test_square_root_of_larger_dimension(self):
        assert default_lambda(10000, 300) == pytest.approx(0.01)

    def test_unit_case(self):
        assert default_lambda(1, 1) == 1.0

    def test_invalid_dimensions(self):
        with pytest.raises(ValueError):
            default_lambda(0, 5)


class TestShrink:
    def test_below_threshold(self):
        assert shrink(0.5, 1.0) == 0.0

    def test_above_threshold(self):
        assert shrink(3.0, 1.0) == 2.0

    def test_odd_symmetry(self):
        assert shrink(-3.0, 1.0) == -2.0

    def test_nonexpansive(self):
        rng = np.random.default_rng(31)
        for _ in range(200):
            x, y = rng.uniform(-5, 5, 2)
            tau = rng.uniform(0, 3)
            assert abs(shrink(x, tau) - shrink(y, tau)) <= abs(x - y) + 1e-15

    def test_negative_tau_rejected(self):
        with pytest.raises(ValueError):
            shrink(1.0, -0.5)


class TestSvt:
    def test_diagonal(self):
        out = svt(np.diag([3.0, 0.5]), 1.0)
        np.testing.assert_allclose(out, np.diag([2.0, 0.0]), atol=1e-12)

    def test_tau_zero_is_identity(self):
        rng = np.random.default_rng(33)
        a = rng.standard_normal((6, 4))
        np.testing.assert_allclose(svt(a, 0.0), a, atol=1e-10)

    def test_rank_one_spectrum_shift(self):
        rng = np.random.default_rng(35)
        u = rng.standard_normal(8)
        u /= np.linalg.norm(u)
        v = rng.standard_normal(5)
        v /= np.linalg.norm(v)
        out = svt(5.0 * np.outer(u, v), 2.0)
        np.testing.assert_allclose(out, 3.0 * np.outer(u, v), atol=1e-10)


class TestSolvePcp:
    def test_recovers_low_rank_from_spiked_input(self):
        low, sparse = low_rank_plus_spikes(80, 40, seed=37)
        x = low + sparse
        solution = solve_pcp(PcpProblem(x=x, lam=default_lambda(80, 40)))
        assert solution.converged
        rel = np.linalg.norm(solution.low_rank - low) / np.linalg.norm(low)
        assert rel < 1e-5

    def test_zero_matrix(self):
        solution = solve_pcp(PcpProblem(x=np.zeros((4, 3)), lam=0.5))
        assert solution.converged
        assert solution.iterations_used == 1
        assert not solution.low_rank.any() and not solution.sparse.any()

    def test_feasibility_at_convergence(self):
        low, sparse = low_rank_plus_spikes(50, 25, seed=39)
        x = low + sparse
        p = PcpProblem(x=x, lam=default_lambda(50, 25), tolerance=1e-7)
        solution = solve_pcp(p)
        assert solution.converged
        gap = np.linalg.norm(x - solution.low_rank - solution.sparse)
        assert gap / np.linalg.norm(x) <= p.tolerance

    def test_residual_trend(self):
        # Loose monotonicity: the feasibility residual keeps heading down.
        low, sparse = low_rank_plus_spikes(60, 30, seed=41, spike_fraction=0.05)
        solution = solve_pcp(PcpProblem(x=low + sparse, lam=default_lambda(60, 30)))
        history = solution.residual_history
        for k in range(min(50, len(history) - 5)):
            assert history[k + 5] < history[k]

    def test_lambda_controls_the_split(self):
        # Large lambda makes sparsity expensive (S -> 0, L -> X); small
        # lambda makes it free (L -> 0, S -> X).
        low, sparse = low_rank_plus_spikes(40, 20, seed=43)
        x = low + sparse
        lam0 = default_lambda(40, 20)
        norms = {}
        for scale in (1e-4, 1.0, 1e4):
            sol = solve_pcp(PcpProblem(x=x, lam=scale * lam0, max_iterations=300))
            norms[scale] = (
                np.linalg.norm(sol.low_rank),
                np.linalg.norm(sol.sparse),
            )
        assert norms[1e-4][0] <= norms[1.0][0] <= norms[1e4][0]
        assert norms[1e4][1] <= norms[1.0][1] <= norms[1e-4][1]
        assert norms[1e-4][0] < 1e-3 * np.linalg.norm(x)
        assert norms[1e4][1] < 1e-6 * np.linalg.norm(x)

    def test_non_convergence_is_flagged_not_raised(self):
        low, sparse = low_rank_plus_spikes(30, 15, seed=47)
        solution = solve_pcp(
            PcpProblem(x=low + sparse, lam=default_lambda(30, 15), max_iterations=2)
        )
        assert not solution.converged
        assert solution.iterations_used == 2

    def test_problem_validation(self):
        with pytest.raises(ValueError):
            PcpProblem(x=np.ones((2, 2)), lam=0.0)
        with pytest.raises(ValueError):
            PcpProblem(x=np.ones((2, 2)), lam=0.1, tolerance=0.0)
        with pytest.raises(ValueError):
            PcpProblem(x=np.ones((2, 2)), lam=0.1, max_iterations=0)
