import dataclasses

import numpy as np
import pytest

import tycoon
from tycoon import (
    ChirpTrack,
    SampledSignal,
    TFMatrix,
    TycoonParams,
    estimate_lipschitz,
    fista,
    make_grid,
    power_iteration,
    prox_l1,
    reconstruct,
    select_stage_discrepancy,
    solve,
    update_chirp,
)
from tycoon.operators import FunctionalTerms, _a_adj_vals, _a_vals, _b_adj_vals, _b_vals
from tycoon.solver import OuterRecord, SolveTrace, _update_chirp_vals


def curvature_map(alpha, grid, mu, method="spectral"):
    def op(x):
        out = (2.0 * grid.dt) * _a_adj_vals(_a_vals(x, grid), grid)
        if mu > 0:
            out = out + (2.0 * grid.dt * grid.dw * mu) * _b_adj_vals(
                _b_vals(x, alpha, grid, method), alpha, grid, method)
        return out
    return op


def dense_real_matrix(op, grid):
    """Materialize the curvature map on the real embedding of the matrix space."""
    rows, cols = grid.n_rows, grid.n_cols
    dim = rows * cols
    mat = np.zeros((2 * dim, 2 * dim))
    for idx in range(2 * dim):
        basis = np.zeros(2 * dim)
        basis[idx] = 1.0
        x = (basis[:dim] + 1j * basis[dim:]).reshape(rows, cols)
        y = op(x)
        mat[:, idx] = np.concatenate([y.real.ravel(), y.imag.ravel()])
    return mat


class TestPowerIteration:
    def test_matches_closed_form_without_transport(self):
        # with mu = 0 the map is rank one per column on real parts: its only
        # nonzero eigenvalue is 2*dt*(2*dw)^2*(N+1)
        g = make_grid(8, 0.1)
        lam, converged = power_iteration(np.zeros(g.n_cols), g, 0.0, iters=300, seed=3)
        assert converged
        closed = 2 * g.dt * (2 * g.dw) ** 2 * g.n_rows
        assert lam == pytest.approx(closed, rel=1e-6)
        # cross-check the closed form against a dense eigensolve
        dense = dense_real_matrix(curvature_map(np.zeros(g.n_cols), g, 0.0), g)
        np.testing.assert_allclose(dense, dense.T, atol=1e-12)
        assert np.linalg.eigvalsh(dense).max() == pytest.approx(closed, rel=1e-12)

    def test_zero_operator(self):
        g = make_grid(8, 0.1)
        lam, converged = power_iteration(np.zeros(g.n_cols), g, 0.0,
                                         operator=lambda x: np.zeros_like(x))
        assert lam == 0.0 and converged

    def test_matches_dense_eigensolve_with_transport(self):
        rng = np.random.default_rng(12)
        g = make_grid(8, 0.2)
        alpha = rng.standard_normal(g.n_cols)
        mu = 0.37
        lam, _ = power_iteration(alpha, g, mu, iters=3000, seed=1, tol=1e-13)
        dense = dense_real_matrix(curvature_map(alpha, g, mu), g)
        np.testing.assert_allclose(dense, dense.T, atol=1e-10)
        top = np.linalg.eigvalsh(dense).max()
        assert lam == pytest.approx(top, rel=1e-4)

    def test_estimate_inflates_by_safety(self):
        g = make_grid(8, 0.1)
        lam, _ = power_iteration(np.zeros(g.n_cols), g, 0.0, iters=300, seed=0)
        L = estimate_lipschitz(np.zeros(g.n_cols), g, 0.0, iters=300, seed=0)
        assert L == pytest.approx(1.05 * lam, rel=1e-9)

    def test_rejects_too_few_iters(self):
        g = make_grid(8, 0.1)
        with pytest.raises(ValueError):
            estimate_lipschitz(np.zeros(g.n_cols), g, 0.0, iters=5)


class TestProx:
    def test_magnitude_shrinkage(self):
        g = make_grid(8, 0.1)
        vals = np.zeros((g.n_rows, g.n_cols), complex)
        vals[0, 0] = 2.0 * np.exp(1j * np.pi / 4)
        out = prox_l1(TFMatrix(g, vals), 0.5).values
        assert out[0, 0] == pytest.approx(1.5 * np.exp(1j * np.pi / 4))

    def test_dead_zone(self):
        g = make_grid(8, 0.1)
        vals = np.full((g.n_rows, g.n_cols), 0.3 * np.exp(1j * 1.1))
        out = prox_l1(TFMatrix(g, vals), 0.5).values
        np.testing.assert_array_equal(out, 0)

    def test_subgradient_condition(self):
        # y - z in tau * subdifferential(|.|) at z
        rng = np.random.default_rng(8)
        tau = 0.7
        y = rng.standard_normal(10_000) + 1j * rng.standard_normal(10_000)
        g = make_grid(8, 0.1)
        # reshape into enough matrices to reuse the public prox
        z = np.concatenate([
            prox_l1(TFMatrix(g, y[i:i + 45].reshape(5, 9)), tau).values.ravel()
            for i in range(0, 9990, 45)])
        y = y[:z.size]
        zero = z == 0
        assert np.all(np.abs(y[zero] - z[zero]) <= tau + 1e-12)
        nz = ~zero
        residual = y[nz] - z[nz]
        np.testing.assert_allclose(residual, tau * z[nz] / np.abs(z[nz]), atol=1e-12)


class TestChirpUpdate:
    def test_zero_when_no_frequency_variation(self):
        g = make_grid(8, 0.1)
        F = TFMatrix(g, np.tile(np.exp(1j * np.arange(g.n_cols)), (g.n_rows, 1)))
        alpha = update_chirp(F, 0.5)
        np.testing.assert_allclose(alpha.values, 0.0, atol=1e-12)

    def test_ridge_limit(self):
        rng = np.random.default_rng(13)
        g = make_grid(8, 0.1)
        F = TFMatrix(g, rng.standard_normal((g.n_rows, g.n_cols))
                     + 1j * rng.standard_normal((g.n_rows, g.n_cols)))
        small = update_chirp(F, 1e12).values
        np.testing.assert_allclose(small, 0.0, atol=1e-9)

    def test_rejects_nonpositive_ratio(self):
        g = make_grid(8, 0.1)
        with pytest.raises(ValueError):
            update_chirp(TFMatrix.zeros(g), 0.0)

    @pytest.mark.parametrize("draw", range(3))
    def test_matches_per_column_quadratic_oracle(self, draw):
        # fine-grid bracket plus exact parabola vertex (the per-column
        # objective is an exact quadratic in alpha)
        rng = np.random.default_rng(40 + draw)
        g = make_grid(16, 0.1)
        F = rng.standard_normal((g.n_rows, g.n_cols)) + 1j * rng.standard_normal((g.n_rows, g.n_cols))
        mu, gamma = 0.56, 1e-3
        estimate = _update_chirp_vals(F, g, gamma / mu, "spectral")

        def column_objective(a, m, base):
            trial = base.copy()
            trial[m] = a
            b = _b_vals(F, trial, g, "spectral")
            return mu * float(np.sum(b.real[:, m] ** 2 + b.imag[:, m] ** 2)) + gamma * a**2

        for m in range(g.n_cols):
            grid_pts = np.linspace(estimate[m] - 3, estimate[m] + 3, 61)
            vals = [column_objective(a, m, estimate) for a in grid_pts]
            i = min(max(int(np.argmin(vals)), 1), len(grid_pts) - 2)
            step = grid_pts[1] - grid_pts[0]
            vertex = grid_pts[i] - step * (vals[i + 1] - vals[i - 1]) / (
                2 * (vals[i + 1] - 2 * vals[i] + vals[i - 1]))
            assert abs(vertex - estimate[m]) <= 1e-8

    def test_recovers_chirp_rate_from_ideal_ridge(self):
        # discretized ideal TF representation of a linear chirp: the closed
        # form must read off the chirp rate
        g = make_grid(256, 0.1)
        t = g.times
        rate = 0.05
        phase = 0.5 * t + 0.5 * rate * t**2
        if_hz = 0.5 + rate * t
        theta = 3 * g.dw
        bump = np.exp(-0.5 * ((g.omegas[:, None] - if_hz[None, :]) / theta) ** 2)
        F = TFMatrix(g, np.exp(1j * 2 * np.pi * phase)[None, :] * bump / theta)
        alpha = update_chirp(F, 1e-9).values
        lo, hi = g.n_cols // 10, g.n_cols - g.n_cols // 10
        assert abs(alpha[lo:hi].mean() - rate) <= 0.2 * rate


class TestFista:
    def test_zero_signal_fixed_point(self):
        g = make_grid(8, 0.1)
        sig = SampledSignal(np.zeros(g.n_cols), 0.1)
        p = TycoonParams(mu_schedule=[1.0])
        F, iters = fista(TFMatrix.zeros(g), ChirpTrack.zeros(g), sig, p, 1.0)
        assert iters == 1
        np.testing.assert_array_equal(F.values, 0)

    def test_least_squares_limit(self):
        # lambda_tilde = 0 and a tiny weight: the data term dominates and the
        # iterate must reproduce the signal (which is exactly representable:
        # scaling the adjoint image achieves a zero-residual certificate)
        rng = np.random.default_rng(5)
        g = make_grid(8, 0.1)
        f = rng.standard_normal(g.n_cols)
        sig = SampledSignal(f, 0.1)
        certificate = _a_adj_vals(f, g) / ((2 * g.dw) ** 2 * g.n_rows)
        np.testing.assert_allclose(_a_vals(certificate, g), f, atol=1e-12)
        energy = 0.1 * np.sum(f**2)
        p = TycoonParams(mu_schedule=[1e-8 * energy], lambda_tilde=0.0,
                         eps1=1e-7, max_inner_iters=5000)
        F, _ = fista(TFMatrix.zeros(g), ChirpTrack.zeros(g), sig, p, 1e-8 * energy)
        assert np.linalg.norm(reconstruct(F) - f) <= 1e-3 * np.linalg.norm(f)

    def test_objective_history_non_increasing(self):
        rng = np.random.default_rng(17)
        g = make_grid(16, 0.1)
        sig = SampledSignal(rng.standard_normal(g.n_cols), 0.1)
        p = TycoonParams(mu_schedule=[0.05], max_inner_iters=300)
        history = []
        fista(TFMatrix.zeros(g), ChirpTrack.zeros(g), sig, p, 0.05, h_trace=history)
        assert len(history) > 2
        diffs = np.diff(history)
        assert np.all(diffs <= 1e-12 * np.abs(history[:-1]))


def make_trace(data_terms, mu_tildes=None):
    records = []
    mu_tildes = mu_tildes or [10.0 / (i + 1) for i in range(len(data_terms))]
    for mu, d in zip(mu_tildes, data_terms):
        records.append(OuterRecord(mu, 1, FunctionalTerms(d, d, 0, 0, 0), 0.0, 0.0))
    return SolveTrace(records=records, lipschitz=1.0)


class TestDiscrepancy:
    def test_zero_noise_picks_last_stage(self):
        g = make_grid(8, 0.1)
        trace = make_trace([10.0, 4.0, 1.0])
        assert select_stage_discrepancy(trace, 0.0, g) == 2

    def test_single_stage(self):
        g = make_grid(8, 0.1)
        trace = make_trace([10.0])
        assert select_stage_discrepancy(trace, 5.0, g) == 0

    def test_first_stage_at_noise_floor_wins(self):
        g = make_grid(8, 0.1)  # dt*(M+1) = 0.9
        trace = make_trace([10.0, 4.0, 1.0])
        noise_std = np.sqrt(5.0 / (g.dt * g.n_cols))  # threshold = 5
        assert select_stage_discrepancy(trace, noise_std, g) == 1

    def test_empty_trace_rejected(self):
        g = make_grid(8, 0.1)
        with pytest.raises(ValueError):
            select_stage_discrepancy(SolveTrace(), 1.0, g)


class TestSolve:
    def test_zero_signal(self):
        sig = SampledSignal(np.zeros(9), 0.1)
        with pytest.warns(UserWarning):
            result = solve(sig)
        np.testing.assert_array_equal(result.F.values, 0)
        np.testing.assert_array_equal(result.alpha.values, 0)
        assert len(result.trace.stages()) == 1
        assert sum(r.inner_iterations for r in result.trace.records) <= 1

    def test_reconstruction_is_real_and_exact(self):
        rng = np.random.default_rng(3)
        sig = SampledSignal(np.cos(2 * np.pi * 0.8 * np.arange(33) * 0.1), 0.1)
        result = solve(sig, tycoon.default_params(sig, stages=3))
        recon = reconstruct(result.F)
        assert recon.dtype == np.float64

    def test_monotone_descent_within_stages(self):
        sig = SampledSignal(np.cos(2 * np.pi * 0.9 * np.arange(49) * 0.1), 0.1)
        result = solve(sig, tycoon.default_params(sig, stages=4))
        for _, records in result.trace.stages():
            totals = [r.terms.total for r in records]
            for a, b in zip(totals, totals[1:]):
                assert b <= a * (1 + 1e-12)

    def test_fixed_point_after_convergence(self):
        # one extra alternating iteration moves the converged iterate by at
        # most twice the stopping tolerances
        sig = SampledSignal(np.cos(2 * np.pi * 0.9 * np.arange(49) * 0.1), 0.1)
        p = tycoon.default_params(sig, stages=3)
        result = solve(sig, p)
        mu_tilde = result.chosen_mu_tilde
        F1, _ = fista(result.F, result.alpha, sig, p, mu_tilde)
        rel_f = np.linalg.norm(F1.values - result.F.values) / (np.linalg.norm(result.F.values) + 1e-30)
        assert rel_f <= 2 * p.eps1
        alpha1 = update_chirp(F1, p.gamma / (mu_tilde * p.lambda_tilde))
        rel_a = np.linalg.norm(alpha1.values - result.alpha.values) / (np.linalg.norm(result.alpha.values) + 1e-30)
        assert rel_a <= 2 * p.eps2

    def test_discrepancy_selection_returns_earlier_stage(self):
        rng = np.random.default_rng(11)
        clean = np.cos(2 * np.pi * 0.9 * np.arange(65) * 0.1)
        noise = 0.3 * rng.standard_normal(65)
        sig = SampledSignal(clean + noise, 0.1)
        p = tycoon.default_params(sig, stages=5)
        noisy_pick = solve(sig, p, noise_std=float(np.std(noise)))
        clean_pick = solve(sig, p)
        assert noisy_pick.chosen_mu_tilde >= clean_pick.chosen_mu_tilde
        assert noisy_pick.chosen_mu_tilde in p.mu_schedule
