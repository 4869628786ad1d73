import math

import numpy as np
import pytest

from neutraldde import (
    DomainSpec,
    FunctionalAffineTerm,
    HypothesisViolation,
    NeutralProblem,
    Segment,
    SolverConfig,
    SpectralOperator,
    TimeFn,
    TimeForcingTerm,
    ZeroTerm,
    cell_weights,
    evaluate_window_operator,
    generator_convolution,
    heuristic_window,
    make_dirichlet_laplacian,
    make_manufactured,
    sample_neutral_contraction,
    semigroup_convolution,
    sine_profile_coeffs,
    solve_window,
)


def constant_segment(h, vec, dt):
    vec = np.atleast_1d(np.asarray(vec, dtype=float))
    n = int(round(h / dt))
    thetas = -h + dt * np.arange(n + 1)
    return Segment(h, thetas, np.tile(vec, (n + 1, 1)))


def homogeneous_problem(mu=(1.0,), h=0.5, T=2.0):
    op = SpectralOperator(list(mu))
    return NeutralProblem(
        op, h, T, 0.5, ZeroTerm(),
        TimeForcingTerm([TimeFn("const", (0.0,)) for _ in mu]),
        DomainSpec("time_only"), 0.0,
    )


class TestCellWeights:
    def test_matches_high_precision_reference(self):
        import mpmath

        mpmath.mp.dps = 50
        zs = np.geomspace(1e-12, 1e4, 81)
        w0, w1 = cell_weights(zs, 1.0)
        for z, a, b in zip(zs, w0, w1):
            mz = mpmath.mpf(float(z))
            ref0 = (1 - mpmath.e**-mz * (1 + mz)) / mz**2
            ref1 = (mz - 1 + mpmath.e**-mz) / mz**2
            assert abs(a - float(ref0)) <= 1e-10 * float(ref0)
            assert abs(b - float(ref1)) <= 1e-10 * float(ref1)
            assert np.isfinite(a) and np.isfinite(b)

    def test_zero_rate_limit(self):
        # plain trapezoid weights in the mu -> 0 limit
        w0, w1 = cell_weights(np.array([1e-12]), 0.1)
        assert w0[0] == pytest.approx(0.05, rel=1e-9)
        assert w1[0] == pytest.approx(0.05, rel=1e-9)


class TestConvolutions:
    def test_zero_input(self):
        op = SpectralOperator([2.0])
        vals = np.zeros((11, 1))
        np.testing.assert_array_equal(semigroup_convolution(op, vals, 10, 0.1), [0.0])
        np.testing.assert_array_equal(generator_convolution(op, vals, 10, 0.1), [0.0])

    def test_empty_integral_at_origin(self):
        op = SpectralOperator([2.0])
        vals = np.ones((11, 1))
        np.testing.assert_array_equal(semigroup_convolution(op, vals, 0, 0.1), [0.0])
        np.testing.assert_array_equal(generator_convolution(op, vals, 0, 0.1), [0.0])

    def test_constant_input_closed_forms(self):
        # exact for constant samples: (1 - e^(-mu t))/mu and (1 - e^(-mu t))
        for mu, t, dt in [(1.0, 1.0, 1e-3), (2.0, 1.0, 1e-3), (40.0, 0.5, 1e-3)]:
            op = SpectralOperator([mu])
            n = int(round(t / dt))
            vals = np.ones((n + 1, 1))
            got_s = semigroup_convolution(op, vals, n, dt)[0]
            got_a = generator_convolution(op, vals, n, dt)[0]
            assert got_s == pytest.approx((1 - math.exp(-mu * t)) / mu, abs=1e-10)
            assert got_a == pytest.approx(1 - math.exp(-mu * t), abs=1e-10)

    def test_reference_values(self):
        op = SpectralOperator([1.0])
        vals = np.ones((1001, 1))
        assert semigroup_convolution(op, vals, 1000, 1e-3)[0] == pytest.approx(
            0.6321205588285577, abs=1e-12
        )
        op2 = SpectralOperator([2.0])
        assert generator_convolution(op2, vals, 1000, 1e-3)[0] == pytest.approx(
            0.8646647167633873, abs=1e-12
        )

    @pytest.mark.parametrize("which", ["semigroup", "generator"])
    def test_second_order_on_smooth_data(self, which):
        # integrand e^(0.3 s) against mode mu = 5 up to t = 1
        mu, gamma, t = 5.0, 0.3, 1.0
        op = SpectralOperator([mu])
        exact_s = (math.exp(gamma * t) - math.exp(-mu * t)) / (gamma + mu)
        errors = []
        for dt in [1e-2, 5e-3, 2.5e-3]:
            n = int(round(t / dt))
            s = dt * np.arange(n + 1)
            vals = np.exp(gamma * s)[:, None]
            if which == "semigroup":
                got = semigroup_convolution(op, vals, n, dt)[0]
                errors.append(abs(got - exact_s))
            else:
                got = generator_convolution(op, vals, n, dt)[0]
                errors.append(abs(got - mu * exact_s))
        for coarse, fine in zip(errors, errors[1:]):
            assert 3.5 <= coarse / fine <= 4.5

    def test_stiff_mode_stays_accurate(self):
        # mu dt = 50: kernel mass concentrates in the last cell
        mu, dt, t = 5000.0, 1e-2, 0.2
        op = SpectralOperator([mu])
        n = int(round(t / dt))
        vals = np.ones((n + 1, 1))
        got = semigroup_convolution(op, vals, n, dt)[0]
        assert got == pytest.approx((1 - math.exp(-mu * t)) / mu, rel=1e-10)


class TestWindowOperator:
    def test_homogeneous_is_semigroup_curve_independent_of_candidate(self):
        prob = homogeneous_problem(mu=(1.0,))
        dt = 0.01
        seg = constant_segment(0.5, [1.0], dt)
        rng = np.random.default_rng(0)
        expected = np.exp(-dt * np.arange(11))[:, None]
        for _ in range(3):
            candidate = rng.normal(size=(11, 1))
            candidate[0] = 1.0
            got = evaluate_window_operator(prob, candidate, seg, 0.0, dt)
            np.testing.assert_allclose(got, expected, atol=1e-13)

    def test_left_endpoint_identity_exact(self):
        op = make_dirichlet_laplacian(3, math.pi)
        g = FunctionalAffineTerm(0.1, 0.2, sine_profile_coeffs(op, 1), "integral", y_max=5.0)
        f = FunctionalAffineTerm(0.0, 0.3, sine_profile_coeffs(op, 2), "integral", y_max=5.0)
        prob = NeutralProblem(op, 0.5, 2.0, 0.5, g, f, DomainSpec("delay_mass", 5.0), 0.5)
        dt = 0.05
        seg = constant_segment(0.5, [0.3, 0.1, 0.0], dt)
        candidate = np.tile(seg.values[-1], (5, 1))
        got = evaluate_window_operator(prob, candidate, seg, 0.0, dt)
        np.testing.assert_array_equal(got[0], seg.values[-1])

    def test_manufactured_solution_is_a_fixed_point_up_to_quadrature(self):
        op = SpectralOperator([1.0])
        case = make_manufactured([("exp", 1.0, -0.5)], kappa=0.25, op=op, h=1.0, T=2.0)
        errors = []
        for dt in [2e-2, 1e-2]:
            seg = case.initial_segment(dt)
            m = int(round(0.5 / dt))
            times = dt * np.arange(m + 1)
            exact = case.exact_values(times)
            got = evaluate_window_operator(case.problem, exact, seg, 0.0, dt)
            errors.append(float(np.abs(got - exact).max()))
        assert errors[0] <= 5.0 * (2e-2) ** 2
        assert 3.0 <= errors[0] / errors[1] <= 5.0

    def test_matched_rate_case_is_exact(self):
        # trajectory rate equal to the decay rate makes the two convolution
        # integrands cancel pointwise, so the map reproduces the exact
        # solution to roundoff
        op = SpectralOperator([1.0])
        case = make_manufactured([("exp", 1.0, -1.0)], kappa=0.25, op=op, h=1.0, T=2.0)
        dt = 2e-2
        seg = case.initial_segment(dt)
        times = dt * np.arange(26)
        exact = case.exact_values(times)
        got = evaluate_window_operator(case.problem, exact, seg, 0.0, dt)
        assert float(np.abs(got - exact).max()) <= 1e-14


class TestSolveWindow:
    def test_homogeneous_two_iterations_exact(self):
        prob = homogeneous_problem(mu=(1.0, 4.0))
        dt = 0.01
        seg = constant_segment(0.5, [1.0, 0.5], dt)
        cfg = SolverConfig(dt=dt, window=0.1, tol=1e-12)
        out = solve_window(prob, seg, 0.0, cfg)
        assert out.converged
        assert out.iterations <= 2
        times = dt * np.arange(11)
        expected = np.exp(-np.outer(times, prob.op.mu)) * np.array([1.0, 0.5])
        np.testing.assert_allclose(out.values, expected, atol=1e-14)

    def test_manufactured_window_second_order(self):
        op = SpectralOperator([1.0])
        case = make_manufactured([("exp", 1.0, -0.5)], kappa=0.25, op=op, h=1.0, T=2.0)
        sup_errors = []
        for dt in [1e-2, 5e-3]:
            seg = case.initial_segment(dt)
            cfg = SolverConfig(dt=dt, window=0.1, tol=1e-12, max_iter=100)
            out = solve_window(case.problem, seg, 0.0, cfg)
            assert out.converged
            times = dt * np.arange(out.values.shape[0])
            exact = case.exact_values(times)
            sup_errors.append(float(np.abs(out.values - exact).max()))
        assert sup_errors[0] <= 1e-4
        assert sup_errors[1] <= sup_errors[0] / 3.0

    def test_zero_trust_radius_flags_departure(self):
        prob = homogeneous_problem(mu=(1.0,))
        dt = 0.01
        seg = constant_segment(0.5, [1.0], dt)
        cfg = SolverConfig(dt=dt, window=0.1, tol=1e-12, trust_radius=0.0)
        out = solve_window(prob, seg, 0.0, cfg)
        assert out.status == "left_trust_region"

    def test_reported_residual_is_reproducible(self):
        # the forcing reads the current state, so the residual is genuinely
        # nonzero at acceptance and must be reproducible from the values
        out, prob, seg, dt = self._state_coupled_window(tol=1e-9, max_iter=100)
        assert out.converged
        assert 0.0 < out.residual <= 1e-9
        gy = evaluate_window_operator(prob, out.values, seg, 0.0, dt)
        recomputed = float(np.linalg.norm(gy - out.values, axis=1).max())
        assert abs(recomputed - out.residual) <= 1e-14

    def test_diverged_status_when_iterations_exhausted(self):
        out, _, _, _ = self._state_coupled_window(tol=1e-16, max_iter=2)
        assert out.status == "diverged"

    @staticmethod
    def _state_coupled_window(tol, max_iter):
        from neutraldde import current_value_window

        op = SpectralOperator([1.0])
        f = FunctionalAffineTerm(0.0, 2.0, np.array([1.0]), "max",
                                 window=current_value_window(), y_max=1e6)
        prob = NeutralProblem(op, 0.5, 2.0, 0.5, ZeroTerm(), f,
                              DomainSpec("time_only"), 0.0)
        dt = 1e-2
        seg = constant_segment(0.5, [0.1], dt)
        cfg = SolverConfig(dt=dt, window=0.1, tol=tol, max_iter=max_iter)
        return solve_window(prob, seg, 0.0, cfg), prob, seg, dt


class TestHeuristicWindow:
    def test_half_contraction_budget(self):
        prob = homogeneous_problem(mu=(1.0,), h=1.0)
        prob.mg_bound = 0.5
        cfg = SolverConfig(dt=1e-3, window=1.0)
        w = heuristic_window(prob, cfg)
        assert w == pytest.approx(1.0 / 15.0)

    def test_tight_contraction_budget(self):
        prob = homogeneous_problem(mu=(1.0,), h=1.0)
        prob.mg_bound = 0.9
        cfg = SolverConfig(dt=1e-3, window=1.0)
        assert heuristic_window(prob, cfg) == pytest.approx(1.0 / 71.0)

    def test_caps_at_configured_window(self):
        prob = homogeneous_problem(mu=(1.0,), h=1.0)
        prob.mg_bound = 0.5
        cfg = SolverConfig(dt=1e-3, window=0.02)
        assert heuristic_window(prob, cfg) == pytest.approx(0.02)

    def test_unit_budget_rejected_at_construction(self):
        op = SpectralOperator([1.0])
        with pytest.raises(HypothesisViolation):
            NeutralProblem(op, 1.0, 2.0, 0.5, ZeroTerm(), ZeroTerm(),
                           DomainSpec("time_only"), 1.0)


class TestNeutralContraction:
    def test_sampled_ratio_within_budget(self):
        op = make_dirichlet_laplacian(4, math.pi)
        profile = sine_profile_coeffs(op, 1)
        c1 = 0.05
        g = FunctionalAffineTerm(0.0, c1, profile, "integral", y_max=1.0)
        mg = c1 * 1.0 * float(np.linalg.norm(op.mu**0.5 * profile))
        f = FunctionalAffineTerm(0.0, 0.2, profile, "integral", y_max=1.0)
        prob = NeutralProblem(op, 1.0, 2.0, 0.5, g, f,
                              DomainSpec("delay_mass", 1.0), mg + 0.005)
        dt = 0.01
        seg = constant_segment(1.0, [0.3, 0.0, 0.0, 0.0], dt)
        cfg = SolverConfig(dt=dt, window=0.1, tol=1e-10)
        out = solve_window(prob, seg, 0.0, cfg)
        assert out.converged
        ratio = sample_neutral_contraction(prob, seg, 0.0, out.values, dt, 50, seed=6)
        assert ratio <= prob.mg_bound + 0.01


class TestSolverConfig:
    def test_grid_divisibility_enforced(self):
        with pytest.raises(ValueError):
            SolverConfig(dt=0.03, window=0.1)
        cfg = SolverConfig(dt=0.02, window=0.1)
        with pytest.raises(ValueError):
            cfg.validate_delay(0.05)

    def test_damping_range(self):
        with pytest.raises(ValueError):
            SolverConfig(dt=0.01, window=0.1, damping=0.0)
        with pytest.raises(ValueError):
            SolverConfig(dt=0.01, window=0.1, damping=1.5)
