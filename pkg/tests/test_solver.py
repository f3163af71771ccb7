import numpy as np
import pytest

from mixedbvp import (
    CarathFn,
    CoincidenceFrame,
    DivergenceError,
    GridFunction,
    HomotopyParams,
    NagumoPair,
    SampledDensity,
    SolveOptions,
    continuation,
    extend_tilde,
    get_problem,
    kernel_parameter,
    make_grid,
    phi_operator,
    residual,
    solve_fixed_point,
)
from mixedbvp.coincidence import BoundaryCondition


def zero_fn():
    return CarathFn(
        f=lambda t, s, xi: np.zeros_like(np.asarray(s, dtype=float) * np.asarray(t, dtype=float)),
        k=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        rho=1.0,
        nagumo=lambda eta: NagumoPair(
            eta=eta,
            phi=lambda xi: np.ones_like(np.asarray(xi, dtype=float)),
            psi=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
            p=1.0,
        ),
    )


def frame_for(spec, n=1000):
    return CoincidenceFrame(spec.bc, make_grid(spec.T, n))


class TestPhiOperator:
    def test_manufactured_target_is_near_fixed(self):
        spec = get_problem("mms-bc1")
        frame = frame_for(spec, 1000)
        ustar = spec.known_solution(frame.grid)
        pu = phi_operator(ustar, extend_tilde(spec.f), frame)
        assert np.max(np.abs(pu.u - ustar.u)) <= 1e-5

    def test_kernel_elements_fixed_when_f_vanishes(self, bc):
        frame = CoincidenceFrame(bc, make_grid(1.0, 64))
        ft = extend_tilde(zero_fn())
        ke = frame.embed(0.7)
        pu = phi_operator(ke, ft, frame)
        assert np.max(np.abs(pu.u - ke.u)) <= 1e-13
        assert np.max(np.abs(pu.du - ke.du)) <= 1e-13

    def test_zero_is_fixed(self, bc):
        spec = get_problem(f"logistic-{bc.value}")
        frame = frame_for(spec, 64)
        z = GridFunction(frame.grid, np.zeros(65), np.zeros(65))
        pu = phi_operator(z, extend_tilde(spec.f), frame)
        assert np.max(np.abs(pu.u)) == 0.0
        assert np.max(np.abs(pu.du)) == 0.0


class TestResidual:
    def test_manufactured_target_second_order(self):
        spec = get_problem("mms-bc1")
        vals = {}
        for n in (500, 1000):
            g = make_grid(1.0, n)
            ustar = spec.known_solution(g)
            r, b = residual(ustar, extend_tilde(spec.f), spec.bc, HomotopyParams())
            vals[n] = (r, b)
            assert r <= 200.0 * g.h**2
        assert vals[500][0] / vals[1000][0] == pytest.approx(4.0, abs=1.0)

    def test_zero_function_zero_channels(self, bc):
        g = make_grid(1.0, 32)
        z = GridFunction(g, np.zeros(33), np.zeros(33))
        spec = get_problem(f"logistic-{bc.value}")
        r, b = residual(z, extend_tilde(spec.f), bc, HomotopyParams())
        assert r == 0.0
        assert b == 0.0

    def test_identity_violates_bc3_rows(self):
        g = make_grid(1.0, 32)
        u = GridFunction(g, g.nodes, np.ones(33))
        spec = get_problem("logistic-bc3")
        _, b = residual(u, extend_tilde(spec.f), BoundaryCondition.BC3, HomotopyParams())
        # |u(T) - u(0)| + |u'(0)| = T + 1; the derivative samples match the
        # difference stencil exactly for a linear profile
        assert b == pytest.approx(2.0, abs=1e-12)

    def test_needs_enough_subintervals(self):
        g = make_grid(1.0, 3)
        u = GridFunction(g, np.zeros(4), np.zeros(4))
        spec = get_problem("logistic-bc1")
        with pytest.raises(ValueError):
            residual(u, extend_tilde(spec.f), BoundaryCondition.BC1, HomotopyParams())


class TestHomotopyParams:
    def test_theta_range(self):
        with pytest.raises(ValueError):
            HomotopyParams(theta=0.0)
        with pytest.raises(ValueError):
            HomotopyParams(theta=1.2)

    def test_alpha_needs_profile(self):
        with pytest.raises(ValueError):
            HomotopyParams(alpha=0.5)

    def test_profile_must_be_nonnegative(self):
        g = make_grid(1.0, 8)
        with pytest.raises(ValueError):
            HomotopyParams(alpha=0.5, v=SampledDensity(g, -np.ones(9)))

    def test_profile_must_not_vanish(self):
        g = make_grid(1.0, 8)
        with pytest.raises(ValueError):
            HomotopyParams(alpha=0.5, v=SampledDensity(g, np.zeros(9)))


class TestSolveFixedPoint:
    def test_manufactured_recovery_from_perturbed_kernel_part(self):
        spec = get_problem("mms-bc1")
        frame = frame_for(spec, 1000)
        ft = extend_tilde(spec.f)
        ustar = spec.known_solution(frame.grid)
        init = frame.embed(1.1 * kernel_parameter(ustar, spec.bc))
        rep = solve_fixed_point(init, ft, frame, HomotopyParams(), SolveOptions())
        assert rep.converged
        assert np.max(np.abs(rep.solution.u - ustar.u)) <= 1e-4

    def test_zero_nonlinearity_immediate(self, bc):
        frame = CoincidenceFrame(bc, make_grid(1.0, 32))
        z = GridFunction(frame.grid, np.zeros(33), np.zeros(33))
        rep = solve_fixed_point(z, extend_tilde(zero_fn()), frame)
        assert rep.converged
        assert rep.sup_norm == 0.0
        assert rep.iterations <= 2

    def test_logistic_bc1_matches_shooting(self):
        from mixedbvp import oracle_shoot

        spec = get_problem("logistic-bc1")
        frame = frame_for(spec, 800)
        ft = extend_tilde(spec.f)
        rep = solve_fixed_point(frame.embed(0.5), ft, frame)
        assert rep.converged
        orc = oracle_shoot(spec, 20000, grid=frame.grid, bracket=(0.1, 4.0))
        assert np.max(np.abs(orc.u - rep.solution.u)) <= 1e-4

    def test_fixed_point_and_residual_hold_together(self):
        spec = get_problem("logistic-bc1")
        frame = frame_for(spec, 400)
        ft = extend_tilde(spec.f)
        rep = solve_fixed_point(frame.embed(0.5), ft, frame)
        assert rep.converged
        pu = phi_operator(rep.solution, ft, frame)
        assert np.max(np.abs(pu.u - rep.solution.u)) <= 10.0 * rep.tol
        assert rep.residual <= rep.tol

    def test_converged_solutions_stay_nonnegative(self, bc):
        spec = get_problem(f"logistic-{bc.value}")
        frame = frame_for(spec, 300)
        rep = solve_fixed_point(frame.embed(0.8 / frame.sup_factor),
                                extend_tilde(spec.f), frame)
        if rep.converged:
            assert float(rep.solution.u.min()) >= -10.0 * rep.tol

    def test_determinism(self):
        spec = get_problem("logistic-bc2")
        frame = frame_for(spec, 200)
        ft = extend_tilde(spec.f)
        r1 = solve_fixed_point(frame.embed(1.0), ft, frame)
        r2 = solve_fixed_point(frame.embed(1.0), ft, frame)
        assert np.array_equal(r1.solution.u, r2.solution.u)
        assert r1.iterations == r2.iterations
        assert r1.residual == r2.residual

    def test_divergence_error(self):
        spec = get_problem("logistic-bc1")
        frame = frame_for(spec, 64)
        huge = frame.embed(1e9)
        with pytest.raises(DivergenceError):
            solve_fixed_point(huge, extend_tilde(spec.f), frame,
                              opts=SolveOptions(ceiling=1e6))

    def test_grid_mismatch_rejected(self):
        spec = get_problem("logistic-bc1")
        frame = frame_for(spec, 64)
        other = CoincidenceFrame(spec.bc, make_grid(1.0, 32))
        with pytest.raises(ValueError):
            solve_fixed_point(other.embed(0.5), extend_tilde(spec.f), frame)

    def test_grid_refinement_ratio(self, bc):
        spec = get_problem(f"mms-{bc.value}")
        errs = {}
        for n in (500, 1000):
            frame = frame_for(spec, n)
            ustar = spec.known_solution(frame.grid)
            init = frame.embed(1.05 * kernel_parameter(ustar, spec.bc))
            rep = solve_fixed_point(init, extend_tilde(spec.f), frame)
            assert rep.converged
            errs[n] = np.max(np.abs(rep.solution.u - ustar.u))
        assert 3.5 <= errs[500] / errs[1000] <= 4.5


class TestContinuation:
    def test_empty_schedule_rejected(self):
        spec = get_problem("logistic-bc1")
        frame = frame_for(spec, 64)
        with pytest.raises(ValueError):
            continuation("theta", [], extend_tilde(spec.f), frame)

    def test_non_monotone_rejected(self):
        spec = get_problem("logistic-bc1")
        frame = frame_for(spec, 64)
        with pytest.raises(ValueError):
            continuation("theta", [0.2, 0.8, 0.5], extend_tilde(spec.f), frame)

    def test_unknown_family_rejected(self):
        spec = get_problem("logistic-bc1")
        frame = frame_for(spec, 64)
        with pytest.raises(ValueError):
            continuation("gamma", [0.5], extend_tilde(spec.f), frame)

    def test_alpha_sweep_needs_profile(self):
        spec = get_problem("logistic-bc1")
        frame = frame_for(spec, 64)
        with pytest.raises(ValueError):
            continuation("alpha", [0.0, 1.0], extend_tilde(spec.f), frame)

    def test_theta_sweep_manufactured_matches_warm_direct(self):
        spec = get_problem("mms-bc1")
        frame = frame_for(spec, 400)
        ft = extend_tilde(spec.f)
        sched = list(np.linspace(0.1, 1.0, 10))
        reps = continuation("theta", sched, ft, frame,
                            initial=spec.known_solution(frame.grid))
        assert all(rep.converged for rep in reps)
        direct = solve_fixed_point(reps[-2].solution, ft, frame, HomotopyParams(theta=1.0))
        assert np.max(np.abs(direct.solution.u - reps[-1].solution.u)) <= 1e-8

    def test_theta_sweep_logistic_matches_independent_direct(self):
        spec = get_problem("logistic-bc1")
        frame = frame_for(spec, 400)
        ft = extend_tilde(spec.f)
        sched = [0.4, 0.6, 0.8, 1.0]
        reps = continuation("theta", sched, ft, frame, initial=frame.embed(0.6))
        assert all(rep.converged for rep in reps)
        direct = solve_fixed_point(frame.embed(0.6), ft, frame, HomotopyParams(theta=1.0))
        assert np.max(np.abs(direct.solution.u - reps[-1].solution.u)) <= 1e-8

    def test_alpha_zero_equals_direct_solve(self):
        spec = get_problem("logistic-bc2")
        frame = frame_for(spec, 300)
        ft = extend_tilde(spec.f)
        v = SampledDensity(frame.grid, np.ones(frame.grid.n + 1))
        reps = continuation("alpha", [0.0], ft, frame, v=v, initial=frame.embed(1.0))
        direct = solve_fixed_point(frame.embed(1.0), ft, frame)
        assert np.array_equal(reps[0].solution.u, direct.solution.u)

    def test_failed_step_recorded_and_sweep_continues(self):
        # A tight ceiling turns the large-forcing steps into recorded
        # failures instead of raising through the sweep.
        spec = get_problem("logistic-bc1")
        frame = frame_for(spec, 200)
        ft = extend_tilde(spec.f)
        v = SampledDensity(frame.grid, np.ones(frame.grid.n + 1))
        sched = [0.0, 0.5, 1.0, 20.0, 40.0]
        reps = continuation("alpha", sched, ft, frame,
                            SolveOptions(ceiling=5.0, max_iters=60, quasi_newton=False),
                            v=v, initial=frame.embed(0.5))
        assert reps[0].converged
        assert not reps[-1].converged
        assert len(reps) == len(sched)
