import math

import numpy as np
import pytest

import solver
from errors import (
    HypothesisViolation,
    InitialIterateNotInLambda,
    MixtureFitFailed,
    NotInLambda,
    ShootingBracketFailed,
    TNotFound,
)
from functionals import energy, fibering_value, pohozaev_terms
from problem import Nonlinearity, Potential, ProblemSpec, check_potential_hypotheses
from projection import in_lambda_set, project_to_manifold, reduced_energy
from radial_grid import RadialFunction, grad_norm_sq, l2_norm_sq, make_grid
from solver import (
    SolverOptions,
    axis_sweep,
    kirchhoff_from_scalar_field,
    lambda_sweep,
    mountain_pass_upper_bound,
    ode_residual,
    oracle_ground_state,
    plateau_iterate,
    scalar_field_grid,
    solve_ground_state,
    solve_scalar_field_shooting,
)

ACCEPTANCE = [(1.0, 0.25, 4.0), (1.0, 1.0, 3.5), (2.0, 0.5, 4.5)]

base_grid = make_grid(20.0, 2001)
compact = ProblemSpec(a=1.0, b=0.05, potential=Potential(kind="constant", alpha=1.0), nonlinearity=Nonlinearity(p=4.0))
decaying = ProblemSpec(
    a=1.0, b=0.05, potential=Potential(kind="inverse_poly", alpha=1.0, beta=0.2, sigma=2.0), nonlinearity=Nonlinearity(p=4.0)
)
compact_grid = make_grid(80.0, 2001)

results = {}


def constant_problem(a, b, p):
    return ProblemSpec(a=a, b=b, potential=Potential(kind="constant", alpha=1.0), nonlinearity=Nonlinearity(p=p))


def fitted_grid(ps, lengths=25.0, n=2501):
    """Grid whose radius spans `lengths` decay lengths of the rescaled ground state."""
    v = solve_scalar_field_shooting(1.0, ps.v_inf, ps.nonlinearity, scalar_field_grid(ps.v_inf))
    _, t = kirchhoff_from_scalar_field(v, ps.a, ps.b)
    return make_grid(lengths / (t * math.sqrt(ps.v_inf)), n)


def setup_module(module):
    results["compact"] = solve_ground_state(compact, compact_grid)
    results["decaying"] = solve_ground_state(decaying, compact_grid)


def gaussian(grid, amplitude, width):
    return RadialFunction.from_callable(grid, lambda r: amplitude * np.exp(-((np.asarray(r) / width) ** 2)), exact=True)


# shooting oracle


def test_shooting_cubic_ground_state():
    v = solve_scalar_field_shooting(1.0, 1.0, Nonlinearity(p=4.0), base_grid)
    assert v.values[0] == pytest.approx(4.3374, rel=1e-3)
    assert grad_norm_sq(v) == pytest.approx(3.0 * l2_norm_sq(v), rel=1e-4)
    assert np.all(v.values > 0)
    assert np.all(np.diff(v.values) <= 0)
    assert v.values[-1] < 1e-8 * v.values[0]


def test_shooting_scales_with_lambda():
    v1 = solve_scalar_field_shooting(1.0, 1.0, Nonlinearity(p=4.0), base_grid)
    vh = solve_scalar_field_shooting(1.0, 1.0, Nonlinearity(p=4.0), base_grid, lam=0.5)
    assert vh.values[0] == pytest.approx(v1.values[0] / math.sqrt(0.5), rel=1e-6)


def test_shooting_sampler_extends_past_grid():
    v = solve_scalar_field_shooting(1.0, 1.0, Nonlinearity(p=4.0), base_grid)
    far = v.sampler(np.array([30.0, 40.0]))
    assert 0 < far[1] < far[0] < v.values[-1]
    assert far[0] / far[1] == pytest.approx(40.0 / 30.0 * math.exp(10.0), rel=1e-6)


def test_shooting_without_overshoot_fails():
    with pytest.raises(ShootingBracketFailed):
        solve_scalar_field_shooting(1.0, 1.0, Nonlinearity(p=4.0), base_grid, scan=(1e-3, 1e-1, 16))


def test_shooting_rejects_bad_coefficients():
    with pytest.raises(ValueError):
        solve_scalar_field_shooting(0.0, 1.0, Nonlinearity(p=4.0), base_grid)
    with pytest.raises(ValueError):
        solve_scalar_field_shooting(1.0, -1.0, Nonlinearity(p=4.0), base_grid)


def test_rescaling_without_kirchhoff_term():
    v = solve_scalar_field_shooting(1.0, 1.0, Nonlinearity(p=4.0), base_grid)
    u, t = kirchhoff_from_scalar_field(v, 1.0, 0.0)
    assert t == 1.0
    np.testing.assert_array_equal(u.values, v.values)
    _, t = kirchhoff_from_scalar_field(v, 4.0, 0.0)
    assert t == pytest.approx(0.5, rel=1e-15)


def test_rescaling_root_solves_quadratic():
    v = solve_scalar_field_shooting(1.0, 1.0, Nonlinearity(p=4.0), base_grid)
    G = grad_norm_sq(v)
    _, t = kirchhoff_from_scalar_field(v, 1.0, 0.25)
    assert t**2 + 0.25 * G * t == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(ValueError):
        kirchhoff_from_scalar_field(v, 0.0, 0.25)


@pytest.mark.parametrize("a,b,p", ACCEPTANCE)
def test_oracle_output_is_on_manifold(a, b, p):
    ps = constant_problem(a, b, p)
    grid = fitted_grid(ps)
    oracle = oracle_ground_state(ps, grid)
    scale = pohozaev_terms(oracle.u, ps).scale
    assert oracle.pohozaev_residual <= 1e-6 * scale
    assert oracle.ode_residual <= 1e-5 * math.sqrt(l2_norm_sq(oracle.u))
    assert oracle.m > 0
    assert oracle.v.grid.r_max == pytest.approx(25.0)


def test_oracle_dilation_factor_does_not_depend_on_target_grid():
    ps = constant_problem(1.0, 1.0, 3.5)
    fitted = oracle_ground_state(ps, fitted_grid(ps))
    coarse = oracle_ground_state(ps, make_grid(20.0, 2001))
    assert fitted.t == pytest.approx(coarse.t, rel=1e-12)
    assert fitted.t == pytest.approx(0.012, abs=0.001)
    assert coarse.u.sampler(np.array([1.0 / coarse.t]))[0] == pytest.approx(coarse.v.sampler(np.array([1.0]))[0])


def test_acceptance_oracle_dilation():
    oracle = oracle_ground_state(constant_problem(1.0, 0.25, 4.0), base_grid)
    assert oracle.t == pytest.approx(0.07, abs=0.01)


def test_rescaled_profile_moves_to_another_grid_only_with_a_sampler():
    v = solve_scalar_field_shooting(1.0, 1.0, Nonlinearity(p=4.0), base_grid)
    target = make_grid(200.0, 2001)
    u, t = kirchhoff_from_scalar_field(v, 1.0, 0.25, target)
    assert u.grid is target
    np.testing.assert_allclose(u.values, v.sampler(t * target.nodes), rtol=0, atol=0)
    with pytest.raises(ValueError):
        kirchhoff_from_scalar_field(v.with_values(v.values), 1.0, 0.25, target)


def test_ode_residual_separates_solutions_from_guesses():
    ps = ProblemSpec(a=1.0, b=0.0, oracle_mode=True, nonlinearity=Nonlinearity(p=4.0))
    v = solve_scalar_field_shooting(1.0, 1.0, Nonlinearity(p=4.0), base_grid)
    guess = gaussian(base_grid, 4.0, 1.5)
    scale = math.sqrt(l2_norm_sq(v))
    assert ode_residual(v, ps) < 1e-4 * scale
    assert ode_residual(guess, ps) > 1e-2 * scale
    assert ode_residual(guess, ps, norm="max") > 1e-2


# direct solver


def test_compact_solve_converges_on_manifold():
    res = results["compact"]
    assert res.converged
    assert res.m > 0
    assert res.pohozaev_residual <= 1e-6
    assert res.reduced_grad_norm <= SolverOptions().tol * max(1.0, abs(res.m))
    assert res.t_u == pytest.approx(1.0, abs=1e-6)
    assert res.m == pytest.approx(energy(res.u_hat, compact).total, rel=1e-10)
    assert res.grad_norm > 0
    assert res.m > res.energy_lower_bound > 0
    assert res.ode_residual < 1e-3 * math.sqrt(l2_norm_sq(res.u_hat))


def test_compact_solve_profile_shape():
    u = results["compact"].u_hat.values
    assert u[0] == u.max() > 0
    assert abs(u[-1]) < 1e-8 * u[0]


def test_trace_records_descent():
    trace = results["compact"].trace
    assert trace[0].iteration == 0
    energies = [row.energy for row in trace]
    assert energies[-1] <= energies[0]
    assert results["compact"].iterations == len(trace)


def test_solution_is_minimax_level():
    res = results["compact"]
    for t in (0.5, 0.9, 1.1, 2.0):
        assert fibering_value(res.u_hat, compact, t) <= res.m
    for amplitude, width in ((3.0, 2.0), (2.0, 4.0), (5.0, 1.0)):
        u = gaussian(compact_grid, amplitude, width)
        if in_lambda_set(u, compact):
            assert reduced_energy(u, compact) >= res.m * (1 - 1e-9)


def test_compact_solve_matches_oracle():
    oracle = oracle_ground_state(compact, compact_grid)
    assert abs(results["compact"].m - oracle.m) <= 1e-3 * oracle.m


def test_decaying_potential_lowers_the_level():
    limit = solve_ground_state(decaying.limit(), compact_grid)
    assert results["decaying"].converged
    assert results["decaying"].m < limit.m



def test_plateau_iterate_starts_on_the_manifold():
    ps = constant_problem(1.0, 0.25, 4.0)
    grid = fitted_grid(ps)
    s0 = solver._audit_preconditions(ps, 1.0)
    u0 = plateau_iterate(grid, ps, s0)
    assert in_lambda_set(u0, ps)
    assert project_to_manifold(u0, ps).t_u == pytest.approx(1.0, abs=1e-2)
    assert np.all(u0.values[grid.nodes > solver.PLATEAU_FILL * grid.r_max] == 0.0)


def test_acceptance_problem_solves_from_the_plateau():
    ps = constant_problem(1.0, 0.25, 4.0)
    res = solve_ground_state(ps, fitted_grid(ps))
    assert res.converged
    assert res.pohozaev_residual <= 1e-9 * pohozaev_terms(res.u_hat, ps).scale
    assert res.m > res.energy_lower_bound > 0


def test_decaying_potential_satisfying_v4_stays_below_limit_level():
    ps = ProblemSpec(
        a=12.0,
        b=0.05,
        potential=Potential(kind="inverse_poly", alpha=1.0, beta=0.5, sigma=2.0),
        nonlinearity=Nonlinearity(p=4.0),
    )
    assert check_potential_hypotheses(ps.potential, ps.a).status("V4") == "pass"
    grid = fitted_grid(ps.limit())
    res = solve_ground_state(ps, grid)
    limit = solve_ground_state(ps.limit(), grid)
    assert res.converged and limit.converged
    assert res.m <= limit.m + 1e-6


def test_refinement_is_stable():
    finer = solve_ground_state(compact, make_grid(160.0, 4001))
    assert finer.m == pytest.approx(results["compact"].m, rel=1e-4)


@pytest.mark.parametrize("a,b,p", ACCEPTANCE)
def test_direct_solver_agrees_with_oracle(a, b, p):
    ps = constant_problem(a, b, p)
    grid = fitted_grid(ps)
    direct = solve_ground_state(ps, grid)
    oracle = oracle_ground_state(ps, grid)
    assert direct.converged
    assert abs(direct.m - oracle.m) <= 1e-3 * oracle.m


def test_warm_start_is_used_on_same_grid():
    res = results["compact"]
    warm = solve_ground_state(compact, compact_grid, warm_start=res.u_hat)
    assert warm.converged
    assert warm.iterations <= res.iterations
    assert warm.m == pytest.approx(res.m, rel=1e-8)


def test_rejects_potential_failing_positivity():
    ps = ProblemSpec(a=1.0, b=0.05, potential=Potential(kind="inverse_poly", alpha=0.5, beta=1.0))
    with pytest.raises(HypothesisViolation):
        solve_ground_state(ps, compact_grid)


def test_empty_lambda_set_is_reported(monkeypatch):
    monkeypatch.setattr(solver, "in_lambda_set", lambda *args, **kwargs: False)
    with pytest.raises(InitialIterateNotInLambda):
        solve_ground_state(compact, compact_grid)


def test_lambda_outside_range():
    with pytest.raises(ValueError):
        solve_ground_state(compact, compact_grid, lam=0.3)


def test_gaussian_mixture_optimizer_stays_above_descent():
    opts = SolverOptions(optimizer="gaussian_mixture", max_iters=50)
    res = solve_ground_state(compact, compact_grid, opts)
    assert res.status in ("converged", "max_iters")
    assert np.isfinite(res.m)
    assert res.m >= results["compact"].m * (1 - 1e-6)
    assert res.t_u == pytest.approx(1.0, abs=1e-4)
    assert res.trace


def test_gaussian_mixture_fit_outside_lambda_is_reported(monkeypatch):
    u0 = gaussian(compact_grid, 3.0, 2.0)
    monkeypatch.setattr(solver, "in_lambda_set", lambda *args, **kwargs: False)
    with pytest.raises(MixtureFitFailed):
        solver._mixture_minimize(u0, compact, SolverOptions(optimizer="gaussian_mixture"), 1.0, False)


# lambda diagnostics


def test_mountain_pass_bound_on_constant_potential_is_the_level():
    res = results["compact"]
    bound = mountain_pass_upper_bound(compact, 1.0, res.u_hat)
    assert bound == pytest.approx(res.m, rel=1e-8)


def test_mountain_pass_bound_below_limit_level():
    seed = results["compact"].u_hat
    assert mountain_pass_upper_bound(decaying, 1.0, seed) < results["compact"].m


def test_mountain_pass_endpoint_not_found():
    opts = SolverOptions(t_start=1.01, t_max=1.5)
    with pytest.raises(TNotFound):
        mountain_pass_upper_bound(compact, 1.0, results["compact"].u_hat, opts)


def test_mountain_pass_seed_must_be_in_lambda():
    with pytest.raises(NotInLambda):
        mountain_pass_upper_bound(compact, 1.0, gaussian(compact_grid, 0.5, 1.0))


def test_lambda_sweep_is_monotone_with_strict_gap():
    grid = make_grid(120.0, 4001)
    sweep = lambda_sweep(decaying, grid, [0.5, 0.75, 1.0])
    m = sweep.m_inf_values
    assert all(value is not None for value in m)
    assert m[0] >= m[1] >= m[2] > 0
    assert sweep.statuses == ["converged"] * 3
    assert sweep.gap_margins[-1] > 0
    assert sweep.strict_gap_from is not None and sweep.strict_gap_from <= 1.0
    assert len(sweep.rows()) == 3
    assert len(sweep.rows()[0]) == len(sweep.COLUMNS)


def test_lambda_sweep_rejects_unordered_grid():
    with pytest.raises(ValueError):
        lambda_sweep(decaying, compact_grid, [1.0, 0.5])
    with pytest.raises(ValueError):
        lambda_sweep(decaying, compact_grid, [0.2, 0.5])


def test_axis_sweep_keeps_input_order():
    rows = axis_sweep(compact, compact_grid, "a", [2.0, 1.0], workers=2)
    assert [row["value"] for row in rows] == [2.0, 1.0]
    assert rows[0]["m"] > rows[1]["m"] > 0
    assert rows[1]["m"] == pytest.approx(results["compact"].m, rel=1e-6)


def test_axis_sweep_records_invalid_points():
    rows = axis_sweep(compact, compact_grid, "p", [2.0])
    assert rows[0]["m"] is None
    assert rows[0]["status"] == "ValidationError"
    with pytest.raises(ValueError):
        axis_sweep(compact, compact_grid, "gamma", [1.0])
