import numpy as np
import pytest

from errors import BracketingFailed, NotInLambda
from functionals import fibering_value, pohozaev_terms
from problem import Nonlinearity, Potential, ProblemSpec
from projection import (
    directional_derivative,
    in_lambda_set,
    lambda_margin,
    project_to_manifold,
    project_with_widening,
    reduced_energy,
    reduced_gradient,
)
from radial_grid import RadialFunction, make_grid, rescale

grid = make_grid(24.0, 2401)

constant = ProblemSpec(a=1.0, b=0.05, potential=Potential(kind="constant", alpha=1.0), nonlinearity=Nonlinearity(p=4.0))
decaying = ProblemSpec(
    a=20.0, b=1.0, potential=Potential(kind="inverse_poly", alpha=2.0, beta=1.0, sigma=2.0), nonlinearity=Nonlinearity(p=4.0)
)


def gaussian(amplitude=6.0, width=3.0, exact=True):
    return RadialFunction.from_callable(
        grid, lambda r: amplitude * np.exp(-((np.asarray(r) / width) ** 2)), exact=exact
    )


def bump(r):
    r = np.asarray(r)
    return (1.0 + 0.3 * r) * np.exp(-((r / 2.5) ** 2))


def test_lambda_margin_matches_closed_form():
    u = gaussian(3.0, 1.0)
    expected = 0.5 * 9.0 * (np.pi / 2) ** 1.5 - 81.0 / 4 * (np.pi / 4) ** 1.5
    assert lambda_margin(u, constant) == pytest.approx(expected, rel=1e-6)


def test_lambda_threshold_for_unit_gaussian():
    # membership switches at amplitude 2^(5/4) for p = 4 and V_inf = 1
    assert in_lambda_set(gaussian(3.0, 1.0), constant)
    assert not in_lambda_set(gaussian(2.0, 1.0), constant)
    assert not in_lambda_set(gaussian(0.01, 1.0), constant)
    assert not in_lambda_set(RadialFunction(grid, np.zeros(grid.n)), constant)


def test_lambda_weight_shrinks_the_set():
    u = gaussian(3.0, 1.0)
    assert in_lambda_set(u, constant, lam=1.0)
    assert not in_lambda_set(u, constant, lam=0.5)


@pytest.mark.parametrize("ps", [constant, decaying])
def test_projection_lands_on_manifold(ps):
    u = gaussian()
    proj = project_to_manifold(u, ps)
    scale = pohozaev_terms(u, ps, proj.t_u).scale
    assert proj.pohozaev_residual <= 1e-9 * scale
    assert len(proj.roots) == 1
    assert proj.bracket[0] <= proj.t_u <= proj.bracket[1]
    assert proj.iterations > 0


def test_projection_of_projected_function_is_identity():
    u = gaussian()
    proj = project_to_manifold(u, constant)
    v = rescale(u, proj.t_u)
    again = project_to_manifold(v, constant)
    assert again.t_u == pytest.approx(1.0, abs=1e-6)
    assert again.reduced_energy == pytest.approx(proj.reduced_energy, rel=1e-6)


@pytest.mark.parametrize("ps", [constant, decaying])
def test_projection_is_dilation_equivariant(ps):
    u = gaussian()
    proj = project_to_manifold(u, ps)
    stretched = project_to_manifold(rescale(u, 2.0), ps)
    assert stretched.t_u == pytest.approx(proj.t_u / 2.0, rel=1e-6)
    assert stretched.reduced_energy == pytest.approx(proj.reduced_energy, rel=1e-6)


@pytest.mark.parametrize("ps", [constant, decaying])
def test_reduced_energy_dominates_the_orbit(ps):
    u = gaussian()
    value = reduced_energy(u, ps)
    assert value > 0
    for t in np.geomspace(0.05, 20.0, 25):
        assert fibering_value(u, ps, t) <= value + 1e-9 * abs(value)


def test_limit_projection_uses_constant_potential():
    u = gaussian()
    proj = project_to_manifold(u, decaying, limit=True)
    assert proj.reduced_energy == pytest.approx(reduced_energy(u, decaying.limit()), rel=1e-12)
    assert proj.reduced_energy > project_to_manifold(u, decaying).reduced_energy


def test_projection_rejects_functions_outside_lambda():
    with pytest.raises(NotInLambda) as err:
        project_to_manifold(gaussian(2.0, 1.0), constant)
    assert err.value.context["margin"] > 0
    with pytest.raises(NotInLambda):
        project_to_manifold(RadialFunction(grid, np.zeros(grid.n)), constant)


def test_projection_without_sign_change_reports_scan():
    u = gaussian()
    with pytest.raises(BracketingFailed) as err:
        project_to_manifold(u, constant, t_range=(10.0, 100.0))
    assert len(err.value.scan["t"]) == len(err.value.scan["pohozaev"]) == 64
    assert all(value < 0 for value in err.value.scan["pohozaev"])
    assert err.value.iterate is u


@pytest.mark.parametrize("ps", [constant, decaying])
def test_reduced_gradient_matches_finite_differences(ps):
    u = gaussian(exact=False)
    d = bump(grid.nodes)
    d[-1] = 0.0
    eps = 1e-5
    plus = reduced_energy(u.with_values(u.values + eps * d), ps)
    minus = reduced_energy(u.with_values(u.values - eps * d), ps)
    fd = (plus - minus) / (2 * eps)
    assert directional_derivative(u, ps, d) == pytest.approx(fd, rel=1e-4)


def test_reduced_gradient_is_linear_in_direction():
    u = gaussian(exact=False)
    d1 = bump(grid.nodes)
    d2 = np.exp(-((grid.nodes / 4.0) ** 2))
    g = reduced_gradient(u, constant)
    combined = directional_derivative(u, constant, 2.0 * d1 - 0.5 * d2)
    assert combined == pytest.approx(2.0 * g.values @ d1 - 0.5 * g.values @ d2, rel=1e-12)


def test_reduced_gradient_reuses_projection():
    u = gaussian(exact=False)
    proj = project_to_manifold(u, decaying)
    np.testing.assert_array_equal(
        reduced_gradient(u, decaying, projection=proj).values, reduced_gradient(u, decaying).values
    )


def random_direction(seed):
    rng = np.random.default_rng(seed)
    centres = rng.uniform(0.0, 8.0, 4)
    widths = rng.uniform(0.8, 3.0, 4)
    coefs = rng.normal(size=4)
    r = grid.nodes[:, None]
    d = np.exp(-(((r - centres) / widths) ** 2)) @ coefs
    d[-1] = 0.0
    return d


@pytest.mark.parametrize("seed", range(5))
def test_reduced_gradient_along_random_directions(seed):
    u = gaussian(exact=False)
    d = random_direction(seed)
    eps = 1e-5
    plus = reduced_energy(u.with_values(u.values + eps * d), decaying)
    minus = reduced_energy(u.with_values(u.values - eps * d), decaying)
    fd = (plus - minus) / (2 * eps)
    assert directional_derivative(u, decaying, d) == pytest.approx(fd, rel=1e-4, abs=1e-8)


def test_widening_finds_maximisers_past_the_default_scan():
    # just inside Lambda: the amplitude threshold for a unit Gaussian is 2^(5/4)
    u = gaussian(2.38, 1.0)
    with pytest.raises(BracketingFailed):
        project_to_manifold(u, constant)
    proj = project_with_widening(u, constant)
    assert proj.t_u > 100.0
    assert proj.pohozaev_residual <= 1e-9 * pohozaev_terms(u, constant, proj.t_u).scale
    with pytest.raises(BracketingFailed):
        project_with_widening(u, constant, t_cap=100.0)


def test_widening_agrees_with_default_scan_in_range():
    u = gaussian()
    assert project_with_widening(u, constant).t_u == pytest.approx(project_to_manifold(u, constant).t_u, rel=1e-12)
