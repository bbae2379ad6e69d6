import numpy as np
import pytest

import hammerstein as hs
from hammerstein.errors import NonConvergenceError
from hammerstein.nemytsky import (NemytskySpec, check_nemytsky_conditions,
                                  damping_values, eps_star_bound,
                                  eps_star_values, eval_G0, eval_G1,
                                  solve_nemytsky)
from hammerstein.quadrature import integrate

from conftest import make_G, make_kernel


def make_nem(small_ci, **overrides):
    kwargs = dict(kernel=small_ci["spec"], base_G=small_ci["G"], xi=0.25)
    kwargs.update(overrides)
    return NemytskySpec(**kwargs)


# --- pointwise term ----------------------------------------------------------

def test_G0_crossing_at_scaled_gamma(small_ci):
    # substituting u = xi * gamma gives 2 s^2 / (2 s) = s up to rounding
    spec = make_nem(small_ci)
    gamma = small_ci["gamma"]
    s = spec.xi * gamma
    assert np.abs(eval_G0(spec, gamma, s) - s).max() <= 1e-14


def test_G0_vanishes_at_zero(small_ci):
    spec = make_nem(small_ci)
    assert np.abs(eval_G0(spec, small_ci["gamma"], 0.0)).max() == 0.0
    assert eval_G0(spec, 0.0, 0.0) == 0.0  # 0/0 convention at gamma == 0


def test_G0_quadratic_with_zero_fraction_matches_saturating(small_ci):
    plain = make_nem(small_ci)
    quad = make_nem(small_ci, pointwise_family="saturating-quadratic",
                    eps_star_fraction=0.0)
    gamma = small_ci["gamma"]
    u = np.linspace(0.0, 1.0, 17)
    assert np.array_equal(eval_G0(plain, gamma[:, None], u[None, :]),
                          eval_G0(quad, gamma[:, None], u[None, :]))


def test_G0_upper_crossing(small_ci):
    # 2 xi gamma eta / (eta + xi gamma) <= eta gamma reduces to 2 xi <= eta + xi gamma;
    # the raw gamma profile carries ~1e-15 quadrature noise at tail nodes
    spec = make_nem(small_ci)
    gamma = small_ci["gamma"]
    eta = spec.base_G.eta
    assert np.all(eval_G0(spec, gamma, eta) <= eta * gamma + 1e-12)


def test_G0_domain_checked(small_ci):
    spec = make_nem(small_ci)
    with pytest.raises(ValueError):
        eval_G0(spec, small_ci["gamma"], 1.5)


# --- integrand term ----------------------------------------------------------

def test_G1_reflected_values(small_ci):
    spec = make_nem(small_ci)
    # base family I with alpha = 0.5: 1 - sqrt(0.25) = 0.5
    assert float(eval_G1(spec, 0.0, 0.75)) == pytest.approx(0.5, abs=1e-15)
    assert float(eval_G1(spec, 0.0, 0.0)) == 0.0
    assert float(eval_G1(spec, 0.0, 1.0)) == pytest.approx(1.0, abs=1e-15)


def test_G1_scaled_with_unit_profile_matches_reflected(small_ci):
    plain = make_nem(small_ci)
    scaled = make_nem(small_ci, integrand_family="scaled-reflected",
                      damping_profile="one")
    x = small_ci["grid"].nodes
    u = np.linspace(0.0, 1.0, 9)
    assert np.array_equal(eval_G1(plain, x[:, None], u[None, :]),
                          eval_G1(scaled, x[:, None], u[None, :]))


def test_damping_profiles(small_ci):
    x = np.array([0.0, 1.0, 2.0])
    assert np.array_equal(damping_values(make_nem(small_ci, damping_profile="half"), x),
                          [0.5, 0.5, 0.5])
    decay = damping_values(make_nem(small_ci, damping_profile="exp-decay"), x)
    assert np.array_equal(decay, np.exp(-x))


def test_spec_validation(small_ci):
    with pytest.raises(ValueError):
        make_nem(small_ci, xi=0.5)  # not strictly below eta / 2
    with pytest.raises(ValueError):
        make_nem(small_ci, xi=0.0)
    with pytest.raises(ValueError):
        make_nem(small_ci, pointwise_family="linear")


# --- condition checks -------------------------------------------------------

def test_catalog_conditions_pass(small_ci):
    report = check_nemytsky_conditions(make_nem(small_ci), small_ci["grid"])
    assert report.passed
    assert report.caratheodory == "by construction"


def test_quadratic_fraction_within_bound_passes(small_ci):
    spec = make_nem(small_ci, pointwise_family="saturating-quadratic",
                    eps_star_fraction=0.5)
    report = check_nemytsky_conditions(spec, small_ci["grid"])
    assert report.passed and report.eps_star_bad_node is None


def test_quadratic_profile_over_bound_names_node(small_ci):
    gamma = small_ci["gamma"]
    base = make_nem(small_ci)
    profile = 0.5 * eps_star_bound(base, gamma)
    profile[7] = 1.1 * eps_star_bound(base, gamma)[7]
    spec = make_nem(small_ci, pointwise_family="saturating-quadratic",
                    eps_star_profile=profile)
    report = check_nemytsky_conditions(spec, small_ci["grid"])
    assert not report.passed
    assert report.eps_star_bad_node == 7


def test_eps_star_values_fraction_of_bound(small_ci):
    spec = make_nem(small_ci, pointwise_family="saturating-quadratic",
                    eps_star_fraction=0.25)
    gamma = small_ci["gamma"]
    assert np.array_equal(eps_star_values(spec, gamma),
                          0.25 * eps_star_bound(spec, gamma))


# --- the upward iteration -----------------------------------------------------

@pytest.fixture(scope="module")
def nem_solution(small_ci):
    spec = NemytskySpec(kernel=small_ci["spec"], base_G=small_ci["G"], xi=0.25)
    report = solve_nemytsky(spec, small_ci["grid"], small_ci["solve"].profile,
                            tol=1e-10, max_iter=5000, operator=small_ci["A"])
    return spec, report


def test_sandwich_holds(nem_solution):
    _, report = nem_solution
    assert report.converged and report.sandwich_ok
    assert float((report.profile - report.lower_env).min()) >= -1e-10
    assert float((report.upper_env - report.profile).min()) >= -1e-10


def test_iterates_increase_under_envelope(nem_solution):
    _, report = nem_solution
    assert report.increase_ok and report.envelope_ok


def test_residual_and_tail(nem_solution):
    _, report = nem_solution
    assert report.residual_inf <= 2e-10
    assert report.phi_at_xmax <= 1e-6


def test_first_step_moves_up(small_ci):
    spec = NemytskySpec(kernel=small_ci["spec"], base_G=small_ci["G"], xi=0.25)
    report = solve_nemytsky(spec, small_ci["grid"], small_ci["solve"].profile,
                            tol=1e-10, max_iter=5000, operator=small_ci["A"])
    # the recorded first difference is the sup of Phi_1 - Phi_0 >= 0
    assert report.sup_diffs[0] > 0.0


def test_scaled_variant_converges(small_ci):
    spec = NemytskySpec(kernel=small_ci["spec"], base_G=small_ci["G"], xi=0.2,
                        integrand_family="scaled-reflected",
                        damping_profile="exp-decay")
    report = solve_nemytsky(spec, small_ci["grid"], small_ci["solve"].profile,
                            tol=1e-10, max_iter=5000, operator=small_ci["A"])
    assert report.sandwich_ok and report.phi_at_xmax <= 1e-6


def test_integral_stable_under_refinement(small_ci):
    # integrability proxy: quadrature of the profile is stable when panels double
    grid = small_ci["grid"]
    coarse_val = None
    for g in (grid, hs.refine(grid)):
        spec = make_kernel("C")
        G = make_G("I")
        rep = hs.check_kernel_conditions(spec, g)
        A = hs.assemble_operator(spec, g, report=rep)
        fstar = hs.solve_picard(A, G, tol=1e-10, max_iter=400).profile
        nspec = NemytskySpec(kernel=spec, base_G=G, xi=0.25)
        nrep = solve_nemytsky(nspec, g, fstar, tol=1e-10, operator=A)
        total = integrate(g, nrep.profile)
        if coarse_val is None:
            coarse_val = total
        else:
            assert abs(total - coarse_val) <= 1e-8
    assert coarse_val > 0.0


def test_non_convergence_raises(small_ci):
    spec = NemytskySpec(kernel=small_ci["spec"], base_G=small_ci["G"], xi=0.25)
    with pytest.raises(NonConvergenceError) as err:
        solve_nemytsky(spec, small_ci["grid"], small_ci["solve"].profile,
                       tol=1e-10, max_iter=2, operator=small_ci["A"])
    assert err.value.report is not None and not err.value.report.converged
