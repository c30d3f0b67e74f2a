import math

import numpy as np
import pytest

from KahlerDuality.core.duality import (
    DualityProblem,
    SpecialMap,
    candidate_lambda,
    check_realness,
    dual_polarized,
    dual_radial,
    dual_rotation_invariant,
    hartogs_affine_isometry,
    identity_map,
    involution_defect,
    necsuff_residual,
    residual_radial,
    residual_rotation_invariant,
    special_map_from_potential,
)
from KahlerDuality.core.forms import kahler_form_at
from KahlerDuality.core.numkit import DomainError
from KahlerDuality.core.potentials import (
    Interval,
    catalog,
    fubini_study,
    hyperbolic,
    parabola_rotation,
    polynomial_potential,
    quadratic_defect,
    radial_from_expression,
    random_polynomial_potential,
)
from KahlerDuality.core.verify import GridSpec, jacobian_at, pullback_at


def test_dual_of_hyperbolic_is_fubini_study():
    dual = dual_radial(hyperbolic())
    assert dual.name == "hyperbolic*"
    for x in np.linspace(0.0, 0.5, 6):
        assert dual.f(x) == pytest.approx(math.log1p(x), abs=1e-15)
        assert dual.fprime(x) == pytest.approx(fubini_study().fprime(x))


def test_dual_is_an_involution():
    p = quadratic_defect()
    twice = dual_radial(dual_radial(p))
    assert twice.name == p.name
    for x in (-0.3, 0.0, 0.4):
        assert twice.f(x) == pytest.approx(p.f(x))


def test_dual_needs_a_neighbourhood_of_zero():
    p = radial_from_expression("x + sqrt(x)", domain=Interval(0.0, 1.0), psh_hi=1.0)
    with pytest.raises(DomainError):
        dual_radial(p)


def test_rotation_invariant_dual_reflects_gradients():
    p = catalog("hartogs", F="1-x", n=2)
    dual = dual_rotation_invariant(p)
    x = np.array([0.1, 0.2])
    assert dual.value(x) == pytest.approx(-p.value(-x))
    assert np.allclose(dual.gradient(x), p.gradient(-x))
    assert np.allclose(dual.jet(x).hess, -p.jet(-x).hess)


@pytest.mark.parametrize("potential, lam", [
    (hyperbolic(), 1.0),
    (fubini_study(), 1.0),
    (catalog("flat", c=2.0), 0.5),
    (parabola_rotation(1.0), 1.0),
    (parabola_rotation(2.0), 2.0),
])
def test_radial_duality_equation_holds(potential, lam):
    for x in np.linspace(0.0, 0.15, 16):
        assert abs(residual_radial(potential, lam, x)) < 1e-10


def test_scaled_hyperbolic_residual_at_origin():
    assert residual_radial(catalog("scaled_hyperbolic", mu=2.0), 1.0, 0.0) == pytest.approx(3.0)


def test_quadratic_defect_residual_and_involution_defect():
    p = quadratic_defect()
    assert residual_radial(p, 1.0, 0.5) == pytest.approx(-0.109375)
    assert involution_defect(p, 1.0, 0.5) == pytest.approx(0.5 * -0.109375)
    assert involution_defect(hyperbolic(), 1.0, 0.5) == pytest.approx(0.0, abs=1e-15)


def test_residual_outside_dual_domain_raises():
    with pytest.raises(DomainError):
        residual_radial(parabola_rotation(1.0), 1.0, 0.5)


def test_vector_residual_for_hartogs():
    affine = catalog("hartogs", F="1-x", n=2)
    assert np.allclose(residual_rotation_invariant(affine, 1.0, [0.2, 0.3]), 0.0, atol=1e-14)
    curved = catalog("hartogs", F="1-x+0.2*x^2", n=2)
    residual = residual_rotation_invariant(curved, 1.0, [0.3, 0.0])
    assert residual[0] == pytest.approx(0.008, abs=5e-4)
    assert np.max(np.abs(residual)) > 1e-3


def test_vector_residual_for_flat_taubnut():
    p = catalog("taubnut", m=0.0)
    assert np.allclose(residual_rotation_invariant(p, 1.0, [0.4, 0.1]), 0.0)


def test_candidate_lambda():
    assert candidate_lambda(hyperbolic()) == pytest.approx(1.0)
    assert candidate_lambda(catalog("flat", c=2.0)) == pytest.approx(0.5)
    assert candidate_lambda(catalog("hartogs", F="2-x")) == pytest.approx(2.0)
    assert candidate_lambda(catalog("hartogs", F="2-3*x")) is None
    assert candidate_lambda(polynomial_potential([1.0, 2.0], np.zeros((2, 2)))) is None
    with pytest.raises(DomainError):
        candidate_lambda(radial_from_expression("-x", psh_hi=0.0))


def test_canonical_map_coefficients():
    special = special_map_from_potential(hyperbolic(), 1.0, n=2)
    z = np.array([0.3, 0.4j])
    assert np.allclose(special(z), z / math.sqrt(1.0 - 0.25))
    with pytest.raises(ValueError):
        special_map_from_potential(hyperbolic(), -1.0)


def test_necessary_and_sufficient_residual():
    special = special_map_from_potential(hyperbolic(), 1.0, n=2)
    x = [0.1, 0.2]
    assert np.allclose(necsuff_residual(special, hyperbolic(), catalog("flat"), x), 0.0, atol=1e-14)
    assert np.allclose(necsuff_residual(special, catalog("flat"), dual_radial(hyperbolic()), x), 0.0, atol=1e-14)


def test_hartogs_affine_isometry_pulls_back_hyperbolic_form():
    isometry = hartogs_affine_isometry(2.0, 3.0, 2)
    target = catalog("hartogs", F="2-3*x", n=2)
    z = np.array([0.1 + 0.2j, 0.15 - 0.05j])
    pulled = pullback_at(isometry, lambda w: kahler_form_at(hyperbolic(), w), z)
    assert (pulled - kahler_form_at(target, z)).max_abs() < 1e-12


def test_identity_and_coefficient_maps():
    z = np.array([0.2 + 0.1j, -0.3j])
    assert np.allclose(identity_map(2)(z), z)
    doubled = SpecialMap.from_coefficients(["2", "1 + x1"])
    x = (z * np.conj(z)).real
    assert np.allclose(doubled(z), [2.0 * z[0], (1.0 + x[0]) * z[1]])
    assert np.allclose(doubled.jacobian(z), jacobian_at(doubled, z, "fd"), atol=1e-8)


def test_polarized_dual_realness_witness():
    dual, report = dual_polarized(catalog("hyperbolic_plus_linear"))
    assert dual.name == "hyperbolic_plus_linear*"
    assert not report.is_real
    assert report.max_imag == pytest.approx(0.2)
    assert report.worst_point[0] == pytest.approx(0.1j, abs=1e-12)


def test_polarized_dual_of_hyperbolic_is_real():
    report = check_realness(dual_radial(hyperbolic()).polarized(2))
    assert report.is_real
    assert report.to_dict()["real"] is True


def test_quadratic_defect_residual_near_origin():
    x = 0.2
    assert residual_radial(quadratic_defect(), 1.0, x) == pytest.approx(-x ** 2 / 2 + x ** 3 / 8, abs=1e-12)
    assert residual_radial(quadratic_defect(), 1.0, x) == pytest.approx(-0.019, abs=1e-6)


def test_taubnut_residual_is_nonzero():
    residual = residual_rotation_invariant(catalog("taubnut", m=0.5), 1.0, [0.5, 0.0])
    assert residual[0] == pytest.approx(0.45, abs=0.02)


def test_rotation_invariant_dual_is_an_involution():
    p = catalog("hartogs", F="1-x+0.2*x^2", n=2)
    twice = dual_rotation_invariant(dual_rotation_invariant(p))
    assert twice.name == p.name
    x = np.array([0.05, 0.1])
    assert twice.value(x) == pytest.approx(p.value(x))
    assert np.allclose(twice.gradient(x), p.gradient(x))
    assert np.allclose(twice.jet(x).hess, p.jet(x).hess)


def test_polarized_dual_is_an_involution():
    p = catalog("hyperbolic_plus_linear")
    once, _ = dual_polarized(p)
    twice, _ = dual_polarized(once)
    assert twice.name == p.name
    z, w = np.array([0.1 + 0.05j]), np.array([0.2 - 0.1j])
    assert twice.P(z, w) == pytest.approx(p.P(z, w), abs=1e-15)


def rescaled(special: SpecialMap, eps: float) -> SpecialMap:
    """ψ̃_k(x)·(1 + ε(1 + Σx)), with the product rule for the x-gradients."""
    def coefficients(x):
        psi, dpsi = special.coefficient_values(x)
        bump = 1.0 + eps * (1.0 + np.sum(x))
        return psi * bump, dpsi * bump + eps * psi[:, None]

    return SpecialMap(special.n, coefficients, name="rescaled")


def flat_pullback_defect(special, alpha, z):
    flat = catalog("flat")
    pulled = pullback_at(special, lambda w: kahler_form_at(flat, w), z)
    return (pulled - kahler_form_at(alpha, z)).max_abs()


@pytest.mark.parametrize("trial", range(30))
def test_coefficient_equations_agree_with_the_pullback(trial):
    rng = np.random.default_rng(1000 + trial)
    n = int(rng.integers(1, 4))
    alpha = random_polynomial_potential(rng, n)
    canonical = special_map_from_potential(alpha, 1.0)
    z = GridSpec(n, 0.25, count=1, seed=trial).points()[0]
    x = (z * np.conj(z)).real

    for special, holds in ((canonical, True), (rescaled(canonical, rng.uniform(0.05, 0.2)), False)):
        coefficients_hold = np.max(np.abs(necsuff_residual(special, alpha, catalog("flat"), x))) < 1e-10
        pullback_holds = flat_pullback_defect(special, alpha, z) < 1e-8
        assert coefficients_hold == pullback_holds == holds


def test_duality_problem_construction():
    problem = DualityProblem.from_potential(hyperbolic(), 1.0, n=2)
    assert problem.is_radial
    assert problem.dual.name == "hyperbolic*"
    assert problem.n == 2
    with pytest.raises(ValueError):
        DualityProblem.from_potential(hyperbolic(), 0.0)
    with pytest.raises(ValueError):
        DualityProblem.from_potential(radial_from_expression("-x", psh_hi=0.0), 1.0)


if __name__ == "__main__":
    pytest.main([__file__])
