import numpy as np
import pytest

from KahlerDuality.core.duality import dual_radial
from KahlerDuality.core.forms import (
    FormMatrix,
    OperatorMatrix,
    b_operator_at,
    b_star_operator_at,
    complex_structure,
    complex_to_real_operator,
    dual_form_at,
    flat_form,
    gaussian_curvature_radial,
    hermitian_to_real_form,
    kahler_form_at,
    kahler_hermitian_at,
    polarized_hermitian_at,
    to_complex,
    to_real,
)
from KahlerDuality.core.numkit import DomainError
from KahlerDuality.core.potentials import catalog, fubini_study, hyperbolic, parabola_rotation, quadratic_defect
from KahlerDuality.core.verify import random_unitary

Z2 = np.array([0.3 + 0.1j, -0.2j])


def test_flat_form_orientation():
    omega = flat_form(1)
    du, dv = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    assert du @ omega @ dv == 1.0
    assert np.array_equal(FormMatrix.flat(2).metric(), np.eye(4))
    assert FormMatrix.flat(3).is_positive()


def test_complex_structure_is_multiplication_by_i():
    z = np.array([0.3 + 0.1j, -0.2 + 0.5j])
    assert np.allclose(to_complex(complex_structure(2) @ to_real(z)), 1j * z)


def test_hermitian_real_form_evaluates_as_minus_imaginary_part():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    h = a + a.conj().T
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    w = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    omega = hermitian_to_real_form(h)
    assert to_real(v) @ omega @ to_real(w) == pytest.approx(-np.imag(v @ h @ np.conj(w)))
    assert np.allclose(hermitian_to_real_form(np.eye(2)), flat_form(2))


def test_complex_operator_real_form():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    op = OperatorMatrix(2, complex_to_real_operator(a))
    assert np.allclose(op.apply(Z2), a @ Z2)
    assert op.commutation_defect() < 1e-15


def test_kahler_form_at_origin_is_flat():
    assert (kahler_form_at(hyperbolic(), np.zeros(2)) - FormMatrix.flat(2)).max_abs() == 0.0


def test_kahler_form_is_antisymmetric_and_positive():
    form = kahler_form_at(hyperbolic(), Z2)
    assert form.antisymmetry_defect() < 1e-15
    assert form.is_positive()
    assert kahler_form_at(catalog("hartogs"), Z2).is_positive()


def test_flat_potential_form_scales():
    form = kahler_form_at(catalog("flat", c=2.5), Z2)
    assert (form - 2.5 * FormMatrix.flat(2)).max_abs() < 1e-15


def test_dual_form_reads_reflected_jets():
    p = hyperbolic()
    direct = kahler_form_at(dual_radial(p), Z2)
    assert (dual_form_at(p, Z2) - direct).max_abs() < 1e-14


def test_convention_mismatch_raises():
    other = FormMatrix(1, flat_form(1), convention="v1,u1")
    with pytest.raises(TypeError):
        FormMatrix.flat(1) + other
    with pytest.raises(ValueError):
        FormMatrix.flat(1) - FormMatrix.flat(2)


def test_b_operator_is_transpose_of_kahler_matrix():
    p = fubini_study()
    expected = complex_to_real_operator(kahler_hermitian_at(p, Z2).T)
    assert np.allclose(b_operator_at(p, Z2).entries, expected)
    assert b_star_operator_at(p, Z2).commutation_defect() < 1e-15
    with pytest.raises(TypeError):
        b_operator_at(catalog("hartogs"), Z2)


def test_polarized_hessian_matches_radial_form():
    p = hyperbolic()
    z = np.array([0.2 + 0.1j])
    assert np.allclose(polarized_hermitian_at(p.polarized(1), z), kahler_hermitian_at(p, z), atol=1e-6)


@pytest.mark.parametrize("potential, expected", [
    (hyperbolic(), -4.0),
    (fubini_study(), 4.0),
    (catalog("flat", c=1.0), 0.0),
])
def test_constant_curvature(potential, expected):
    for x in np.linspace(0.0, 0.6, 7):
        assert gaussian_curvature_radial(potential, x) == pytest.approx(expected, abs=1e-9)


def test_parabola_curvature_is_not_constant():
    p = parabola_rotation(1.0)
    assert abs(gaussian_curvature_radial(p, 0.0) - gaussian_curvature_radial(p, 0.1)) > 1e-3


def test_dual_curvature_reflects():
    p = quadratic_defect()
    for x in (0.0, 0.2, 0.4):
        assert gaussian_curvature_radial(dual_radial(p), x) == pytest.approx(-gaussian_curvature_radial(p, -x))


def test_curvature_needs_positive_conformal_factor():
    with pytest.raises(DomainError):
        gaussian_curvature_radial(quadratic_defect(), 1.5)


@pytest.mark.parametrize("potential", [hyperbolic(), fubini_study(), quadratic_defect()])
def test_radial_form_is_unitarily_invariant(potential):
    rng = np.random.default_rng(11)
    for _ in range(5):
        a = random_unitary(rng, 2)
        z = 0.3 * (rng.standard_normal(2) + 1j * rng.standard_normal(2)) / 2.0
        real_a = complex_to_real_operator(a)
        moved = real_a.T @ kahler_form_at(potential, a @ z).omega @ real_a
        assert np.allclose(moved, kahler_form_at(potential, z).omega, atol=1e-14)


@pytest.mark.parametrize("potential", [hyperbolic(), fubini_study(), catalog("flat", c=2.0)])
def test_radial_and_rotation_invariant_assembly_agree(potential):
    z = np.array([0.2 - 0.1j, 0.15j, -0.3])
    direct = kahler_form_at(potential, z)
    assembled = kahler_form_at(potential.as_rotation_invariant(3), z)
    assert (direct - assembled).max_abs() < 1e-14


@pytest.mark.parametrize("potential", [hyperbolic(), fubini_study(), quadratic_defect()])
def test_b_operators_preserve_the_complex_line(potential):
    for operator in (b_operator_at(potential, Z2), b_star_operator_at(potential, Z2)):
        for v in (Z2, 1j * Z2):
            image = operator.apply(v)
            coefficient = np.vdot(Z2, image) / np.vdot(Z2, Z2)
            assert np.allclose(image, coefficient * Z2, atol=1e-14)


@pytest.mark.parametrize("potential", [hyperbolic(), fubini_study(), quadratic_defect()])
def test_dual_curvature_reflects_on_a_grid(potential):
    dual = dual_radial(potential)
    for x in np.linspace(0.0, 0.4, 20):
        assert gaussian_curvature_radial(dual, x) == pytest.approx(-gaussian_curvature_radial(potential, -x), abs=1e-8)


if __name__ == "__main__":
    pytest.main([__file__])
