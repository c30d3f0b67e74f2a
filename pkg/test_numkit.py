import math

import numpy as np
import pytest
import sympy

from KahlerDuality.core.numkit import (
    DomainError,
    Expression,
    ExpressionError,
    Jet1,
    JetN,
    fd_check,
    fd_check_jets,
    jet1_compose,
    jetn_eval,
    log,
    power,
    sqrt,
    variable_symbol,
)
from KahlerDuality.core.potentials import RadialPotential, catalog


@pytest.mark.parametrize("text, at", [
    ("log(1+x)*exp(x) + x^3", 0.3),
    ("-log(1-x)", 0.5),
    ("sqrt(1+x)/(2-x)", 0.25),
    ("(1+x)^(-2) + exp(-x)", -0.4),
])
def test_jet1_matches_symbolic_derivatives(text, at):
    jet = jet1_compose(text, at)
    x = variable_symbol("x")
    tree = sympy.sympify(text.replace("^", "**"), locals={"x": x})
    expected = [float(sympy.diff(tree, x, k).subs(x, at)) for k in range(4)]
    assert np.allclose(jet.as_tuple(), expected, rtol=1e-12, atol=1e-12)


def test_jetn_product_rule():
    jet = jetn_eval("x1*x2 + x1^2", [0.5, 2.0])
    assert jet.value == pytest.approx(1.25)
    assert np.allclose(jet.grad, [3.0, 0.5])
    assert np.allclose(jet.hess, [[2.0, 1.0], [1.0, 0.0]])


def test_jetn_arrays_are_read_only():
    jet = JetN.variable([0.1, 0.2], 0)
    with pytest.raises(ValueError):
        jet.grad[0] = 5.0


def test_jet_arithmetic_with_numpy_scalars():
    jet = np.float64(2.0) * Jet1.variable(3.0) - np.float64(1.0)
    assert isinstance(jet, Jet1)
    assert jet.as_tuple() == (5.0, 2.0, 0.0, 0.0)


def test_domain_checks_on_floats():
    with pytest.raises(DomainError):
        log(0.0)
    with pytest.raises(DomainError):
        sqrt(-1.0)
    with pytest.raises(DomainError):
        power(-2.0, 0.5)
    with pytest.raises(DomainError):
        power(0.0, -1.0)
    assert power(-2.0, 2.0) == 4.0


def test_domain_checks_on_jets():
    with pytest.raises(DomainError):
        log(Jet1.variable(-1.0))
    with pytest.raises(DomainError):
        1.0 / Jet1.variable(0.0)


def test_complex_log_and_sqrt():
    assert log(complex(-1.0, 0.0)) == pytest.approx(complex(0.0, math.pi))
    assert sqrt(complex(-4.0, 0.0)) == pytest.approx(2j)


def test_parse_resolves_variables():
    assert Expression.parse("1-x").variables == ("x",)
    assert Expression.parse("x1 + 2*x2").variables == ("x1", "x2")
    assert Expression.parse("x0*x1").variables == ("x0", "x1")
    assert Expression.parse("x1", n=3).variables == ("x1", "x2", "x3")


@pytest.mark.parametrize("text", ["sin(x)", "y + 1", "x + x1", "", "x +* 2"])
def test_parse_rejects_outside_grammar(text):
    with pytest.raises(ExpressionError):
        Expression.parse(text)


def test_domain_error_names_the_sub_expression():
    with pytest.raises(DomainError) as info:
        Expression.parse("log(1-x)")(2.0)
    assert "log" in info.value.expression


def test_symbolic_derivative():
    assert Expression.parse("x^3").diff()(2.0) == pytest.approx(12.0)
    assert Expression.parse("x1*x2^2").diff("x2")(3.0, 2.0) == pytest.approx(12.0)


def test_finite_difference_agreement():
    assert fd_check("-log(1-x)", 0.3) < 1e-6
    assert fd_check("x1*x2 + exp(x1)", [0.1, 0.2]) < 1e-6


def test_finite_difference_step_underflow():
    with pytest.raises(ValueError):
        fd_check("x", 1e20, h=1e-6)


def assert_same_jet(left, right):
    if isinstance(left, Jet1):
        assert left.as_tuple() == pytest.approx(right.as_tuple(), rel=1e-12, abs=1e-12)
    else:
        assert left.value == pytest.approx(right.value, rel=1e-12)
        assert np.allclose(left.grad, right.grad, rtol=1e-12, atol=1e-12)
        assert np.allclose(left.hess, right.hess, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("a, b, c", [
    (Jet1(0.3, 1.2, -0.5, 2.0), Jet1(-1.1, 0.4, 0.7, -0.2), Jet1(2.0, -0.3, 0.1, 0.9)),
    (JetN(0.3, [1.0, 0.5], [[0.2, 0.1], [0.1, -0.4]]),
     JetN(-1.1, [0.3, -0.7], [[0.0, 0.6], [0.6, 0.3]]),
     JetN(2.0, [-0.2, 0.4], [[1.0, 0.0], [0.0, 0.5]])),
])
def test_jet_algebra_laws(a, b, c):
    assert_same_jet(a + b, b + a)
    assert_same_jet(a * b, b * a)
    assert_same_jet((a + b) + c, a + (b + c))
    assert_same_jet((a * b) * c, a * (b * c))
    assert_same_jet(a * (b + c), a * b + a * c)


CATALOG_ENTRIES = [
    ("flat", {"c": 2.0}),
    ("hyperbolic", {}),
    ("fubini_study", {}),
    ("scaled_hyperbolic", {"mu": 2.0}),
    ("quadratic_defect", {}),
    ("parabola_rotation", {"lam": 1.0}),
    ("hartogs", {"F": "1-x", "n": 3}),
    ("hartogs", {"F": "1-x+0.2*x^2"}),
    ("taubnut", {"m": 0.5}),
]


@pytest.mark.parametrize("name, params", CATALOG_ENTRIES)
def test_catalog_jets_match_finite_differences(name, params):
    p = catalog(name, **params)
    rng = np.random.default_rng(7)
    reach = 0.5 * p.radius ** 2
    for _ in range(5):
        if isinstance(p, RadialPotential):
            at = float(rng.uniform(0.0, reach))
        else:
            at = rng.uniform(0.0, reach / p.n, size=p.n)
        assert fd_check_jets(p.jet, at, h=1e-4) < 1e-6


if __name__ == "__main__":
    pytest.main([__file__])
