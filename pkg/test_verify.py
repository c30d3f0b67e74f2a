import numpy as np
import pytest

from KahlerDuality.core.duality import DualityProblem, dual_radial, special_map_from_potential
from KahlerDuality.core.forms import complex_to_real_operator, kahler_form_at
from KahlerDuality.core.potentials import RadialPotential, catalog, fubini_study, hyperbolic, quadratic_defect
from KahlerDuality.core.verify import (
    FD_THRESHOLD,
    JETS_THRESHOLD,
    WITNESS_THRESHOLD,
    GaugeMap,
    GridSpec,
    check_duality,
    check_jacobian_schemes,
    check_line_preservation,
    check_operator_identities,
    check_origin,
    gauge_transform,
    pullback_at,
    random_unitary,
    symplectic_adjoint,
)

REPORT_KEYS = {"identity", "potential", "lambda", "grid", "max_residual", "mean_residual",
               "worst_point", "pass", "threshold"}


def hyperbolic_setup(n=2):
    problem = DualityProblem.from_potential(hyperbolic(), 1.0, n=n)
    return problem, special_map_from_potential(hyperbolic(), 1.0, n=n)


def test_grid_points_are_seeded_and_inside_the_ball():
    grid = GridSpec(n=2, radius=0.5, count=40, seed=7)
    points = grid.points()
    assert points.shape == (40, 2)
    assert np.all(np.linalg.norm(points, axis=1) <= 0.5 + 1e-15)
    assert np.array_equal(points, GridSpec(n=2, radius=0.5, count=40, seed=7).points())
    assert not np.array_equal(points, GridSpec(n=2, radius=0.5, count=40, seed=8).points())


def test_lattice_grid_and_validation():
    points = GridSpec(n=1, radius=0.5, count=11, scheme="deterministic-lattice").points()
    assert np.all(np.abs(points) <= 0.5)
    assert 0.0 in points
    with pytest.raises(ValueError):
        GridSpec(n=1, radius=0.5, scheme="sobol")
    with pytest.raises(ValueError):
        GridSpec(n=1, radius=0.0)


@pytest.mark.parametrize("scheme, threshold", [("jets", JETS_THRESHOLD), ("fd", FD_THRESHOLD)])
def test_hyperbolic_duality_passes(scheme, threshold):
    problem, special = hyperbolic_setup()
    flat_report, dual_report = check_duality(problem, special, GridSpec(2, 0.8, count=40), scheme)
    for report in (flat_report, dual_report):
        assert report.passed, report.to_dict()
        assert report.threshold == threshold
    assert flat_report.identity == "duality_pullback_flat"
    assert dual_report.identity == "duality_pullback_dual"


def test_quadratic_defect_fails_the_dual_pullback():
    problem = DualityProblem.from_potential(quadratic_defect(), 1.0)
    special = special_map_from_potential(quadratic_defect(), 1.0)
    flat_report, dual_report = check_duality(problem, special, GridSpec(1, 0.8, count=60))
    assert flat_report.passed
    assert not dual_report.passed
    assert dual_report.max_residual > 1e-3


def test_report_serialization():
    problem, special = hyperbolic_setup()
    report = check_duality(problem, special, GridSpec(2, 0.5, count=10, seed=3))[0]
    payload = report.to_dict()
    assert REPORT_KEYS <= set(payload)
    assert payload["grid"] == {"radius": 0.5, "count": 10, "seed": 3, "scheme": "seeded-random"}
    assert len(payload["worst_point"]) == 2
    assert payload["pass"] is True


def test_grid_must_fit_the_verified_ball():
    problem, special = hyperbolic_setup()
    with pytest.raises(ValueError):
        check_duality(problem, special, GridSpec(2, 1.5, count=5))
    with pytest.raises(ValueError):
        check_duality(problem, special, GridSpec(3, 0.5, count=5))


def test_operator_identities_hold_for_hyperbolic():
    problem, special = hyperbolic_setup()
    report = check_operator_identities(problem, special, GridSpec(2, 0.8, count=40))
    assert report.passed
    assert report.metadata["adjoint_product_max"] < JETS_THRESHOLD
    assert report.metadata["dual_conjugation_max"] < JETS_THRESHOLD


def test_operator_identities_need_a_radial_potential():
    p = catalog("hartogs")
    problem = DualityProblem.from_potential(p, 1.0)
    with pytest.raises(TypeError):
        check_operator_identities(problem, special_map_from_potential(p, 1.0), GridSpec(2, 0.3, count=5))


def test_symplectic_adjoint_inverts_unitary_maps():
    unitary = complex_to_real_operator(random_unitary(np.random.default_rng(1), 2))
    assert np.allclose(symplectic_adjoint(unitary) @ unitary, np.eye(4))


def test_gauge_family_preserves_the_duality():
    problem, special = hyperbolic_setup()
    gauged = gauge_transform(special, "0.3*x", random_unitary(np.random.default_rng(42), 2))
    for report in check_duality(problem, gauged, GridSpec(2, 0.8, count=40)):
        assert report.passed, report.to_dict()


def test_gauge_map_needs_a_unitary_matrix():
    with pytest.raises(ValueError):
        GaugeMap(2, "x", np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_radial_map_preserves_complex_lines():
    _, special = hyperbolic_setup()
    direction = np.array([1.0, 1.0j]) / np.sqrt(2.0)
    report = check_line_preservation(special, direction, radius=0.8)
    assert report.passed
    assert report.identity == "line_preservation"


def test_non_radial_map_bends_complex_lines():
    special = special_map_from_potential(catalog("hartogs", F="1-x+0.2*x^2"), 1.0)
    report = check_line_preservation(special, np.array([1.0, 1.0]) / np.sqrt(2.0), radius=0.5)
    assert not report.passed


def test_origin_check():
    problem, special = hyperbolic_setup()
    report = check_origin(problem, special)
    assert report.passed
    assert report.metadata["origin_unitary_max"] < 1e-12
    shifted = DualityProblem.from_potential(catalog("flat", c=2.0), 1.0)
    assert not check_origin(shifted, special_map_from_potential(catalog("flat", c=2.0), 1.0)).passed


def test_jets_agree_with_finite_differences():
    _, special = hyperbolic_setup()
    assert check_jacobian_schemes(special, GridSpec(2, 0.8, count=20)).passed


def test_flat_taubnut_duality():
    p = catalog("taubnut", m=0.0)
    problem = DualityProblem.from_potential(p, 1.0)
    special = special_map_from_potential(p, 1.0)
    for report in check_duality(problem, special, GridSpec(2, 0.8, count=20)):
        assert report.passed


@pytest.mark.parametrize("potential", [hyperbolic(), fubini_study()])
def test_operator_identities_hold_on_the_half_ball(potential):
    problem = DualityProblem.from_potential(potential, 1.0, n=2)
    special = special_map_from_potential(potential, 1.0, n=2)
    report = check_operator_identities(problem, special, GridSpec(2, 0.5, count=40))
    assert report.passed, report.to_dict()


def test_dual_conjugation_fails_for_quadratic_defect():
    problem = DualityProblem.from_potential(quadratic_defect(), 1.0)
    special = special_map_from_potential(quadratic_defect(), 1.0)
    report = check_operator_identities(problem, special, GridSpec(1, 0.5, count=40))
    assert not report.passed
    assert report.witnessed
    assert report.metadata["adjoint_product_max"] < JETS_THRESHOLD
    assert report.metadata["dual_conjugation_max"] > WITNESS_THRESHOLD


def test_witness_flag_in_serialized_reports():
    problem, special = hyperbolic_setup()
    report = check_duality(problem, special, GridSpec(2, 0.5, count=10))[0]
    assert report.to_dict()["witness"] is False
    shifted = DualityProblem.from_potential(catalog("flat", c=2.0), 1.0)
    failing = check_origin(shifted, special_map_from_potential(catalog("flat", c=2.0), 1.0))
    assert failing.to_dict()["witness"] is True


@pytest.mark.parametrize("trial", range(10))
def test_random_gauge_pairs_preserve_the_duality(trial):
    rng = np.random.default_rng(500 + trial)
    a, b = rng.uniform(0.0, 2.0, size=2)
    phase = f"{float(a)!r}*x + {float(b)!r}*x^2"
    problem, special = hyperbolic_setup()
    gauged = gauge_transform(special, phase, random_unitary(rng, 2))
    for report in check_duality(problem, gauged, GridSpec(2, 0.6, count=20, seed=trial)):
        assert report.max_residual < 1e-8, report.to_dict()


def test_pullback_through_a_composition_is_functorial():
    _, special = hyperbolic_setup()
    gauged = gauge_transform(special, "0.3*x", random_unitary(np.random.default_rng(3), 2))
    dual = dual_radial(hyperbolic())
    target = lambda w: kahler_form_at(dual, w)
    for z in GridSpec(2, 0.6, count=10).points():
        direct = pullback_at(gauged, target, z)
        stepwise = pullback_at(special, lambda w: pullback_at(gauged.outer, target, w), z)
        assert (direct - stepwise).max_abs() < 1e-12


def test_gauged_map_sends_lines_to_the_rotated_line():
    _, special = hyperbolic_setup()
    unitary = np.diag([1j, 1.0])
    gauged = gauge_transform(special, "0.3*x", unitary)
    v = np.array([1.0, 1.0]) / np.sqrt(2.0)
    assert check_line_preservation(gauged, v, radius=0.8, expected_direction=unitary @ v).passed
    assert not check_line_preservation(gauged, v, radius=0.8, expected_direction=v).passed


CANONICAL_MAPS = [
    ("flat", {"c": 1.0}, 1.0),
    ("hyperbolic", {}, 1.0),
    ("fubini_study", {}, 1.0),
    ("scaled_hyperbolic", {"mu": 2.0}, 0.5),
    ("quadratic_defect", {}, 1.0),
    ("parabola_rotation", {"lam": 1.0}, 1.0),
    ("hartogs", {"F": "1-x", "n": 3}, 1.0),
    ("hartogs", {"F": "1-x+0.2*x^2"}, 1.0),
    ("taubnut", {"m": 0.5}, 1.0),
]


@pytest.mark.parametrize("name, params, lam", CANONICAL_MAPS)
def test_jets_agree_with_finite_differences_on_catalog_maps(name, params, lam):
    p = catalog(name, **params)
    n = 2 if isinstance(p, RadialPotential) else p.n
    special = special_map_from_potential(p, lam, n=n)
    report = check_jacobian_schemes(special, GridSpec(n, 0.8 * p.radius, count=10))
    assert report.passed, report.to_dict()


if __name__ == "__main__":
    pytest.main([__file__])
