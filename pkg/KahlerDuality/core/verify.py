"""Verification engine: Jacobians, pullbacks and grid checks of the duality identities."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from KahlerDuality.core.duality import DualityProblem, SpecialMap, origin_gradient
from KahlerDuality.core.forms import (
    FormMatrix,
    b_operator_at,
    b_star_operator_at,
    complex_structure,
    flat_form,
    kahler_form_at,
    to_complex,
    to_real,
)
from KahlerDuality.core.numkit import DomainError, ExpressionLike, as_expression, jet1_compose

logger = logging.getLogger(__name__)

JETS_THRESHOLD = 1e-9
FD_THRESHOLD = 1e-6
WITNESS_THRESHOLD = 1e-3
LINE_THRESHOLD = 1e-10
UNITARY_TOLERANCE = 1e-12

DEFAULT_SEED = 42
DEFAULT_COUNT = 200
DEFAULT_RADIUS_FRACTION = 0.8

GRID_SCHEMES = ("seeded-random", "deterministic-lattice")
JACOBIAN_SCHEMES = ("jets", "fd")


@dataclass(frozen=True)
class GridSpec:
    """Sample points in the ball of the given radius about 0 in C^n."""

    n: int
    radius: float
    count: int = DEFAULT_COUNT
    scheme: str = "seeded-random"
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.scheme not in GRID_SCHEMES:
            raise ValueError(f"unknown grid scheme {self.scheme!r}; choose from {GRID_SCHEMES}")
        if self.n < 1 or self.count < 1:
            raise ValueError("grid needs n >= 1 and count >= 1")
        if not self.radius > 0.0:
            raise ValueError(f"grid radius must be positive, got {self.radius!r}")

    def points(self) -> np.ndarray:
        if self.scheme == "seeded-random":
            rng = np.random.default_rng(self.seed)
            directions = rng.standard_normal((self.count, 2 * self.n))
            directions /= np.linalg.norm(directions, axis=1, keepdims=True)
            scale = self.radius * rng.uniform(size=(self.count, 1)) ** (1.0 / (2 * self.n))
            real = directions * scale
        else:
            if float(self.count) ** (2 * self.n) > 1e6:
                raise ValueError("lattice too large; lower count or use the seeded-random scheme")
            axis = np.linspace(-self.radius, self.radius, self.count)
            mesh = np.stack(np.meshgrid(*([axis] * (2 * self.n)), indexing="ij"), axis=-1).reshape(-1, 2 * self.n)
            real = mesh[np.linalg.norm(mesh, axis=1) <= self.radius]
        return real[:, 0::2] + 1j * real[:, 1::2]

    def to_dict(self) -> Dict[str, Any]:
        return {"radius": self.radius, "count": self.count, "seed": self.seed, "scheme": self.scheme}


@dataclass(frozen=True, eq=False)
class VerificationReport:
    """Residual statistics of one identity over a grid; passes iff max < threshold with no point errors."""

    identity: str
    potential: str
    lam: float
    grid: GridSpec
    max_residual: float
    mean_residual: float
    worst_point: np.ndarray
    threshold: float
    errors: List[Dict[str, Any]] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.errors and self.max_residual < self.threshold

    @property
    def witnessed(self) -> bool:
        """A failure large enough to count as a nonzero witness rather than round-off."""
        return math.isfinite(self.max_residual) and self.max_residual > WITNESS_THRESHOLD

    def to_dict(self) -> Dict[str, Any]:
        def finite(value: float) -> Optional[float]:
            return float(value) if math.isfinite(value) else None

        return {
            "identity": self.identity,
            "potential": self.potential,
            "lambda": self.lam,
            "grid": self.grid.to_dict(),
            "max_residual": finite(self.max_residual),
            "mean_residual": finite(self.mean_residual),
            "worst_point": [[float(c.real), float(c.imag)] for c in np.atleast_1d(self.worst_point)],
            "pass": self.passed,
            "witness": self.witnessed,
            "threshold": self.threshold,
            "errors": self.errors,
            "metadata": self.metadata,
        }


def _point_label(z: np.ndarray) -> List[List[float]]:
    return [[float(c.real), float(c.imag)] for c in z]


def _run_grid(points: np.ndarray, residuals: Callable[[np.ndarray], Dict[str, float]]):
    """Evaluate named residual components at every point, collecting domain errors per point."""
    rows, errors = [], []
    for z in points:
        try:
            rows.append((z, residuals(z)))
        except (DomainError, np.linalg.LinAlgError) as err:
            logger.info("point %s skipped: %s", _point_label(z), err)
            errors.append({"point": _point_label(z), "message": str(err)})
    return rows, errors


def _report(identity: str, potential: str, lam: float, grid: GridSpec, n: int, rows, errors,
            threshold: float, metadata: Optional[Dict[str, Any]] = None) -> VerificationReport:
    metadata = dict(metadata or {})
    if rows:
        values = np.array([max(parts.values()) for _, parts in rows])
        worst = int(np.argmax(values))
        for key in rows[0][1]:
            metadata[f"{key}_max"] = float(max(parts[key] for _, parts in rows))
        max_residual, mean_residual, worst_point = float(values[worst]), float(values.mean()), rows[worst][0]
    else:
        max_residual, mean_residual, worst_point = math.inf, math.inf, np.zeros(n, dtype=complex)
    report = VerificationReport(identity, potential, lam, grid, max_residual, mean_residual,
                                np.asarray(worst_point, dtype=complex), threshold, errors, metadata)
    logger.info("%s for %s: max %.3e, mean %.3e, %d error(s), pass=%s", identity, potential,
                max_residual, mean_residual, len(errors), report.passed)
    return report


# ---------------------------------------------------------------------------
# Maps
# ---------------------------------------------------------------------------

class GaugeMap:
    """z ↦ e^{i g(|z|²)} A z with A unitary."""

    def __init__(self, n: int, phase: ExpressionLike, unitary: np.ndarray):
        unitary = np.asarray(unitary, dtype=complex)
        if unitary.shape != (n, n):
            raise ValueError(f"gauge matrix must be {n}x{n}")
        defect = float(np.max(np.abs(unitary.conj().T @ unitary - np.eye(n))))
        if defect > UNITARY_TOLERANCE:
            raise ValueError(f"gauge matrix is not unitary (defect {defect:.3e})")
        self.n = n
        self.phase = as_expression(phase)
        self.unitary = unitary
        self.name = "gauge"

    def __call__(self, z: Sequence[complex]) -> np.ndarray:
        z = np.asarray(z, dtype=complex).ravel()
        g = jet1_compose(self.phase, float(np.vdot(z, z).real))
        return np.exp(1j * g.value) * (self.unitary @ z)

    def jacobian(self, z: Sequence[complex]) -> np.ndarray:
        z = np.asarray(z, dtype=complex).ravel()
        g = jet1_compose(self.phase, float(np.vdot(z, z).real))
        rotation = np.exp(1j * g.value)
        image = self.unitary @ z
        jac = np.empty((2 * self.n, 2 * self.n))
        for k in range(self.n):
            along_u = rotation * (self.unitary[:, k] + 1j * g.d1 * 2.0 * z[k].real * image)
            along_v = rotation * (1j * self.unitary[:, k] + 1j * g.d1 * 2.0 * z[k].imag * image)
            jac[0::2, 2 * k], jac[1::2, 2 * k] = along_u.real, along_u.imag
            jac[0::2, 2 * k + 1], jac[1::2, 2 * k + 1] = along_v.real, along_v.imag
        return jac


class ComposedMap:
    """outer ∘ inner, differentiated by the chain rule."""

    def __init__(self, outer, inner):
        if outer.n != inner.n:
            raise ValueError("composed maps must act on the same dimension")
        self.outer, self.inner = outer, inner
        self.n = inner.n
        self.name = f"{getattr(outer, 'name', 'map')}∘{getattr(inner, 'name', 'map')}"

    def __call__(self, z: Sequence[complex]) -> np.ndarray:
        return self.outer(self.inner(z))

    def jacobian(self, z: Sequence[complex]) -> np.ndarray:
        return self.outer.jacobian(self.inner(z)) @ self.inner.jacobian(z)


def gauge_transform(special, g: ExpressionLike, unitary: np.ndarray) -> ComposedMap:
    """The gauge-family member z ↦ e^{i g(|Ψ(z)|²)} A Ψ(z)."""
    return ComposedMap(GaugeMap(special.n, g, unitary), special)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))[None, :]


def jacobian_at(special, z: Sequence[complex], scheme: str = "jets", h: Optional[float] = None) -> np.ndarray:
    """Real 2n×2n derivative of the map at z."""
    if scheme not in JACOBIAN_SCHEMES:
        raise ValueError(f"unknown jacobian scheme {scheme!r}")
    z = np.asarray(z, dtype=complex).ravel()
    if scheme == "jets":
        return special.jacobian(z)
    r = to_real(z)
    h = 1e-6 * max(1.0, float(np.max(np.abs(r)))) if h is None else float(h)
    if h <= 0.0 or np.any(r + h == r):
        raise ValueError(f"finite-difference step {h!r} underflows")
    jac = np.empty((r.size, r.size))
    for k in range(r.size):
        step = np.zeros(r.size)
        step[k] = h
        plus = to_real(special(to_complex(r + step)))
        minus = to_real(special(to_complex(r - step)))
        jac[:, k] = (plus - minus) / (2.0 * h)
    return jac


FormField = Callable[[np.ndarray], FormMatrix]


def pullback_at(special, target: FormField, z: Sequence[complex], scheme: str = "jets") -> FormMatrix:
    """(Ψ*ω)_z = Jᵀ Ω(Ψ(z)) J."""
    z = np.asarray(z, dtype=complex).ravel()
    jac = jacobian_at(special, z, scheme)
    form = target(special(z))
    return FormMatrix(z.size, jac.T @ form.omega @ jac, form.convention)


def flat_field(n: int) -> FormField:
    flat = FormMatrix.flat(n)
    return lambda w: flat


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

def _threshold(scheme: str) -> float:
    return JETS_THRESHOLD if scheme == "jets" else FD_THRESHOLD


def _check_grid(problem: DualityProblem, grid: GridSpec) -> None:
    if grid.radius > problem.radius:
        raise ValueError(f"grid radius {grid.radius!r} exceeds the verified radius {problem.radius!r}")
    if grid.n != problem.n:
        raise ValueError(f"grid dimension {grid.n} does not match problem dimension {problem.n}")


def check_duality(problem: DualityProblem, special, grid: GridSpec,
                  scheme: str = "jets") -> Tuple[VerificationReport, VerificationReport]:
    """Reports for Ψ*ω₀ = λω and Ψ*(λω*) = ω₀."""
    _check_grid(problem, grid)
    lam, n = problem.lam, problem.n
    flat = FormMatrix.flat(n)
    dual_field = lambda w: kahler_form_at(problem.dual, w)
    metadata = {"map": getattr(special, "name", "map"), "dual": problem.dual.name, "jacobian_scheme": scheme}
    points = grid.points()

    rows_a, errors_a = _run_grid(points, lambda z: {
        "residual": (pullback_at(special, flat_field(n), z, scheme) - lam * kahler_form_at(problem.source, z)).max_abs()})
    rows_b, errors_b = _run_grid(points, lambda z: {
        "residual": (lam * pullback_at(special, dual_field, z, scheme) - flat).max_abs()})
    threshold = _threshold(scheme)
    return (
        _report("duality_pullback_flat", problem.source.name, lam, grid, n, rows_a, errors_a, threshold, metadata),
        _report("duality_pullback_dual", problem.source.name, lam, grid, n, rows_b, errors_b, threshold, metadata),
    )


def symplectic_adjoint(jac: np.ndarray) -> np.ndarray:
    """dΨ^s from ω₀(dΨ v, w) = ω₀(v, dΨ^s w), i.e. Ω₀⁻¹ Jᵀ Ω₀."""
    omega0 = flat_form(jac.shape[0] // 2)
    return np.linalg.solve(omega0, jac.T @ omega0)


def check_operator_identities(problem: DualityProblem, special, grid: GridSpec,
                              scheme: str = "jets") -> VerificationReport:
    """dΨ^s∘dΨ = λB_z and dΨ^s∘B*_{Ψ(z)}∘dΨ = λ⁻¹Id on the grid."""
    if not problem.is_radial:
        raise TypeError("operator identities are defined for radial potentials")
    _check_grid(problem, grid)
    lam, n, p = problem.lam, problem.n, problem.source
    identity = np.eye(2 * n)

    def residuals(z: np.ndarray) -> Dict[str, float]:
        jac = jacobian_at(special, z, scheme)
        if abs(np.linalg.det(jac)) < 1e-14:
            raise DomainError(f"singular Jacobian at {_point_label(z)}")
        adjoint = symplectic_adjoint(jac)
        product = adjoint @ jac - lam * b_operator_at(p, z).entries
        conjugation = adjoint @ b_star_operator_at(p, special(z)).entries @ jac - identity / lam
        return {"adjoint_product": float(np.max(np.abs(product))),
                "dual_conjugation": float(np.max(np.abs(conjugation)))}

    rows, errors = _run_grid(grid.points(), residuals)
    return _report("operator_identities", p.name, lam, grid, n, rows, errors, _threshold(scheme),
                   {"map": getattr(special, "name", "map"), "jacobian_scheme": scheme})


def check_line_preservation(special, direction: Sequence[complex], samples: int = 16, radius: float = 0.5,
                            expected_direction: Optional[Sequence[complex]] = None,
                            potential: str = "", lam: float = float("nan")) -> VerificationReport:
    """Distance of Ψ(ζ v) from one complex line, over ζ on a polar lattice with |ζ v| ≤ radius."""
    v = np.asarray(direction, dtype=complex).ravel()
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ValueError("line direction must be nonzero")
    radii = np.linspace(0.0, radius / norm, samples + 1)[1:]
    phases = np.exp(2j * np.pi * np.arange(samples) / samples)
    zetas = (radii[:, None] * phases[None, :]).ravel()
    points = zetas[:, None] * v[None, :]

    images, errors = [], []
    for z in points:
        try:
            images.append((z, special(z)))
        except DomainError as err:
            errors.append({"point": _point_label(z), "message": str(err)})
    if expected_direction is not None:
        reference = np.asarray(expected_direction, dtype=complex).ravel()
    else:
        reference = max((image for _, image in images), key=np.linalg.norm, default=np.zeros(v.size))
    if float(np.linalg.norm(reference)) == 0.0:
        raise DomainError("every sampled point maps to 0; the image line is undefined")
    unit = reference / np.linalg.norm(reference)

    rows = [(z, {"distance": float(np.linalg.norm(image - unit * np.vdot(unit, image)))}) for z, image in images]
    grid = GridSpec(v.size, radius, samples * samples, "deterministic-lattice")
    return _report("line_preservation", potential, lam, grid, v.size, rows, errors, LINE_THRESHOLD,
                   {"map": getattr(special, "name", "map"), "direction": _point_label(v),
                    "image_direction": _point_label(unit)})


def check_origin(problem: DualityProblem, special) -> VerificationReport:
    """Ψ(0) = 0, ∂Φ̃/∂x_k(0) = 1/λ and dΨ₀ unitary."""
    n, lam = problem.n, problem.lam
    origin = np.zeros(n, dtype=complex)

    def residuals(z: np.ndarray) -> Dict[str, float]:
        jac = special.jacobian(z)
        j = complex_structure(n)
        return {
            "origin_image": float(np.max(np.abs(special(z)))),
            "origin_slope": float(np.max(np.abs(origin_gradient(problem.source, n) - 1.0 / lam))),
            "origin_unitary": float(max(np.max(np.abs(jac.T @ jac - np.eye(2 * n))),
                                        np.max(np.abs(jac @ j - j @ jac)))),
        }

    rows, errors = _run_grid(origin[None, :], residuals)
    grid = GridSpec(n, problem.radius, 1, "deterministic-lattice")
    return _report("origin", problem.source.name, lam, grid, n, rows, errors, JETS_THRESHOLD,
                   {"map": getattr(special, "name", "map")})


def check_jacobian_schemes(special, grid: GridSpec, potential: str = "",
                           lam: float = float("nan")) -> VerificationReport:
    """Jets against central-difference Jacobians."""
    rows, errors = _run_grid(grid.points(), lambda z: {
        "scheme_gap": float(np.max(np.abs(jacobian_at(special, z, "jets") - jacobian_at(special, z, "fd"))))})
    return _report("jacobian_schemes", potential, lam, grid, grid.n, rows, errors, FD_THRESHOLD,
                   {"map": getattr(special, "name", "map")})
