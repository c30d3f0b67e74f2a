"""Dual potentials, canonical special maps and the duality residual equations."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from KahlerDuality.core.numkit import DomainError, Expression, ExpressionLike, JetN, as_expression, variable_symbol
from KahlerDuality.core.potentials import (
    PolarizedPotential,
    RadialPotential,
    RotationInvariantPotential,
    scan_psh_bound,
    strict_psh_at_origin,
)

logger = logging.getLogger(__name__)

REALNESS_TOLERANCE = 1e-12
EQUAL_GRADIENT_TOLERANCE = 1e-10

Coefficients = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]


def _dual_name(name: str) -> str:
    return name[:-1] if name.endswith("*") else name + "*"


# ---------------------------------------------------------------------------
# Special maps
# ---------------------------------------------------------------------------

def special_jacobian(z: np.ndarray, psi: np.ndarray, dpsi: np.ndarray) -> np.ndarray:
    """Real Jacobian of z ↦ (ψ̃_j(x) z_j) with x_k = |z_k|² and dpsi[j, k] = ∂ψ̃_j/∂x_k."""
    n = z.size
    u, v = z.real, z.imag
    diagonal = np.diag(psi).astype(complex)
    along_u = dpsi * (2.0 * u)[None, :] * z[:, None] + diagonal
    along_v = dpsi * (2.0 * v)[None, :] * z[:, None] + 1j * diagonal
    jac = np.empty((2 * n, 2 * n))
    jac[0::2, 0::2] = along_u.real
    jac[1::2, 0::2] = along_u.imag
    jac[0::2, 1::2] = along_v.real
    jac[1::2, 1::2] = along_v.imag
    return jac


@dataclass(frozen=True, eq=False)
class SpecialMap:
    """Ψ(z)_j = ψ̃_j(|z₁|², …, |zₙ|²) z_j, with coefficients and their x-gradients."""

    n: int
    coefficients: Coefficients
    name: str = "special"

    def coefficient_values(self, x: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float).ravel()
        psi, dpsi = self.coefficients(x)
        return np.asarray(psi, dtype=float), np.asarray(dpsi, dtype=float)

    def _point(self, z: Sequence[complex]) -> np.ndarray:
        z = np.asarray(z, dtype=complex).ravel()
        if z.size != self.n:
            raise ValueError(f"{self.name} acts on C^{self.n}, got {z.size} coordinates")
        return z

    def __call__(self, z: Sequence[complex]) -> np.ndarray:
        z = self._point(z)
        psi, _ = self.coefficient_values((z * np.conj(z)).real)
        return psi * z

    def jacobian(self, z: Sequence[complex]) -> np.ndarray:
        z = self._point(z)
        psi, dpsi = self.coefficient_values((z * np.conj(z)).real)
        return special_jacobian(z, psi, dpsi)

    @classmethod
    def from_coefficients(cls, functions: Sequence[ExpressionLike], name: str = "special") -> "SpecialMap":
        """Coefficients ψ̃_k given as expressions (or JetN callables) in x1..xn."""
        n = len(functions)
        evaluators = [as_expression(fn, n=n) for fn in functions]

        def coefficients(x: np.ndarray):
            variables = JetN.variables(x)
            jets = [fn(*variables) for fn in evaluators]
            jets = [jet if isinstance(jet, JetN) else JetN.constant(jet, n) for jet in jets]
            return np.array([jet.value for jet in jets]), np.array([jet.grad for jet in jets])

        return cls(n, coefficients, name)


def identity_map(n: int) -> SpecialMap:
    return SpecialMap(n, lambda x: (np.ones(n), np.zeros((n, n))), name="identity")


def hartogs_affine_isometry(c1: float, c2: float, n: int) -> SpecialMap:
    """(z₀, z_j) ↦ (z₀/√(c1/c2), z_j/√c1): pulls the hyperbolic form back to the Hartogs form of c1 − c2·x."""
    if not (c1 > 0.0 and c2 > 0.0):
        raise ValueError("affine Hartogs profile needs c1 > 0 and c2 > 0")
    psi = np.full(n, 1.0 / math.sqrt(c1))
    psi[0] = 1.0 / math.sqrt(c1 / c2)
    return SpecialMap(n, lambda x: (psi, np.zeros((n, n))), name=f"hartogs_isometry({c1!r},{c2!r})")


# ---------------------------------------------------------------------------
# Dual potentials
# ---------------------------------------------------------------------------

def dual_radial(f: RadialPotential) -> RadialPotential:
    """f*(x) = −f(−x), so that f*′(x) = f′(−x)."""
    if not f.domain.lo < 0.0:
        raise DomainError(f"{f.name} is not defined on any (-eps, 0]; no reflected dual")
    value_fn, slope_fn = f.value_fn, f.slope_fn
    expression = None
    if f.expression is not None:
        x = variable_symbol("x")
        expression = Expression(-f.expression.tree.subs(x, -x), ("x",))
    dual = RadialPotential(
        name=_dual_name(f.name),
        value_fn=lambda x: -value_fn(-x),
        slope_fn=lambda t: slope_fn(-t),
        domain=f.domain.reflected(),
        psh_hi=math.inf,
        radius=f.radius,
        params=dict(f.params),
        expression=expression,
    )
    return RadialPotential(dual.name, dual.value_fn, dual.slope_fn, dual.domain,
                           scan_psh_bound(dual), dual.radius, dual.params, dual.expression)


def dual_rotation_invariant(p: RotationInvariantPotential) -> RotationInvariantPotential:
    """Φ̃*(x) = −Φ̃(−x): gradients reflect, values and Hessians change sign."""
    def evaluator(x: np.ndarray) -> JetN:
        jet = p.jet(-x)
        return JetN(-jet.value, jet.grad, -jet.hess)

    return RotationInvariantPotential(name=_dual_name(p.name), n=p.n, evaluator=evaluator,
                                      domain=p.domain.reflected(), radius=p.radius, params=dict(p.params))


@dataclass(frozen=True, eq=False)
class RealnessReport:
    """max |Im P(z, z̄)| over a sample ball."""

    potential: str
    radius: float
    samples: int
    max_imag: float
    worst_point: np.ndarray
    tolerance: float = REALNESS_TOLERANCE

    @property
    def is_real(self) -> bool:
        return self.max_imag < self.tolerance

    def to_dict(self) -> dict:
        return {
            "potential": self.potential,
            "radius": self.radius,
            "samples": self.samples,
            "max_imag": self.max_imag,
            "worst_point": [[float(c.real), float(c.imag)] for c in self.worst_point],
            "real": self.is_real,
            "tolerance": self.tolerance,
        }


def realness_samples(n: int, radius: float, rings: int = 10, angles: int = 16, seed: int = 42) -> np.ndarray:
    """Polar lattice on every coordinate axis, plus seeded random points of the ball when n > 1."""
    radii = np.linspace(0.0, radius, rings + 1)
    phases = np.exp(2j * np.pi * np.arange(angles) / angles)
    ring = (radii[:, None] * phases[None, :]).ravel()
    points = []
    for k in range(n):
        axis = np.zeros((ring.size, n), dtype=complex)
        axis[:, k] = ring
        points.append(axis)
    if n > 1:
        rng = np.random.default_rng(seed)
        directions = rng.standard_normal((rings * angles, 2 * n))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        scale = radius * rng.uniform(size=(rings * angles, 1)) ** (1.0 / (2 * n))
        real = directions * scale
        points.append(real[:, 0::2] + 1j * real[:, 1::2])
    return np.concatenate(points)


def check_realness(p: PolarizedPotential, radius: float = 0.1, seed: int = 42) -> RealnessReport:
    samples = realness_samples(p.n, radius, seed=seed)
    imag = np.array([abs(p.on_diagonal(z).imag) for z in samples])
    worst = int(np.argmax(imag))
    report = RealnessReport(p.name, radius, len(samples), float(imag[worst]), samples[worst])
    logger.info("realness of %s: max |Im| = %.3e at %s", p.name, report.max_imag, samples[worst])
    return report


def dual_polarized(p: PolarizedPotential, radius: float = 0.1) -> Tuple[PolarizedPotential, RealnessReport]:
    """P*(z, w) = −P(z, −w) together with its realness on the diagonal."""
    P = p.P

    def dual_P(z: np.ndarray, w: np.ndarray) -> complex:
        return -P(z, -w)

    dual = PolarizedPotential(name=_dual_name(p.name), n=p.n, P=dual_P, radius=p.radius, params=dict(p.params))
    return dual, check_realness(dual, radius)


# ---------------------------------------------------------------------------
# Canonical maps and residual equations
# ---------------------------------------------------------------------------

AnyPotential = Union[RadialPotential, RotationInvariantPotential]


def as_rotation_invariant(p: AnyPotential, n: int) -> RotationInvariantPotential:
    if isinstance(p, RadialPotential):
        return p.as_rotation_invariant(n)
    if isinstance(p, RotationInvariantPotential):
        if p.n != n:
            raise ValueError(f"{p.name} lives in dimension {p.n}, not {n}")
        return p
    raise TypeError(f"expected a radial or rotation-invariant potential, got {type(p).__name__}")


def special_map_from_potential(p: AnyPotential, lam: float, n: Optional[int] = None) -> SpecialMap:
    """ψ̃_k = (λ ∂Φ̃/∂x_k)^{1/2}; for radial f, ψ = (λ f′(|z|²))^{1/2} in every coordinate."""
    if not lam > 0.0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    name = f"canonical({p.name}, lambda={lam!r})"

    if isinstance(p, RadialPotential):
        n = n or 1

        def radial_coefficients(x: np.ndarray):
            s = p.slope(float(np.sum(x)))
            radicand = lam * s.value
            if radicand <= 0.0:
                raise DomainError(f"lambda*f'(x) = {radicand!r} is not positive at x={x.tolist()}")
            psi = math.sqrt(radicand)
            return np.full(n, psi), np.full((n, n), lam * s.d1 / (2.0 * psi))

        return SpecialMap(n, radial_coefficients, name)

    if isinstance(p, RotationInvariantPotential):
        if n is not None and n != p.n:
            raise ValueError(f"{p.name} lives in dimension {p.n}, not {n}")

        def coefficients(x: np.ndarray):
            jet = p.jet(x)
            radicand = lam * jet.grad
            if np.any(radicand <= 0.0):
                raise DomainError(f"lambda*dPhi/dx = {radicand.tolist()} is not positive at x={x.tolist()}")
            psi = np.sqrt(radicand)
            return psi, lam * jet.hess / (2.0 * psi[:, None])

        return SpecialMap(p.n, coefficients, name)

    raise TypeError(f"no special map for {type(p).__name__}")


def residual_radial(p: RadialPotential, lam: float, x: float) -> float:
    """λ² f′(x) f′(−λ x f′(x)) − 1."""
    slope = p.fprime(x)
    inner = -lam * x * slope
    return lam * lam * slope * p.fprime(inner) - 1.0


def residual_rotation_invariant(p: AnyPotential, lam: float, x: Sequence[float]) -> np.ndarray:
    """λ² ∂Φ̃/∂x_k(x) · ∂Φ̃/∂x_k(−λ ∂Φ̃/∂x₁ x₁, …, −λ ∂Φ̃/∂xₙ xₙ) − 1, for each k."""
    x = np.asarray(x, dtype=float).ravel()
    p = as_rotation_invariant(p, x.size)
    gradient = p.gradient(x)
    inner = -lam * gradient * x
    return lam * lam * gradient * p.gradient(inner) - 1.0


def involution_defect(p: RadialPotential, lam: float, x: float) -> float:
    """G(G(x)) − x with G(t) = −λ t f′(t); vanishes exactly where the radial residual does."""
    def G(t: float) -> float:
        return -lam * t * p.fprime(t)

    return G(G(x)) - x


def origin_gradient(p: AnyPotential, n: int = 1) -> np.ndarray:
    if isinstance(p, RadialPotential):
        return np.full(n, p.fprime(0.0))
    return as_rotation_invariant(p, p.n).gradient(np.zeros(p.n))


def candidate_lambda(p: AnyPotential) -> Optional[float]:
    """λ = 1/f′(0); None when the gradient components at 0 differ (no admissible λ)."""
    gradient = origin_gradient(p)
    if np.any(gradient <= 0.0):
        raise DomainError(f"{p.name} has non-positive gradient {gradient.tolist()} at the origin")
    spread = float(np.max(np.abs(gradient - gradient[0]))) / abs(gradient[0])
    if spread > EQUAL_GRADIENT_TOLERANCE:
        logger.info("no admissible lambda for %s: gradient at 0 is %s", p.name, gradient.tolist())
        return None
    return 1.0 / float(gradient[0])


def necsuff_residual(special: SpecialMap, alpha: AnyPotential, beta: AnyPotential,
                     x: Sequence[float]) -> np.ndarray:
    """ψ̃_k² ∂β̃/∂x_k(ψ̃₁²x₁, …, ψ̃ₙ²xₙ) − ∂α̃/∂x_k(x)."""
    x = np.asarray(x, dtype=float).ravel()
    alpha = as_rotation_invariant(alpha, x.size)
    beta = as_rotation_invariant(beta, x.size)
    psi, _ = special.coefficient_values(x)
    squared = psi * psi
    return squared * beta.gradient(squared * x) - alpha.gradient(x)


@dataclass(frozen=True, eq=False)
class DualityProblem:
    """A potential, its dual and λ, on a verified ball about the origin."""

    source: AnyPotential
    dual: AnyPotential
    lam: float
    radius: float
    n: int = 1
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.lam > 0.0:
            raise ValueError(f"lambda must be positive, got {self.lam!r}")

    @property
    def is_radial(self) -> bool:
        return isinstance(self.source, RadialPotential)

    @classmethod
    def from_potential(cls, p: AnyPotential, lam: float, n: Optional[int] = None,
                       radius: Optional[float] = None) -> "DualityProblem":
        if isinstance(p, RadialPotential):
            dual, n = dual_radial(p), n or 1
        elif isinstance(p, RotationInvariantPotential):
            dual, n = dual_rotation_invariant(p), p.n
        else:
            raise TypeError(f"no duality problem for {type(p).__name__}")
        for potential in (p, dual):
            if not strict_psh_at_origin(potential, n=n):
                raise ValueError(f"{potential.name} is not strictly plurisubharmonic at the origin")
        return cls(p, dual, float(lam), p.radius if radius is None else float(radius), n)
