"""Kähler potentials: radial f(x), rotation-invariant Φ̃(x₁..xₙ) and polarized P(z, w).

x always denotes squared moduli (x = |z|² for radial potentials, x_k = |z_k|² otherwise).
Every potential stores its domain explicitly and every evaluator checks membership.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Mapping, Optional, Sequence, Union

import numpy as np
import sympy
from scipy import integrate, special

from KahlerDuality.core.numkit import (
    DomainError,
    Expression,
    ExpressionLike,
    Jet1,
    JetN,
    as_expression,
    exp,
    jet1_compose,
    log,
    sqrt,
    variable_symbol,
)

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
PARABOLA_X_HI = 1.0 / (4.0 * SQRT2)


class OutOfDomainError(DomainError):
    """Raised when a potential is evaluated outside its stored domain."""

    def __init__(self, message: str, potential: Optional[str] = None, point: Any = None):
        super().__init__(message)
        self.potential = potential
        self.point = point


class CatalogError(ValueError):
    """Unknown catalog entry or invalid parameters."""


class SolverError(RuntimeError):
    """The Taub-NUT Newton iteration did not converge."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class Interval:
    """Open interval (lo, hi) of admissible x values."""

    lo: float = -math.inf
    hi: float = math.inf

    def contains(self, x: float) -> bool:
        return self.lo < x < self.hi

    def reflected(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __str__(self) -> str:
        return f"({self.lo!r}, {self.hi!r})"


@dataclass(frozen=True, eq=False)
class Box:
    """Open box of admissible x-vectors."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float))

    @classmethod
    def unbounded(cls, n: int) -> "Box":
        return cls(np.full(n, -np.inf), np.full(n, np.inf))

    @property
    def n(self) -> int:
        return self.lo.size

    def contains(self, x: Sequence[float]) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(self.lo < x) and np.all(x < self.hi))

    def reflected(self) -> "Box":
        return Box(-self.hi, -self.lo)

    def __str__(self) -> str:
        return f"box(lo={self.lo.tolist()}, hi={self.hi.tolist()})"


def _guarded(name: str, point: Any, fn: Callable[[], Any]) -> Any:
    try:
        return fn()
    except OutOfDomainError:
        raise
    except DomainError as err:
        raise OutOfDomainError(f"{name} undefined at {point!r}: {err}", potential=name, point=point) from err
    except SolverError as err:
        raise OutOfDomainError(f"{name} undefined at {point!r}: {err}", potential=name, point=point) from err


# ---------------------------------------------------------------------------
# Radial potentials
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RadialPotential:
    """Φ(z) = f(|z|²), stored through the value of f and the jet-capable slope f′."""

    name: str
    value_fn: Callable[[float], float]
    slope_fn: Callable[[Any], Any]
    domain: Interval
    psh_hi: float
    radius: float
    params: Mapping[str, Any] = field(default_factory=dict)
    expression: Optional[Expression] = None

    def check(self, x: float) -> float:
        x = float(x)
        if not self.domain.contains(x):
            raise OutOfDomainError(f"x={x!r} outside the domain {self.domain} of {self.name}",
                                   potential=self.name, point=x)
        return x

    def f(self, x: float) -> float:
        x = self.check(x)
        return _guarded(self.name, x, lambda: float(self.value_fn(x)))

    def fprime(self, x: float) -> float:
        x = self.check(x)
        return _guarded(self.name, x, lambda: float(self.slope_fn(x)))

    def slope(self, x: float) -> Jet1:
        """Jet of f′ at x: (f′, f″, f‴, f⁗)."""
        x = self.check(x)
        result = _guarded(self.name, x, lambda: self.slope_fn(Jet1.variable(x)))
        return result if isinstance(result, Jet1) else Jet1.constant(result)

    def jet(self, x: float) -> Jet1:
        """Jet of f at x: (f, f′, f″, f‴)."""
        s = self.slope(x)
        return Jet1(self.f(x), s.value, s.d1, s.d2)

    def conformal_factor(self, x: float) -> float:
        """S(x) = (x f′)′, the factor with ω = S ω₀ on the complex line through z."""
        s = self.slope(x)
        return float(x) * s.d1 + s.value

    def scaled(self, c: float) -> "RadialPotential":
        c = float(c)
        value_fn, slope_fn = self.value_fn, self.slope_fn
        expression = None
        if self.expression is not None:
            expression = Expression(sympy.Float(c) * self.expression.tree, ("x",))
        return RadialPotential(f"{c!r}*{self.name}", lambda x: c * value_fn(x), lambda t: c * slope_fn(t),
                               self.domain, self.psh_hi, self.radius, dict(self.params), expression)

    def as_rotation_invariant(self, n: int) -> "RotationInvariantPotential":
        def evaluator(x: np.ndarray) -> JetN:
            j = self.jet(float(np.sum(x)))
            ones = np.ones(n)
            return JetN(j.value, j.d1 * ones, j.d2 * np.ones((n, n)))

        return RotationInvariantPotential(
            name=self.name, n=n, evaluator=evaluator, domain=Box.unbounded(n),
            radius=self.radius, params=dict(self.params, radial=True))

    def polarized(self, n: int = 1) -> "PolarizedPotential":
        if self.expression is None:
            raise CatalogError(f"{self.name} has no closed form to polarize")
        expression = self.expression

        def P(z: np.ndarray, w: np.ndarray) -> complex:
            return complex(expression(complex(np.sum(z * w))))

        return PolarizedPotential(name=self.name, n=n, P=P, radius=self.radius, params=dict(self.params))


def radial_from_expression(text: Union[str, Expression], name: Optional[str] = None,
                           domain: Interval = Interval(), psh_hi: Optional[float] = None,
                           radius: float = 1.0, params: Optional[Mapping[str, Any]] = None) -> RadialPotential:
    """Build a radial potential from a formula in x; f′ comes from symbolic differentiation."""
    expression = text if isinstance(text, Expression) else Expression.parse(text, n=1)
    if expression.n != 1:
        raise CatalogError(f"radial potential must depend on x only, got {expression.variables}")
    slope = expression.diff()
    potential = RadialPotential(
        name=name or expression.text,
        value_fn=expression,
        slope_fn=slope,
        domain=domain,
        psh_hi=math.inf if psh_hi is None else psh_hi,
        radius=radius,
        params=dict(params or {}),
        expression=expression,
    )
    if psh_hi is None:
        potential = _replace_psh(potential, scan_psh_bound(potential))
    return potential


def _replace_psh(p: RadialPotential, psh_hi: float) -> RadialPotential:
    return RadialPotential(p.name, p.value_fn, p.slope_fn, p.domain, psh_hi, p.radius, p.params, p.expression)


def scan_psh_bound(p: RadialPotential, limit: float = 10.0, steps: int = 2000) -> float:
    """First sampled x ≥ 0 where f′ > 0 and S > 0 stop holding (or the domain ends)."""
    hi = min(p.domain.hi, limit)
    grid = np.linspace(0.0, hi, steps, endpoint=False)
    for x in grid:
        try:
            s = p.slope(x)
        except DomainError:
            return float(x)
        if s.value <= 0.0 or x * s.d1 + s.value <= 0.0:
            return float(x)
    return float(hi)


def parabola_generator(x):
    """The involution G(x) = −√2/2 + x + ½√(2 − 8√2 x) on x ≤ 1/(4√2)."""
    return -SQRT2 / 2.0 + x + 0.5 * sqrt(2.0 - 8.0 * SQRT2 * x)


# ---------------------------------------------------------------------------
# Rotation-invariant potentials
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RotationInvariantPotential:
    """Φ(z) = Φ̃(|z₁|², …, |zₙ|²) with a point-wise JetN evaluator for Φ̃."""

    name: str
    n: int
    evaluator: Callable[[np.ndarray], JetN]
    domain: Box
    radius: float
    params: Mapping[str, Any] = field(default_factory=dict)

    def check(self, x: Sequence[float]) -> np.ndarray:
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.n:
            raise ValueError(f"{self.name} expects {self.n} coordinates, got {x.size}")
        if not self.domain.contains(x):
            raise OutOfDomainError(f"x={x.tolist()} outside the {self.domain} of {self.name}",
                                   potential=self.name, point=x.tolist())
        return x

    def jet(self, x: Sequence[float]) -> JetN:
        x = self.check(x)
        return _guarded(self.name, x.tolist(), lambda: self.evaluator(x))

    def value(self, x: Sequence[float]) -> float:
        return self.jet(x).value

    def gradient(self, x: Sequence[float]) -> np.ndarray:
        return np.array(self.jet(x).grad)


def polynomial_potential(linear: Sequence[float], quadratic: Sequence[Sequence[float]],
                         name: str = "polynomial", radius: float = 1.0) -> RotationInvariantPotential:
    """Φ̃(x) = Σ c_k x_k + Σ a_kl x_k x_l with a symmetric."""
    c = np.asarray(linear, dtype=float)
    a = np.asarray(quadratic, dtype=float)
    a = 0.5 * (a + a.T)

    def evaluator(x: np.ndarray) -> JetN:
        return JetN(c @ x + x @ a @ x, c + 2.0 * a @ x, 2.0 * a)

    return RotationInvariantPotential(name=name, n=c.size, evaluator=evaluator, domain=Box.unbounded(c.size),
                                      radius=radius, params={"linear": c.tolist(), "quadratic": a.tolist()})


def random_polynomial_potential(rng: np.random.Generator, n: int, radius: float = 0.3) -> RotationInvariantPotential:
    """Random strictly-PSH polynomial: c_k in [0.5, 2], |a_kl| ≤ 0.2."""
    c = rng.uniform(0.5, 2.0, size=n)
    a = rng.uniform(-0.2, 0.2, size=(n, n))
    return polynomial_potential(c, 0.5 * (a + a.T), name="random_polynomial", radius=radius)


# ---------------------------------------------------------------------------
# Polarized potentials
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PolarizedPotential:
    """P(z, w) analytic in both arguments; the potential is Φ(z) = P(z, z̄)."""

    name: str
    n: int
    P: Callable[[np.ndarray, np.ndarray], complex]
    radius: float
    params: Mapping[str, Any] = field(default_factory=dict)

    def __call__(self, z: Sequence[complex], w: Sequence[complex]) -> complex:
        z = np.asarray(z, dtype=complex).ravel()
        w = np.asarray(w, dtype=complex).ravel()
        if z.size != self.n or w.size != self.n:
            raise ValueError(f"{self.name} expects {self.n} coordinates")
        return _guarded(self.name, (z.tolist(), w.tolist()), lambda: complex(self.P(z, w)))

    def on_diagonal(self, z: Sequence[complex]) -> complex:
        z = np.asarray(z, dtype=complex).ravel()
        return self(z, np.conj(z))


# ---------------------------------------------------------------------------
# Taub-NUT
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TaubNutState:
    """Implicit coordinates (U, V) with x1 = e^{2m(U−V)}U and x2 = e^{2m(V−U)}V."""

    U: float
    V: float
    m: float
    x1: float
    x2: float

    def residual(self) -> float:
        forward = _taubnut_forward(np.array([self.U, self.V]), self.m)
        return float(np.max(np.abs(forward - np.array([self.x1, self.x2]))))


def _taubnut_forward(uv: np.ndarray, m: float) -> np.ndarray:
    a = math.exp(2.0 * m * (uv[0] - uv[1]))
    return np.array([a * uv[0], uv[1] / a])


def _taubnut_jacobian(uv: np.ndarray, m: float) -> np.ndarray:
    u, v = uv
    a = math.exp(2.0 * m * (u - v))
    return np.array([
        [a * (1.0 + 2.0 * m * u), -2.0 * m * u * a],
        [-2.0 * m * v / a, (1.0 + 2.0 * m * v) / a],
    ])


def taubnut_solve(x1: float, x2: float, m: float, tol: float = 1e-13, max_iter: int = 100) -> TaubNutState:
    """Newton solve of the implicit (U, V) equations starting from (x1, x2).

    Steps are halved until the residual decreases when m·max|x| > 0.5.
    """
    if m < 0.0:
        raise ValueError(f"Taub-NUT parameter m must be non-negative, got {m!r}")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    x1, x2 = float(x1), float(x2)
    if m == 0.0:
        return TaubNutState(x1, x2, 0.0, x1, x2)

    target = np.array([x1, x2])
    scale = max(1.0, float(np.max(np.abs(target))))
    damped = m * float(np.max(np.abs(target))) > 0.5
    uv = target.copy()
    residual = _taubnut_forward(uv, m) - target
    norm = float(np.max(np.abs(residual)))
    for iteration in range(max_iter):
        if norm < tol * scale:
            break
        try:
            step = np.linalg.solve(_taubnut_jacobian(uv, m), -residual)
        except np.linalg.LinAlgError as err:
            raise SolverError(f"singular Taub-NUT Jacobian at (U, V)={uv.tolist()}", norm) from err
        t = 1.0
        while True:
            candidate = uv + t * step
            try:
                candidate_residual = _taubnut_forward(candidate, m) - target
            except OverflowError:
                candidate_residual = np.full(2, np.inf)
            candidate_norm = float(np.max(np.abs(candidate_residual)))
            if not damped or candidate_norm < norm or t < 1e-6:
                break
            t *= 0.5
        uv, residual, norm = candidate, candidate_residual, candidate_norm
        logger.debug("taubnut iteration %d: (U, V)=%s residual=%.3e", iteration, uv.tolist(), norm)

    if not norm < tol * scale:
        raise SolverError(f"Taub-NUT solve for x=({x1!r}, {x2!r}), m={m!r} did not converge", norm)
    u, v = float(uv[0]), float(uv[1])
    if 1.0 + 2.0 * m * (u + v) <= 0.0:
        raise SolverError(f"Taub-NUT solve for x=({x1!r}, {x2!r}) left the principal branch", norm)
    return TaubNutState(u, v, float(m), x1, x2)


def taubnut_gradient(state: TaubNutState) -> np.ndarray:
    """(∂Φ̃/∂x₁, ∂Φ̃/∂x₂) = ((1+2mV)e^{2m(V−U)}, (1+2mU)e^{2m(U−V)})."""
    m, u, v = state.m, state.U, state.V
    a = math.exp(2.0 * m * (u - v))
    return np.array([(1.0 + 2.0 * m * v) / a, (1.0 + 2.0 * m * u) * a])


def taubnut_hessian(state: TaubNutState) -> np.ndarray:
    """Hessian of Φ̃ by implicit differentiation through (U, V)."""
    m, u, v = state.m, state.U, state.V
    a = math.exp(2.0 * m * (u - v))
    grad_uv = np.array([
        [-2.0 * m * (1.0 + 2.0 * m * v) / a, 2.0 * m * (2.0 + 2.0 * m * v) / a],
        [2.0 * m * (2.0 + 2.0 * m * u) * a, -2.0 * m * (1.0 + 2.0 * m * u) * a],
    ])
    hess = np.linalg.solve(_taubnut_jacobian(np.array([u, v]), m).T, grad_uv.T).T
    return 0.5 * (hess + hess.T)


def taubnut_radial_slice(x1: float, m: float) -> float:
    """U on the slice x2 = 0, where U e^{2mU} = x1 gives U = W(2m x1)/(2m)."""
    if m == 0.0:
        return float(x1)
    return float(np.real(special.lambertw(2.0 * m * x1))) / (2.0 * m)


def _taubnut_evaluator(m: float) -> Callable[[np.ndarray], JetN]:
    def evaluator(x: np.ndarray) -> JetN:
        state = taubnut_solve(x[0], x[1], m)
        value = state.U + state.V + m * (state.U ** 2 + state.V ** 2)
        return JetN(value, taubnut_gradient(state), taubnut_hessian(state))

    return evaluator


# ---------------------------------------------------------------------------
# Hartogs domains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PseudoconvexityCheck:
    passed: bool
    failure_point: Optional[float]
    min_value: float


def hartogs_pseudoconvexity_check(F: ExpressionLike, x_hi: float, samples: int = 200) -> PseudoconvexityCheck:
    """Sample c(x) = −(xF′/F)′ on [0, x_hi) and report the first point where c ≤ 0."""
    fn = as_expression(F)
    failure, lowest = None, math.inf
    for x in np.linspace(0.0, x_hi, samples, endpoint=False):
        j = jet1_compose(fn, x)
        if j.value <= 0.0:
            raise DomainError(f"F is non-positive at x={x!r}")
        condition = x * j.d1 ** 2 / j.value ** 2 - (j.d1 + x * j.d2) / j.value
        lowest = min(lowest, condition)
        if condition <= 0.0 and failure is None:
            failure = float(x)
    return PseudoconvexityCheck(passed=failure is None, failure_point=failure, min_value=float(lowest))


def _hartogs_bounds(F: Callable, limit: float = 10.0, steps: int = 4000):
    """Largest sampled (lo, hi) around 0 with F > 0, and F′ < 0 on the positive side."""
    def admissible(x: float, decreasing: bool) -> bool:
        try:
            j = jet1_compose(F, x)
        except DomainError:
            return False
        return j.value > 0.0 and (j.d1 < 0.0 or not decreasing)

    def last_admissible(grid: np.ndarray, decreasing: bool) -> float:
        previous = 0.0
        for x in grid[1:]:
            if not admissible(x, decreasing):
                return float(previous)
            previous = x
        return float(grid[-1])

    hi = last_admissible(np.linspace(0.0, limit, steps), decreasing=True)
    lo = last_admissible(np.linspace(0.0, -limit, steps), decreasing=False)
    return lo, hi


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------

def _scaled_log(coefficient: float, sign: float) -> Expression:
    x = variable_symbol("x")
    tree = sympy.Float(coefficient) * sympy.log(1 + sign * x)
    return Expression(tree, ("x",))


def hyperbolic() -> RadialPotential:
    return radial_from_expression("-log(1-x)", name="hyperbolic", domain=Interval(-math.inf, 1.0),
                                  psh_hi=1.0, radius=1.0)


def fubini_study() -> RadialPotential:
    return radial_from_expression("log(1+x)", name="fubini_study", domain=Interval(-1.0, math.inf),
                                  psh_hi=math.inf, radius=1.0)


def flat(c: float = 1.0) -> RadialPotential:
    c = float(c)
    if not c > 0.0:
        raise CatalogError(f"flat requires c > 0, got {c!r}")
    expression = Expression(sympy.Float(c) * variable_symbol("x"), ("x",), text=f"{c!r}*x")
    return radial_from_expression(expression, name="flat", psh_hi=math.inf, radius=1.0, params={"c": c})


def scaled_hyperbolic(mu: float = 1.0) -> RadialPotential:
    mu = float(mu)
    if not mu > 0.0:
        raise CatalogError(f"scaled_hyperbolic requires mu > 0, got {mu!r}")
    return radial_from_expression(_scaled_log(-mu, -1.0), name="scaled_hyperbolic",
                                  domain=Interval(-math.inf, 1.0), psh_hi=1.0, radius=1.0, params={"mu": mu})


def quadratic_defect() -> RadialPotential:
    return radial_from_expression("x - x^2/4", name="quadratic_defect", psh_hi=1.0, radius=1.0)


def parabola_rotation(lam: float = 1.0) -> RadialPotential:
    """f′(x) = −G(x)/(λx) written without the removable singularity at 0."""
    lam = float(lam)
    if not lam > 0.0:
        raise CatalogError(f"parabola_rotation requires lambda > 0, got {lam!r}")

    def slope_fn(t):
        return (4.0 * SQRT2 / (sqrt(2.0 - 8.0 * SQRT2 * t) + SQRT2) - 1.0) / lam

    def value_fn(x: float) -> float:
        value, _ = integrate.quad(lambda t: slope_fn(t), 0.0, x, epsabs=1e-12, epsrel=1e-12)
        return value

    return RadialPotential(
        name="parabola_rotation", value_fn=value_fn, slope_fn=slope_fn,
        domain=Interval(-SQRT2, PARABOLA_X_HI), psh_hi=PARABOLA_X_HI,
        radius=math.sqrt(PARABOLA_X_HI), params={"lam": lam})


def hyperbolic_plus_linear() -> PolarizedPotential:
    def P(z: np.ndarray, w: np.ndarray) -> complex:
        return -log(complex(1.0 - z[0] * w[0])) + z[0] + w[0]

    return PolarizedPotential(name="hyperbolic_plus_linear", n=1, P=P, radius=1.0)


def hartogs(F: ExpressionLike = "1-x", n: int = 2) -> RotationInvariantPotential:
    """Φ̃(x₀, …, x_{n−1}) = −log(F(x₀) − Σ_{j≥1} x_j) for decreasing positive F."""
    n = int(n)
    if n < 1:
        raise CatalogError(f"hartogs requires n >= 1, got {n}")
    fn = as_expression(F)
    try:
        start = jet1_compose(fn, 0.0)
    except DomainError as err:
        raise CatalogError(f"hartogs F is undefined at 0: {err}") from err
    if start.value <= 0.0:
        raise CatalogError("hartogs F must be positive at 0")
    if not start.d1 < 0.0:
        raise CatalogError("hartogs F must be decreasing")
    lo, hi = _hartogs_bounds(fn)

    def evaluator(x: np.ndarray) -> JetN:
        variables = JetN.variables(x)
        head = fn(variables[0])
        return -log(head - sum(variables[1:], JetN.constant(0.0, n)))

    samples = np.linspace(0.0, hi, 400, endpoint=False)
    reach = min(hi, min(x + float(fn(x)) for x in samples))
    domain = Box(np.concatenate([[lo], np.full(n - 1, -np.inf)]), np.concatenate([[hi], np.full(n - 1, np.inf)]))
    return RotationInvariantPotential(name="hartogs", n=n, evaluator=evaluator, domain=domain,
                                      radius=math.sqrt(0.9 * reach), params={"F": str(F), "n": n})


def taubnut(m: float = 0.0) -> RotationInvariantPotential:
    m = float(m)
    if m < 0.0:
        raise CatalogError(f"taubnut requires m >= 0, got {m!r}")
    lo = -1.0 / (2.0 * math.e * m) if m > 0.0 else -np.inf
    return RotationInvariantPotential(name="taubnut", n=2, evaluator=_taubnut_evaluator(m),
                                      domain=Box(np.full(2, lo), np.full(2, np.inf)),
                                      radius=1.0, params={"m": m})


CATALOG: Dict[str, Callable[..., Any]] = {
    "hyperbolic": hyperbolic,
    "fubini_study": fubini_study,
    "flat": flat,
    "scaled_hyperbolic": scaled_hyperbolic,
    "hyperbolic_plus_linear": hyperbolic_plus_linear,
    "quadratic_defect": quadratic_defect,
    "parabola_rotation": parabola_rotation,
    "hartogs": hartogs,
    "taubnut": taubnut,
}

Potential = Union[RadialPotential, RotationInvariantPotential, PolarizedPotential]


def catalog(name: str, **params) -> Potential:
    """Look up a catalog entry; parameters use the names c, mu, lam, F, n, m."""
    try:
        builder = CATALOG[name]
    except KeyError:
        raise CatalogError(f"unknown potential {name!r}; choose from {sorted(CATALOG)}") from None
    try:
        return builder(**params)
    except TypeError as err:
        raise CatalogError(f"invalid parameters for {name}: {err}") from err


def strict_psh_at_origin(p: Potential, n: int = 1) -> bool:
    """True iff the Kähler matrix at 0 is positive definite."""
    from KahlerDuality.core import forms

    try:
        if isinstance(p, PolarizedPotential):
            h = forms.polarized_hermitian_at(p, np.zeros(p.n, dtype=complex))
            form = forms.FormMatrix(p.n, forms.hermitian_to_real_form(h))
        else:
            dim = p.n if isinstance(p, RotationInvariantPotential) else n
            form = forms.kahler_form_at(p, np.zeros(dim, dtype=complex))
    except DomainError as err:
        logger.info("%s is not defined at the origin: %s", getattr(p, "name", p), err)
        return False
    return form.is_positive()
