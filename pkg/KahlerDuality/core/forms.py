"""Kähler forms, flat form, dual forms and B-operators as real 2n×2n matrices at a point.

Real coordinates are ordered (u₁, v₁, …, uₙ, vₙ) with z_j = u_j + i v_j, and the flat form
is ω₀ = Σ du_j∧dv_j = (i/2) Σ dz_j∧dz̄_j. A Hermitian coefficient matrix h (the form
(i/2) Σ h_ab dz_a∧dz̄_b) evaluates as ω(v, w) = −Im(vᵀ h w̄).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from KahlerDuality.core.numkit import DomainError
from KahlerDuality.core.potentials import PolarizedPotential, RadialPotential, RotationInvariantPotential

logger = logging.getLogger(__name__)

CONVENTION = "u1,v1,...,un,vn; omega0(du,dv)=+1"

_FLAT_BLOCK = np.array([[0.0, 1.0], [-1.0, 0.0]])
_J_BLOCK = np.array([[0.0, -1.0], [1.0, 0.0]])


def flat_form(n: int) -> np.ndarray:
    return np.kron(np.eye(n), _FLAT_BLOCK)


def complex_structure(n: int) -> np.ndarray:
    """Multiplication by i in real coordinates."""
    return np.kron(np.eye(n), _J_BLOCK)


def to_real(z: Sequence[complex]) -> np.ndarray:
    z = np.asarray(z, dtype=complex).ravel()
    r = np.empty(2 * z.size)
    r[0::2] = z.real
    r[1::2] = z.imag
    return r


def to_complex(r: Sequence[float]) -> np.ndarray:
    r = np.asarray(r, dtype=float).ravel()
    return r[0::2] + 1j * r[1::2]


def hermitian_to_real_form(h: np.ndarray) -> np.ndarray:
    """Real matrix of the 2-form with Hermitian coefficient matrix h."""
    h = np.asarray(h, dtype=complex)
    n = h.shape[0]
    omega = np.empty((2 * n, 2 * n))
    omega[0::2, 0::2] = -h.imag
    omega[0::2, 1::2] = h.real
    omega[1::2, 0::2] = -h.real
    omega[1::2, 1::2] = -h.imag
    return omega


def complex_to_real_operator(a: np.ndarray) -> np.ndarray:
    """Real matrix of the complex-linear map v ↦ a v."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    m = np.empty((2 * n, 2 * n))
    m[0::2, 0::2] = a.real
    m[0::2, 1::2] = -a.imag
    m[1::2, 0::2] = a.imag
    m[1::2, 1::2] = a.real
    return m


@dataclass(frozen=True, eq=False)
class FormMatrix:
    """A 2-form at a point, tagged with its coordinate convention."""

    n: int
    omega: np.ndarray
    convention: str = CONVENTION

    def __post_init__(self):
        omega = np.array(self.omega, dtype=float)
        if omega.shape != (2 * self.n, 2 * self.n):
            raise ValueError(f"form matrix must be {2 * self.n}x{2 * self.n}, got {omega.shape}")
        omega.setflags(write=False)
        object.__setattr__(self, "omega", omega)

    @classmethod
    def flat(cls, n: int) -> "FormMatrix":
        return cls(n, flat_form(n))

    def _compatible(self, other: "FormMatrix") -> "FormMatrix":
        if not isinstance(other, FormMatrix):
            raise TypeError(f"cannot combine FormMatrix with {type(other).__name__}")
        if other.convention != self.convention:
            raise TypeError(f"convention mismatch: {self.convention!r} vs {other.convention!r}")
        if other.n != self.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")
        return other

    def __add__(self, other: "FormMatrix") -> "FormMatrix":
        other = self._compatible(other)
        return FormMatrix(self.n, self.omega + other.omega, self.convention)

    def __sub__(self, other: "FormMatrix") -> "FormMatrix":
        other = self._compatible(other)
        return FormMatrix(self.n, self.omega - other.omega, self.convention)

    def __mul__(self, c: float) -> "FormMatrix":
        return FormMatrix(self.n, float(c) * self.omega, self.convention)

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.omega)))

    def antisymmetry_defect(self) -> float:
        return float(np.max(np.abs(self.omega + self.omega.T)))

    def metric(self) -> np.ndarray:
        """g(a, b) = ω(a, J b)."""
        return self.omega @ complex_structure(self.n)

    def is_positive(self) -> bool:
        g = self.metric()
        return bool(np.min(np.linalg.eigvalsh(0.5 * (g + g.T))) > 0.0)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """A real-linear endomorphism of the tangent space at a point."""

    n: int
    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    def apply(self, v: Sequence[complex]) -> np.ndarray:
        return to_complex(self.entries @ to_real(v))

    def commutation_defect(self) -> float:
        j = complex_structure(self.n)
        return float(np.max(np.abs(self.entries @ j - j @ self.entries)))


Potential = Union[RadialPotential, RotationInvariantPotential]


def _squared_moduli(z: np.ndarray) -> np.ndarray:
    return (z * np.conj(z)).real


def kahler_hermitian_at(p: Potential, z: Sequence[complex]) -> np.ndarray:
    """h_ab = ∂²Φ̃/∂x_a∂x_b z̄_a z_b + ∂Φ̃/∂x_a δ_ab (radial: f″ z̄_a z_b + f′ δ_ab)."""
    z = np.asarray(z, dtype=complex).ravel()
    x = _squared_moduli(z)
    outer = np.outer(np.conj(z), z)
    if isinstance(p, RadialPotential):
        s = p.slope(float(np.sum(x)))
        return s.d1 * outer + s.value * np.eye(z.size)
    if isinstance(p, RotationInvariantPotential):
        jet = p.jet(x)
        return jet.hess * outer + np.diag(jet.grad)
    raise TypeError(f"no Kähler form for {type(p).__name__}")


def dual_hermitian_at(p: Potential, z: Sequence[complex]) -> np.ndarray:
    """Coefficients of ω* read off the reflected jets: −f″(−x) z̄_a z_b + f′(−x) δ_ab."""
    z = np.asarray(z, dtype=complex).ravel()
    x = _squared_moduli(z)
    outer = np.outer(np.conj(z), z)
    if isinstance(p, RadialPotential):
        s = p.slope(-float(np.sum(x)))
        return -s.d1 * outer + s.value * np.eye(z.size)
    if isinstance(p, RotationInvariantPotential):
        jet = p.jet(-x)
        return -jet.hess * outer + np.diag(jet.grad)
    raise TypeError(f"no dual form for {type(p).__name__}")


def kahler_form_at(p: Potential, z: Sequence[complex]) -> FormMatrix:
    z = np.asarray(z, dtype=complex).ravel()
    return FormMatrix(z.size, hermitian_to_real_form(kahler_hermitian_at(p, z)))


def dual_form_at(p: Potential, z: Sequence[complex]) -> FormMatrix:
    z = np.asarray(z, dtype=complex).ravel()
    return FormMatrix(z.size, hermitian_to_real_form(dual_hermitian_at(p, z)))


def polarized_hermitian_at(p: PolarizedPotential, z: Sequence[complex], h: float = 1e-4) -> np.ndarray:
    """∂²P/∂z_a∂w_b at (z, z̄) by complex central differences."""
    z = np.asarray(z, dtype=complex).ravel()
    w = np.conj(z)
    n = z.size
    result = np.empty((n, n), dtype=complex)
    eye = np.eye(n)
    for a in range(n):
        for b in range(n):
            dz, dw = h * eye[a], h * eye[b]
            result[a, b] = (p(z + dz, w + dw) - p(z + dz, w - dw)
                            - p(z - dz, w + dw) + p(z - dz, w - dw)) / (4.0 * h * h)
    return 0.5 * (result + result.conj().T)


def _radial_operator(z: np.ndarray, second: float, first: float) -> OperatorMatrix:
    b = second * np.outer(z, np.conj(z)) + first * np.eye(z.size)
    return OperatorMatrix(z.size, complex_to_real_operator(b))


def b_operator_at(p: RadialPotential, z: Sequence[complex]) -> OperatorMatrix:
    """B_z = f″(|z|²) z⊙z̄ + f′(|z|²) Id, where (z⊙z̄)(v) = ⟨v, z⟩ z."""
    if not isinstance(p, RadialPotential):
        raise TypeError("B-operators are defined for radial potentials")
    z = np.asarray(z, dtype=complex).ravel()
    s = p.slope(float(np.sum(_squared_moduli(z))))
    return _radial_operator(z, s.d1, s.value)


def b_star_operator_at(p: RadialPotential, z: Sequence[complex]) -> OperatorMatrix:
    """B*_z = −f″(−|z|²) z⊙z̄ + f′(−|z|²) Id."""
    if not isinstance(p, RadialPotential):
        raise TypeError("B-operators are defined for radial potentials")
    z = np.asarray(z, dtype=complex).ravel()
    s = p.slope(-float(np.sum(_squared_moduli(z))))
    return _radial_operator(z, -s.d1, s.value)


def gaussian_curvature_radial(p: RadialPotential, x: float) -> float:
    """Curvature of the 1-D metric S(|z|²)|dz|² with S = (x f′)′.

    Normalized so that f = −log(1−x) gives −4 and f = log(1+x) gives +4.
    """
    x = float(x)
    f1, f2, f3, f4 = p.slope(x).as_tuple()
    s = x * f2 + f1
    if s <= 0.0:
        raise DomainError(f"conformal factor S={s!r} is not positive at x={x!r} for {p.name}")
    s1 = x * f3 + 2.0 * f2
    s2 = x * f4 + 3.0 * f3
    log_s1 = s1 / s
    log_s2 = s2 / s - log_s1 ** 2
    return -(2.0 / s) * (x * log_s2 + log_s1)
