"""Forward-mode jets and the small expression language used to define potentials.

A ``Jet1`` carries a value and its first three derivatives in one variable; a ``JetN``
carries value, gradient and Hessian in n variables. Both are immutable and obey the
Leibniz and chain rules exactly, so any closed-form potential written with ``+ - * /``,
``log``, ``exp``, ``sqrt`` and powers can be differentiated without truncation error.
"""
from __future__ import annotations

import cmath
import logging
import math
import numbers
import operator
from dataclasses import dataclass
from functools import reduce
from typing import Any, Callable, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

logger = logging.getLogger(__name__)


class DomainError(ValueError):
    """Raised when an evaluation leaves the real domain of an elementary function."""

    def __init__(self, message: str, expression: Optional[str] = None):
        super().__init__(message)
        self.expression = expression


class ExpressionError(ValueError):
    """Raised for expressions outside the supported grammar."""


class _JetArithmetic:
    """Operator plumbing shared by Jet1 and JetN.

    Subclasses provide ``_lift``, ``__add__``, ``__mul__``, ``__neg__`` and ``compose``.
    """

    # numpy scalars must defer to the reflected jet operators
    __array_ufunc__ = None

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return self.__add__(-other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return other.__add__(-self)

    def __rmul__(self, other):
        return self.__mul__(other)

    def reciprocal(self):
        a = self.value
        if a == 0.0:
            raise DomainError("division by zero")
        return self.compose(1.0 / a, -1.0 / a ** 2, 2.0 / a ** 3, -6.0 / a ** 4)

    def __truediv__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return self.__mul__(other.reciprocal())

    def __rtruediv__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return other.__mul__(self.reciprocal())

    def __pow__(self, exponent):
        if isinstance(exponent, _JetArithmetic):
            return exp(exponent * log(self))
        return power(self, exponent)

    def __rpow__(self, base):
        return exp(self * log(base))


@dataclass(frozen=True)
class Jet1(_JetArithmetic):
    """Value and derivatives of order 1 to 3 of a univariate function at a point."""

    value: float
    d1: float = 0.0
    d2: float = 0.0
    d3: float = 0.0

    @classmethod
    def constant(cls, c: float) -> "Jet1":
        return cls(float(c))

    @classmethod
    def variable(cls, x: float) -> "Jet1":
        return cls(float(x), 1.0)

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.value, self.d1, self.d2, self.d3)

    @staticmethod
    def _lift(other):
        if isinstance(other, Jet1):
            return other
        if isinstance(other, numbers.Real):
            return Jet1(float(other))
        return NotImplemented

    def compose(self, f0: float, f1: float, f2: float, f3: float = 0.0) -> "Jet1":
        """Chain rule: the jet of phi(self) given phi and its derivatives at self.value."""
        g1, g2, g3 = self.d1, self.d2, self.d3
        return Jet1(
            f0,
            f1 * g1,
            f2 * g1 * g1 + f1 * g2,
            f3 * g1 ** 3 + 3.0 * f2 * g1 * g2 + f1 * g3,
        )

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return Jet1(self.value + other.value, self.d1 + other.d1,
                    self.d2 + other.d2, self.d3 + other.d3)

    def __neg__(self):
        return Jet1(-self.value, -self.d1, -self.d2, -self.d3)

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        a0, a1, a2, a3 = self.as_tuple()
        b0, b1, b2, b3 = other.as_tuple()
        return Jet1(
            a0 * b0,
            a1 * b0 + a0 * b1,
            a2 * b0 + 2.0 * a1 * b1 + a0 * b2,
            a3 * b0 + 3.0 * a2 * b1 + 3.0 * a1 * b2 + a0 * b3,
        )


@dataclass(frozen=True, eq=False)
class JetN(_JetArithmetic):
    """Value, gradient and symmetric Hessian of a function of n variables at a point."""

    value: float
    grad: np.ndarray
    hess: np.ndarray

    def __post_init__(self):
        grad = np.array(self.grad, dtype=float)
        hess = np.array(self.hess, dtype=float).reshape(grad.size, grad.size)
        grad.setflags(write=False)
        hess.setflags(write=False)
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "grad", grad)
        object.__setattr__(self, "hess", hess)

    @property
    def n(self) -> int:
        return self.grad.size

    @classmethod
    def constant(cls, c: float, n: int) -> "JetN":
        return cls(float(c), np.zeros(n), np.zeros((n, n)))

    @classmethod
    def variable(cls, at: Sequence[float], k: int) -> "JetN":
        at = np.asarray(at, dtype=float)
        grad = np.zeros(at.size)
        grad[k] = 1.0
        return cls(at[k], grad, np.zeros((at.size, at.size)))

    @classmethod
    def variables(cls, at: Sequence[float]) -> list:
        at = np.asarray(at, dtype=float)
        return [cls.variable(at, k) for k in range(at.size)]

    def _lift(self, other):
        if isinstance(other, JetN):
            if other.n != self.n:
                raise ValueError(f"jet dimension mismatch: {self.n} vs {other.n}")
            return other
        if isinstance(other, numbers.Real):
            return JetN.constant(other, self.n)
        return NotImplemented

    def compose(self, f0: float, f1: float, f2: float, f3: float = 0.0) -> "JetN":
        return JetN(f0, f1 * self.grad, f1 * self.hess + f2 * np.outer(self.grad, self.grad))

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return JetN(self.value + other.value, self.grad + other.grad, self.hess + other.hess)

    def __neg__(self):
        return JetN(-self.value, -self.grad, -self.hess)

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        cross = np.outer(self.grad, other.grad)
        return JetN(
            self.value * other.value,
            self.value * other.grad + other.value * self.grad,
            self.value * other.hess + other.value * self.hess + cross + cross.T,
        )

    def __repr__(self) -> str:
        return f"JetN(value={self.value!r}, grad={self.grad.tolist()!r}, hess={self.hess.tolist()!r})"


Jet = Union[Jet1, JetN]


# ---------------------------------------------------------------------------
# Elementary functions on floats, complex numbers and jets
# ---------------------------------------------------------------------------

def _log_derivatives(a: float):
    if a <= 0.0:
        raise DomainError(f"log of non-positive value {a!r}")
    return (math.log(a), 1.0 / a, -1.0 / a ** 2, 2.0 / a ** 3)


def _sqrt_derivatives(a: float):
    if a <= 0.0:
        raise DomainError(f"sqrt of non-positive value {a!r}")
    r = math.sqrt(a)
    return (r, 0.5 / r, -0.25 / (a * r), 0.375 / (a * a * r))


def _exp_derivatives(a: float):
    e = math.exp(a)
    return (e, e, e, e)


def _power_derivatives(a: float, p: float):
    integral = float(p).is_integer()
    if a < 0.0 and not integral:
        raise DomainError(f"non-integer power {p!r} of negative value {a!r}")
    coefficients = (1.0, p, p * (p - 1.0), p * (p - 1.0) * (p - 2.0))
    terms = []
    for order, coefficient in enumerate(coefficients):
        if coefficient == 0.0:
            terms.append(0.0)
            continue
        exponent = p - order
        if a == 0.0 and exponent < 0.0:
            raise DomainError("division by zero" if order == 0 else f"power {p!r} not differentiable at 0")
        terms.append(coefficient * a ** exponent)
    return tuple(terms)


def log(a):
    if isinstance(a, _JetArithmetic):
        return a.compose(*_log_derivatives(a.value))
    if isinstance(a, complex):
        if a == 0:
            raise DomainError("log of zero")
        return cmath.log(a)
    return _log_derivatives(float(a))[0]


def exp(a):
    if isinstance(a, _JetArithmetic):
        return a.compose(*_exp_derivatives(a.value))
    if isinstance(a, complex):
        return cmath.exp(a)
    return math.exp(float(a))


def sqrt(a):
    if isinstance(a, _JetArithmetic):
        return a.compose(*_sqrt_derivatives(a.value))
    if isinstance(a, complex):
        return cmath.sqrt(a)
    a = float(a)
    if a < 0.0:
        raise DomainError(f"sqrt of negative value {a!r}")
    return math.sqrt(a)


def power(a, p: float):
    if isinstance(a, _JetArithmetic):
        return a.compose(*_power_derivatives(a.value, float(p)))
    if isinstance(a, complex):
        if a == 0 and p < 0:
            raise DomainError("division by zero")
        return a ** p
    a, p = float(a), float(p)
    if a < 0.0 and not p.is_integer():
        raise DomainError(f"non-integer power {p!r} of negative value {a!r}")
    if a == 0.0 and p < 0.0:
        raise DomainError("division by zero")
    return a ** p


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------

_FUNCTIONS = {"log": sympy.log, "exp": sympy.exp, "sqrt": sympy.sqrt}
_SYMBOLS = {name: sympy.Symbol(name, real=True)
            for name in ("x",) + tuple(f"x{k}" for k in range(10))}
_GLOBALS = {
    "Integer": sympy.Integer,
    "Float": sympy.Float,
    "Rational": sympy.Rational,
    "Symbol": sympy.Symbol,
    "Function": sympy.Function,
    "__builtins__": {},
}
_TRANSFORMATIONS = standard_transformations + (convert_xor,)


def variable_symbol(name: str = "x") -> sympy.Symbol:
    """The sympy symbol expressions use for variable ``name``."""
    return _SYMBOLS[name]


def _constant(node: sympy.Expr) -> float:
    try:
        return float(node)
    except (TypeError, ValueError):
        raise DomainError(f"expression constant {node} is not a finite real number",
                          expression=str(node)) from None


def _variable_index(name: str) -> int:
    return int(name[1:]) if len(name) > 1 else -1


class Expression:
    """A parsed arithmetic expression that evaluates on floats, complex numbers and jets.

    Grammar: numbers, ``x`` or ``x0``..``x9``, ``+ - * / ^``, parentheses,
    ``log``, ``exp`` and ``sqrt``.
    """

    def __init__(self, tree: sympy.Expr, variables: Sequence[str], text: Optional[str] = None):
        self.tree = tree
        self.variables = tuple(variables)
        self.text = text if text is not None else str(tree)
        self._symbols = tuple(_SYMBOLS[name] for name in self.variables)

    @classmethod
    def parse(cls, text: str, n: Optional[int] = None) -> "Expression":
        """Parse ``text``; ``n`` fixes the number of indexed variables."""
        if not isinstance(text, str) or not text.strip():
            raise ExpressionError("empty expression")
        local_dict = dict(_FUNCTIONS)
        local_dict.update(_SYMBOLS)
        try:
            tree = parse_expr(text, local_dict=local_dict, global_dict=dict(_GLOBALS),
                              transformations=_TRANSFORMATIONS)
        except Exception as err:
            raise ExpressionError(f"cannot parse expression {text!r}: {err}") from err
        if not isinstance(tree, sympy.Expr):
            raise ExpressionError(f"expression {text!r} is not arithmetic")
        cls._validate(tree, text)

        used = sorted((symbol.name for symbol in tree.free_symbols), key=_variable_index)
        if "x" in used and len(used) > 1:
            raise ExpressionError(f"expression {text!r} mixes x with indexed variables")
        indexed = [name for name in used if name != "x"]
        if n is None:
            if indexed:
                base = 0 if "x0" in indexed else 1
                n = _variable_index(indexed[-1]) - base + 1
            else:
                n = 1
        if n == 1 and not indexed:
            variables = ("x",)
        else:
            base = 0 if "x0" in indexed else 1
            variables = tuple(f"x{base + k}" for k in range(n))
            missing = set(indexed) - set(variables)
            if missing or "x" in used:
                raise ExpressionError(f"expression {text!r} uses variables outside {variables}")
        return cls(tree, variables, text)

    @staticmethod
    def _validate(tree: sympy.Expr, text: str) -> None:
        for node in sympy.preorder_traversal(tree):
            if node.is_Symbol:
                if node.name not in _SYMBOLS:
                    raise ExpressionError(f"unknown name {node.name!r} in {text!r}")
            elif node.is_number or node.is_Add or node.is_Mul or node.is_Pow:
                continue
            elif isinstance(node, (sympy.log, sympy.exp)):
                continue
            else:
                raise ExpressionError(f"unsupported construct {node.func.__name__} in {text!r}")

    @property
    def n(self) -> int:
        return len(self.variables)

    def diff(self, variable: Optional[str] = None) -> "Expression":
        variable = variable or self.variables[0]
        derivative = sympy.diff(self.tree, _SYMBOLS[variable])
        return Expression(derivative, self.variables)

    def __call__(self, *args):
        if len(args) != len(self.variables):
            raise TypeError(f"{self.text!r} expects {len(self.variables)} argument(s), got {len(args)}")
        return self._evaluate(self.tree, dict(zip(self._symbols, args)))

    def _evaluate(self, node, env):
        try:
            if node.is_Symbol:
                return env[node]
            if node.is_number:
                return _constant(node)
            if node.is_Add:
                return reduce(operator.add, (self._evaluate(arg, env) for arg in node.args))
            if node.is_Mul:
                return reduce(operator.mul, (self._evaluate(arg, env) for arg in node.args))
            if node.is_Pow:
                base, exponent = node.args
                if exponent.is_number:
                    return power(self._evaluate(base, env), _constant(exponent))
                return exp(self._evaluate(exponent, env) * log(self._evaluate(base, env)))
            if isinstance(node, sympy.log):
                return log(self._evaluate(node.args[0], env))
            if isinstance(node, sympy.exp):
                return exp(self._evaluate(node.args[0], env))
        except DomainError as err:
            if err.expression is None:
                raise DomainError(f"{err} in sub-expression '{node}'", expression=str(node)) from None
            raise
        raise ExpressionError(f"unsupported construct {node.func.__name__}")

    def __str__(self) -> str:
        return self.text

    def __repr__(self) -> str:
        return f"Expression({self.text!r}, variables={self.variables!r})"


ExpressionLike = Union[str, Expression, Callable[..., Any]]


def as_expression(expr: ExpressionLike, n: Optional[int] = None) -> Callable[..., Any]:
    if isinstance(expr, str):
        return Expression.parse(expr, n=n)
    if callable(expr):
        return expr
    raise ExpressionError(f"not an expression: {expr!r}")


def jet1_compose(expr: ExpressionLike, at: float) -> Jet1:
    """Evaluate a univariate expression on the identity jet at ``at``."""
    result = as_expression(expr)(Jet1.variable(at))
    if not isinstance(result, Jet1):
        result = Jet1.constant(result)
    return result


def jetn_eval(expr: ExpressionLike, at: Sequence[float]) -> JetN:
    """Evaluate an n-variate expression on the coordinate jets at ``at``."""
    at = np.asarray(at, dtype=float).ravel()
    result = as_expression(expr, n=at.size)(*JetN.variables(at))
    if not isinstance(result, JetN):
        result = JetN.constant(result, at.size)
    return result


def _default_step(at) -> float:
    return 1e-6 * max(1.0, float(np.max(np.abs(at))))


def fd_check_jets(evaluator: Callable[[Any], Jet], at, h: Optional[float] = None) -> float:
    """Compare a point-wise jet evaluator against central differences.

    Order 1 is differenced from the value and order 2 from order 1, so both comparisons
    use the same first-order central stencil.
    """
    at_array = np.asarray(at, dtype=float)
    h = _default_step(at_array) if h is None else float(h)
    if h <= 0.0:
        raise ValueError("finite-difference step must be positive")
    if np.any(at_array + h == at_array):
        raise ValueError(f"finite-difference step {h!r} underflows at {at!r}")

    if at_array.ndim == 0:
        x = float(at_array)
        centre, plus, minus = evaluator(x), evaluator(x + h), evaluator(x - h)
        d1 = (plus.value - minus.value) / (2.0 * h)
        d2 = (plus.d1 - minus.d1) / (2.0 * h)
        return max(abs(centre.d1 - d1), abs(centre.d2 - d2))

    centre = evaluator(at_array)
    grad_fd = np.zeros(at_array.size)
    hess_fd = np.zeros((at_array.size, at_array.size))
    for k in range(at_array.size):
        step = np.zeros(at_array.size)
        step[k] = h
        plus, minus = evaluator(at_array + step), evaluator(at_array - step)
        grad_fd[k] = (plus.value - minus.value) / (2.0 * h)
        hess_fd[:, k] = (plus.grad - minus.grad) / (2.0 * h)
    return float(max(np.max(np.abs(centre.grad - grad_fd)), np.max(np.abs(centre.hess - hess_fd))))


def fd_check(expr: ExpressionLike, at, h: Optional[float] = None) -> float:
    """Max discrepancy between the jets of ``expr`` and central finite differences."""
    if np.ndim(at) == 0:
        return fd_check_jets(lambda x: jet1_compose(expr, x), at, h)
    n = np.size(at)
    fn = as_expression(expr, n=n)
    return fd_check_jets(lambda point: jetn_eval(fn, point), at, h)
