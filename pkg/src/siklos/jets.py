"""Order-2 forward-mode automatic differentiation.

A :class:`Jet2` carries the value, gradient and Hessian of a scalar function
of ``n`` independent variables. Arithmetic and the elementary functions below
propagate all three exactly (product, quotient and chain rules), so any
expression built from them yields its first and second partial derivatives.

    >>> x, y, z = seed([3.0, 1.0, 2.0])
    >>> f = x * x
    >>> f.value, f.grad[0], f.hess[0, 0]
    (9.0, 6.0, 2.0)
"""

from __future__ import annotations

import math
from numbers import Integral, Real

import numpy as np

from .errors import DivisionByZero, DomainError

__all__ = [
    "Jet2",
    "seed",
    "constant",
    "exp",
    "ln",
    "sin",
    "cos",
    "sinh",
    "cosh",
    "sqrt",
    "FUNCTIONS",
]


class Jet2:
    """Value, gradient and (symmetric) Hessian of a scalar at a point."""

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value, grad, hess):
        self.value = float(value)
        self.grad = np.asarray(grad, dtype=float)
        self.hess = np.asarray(hess, dtype=float)

    @property
    def n(self) -> int:
        return self.grad.shape[0]

    def __repr__(self):
        return f"Jet2(value={self.value!r}, grad={self.grad.tolist()!r}, hess={self.hess.tolist()!r})"

    # -- helpers -----------------------------------------------------------

    def _lift(self, other) -> Jet2:
        if isinstance(other, Jet2):
            if other.n != self.n:
                raise ValueError(f"jet arity mismatch: {self.n} vs {other.n}")
            return other
        if isinstance(other, Real):
            return constant(float(other), self.n)
        return NotImplemented

    def _chain(self, f0: float, f1: float, f2: float) -> Jet2:
        """Compose a scalar function with value f0, f' = f1, f'' = f2 at self.value."""
        g = self.grad
        return Jet2(f0, f1 * g, f1 * self.hess + f2 * np.outer(g, g))

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return Jet2(self.value + other.value, self.grad + other.grad, self.hess + other.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.value, -self.grad, -self.hess)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return Jet2(self.value - other.value, self.grad - other.grad, self.hess - other.hess)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Real):
            c = float(other)
            return Jet2(self.value * c, self.grad * c, self.hess * c)
        other = self._lift(other)
        if other is NotImplemented:
            return other
        a, b = self, other
        cross = np.outer(a.grad, b.grad)
        return Jet2(
            a.value * b.value,
            a.value * b.grad + b.value * a.grad,
            a.value * b.hess + b.value * a.hess + cross + cross.T,
        )

    __rmul__ = __mul__

    def reciprocal(self) -> Jet2:
        v = self.value
        if v == 0.0:
            raise DivisionByZero("jet division by zero")
        r = 1.0 / v
        return self._chain(r, -r * r, 2.0 * r * r * r)

    def __truediv__(self, other):
        if isinstance(other, Real):
            if other == 0:
                raise DivisionByZero("jet division by zero")
            return self * (1.0 / float(other))
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, exponent):
        if isinstance(exponent, Jet2):
            if not exponent.grad.any() and not exponent.hess.any():
                return self ** exponent.value
            if self.value <= 0.0:
                raise DomainError(f"power with variable exponent needs a positive base, got {self.value}")
            return exp(exponent * ln(self))
        if isinstance(exponent, Integral) or (isinstance(exponent, Real) and float(exponent).is_integer()):
            return self.ipow(int(exponent))
        if isinstance(exponent, Real):
            if self.value <= 0.0:
                raise DomainError(
                    f"fractional power {exponent} of non-positive base {self.value}"
                )
            return exp(float(exponent) * ln(self))
        return NotImplemented

    def __rpow__(self, base):
        base = float(base)
        if base <= 0.0:
            raise DomainError(f"power with variable exponent needs a positive base, got {base}")
        return exp(self * math.log(base))

    def ipow(self, k: int) -> Jet2:
        """Integer power by repeated squaring; negative k via the reciprocal."""
        if k < 0:
            return self.ipow(-k).reciprocal()
        result = constant(1.0, self.n)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result


def seed(values) -> list[Jet2]:
    """Independent variables at ``values``: variable i has grad e_i and zero Hessian."""
    values = [float(v) for v in values]
    n = len(values)
    eye = np.eye(n)
    return [Jet2(v, eye[i], np.zeros((n, n))) for i, v in enumerate(values)]


def constant(c: float, n: int) -> Jet2:
    return Jet2(c, np.zeros(n), np.zeros((n, n)))


# Elementary functions accept plain floats too, so the same expression code can
# run on values only.


def exp(a):
    if isinstance(a, Jet2):
        e = math.exp(a.value)
        return a._chain(e, e, e)
    return math.exp(a)


def ln(a):
    v = a.value if isinstance(a, Jet2) else float(a)
    if v <= 0.0:
        raise DomainError(f"ln of non-positive value {v}")
    if isinstance(a, Jet2):
        return a._chain(math.log(v), 1.0 / v, -1.0 / (v * v))
    return math.log(v)


def sin(a):
    if isinstance(a, Jet2):
        s, c = math.sin(a.value), math.cos(a.value)
        return a._chain(s, c, -s)
    return math.sin(a)


def cos(a):
    if isinstance(a, Jet2):
        s, c = math.sin(a.value), math.cos(a.value)
        return a._chain(c, -s, -c)
    return math.cos(a)


def sinh(a):
    if isinstance(a, Jet2):
        s, c = math.sinh(a.value), math.cosh(a.value)
        return a._chain(s, c, s)
    return math.sinh(a)


def cosh(a):
    if isinstance(a, Jet2):
        s, c = math.sinh(a.value), math.cosh(a.value)
        return a._chain(c, s, c)
    return math.cosh(a)


def sqrt(a):
    v = a.value if isinstance(a, Jet2) else float(a)
    if v <= 0.0:
        # the derivative blows up at 0, so exclude it as well
        raise DomainError(f"sqrt of non-positive value {v}")
    r = math.sqrt(v)
    if isinstance(a, Jet2):
        return a._chain(r, 0.5 / r, -0.25 / (r * v))
    return r


FUNCTIONS = {
    "exp": exp,
    "ln": ln,
    "sin": sin,
    "cos": cos,
    "sinh": sinh,
    "cosh": cosh,
    "sqrt": sqrt,
}
