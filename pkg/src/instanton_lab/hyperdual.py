"""Hyper-dual scalars for forward-mode first and second derivatives.

A hyper-dual number carries a value and three perturbation slots,

    x = v + d1*e1 + d2*e2 + d12*e1*e2,      e1**2 = e2**2 = 0,

so arithmetic propagates two first derivatives and one mixed second
derivative exactly (no truncation error).  Seeding both slots on the same
variable turns the mixed slot into an ordinary second derivative.  Values
may be real or complex; all elementary functions used by the metric and
spin-coefficient formulas are provided.
"""

from __future__ import annotations

import cmath
import math


def _is_complex(v):
    return isinstance(v, complex)


class HyperDual:
    """Scalar with two nilpotent derivative slots and their product slot."""

    __slots__ = ("val", "d1", "d2", "d12")

    def __init__(self, val, d1=0.0, d2=0.0, d12=0.0):
        self.val = val
        self.d1 = d1
        self.d2 = d2
        self.d12 = d12

    # -- helpers ----------------------------------------------------------

    @staticmethod
    def lift(x):
        """Wrap a plain number as a constant (zero derivative slots)."""
        if isinstance(x, HyperDual):
            return x
        return HyperDual(x, 0.0, 0.0, 0.0)

    def _chain(self, f0, f1, f2):
        """Apply a scalar function with value f0 and derivatives f1, f2."""
        return HyperDual(
            f0,
            f1 * self.d1,
            f1 * self.d2,
            f1 * self.d12 + f2 * self.d1 * self.d2,
        )

    def __repr__(self):
        return f"HyperDual({self.val!r}, {self.d1!r}, {self.d2!r}, {self.d12!r})"

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        if isinstance(other, HyperDual):
            return HyperDual(self.val + other.val, self.d1 + other.d1,
                             self.d2 + other.d2, self.d12 + other.d12)
        return HyperDual(self.val + other, self.d1, self.d2, self.d12)

    __radd__ = __add__

    def __neg__(self):
        return HyperDual(-self.val, -self.d1, -self.d2, -self.d12)

    def __sub__(self, other):
        if isinstance(other, HyperDual):
            return HyperDual(self.val - other.val, self.d1 - other.d1,
                             self.d2 - other.d2, self.d12 - other.d12)
        return HyperDual(self.val - other, self.d1, self.d2, self.d12)

    def __rsub__(self, other):
        return HyperDual(other - self.val, -self.d1, -self.d2, -self.d12)

    def __mul__(self, other):
        if isinstance(other, HyperDual):
            return HyperDual(
                self.val * other.val,
                self.val * other.d1 + self.d1 * other.val,
                self.val * other.d2 + self.d2 * other.val,
                self.val * other.d12 + self.d12 * other.val
                + self.d1 * other.d2 + self.d2 * other.d1,
            )
        return HyperDual(self.val * other, self.d1 * other,
                         self.d2 * other, self.d12 * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, HyperDual):
            return self * other._reciprocal()
        return HyperDual(self.val / other, self.d1 / other,
                         self.d2 / other, self.d12 / other)

    def __rtruediv__(self, other):
        return self._reciprocal() * other

    def _reciprocal(self):
        v = self.val
        if v == 0:
            raise ZeroDivisionError("hyper-dual division by zero value")
        inv = 1.0 / v
        return self._chain(inv, -inv * inv, 2.0 * inv * inv * inv)

    def __pow__(self, p):
        if isinstance(p, HyperDual):
            raise TypeError("hyper-dual exponents are not supported")
        v = self.val
        if p == 0:
            return HyperDual(1.0 + 0.0 * v)
        if p == 1:
            return self
        if p == 2:
            return self * self
        f0 = v ** p
        f1 = p * v ** (p - 1)
        f2 = p * (p - 1) * v ** (p - 2)
        return self._chain(f0, f1, f2)

    # -- comparisons act on the value slot ----------------------------------

    def __lt__(self, other):
        return self.val < _value_of(other)

    def __le__(self, other):
        return self.val <= _value_of(other)

    def __gt__(self, other):
        return self.val > _value_of(other)

    def __ge__(self, other):
        return self.val >= _value_of(other)


def _value_of(x):
    return x.val if isinstance(x, HyperDual) else x


def _unary(x, real_f, cplx_f, d1_of, d2_of):
    """Build a hyper-dual elementary function from value/derivative rules."""
    if not isinstance(x, HyperDual):
        return cplx_f(x) if _is_complex(x) else real_f(x)
    v = x.val
    f0 = cplx_f(v) if _is_complex(v) else real_f(v)
    return x._chain(f0, d1_of(v, f0), d2_of(v, f0))


def sqrt(x):
    return _unary(x, math.sqrt, cmath.sqrt,
                  lambda v, f: 0.5 / f,
                  lambda v, f: -0.25 / (f * f * f))


def exp(x):
    return _unary(x, math.exp, cmath.exp,
                  lambda v, f: f,
                  lambda v, f: f)


def log(x):
    return _unary(x, math.log, cmath.log,
                  lambda v, f: 1.0 / v,
                  lambda v, f: -1.0 / (v * v))


def sin(x):
    return _unary(x, math.sin, cmath.sin,
                  lambda v, f: cmath.cos(v) if _is_complex(v) else math.cos(v),
                  lambda v, f: -f)


def cos(x):
    return _unary(x, math.cos, cmath.cos,
                  lambda v, f: -(cmath.sin(v) if _is_complex(v) else math.sin(v)),
                  lambda v, f: -f)


def tan(x):
    return sin(x) / cos(x)


def sinh(x):
    return _unary(x, math.sinh, cmath.sinh,
                  lambda v, f: cmath.cosh(v) if _is_complex(v) else math.cosh(v),
                  lambda v, f: f)


def cosh(x):
    return _unary(x, math.cosh, cmath.cosh,
                  lambda v, f: cmath.sinh(v) if _is_complex(v) else math.sinh(v),
                  lambda v, f: f)


def arctan(x):
    return _unary(x, math.atan, cmath.atan,
                  lambda v, f: 1.0 / (1.0 + v * v),
                  lambda v, f: -2.0 * v / (1.0 + v * v) ** 2)


def value(x):
    """Value slot of a hyper-dual (identity on plain numbers)."""
    return _value_of(x)


def seed1(x):
    """Seed the first derivative slot of a coordinate value."""
    return HyperDual(x, 1.0, 0.0, 0.0)


def seed2(x):
    """Seed the second derivative slot of a coordinate value."""
    return HyperDual(x, 0.0, 1.0, 0.0)


def seed_both(x):
    """Seed both slots; the mixed slot then carries d^2/dx^2."""
    return HyperDual(x, 1.0, 1.0, 0.0)


def derive2(f, x):
    """Evaluate ``(f(x), f'(x), f''(x))`` by hyper-dual propagation.

    Parameters
    ----------
    f : callable
        Scalar function of one variable, evaluable on hyper-dual input.
    x : float
        Evaluation point.

    Returns
    -------
    (value, first, second)
        Exact derivatives for rational/elementary compositions, up to
        rounding.
    """
    out = f(seed_both(x))
    if isinstance(out, HyperDual):
        return out.val, out.d1, out.d12
    # f ignored its argument: constant function
    return out, 0.0 * out, 0.0 * out


def derive1(f, x):
    """Evaluate ``(f(x), f'(x))`` by hyper-dual propagation."""
    out = f(seed1(x))
    if isinstance(out, HyperDual):
        return out.val, out.d1
    return out, 0.0 * out


def gradient4(f, point):
    """Value and 4-gradient of a scalar field of four coordinates.

    ``f`` is called as ``f(t, r, theta, phi)`` and must accept hyper-dual
    coordinates.  Returns ``(f(p), [df/dx_a])``.
    """
    coords = list(point)
    grad = [None] * 4
    val = None
    for a in range(4):
        seeded = list(coords)
        seeded[a] = seed1(coords[a])
        out = f(*seeded)
        if isinstance(out, HyperDual):
            val = out.val
            grad[a] = out.d1
        else:
            val = out
            grad[a] = 0.0 * out
    return val, grad


def hessian4(f, point):
    """Value, gradient and symmetric Hessian of a four-coordinate scalar.

    Uses one two-slot evaluation per unordered coordinate pair (10 calls).
    """
    coords = list(point)
    val = None
    grad = [None] * 4
    hess = [[None] * 4 for _ in range(4)]
    for a in range(4):
        for b in range(a, 4):
            seeded = list(coords)
            if a == b:
                seeded[a] = seed_both(coords[a])
            else:
                seeded[a] = seed1(coords[a])
                seeded[b] = seed2(coords[b])
            out = f(*seeded)
            if not isinstance(out, HyperDual):
                out = HyperDual.lift(out)
            val = out.val
            grad[a] = out.d1
            if a == b:
                grad[a] = out.d1
            hess[a][b] = out.d12
            hess[b][a] = out.d12
            if a != b:
                grad[b] = out.d2
    return val, grad, hess
