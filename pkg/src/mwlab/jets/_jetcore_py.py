"""Pure-Python order-2 jet arithmetic (fallback for the compiled core)."""
import math

import numpy as np


class JetDomainError(ArithmeticError):
    """Raised when an elementary function is evaluated outside its domain."""

    def __init__(self, message, expr=None):
        super().__init__(message)
        self.expr = expr


class Jet:
    """Value, gradient and Hessian of a scalar function of ``dim`` chart variables."""

    __slots__ = ("_v", "_g", "_h")

    def __init__(self, value, grad, hess):
        self._v = float(value)
        self._g = np.asarray(grad, dtype=float).reshape(-1)
        h = np.asarray(hess, dtype=float).reshape(self._g.size, self._g.size)
        self._h = 0.5 * (h + h.T)

    @classmethod
    def _raw(cls, v, g, h):
        obj = cls.__new__(cls)
        obj._v = v
        obj._g = g
        obj._h = h
        return obj

    @classmethod
    def variable(cls, x, index, dim):
        g = np.zeros(dim)
        g[index] = 1.0
        return cls._raw(float(x), g, np.zeros((dim, dim)))

    @classmethod
    def constant(cls, c, dim):
        return cls._raw(float(c), np.zeros(dim), np.zeros((dim, dim)))

    @property
    def dim(self):
        return self._g.size

    @property
    def value(self):
        return self._v

    @property
    def grad(self):
        return self._g.copy()

    @property
    def hess(self):
        return self._h.copy()

    def __repr__(self):
        return f"Jet(value={self._v!r}, grad={self._g.tolist()!r})"

    # chain rule for a scalar function with derivatives f1, f2 at the value
    def _unary(self, f0, f1, f2):
        g = self._g
        return Jet._raw(f0, f1 * g, f1 * self._h + f2 * np.outer(g, g))

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet._raw(self._v + other._v, self._g + other._g, self._h + other._h)
        return Jet._raw(self._v + other, self._g.copy(), self._h.copy())

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet):
            return Jet._raw(self._v - other._v, self._g - other._g, self._h - other._h)
        return Jet._raw(self._v - other, self._g.copy(), self._h.copy())

    def __rsub__(self, other):
        return Jet._raw(other - self._v, -self._g, -self._h)

    def __neg__(self):
        return Jet._raw(-self._v, -self._g, -self._h)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, Jet):
            a, b = self, other
            cross = np.outer(a._g, b._g)
            return Jet._raw(
                a._v * b._v,
                a._v * b._g + b._v * a._g,
                a._v * b._h + b._v * a._h + cross + cross.T,
            )
        return Jet._raw(self._v * other, self._g * other, self._h * other)

    __rmul__ = __mul__

    def reciprocal(self):
        v = self._v
        if v == 0.0:
            raise JetDomainError("division by zero")
        return self._unary(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        if other == 0:
            raise JetDomainError("division by zero")
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, other):
        if isinstance(other, Jet):
            return (self.log() * other).exp()
        c = float(other)
        v = self._v
        if c == 0.0:
            return Jet.constant(1.0, self.dim)
        if c == int(c) and abs(c) < 64:
            k = int(c)
            if k < 0 and v == 0.0:
                raise JetDomainError("division by zero")
            f0 = v**k
            f1 = k * v ** (k - 1) if k != 0 else 0.0
            f2 = k * (k - 1) * v ** (k - 2) if k not in (0, 1) else 0.0
            return self._unary(f0, f1, f2)
        if v <= 0.0:
            raise JetDomainError(f"non-integer power {c!r} of non-positive value {v!r}")
        return self._unary(v**c, c * v ** (c - 1), c * (c - 1) * v ** (c - 2))

    def __rpow__(self, other):
        if other <= 0:
            raise JetDomainError(f"power with non-positive base {other!r}")
        return (self * math.log(other)).exp()

    def sin(self):
        s, c = math.sin(self._v), math.cos(self._v)
        return self._unary(s, c, -s)

    def cos(self):
        s, c = math.sin(self._v), math.cos(self._v)
        return self._unary(c, -s, -c)

    def tan(self):
        c = math.cos(self._v)
        if c == 0.0:
            raise JetDomainError("tan at a pole")
        t = math.tan(self._v)
        sec2 = 1.0 + t * t
        return self._unary(t, sec2, 2.0 * t * sec2)

    def exp(self):
        e = math.exp(self._v)
        return self._unary(e, e, e)

    def log(self):
        v = self._v
        if v <= 0.0:
            raise JetDomainError(f"log of non-positive value {v!r}")
        return self._unary(math.log(v), 1.0 / v, -1.0 / (v * v))

    def sqrt(self):
        v = self._v
        if v <= 0.0:
            # the value 0 is fine but the derivative is not
            raise JetDomainError(f"sqrt of non-positive value {v!r}")
        r = math.sqrt(v)
        return self._unary(r, 0.5 / r, -0.25 / (r * v))

    def atan(self):
        v = self._v
        d = 1.0 / (1.0 + v * v)
        return self._unary(math.atan(v), d, -2.0 * v * d * d)
