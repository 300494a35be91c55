# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled order-2 jet arithmetic.

Coefficients are stored flat: value, gradient (dim), upper-triangular Hessian
(dim*(dim+1)/2, row-major).
"""
from libc.math cimport sin as c_sin, cos as c_cos, tan as c_tan, exp as c_exp
from libc.math cimport log as c_log, sqrt as c_sqrt, atan as c_atan, pow as c_pow
from libc.math cimport floor
from libc.stdlib cimport malloc, free

import numpy as np


class JetDomainError(ArithmeticError):
    """Raised when an elementary function is evaluated outside its domain."""

    def __init__(self, message, expr=None):
        super().__init__(message)
        self.expr = expr


cdef inline int _ncoef(int m):
    return 1 + m + (m * (m + 1)) // 2


cdef class Jet:
    """Value, gradient and Hessian of a scalar function of ``dim`` chart variables."""

    cdef double* c
    cdef int m
    cdef int n

    def __cinit__(self, *args, **kwargs):
        self.c = NULL
        self.m = 0
        self.n = 0

    def __dealloc__(self):
        if self.c != NULL:
            free(self.c)

    def __init__(self, value, grad, hess):
        g = np.asarray(grad, dtype=float).reshape(-1)
        cdef int m = g.size
        h = np.asarray(hess, dtype=float).reshape(m, m)
        h = 0.5 * (h + h.T)
        _alloc(self, m)
        self.c[0] = float(value)
        cdef int i, j, k = 1 + m
        for i in range(m):
            self.c[1 + i] = g[i]
        for i in range(m):
            for j in range(i, m):
                self.c[k] = h[i, j]
                k += 1

    @classmethod
    def variable(cls, double x, int index, int dim):
        cdef Jet r = _new(dim)
        r.c[0] = x
        r.c[1 + index] = 1.0
        return r

    @classmethod
    def constant(cls, double value, int dim):
        cdef Jet r = _new(dim)
        r.c[0] = value
        return r

    @property
    def dim(self):
        return self.m

    @property
    def value(self):
        return self.c[0]

    @property
    def grad(self):
        cdef int i
        return np.array([self.c[1 + i] for i in range(self.m)], dtype=float)

    @property
    def hess(self):
        cdef int i, j, k = 1 + self.m
        h = np.empty((self.m, self.m))
        for i in range(self.m):
            for j in range(i, self.m):
                h[i, j] = self.c[k]
                h[j, i] = self.c[k]
                k += 1
        return h

    def __repr__(self):
        return f"Jet(value={self.value!r}, grad={self.grad.tolist()!r})"

    def __reduce__(self):
        return (Jet, (self.value, self.grad, self.hess))

    def __add__(self, other):
        if isinstance(other, Jet):
            return _add(self, <Jet>other, 1.0)
        return _shift(self, float(other), 1.0)

    def __radd__(self, other):
        return _shift(self, float(other), 1.0)

    def __sub__(self, other):
        if isinstance(other, Jet):
            return _add(self, <Jet>other, -1.0)
        return _shift(self, -float(other), 1.0)

    def __rsub__(self, other):
        return _shift(self, float(other), -1.0)

    def __neg__(self):
        return _shift(self, 0.0, -1.0)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, Jet):
            return _mul(self, <Jet>other)
        return _shift(self, 0.0, float(other))

    def __rmul__(self, other):
        return _shift(self, 0.0, float(other))

    def reciprocal(self):
        cdef double v = self.c[0]
        if v == 0.0:
            raise JetDomainError("division by zero")
        return _unary(self, 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return _mul(self, (<Jet>other).reciprocal())
        cdef double d = float(other)
        if d == 0.0:
            raise JetDomainError("division by zero")
        return _shift(self, 0.0, 1.0 / d)

    def __rtruediv__(self, other):
        return _shift(self.reciprocal(), 0.0, float(other))

    def __pow__(self, other, mod):
        if isinstance(other, Jet):
            return (self.log() * other).exp()
        cdef double p = float(other)
        cdef double v = self.c[0]
        cdef int k
        if p == 0.0:
            return _new(self.m)._set0(1.0)
        if p == floor(p) and -64.0 < p < 64.0:
            k = <int>p
            if k < 0 and v == 0.0:
                raise JetDomainError("division by zero")
            return _unary(self, _ipow(v, k), k * _ipow(v, k - 1),
                          (k * (k - 1)) * _ipow(v, k - 2) if k != 1 else 0.0)
        if v <= 0.0:
            raise JetDomainError(f"non-integer power {p!r} of non-positive value {v!r}")
        return _unary(self, c_pow(v, p), p * c_pow(v, p - 1.0),
                      p * (p - 1.0) * c_pow(v, p - 2.0))

    def __rpow__(self, other, mod):
        cdef double b = float(other)
        if b <= 0.0:
            raise JetDomainError(f"power with non-positive base {b!r}")
        return _shift(self, 0.0, c_log(b)).exp()

    cdef Jet _set0(self, double v):
        self.c[0] = v
        return self

    def sin(self):
        cdef double s = c_sin(self.c[0]), co = c_cos(self.c[0])
        return _unary(self, s, co, -s)

    def cos(self):
        cdef double s = c_sin(self.c[0]), co = c_cos(self.c[0])
        return _unary(self, co, -s, -co)

    def tan(self):
        if c_cos(self.c[0]) == 0.0:
            raise JetDomainError("tan at a pole")
        cdef double t = c_tan(self.c[0])
        cdef double sec2 = 1.0 + t * t
        return _unary(self, t, sec2, 2.0 * t * sec2)

    def exp(self):
        cdef double e = c_exp(self.c[0])
        return _unary(self, e, e, e)

    def log(self):
        cdef double v = self.c[0]
        if v <= 0.0:
            raise JetDomainError(f"log of non-positive value {v!r}")
        return _unary(self, c_log(v), 1.0 / v, -1.0 / (v * v))

    def sqrt(self):
        cdef double v = self.c[0]
        if v <= 0.0:
            raise JetDomainError(f"sqrt of non-positive value {v!r}")
        cdef double r = c_sqrt(v)
        return _unary(self, r, 0.5 / r, -0.25 / (r * v))

    def atan(self):
        cdef double v = self.c[0]
        cdef double d = 1.0 / (1.0 + v * v)
        return _unary(self, c_atan(v), d, -2.0 * v * d * d)


cdef inline double _ipow(double v, int k):
    if k == 0:
        return 1.0
    return c_pow(v, <double>k)


cdef int _alloc(Jet r, int m) except -1:
    cdef int n = _ncoef(m)
    cdef int i
    r.c = <double*>malloc(n * sizeof(double))
    if r.c == NULL:
        raise MemoryError()
    r.m = m
    r.n = n
    for i in range(n):
        r.c[i] = 0.0
    return 0


cdef Jet _new(int m):
    cdef Jet r = Jet.__new__(Jet)
    _alloc(r, m)
    return r


cdef Jet _add(Jet a, Jet b, double sign):
    if a.m != b.m:
        raise ValueError(f"jet dimension mismatch: {a.m} vs {b.m}")
    cdef Jet r = _new(a.m)
    cdef int i
    for i in range(a.n):
        r.c[i] = a.c[i] + sign * b.c[i]
    return r


# r = offset + scale * a
cdef Jet _shift(Jet a, double offset, double scale):
    cdef Jet r = _new(a.m)
    cdef int i
    for i in range(a.n):
        r.c[i] = scale * a.c[i]
    r.c[0] += offset
    return r


cdef Jet _mul(Jet a, Jet b):
    if a.m != b.m:
        raise ValueError(f"jet dimension mismatch: {a.m} vs {b.m}")
    cdef int m = a.m
    cdef Jet r = _new(m)
    cdef double av = a.c[0], bv = b.c[0]
    cdef double* ag = a.c + 1
    cdef double* bg = b.c + 1
    cdef int i, j, k = 1 + m
    r.c[0] = av * bv
    for i in range(m):
        r.c[1 + i] = av * bg[i] + bv * ag[i]
    for i in range(m):
        for j in range(i, m):
            r.c[k] = av * b.c[k] + bv * a.c[k] + ag[i] * bg[j] + ag[j] * bg[i]
            k += 1
    return r


cdef Jet _unary(Jet a, double f0, double f1, double f2):
    cdef int m = a.m
    cdef Jet r = _new(m)
    cdef double* ag = a.c + 1
    cdef int i, j, k = 1 + m
    r.c[0] = f0
    for i in range(m):
        r.c[1 + i] = f1 * ag[i]
    for i in range(m):
        for j in range(i, m):
            r.c[k] = f1 * a.c[k] + f2 * ag[i] * ag[j]
            k += 1
    return r
