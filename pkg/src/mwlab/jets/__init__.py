"""Order-2 jets of chart maps and finite-difference derivatives of fields.

The scalar :class:`Jet` comes from the compiled extension when it is built and
importable; otherwise the numpy implementation is used. Set ``MWL_PURE_PYTHON=1``
to force the fallback.
"""
import math
import os
from dataclasses import dataclass

import numpy as np

from . import _jetcore_py

if os.environ.get("MWL_PURE_PYTHON", "") not in ("", "0"):
    _core = _jetcore_py
else:
    try:
        from . import _jetcore as _core
    except ImportError:  # extension not built
        _core = _jetcore_py

Jet = _core.Jet
BACKEND = "compiled" if _core is not _jetcore_py else "python"

# both backends raise a subclass of ArithmeticError carrying ``expr``
JetDomainError = (_core.JetDomainError, _jetcore_py.JetDomainError)
JET_TYPES = (_core.Jet, _jetcore_py.Jet)


class EvaluationError(ValueError):
    """A domain violation while evaluating a map, with the offending sub-expression."""

    def __init__(self, message, expr=None):
        super().__init__(message if expr is None else f"{message} in {expr!r}")
        self.expr = expr


def _lift(name, fn):
    def f(x):
        if isinstance(x, JET_TYPES):
            return getattr(x, name)()
        try:
            return fn(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise EvaluationError(f"{name}({x!r}): {exc}") from None

    f.__name__ = name
    return f


sin = _lift("sin", math.sin)
cos = _lift("cos", math.cos)
tan = _lift("tan", math.tan)
exp = _lift("exp", math.exp)
log = _lift("log", math.log)
sqrt = _lift("sqrt", math.sqrt)
atan = _lift("atan", math.atan)


def power(x, y):
    """``x ** y`` for jets or floats."""
    return x**y


@dataclass(frozen=True)
class MapJet:
    """Order-2 jet of a vector-valued map at one chart point.

    ``value`` has shape (n,), ``grad`` (n, m) and ``hess`` (n, m, m) with each
    ``hess[k]`` exactly symmetric.
    """

    point: np.ndarray
    value: np.ndarray
    grad: np.ndarray
    hess: np.ndarray

    @property
    def dim(self):
        return self.grad.shape[1]

    @classmethod
    def stack(cls, point, components):
        m = len(point)
        vals, grads, hesses = [], [], []
        for c in components:
            if isinstance(c, JET_TYPES):
                vals.append(c.value)
                grads.append(c.grad)
                hesses.append(c.hess)
            else:  # constant component
                vals.append(float(c))
                grads.append(np.zeros(m))
                hesses.append(np.zeros((m, m)))
        return cls(
            np.asarray(point, dtype=float),
            np.array(vals),
            np.array(grads).reshape(len(vals), m),
            np.array(hesses).reshape(len(vals), m, m),
        )


def seed(point):
    """Coordinate jets ``u_1..u_m`` at ``point``."""
    m = len(point)
    return [Jet.variable(float(x), i, m) for i, x in enumerate(point)]


def jet_lift(fn, point):
    """Evaluate ``fn`` (a function of the chart variables built from jet-aware
    operations) at ``point`` and return its jet.

    ``fn`` receives the list of coordinate jets and returns a scalar or a
    sequence of scalars. Domain violations surface as :class:`EvaluationError`.
    """
    point = np.atleast_1d(np.asarray(point, dtype=float))
    try:
        out = fn(seed(point))
    except JetDomainError as exc:
        raise EvaluationError(str(exc), getattr(exc, "expr", None)) from None
    except ZeroDivisionError as exc:
        raise EvaluationError(str(exc)) from None
    if isinstance(out, JET_TYPES) or np.isscalar(out):
        out = [out]
    return MapJet.stack(point, out)


from .fd import FieldDerivativeSpec, StencilError, field_derivative  # noqa: E402

__all__ = [
    "BACKEND",
    "EvaluationError",
    "FieldDerivativeSpec",
    "Jet",
    "JetDomainError",
    "MapJet",
    "StencilError",
    "atan",
    "cos",
    "exp",
    "field_derivative",
    "jet_lift",
    "log",
    "power",
    "seed",
    "sin",
    "sqrt",
    "tan",
]
