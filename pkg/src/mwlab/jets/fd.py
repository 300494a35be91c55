"""Central differences with Richardson extrapolation for sampled chart fields."""
from dataclasses import dataclass

import numpy as np

# (offsets, weights) of the 1D stencils; derivative = sum(w * f(x + o*h)) / h**k
_FIRST = {
    2: ((-1, 1), (-0.5, 0.5)),
    4: ((-2, -1, 1, 2), (1 / 12, -8 / 12, 8 / 12, -1 / 12)),
}
_SECOND = {
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    4: ((-2, -1, 0, 1, 2), (-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12)),
}


class StencilError(ValueError):
    """A finite-difference stencil point could not be evaluated."""

    def __init__(self, point, reason):
        super().__init__(f"stencil point {np.asarray(point).tolist()} failed: {reason}")
        self.point = np.asarray(point)


@dataclass(frozen=True)
class FieldDerivativeSpec:
    step: float = 1e-3
    richardson_levels: int = 2
    scheme: int = 4

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if self.richardson_levels not in (1, 2, 3):
            raise ValueError("richardson_levels must be 1, 2 or 3")
        if self.scheme not in (2, 4):
            raise ValueError("scheme must be 2 or 4")


DEFAULT_SPEC = FieldDerivativeSpec()


def _evaluate(sampler, x, domain):
    if domain is not None:
        lo, hi = domain
        if np.any(x < lo) or np.any(x > hi):
            raise StencilError(x, "outside the chart domain")
    try:
        return np.asarray(sampler(x), dtype=float)
    except (ArithmeticError, ValueError) as exc:
        raise StencilError(x, exc) from None


def _stencil_1d(sampler, x0, axis, h, table, domain):
    offsets, weights = table
    acc = 0.0
    for o, w in zip(offsets, weights):
        x = x0.copy()
        x[axis] += o * h
        acc = acc + w * _evaluate(sampler, x, domain)
    return acc


def _raw_estimate(sampler, x0, index, direction, h, scheme, domain):
    if direction is not None:
        offsets, weights = _FIRST[scheme]
        acc = 0.0
        for o, w in zip(offsets, weights):
            acc = acc + w * _evaluate(sampler, x0 + o * h * direction, domain)
        return acc / h
    if len(index) == 1:
        return _stencil_1d(sampler, x0, index[0], h, _FIRST[scheme], domain) / h
    a, b = index
    if a == b:
        return _stencil_1d(sampler, x0, a, h, _SECOND[scheme], domain) / (h * h)
    offsets, weights = _FIRST[scheme]
    acc = 0.0
    for o, w in zip(offsets, weights):
        x = x0.copy()
        x[a] += o * h
        acc = acc + w * _stencil_1d(sampler, x, b, h, _FIRST[scheme], domain)
    return acc / (h * h)


def field_derivative(sampler, point, index=(0,), spec=DEFAULT_SPEC, direction=None, domain=None):
    """Differentiate a sampled field by central differences.

    ``index`` is a multi-index of chart axes: ``(a,)`` for a first partial,
    ``(a, b)`` for a second partial. Passing ``direction`` (a chart vector)
    instead gives the first directional derivative. ``domain`` is an optional
    ``(lo, hi)`` box; a stencil point outside it, or one at which the sampler
    raises, produces :class:`StencilError`.

    Central stencils have an even error expansion, so successive halvings of the
    step are combined with the factors ``2**scheme``, ``2**(scheme+2)``, ...
    """
    x0 = np.atleast_1d(np.asarray(point, dtype=float))
    if direction is not None:
        direction = np.asarray(direction, dtype=float)
    else:
        index = tuple(int(i) for i in index)
        if len(index) not in (1, 2) or any(i < 0 or i >= x0.size for i in index):
            raise ValueError(f"bad multi-index {index} for a {x0.size}-dimensional chart")
    if domain is not None:
        domain = (np.asarray(domain[0], dtype=float), np.asarray(domain[1], dtype=float))

    levels = spec.richardson_levels
    table = [
        _raw_estimate(sampler, x0, index, direction, spec.step / 2**k, spec.scheme, domain)
        for k in range(levels)
    ]
    for j in range(1, levels):
        factor = 2.0 ** (spec.scheme + 2 * (j - 1))
        table = [(factor * table[k + 1] - table[k]) / (factor - 1.0) for k in range(len(table) - 1)]
    return table[0]


def field_gradient(sampler, point, spec=DEFAULT_SPEC, domain=None):
    x0 = np.atleast_1d(np.asarray(point, dtype=float))
    return np.array([field_derivative(sampler, x0, (a,), spec, domain=domain) for a in range(x0.size)])


def field_hessian(sampler, point, spec=DEFAULT_SPEC, domain=None):
    x0 = np.atleast_1d(np.asarray(point, dtype=float))
    m = x0.size
    first = field_derivative(sampler, x0, (0,), spec, domain=domain)
    out = np.zeros((m, m) + np.shape(first))
    for a in range(m):
        for b in range(a, m):
            out[a, b] = out[b, a] = field_derivative(sampler, x0, (a, b), spec, domain=domain)
    return out


class CachedSampler:
    """Memoize a sampler on exact chart coordinates (stencils revisit points)."""

    def __init__(self, sampler):
        self.sampler = sampler
        self.cache = {}

    def __call__(self, x):
        key = tuple(np.asarray(x, dtype=float).tolist())
        if key not in self.cache:
            self.cache[key] = self.sampler(np.array(key))
        return self.cache[key]
