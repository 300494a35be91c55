"""Parametrized immersions: the example gallery and geometric constructions.

An :class:`Immersion` wraps a function of the chart variables written with
jet-aware arithmetic (``mwlab.jets.sin`` and friends, ``+ - * / **``), so the
same code evaluates plain floats and order-2 jets.
"""
import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import expr as dsl
from . import jets
from .jets import EvaluationError, cos, sin, sqrt

SPHERE_TOL = 1e-10


class GalleryError(ValueError):
    pass


class PoleError(EvaluationError):
    """A point is too close to the projection pole or is sent to infinity."""


@dataclass(frozen=True)
class Immersion:
    """A map from a box in R^m to R^n, optionally constrained to the unit sphere.

    ``ambient`` is ``"euclidean"`` (image in R^n, n = ``embed_dim``) or
    ``"sphere"`` (image in S^(n-1) ⊂ R^n).
    """

    name: str
    chart_dim: int
    embed_dim: int
    ambient: str
    func: Callable = field(repr=False)
    lo: tuple = ()
    hi: tuple = ()
    params: dict = field(default_factory=dict)

    @property
    def sphere(self):
        return self.ambient == "sphere"

    @property
    def curvature(self):
        return 1.0 if self.sphere else 0.0

    @property
    def space_dim(self):
        """Dimension of the ambient space form (R^n or S^(n-1))."""
        return self.embed_dim - 1 if self.sphere else self.embed_dim

    @property
    def domain(self):
        return np.array(self.lo, dtype=float), np.array(self.hi, dtype=float)

    def value(self, point):
        point = np.atleast_1d(np.asarray(point, dtype=float))
        try:
            out = np.array([float(c) for c in self.func(list(point))])
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            if isinstance(exc, EvaluationError):
                raise
            raise EvaluationError(str(exc)) from None
        self._check(out)
        return out

    def jet(self, point):
        mj = jets.jet_lift(self.func, point)
        if mj.value.size != self.embed_dim:
            raise GalleryError(f"{self.name}: {mj.value.size} components, expected {self.embed_dim}")
        self._check(mj.value)
        return mj

    def _check(self, value):
        if self.sphere and abs(np.dot(value, value) - 1.0) > 2 * SPHERE_TOL:
            raise GalleryError(f"{self.name}: image point has norm {np.linalg.norm(value)!r}, not on the unit sphere")

    def sample(self, count, seed):
        """``count`` uniformly random chart points in the domain box (seed-ordered)."""
        rng = np.random.default_rng(seed)
        lo, hi = self.domain
        return lo + (hi - lo) * rng.random((count, self.chart_dim))


# ---------------------------------------------------------------- Clifford type


@dataclass(frozen=True)
class CliffordParams:
    radii: tuple
    angles: tuple

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        th = np.asarray(self.angles, dtype=float)
        if r.ndim != 1 or r.size != th.size or r.size < 2:
            raise GalleryError("clifford: need matching radii and angles, at least two of each")
        if np.any(r <= 0):
            raise GalleryError("clifford: radii must be positive")
        s = float(np.sum(r * r))
        if abs(s - 1.0) > 1e-6:
            raise GalleryError(f"clifford: sum of squared radii is {s}, not 1")
        r = r / math.sqrt(s)
        for i in range(th.size):
            for j in range(i):
                if abs(math.sin(th[i] - th[j])) < 1e-9:
                    raise GalleryError(f"clifford: angles {i} and {j} agree modulo pi")
        object.__setattr__(self, "radii", tuple(float(x) for x in r))
        object.__setattr__(self, "angles", tuple(float(x) for x in th))

    @classmethod
    def equilateral(cls, m, offset=0.0):
        """Equal radii and angles ``offset + k*pi/m``."""
        return cls(tuple([1.0 / math.sqrt(m)] * m), tuple(offset + k * math.pi / m for k in range(m)))


def clifford_conditions(radii, angles):
    """Defects of the unit, minimality and Wintgen conditions of a Clifford-type torus."""
    r2 = np.asarray(radii, dtype=float) ** 2
    th = np.asarray(angles, dtype=float)
    return {
        "unit_sum": abs(float(np.sum(r2)) - 1.0),
        "minimal_defect": abs(sum(w * cmath.exp(2j * t) for w, t in zip(r2, th))),
        "wintgen_defect": abs(sum(w * cmath.exp(4j * t) for w, t in zip(r2, th))),
    }


def clifford(params):
    r, th = params.radii, params.angles
    cs = [(math.cos(t), math.sin(t)) for t in th]

    def f(u):
        x, y = u
        out = []
        for rk, (c, s) in zip(r, cs):
            arg = x * c + y * s
            out += [rk * cos(arg), rk * sin(arg)]
        return out

    m = len(r)
    return Immersion(
        "clifford", 2, 2 * m, "sphere", f, (0.0, 0.0), (2 * math.pi, 2 * math.pi),
        {"r": list(r), "theta": list(th)},
    )


# ---------------------------------------------------------------- Veronese


def _sphere_point(u):
    theta, phi = u
    st = sin(theta)
    return st * cos(phi), st * sin(phi), cos(theta)


def _monomials(k):
    return [(a, b, k - a - b) for a in range(k, -1, -1) for b in range(k - a, -1, -1)]


def _harmonic_basis(k):
    """Coefficient vectors (rows) spanning the harmonic homogeneous polynomials of degree k."""
    mons = _monomials(k)
    low = {m: i for i, m in enumerate(_monomials(k - 2))}
    lap = np.zeros((len(low), len(mons)))
    for j, (a, b, c) in enumerate(mons):
        for pos, e in enumerate((a, b, c)):
            if e >= 2:
                target = [a, b, c]
                target[pos] -= 2
                lap[low[tuple(target)], j] += e * (e - 1)
    _, s, vt = np.linalg.svd(lap)
    rank = int(np.sum(s > 1e-12 * s[0]))
    return mons, vt[rank:]


def sphere_quadrature(n):
    """Gauss-Legendre in cos(theta) times trapezoid in phi; weights sum to 1."""
    z, wz = np.polynomial.legendre.leggauss(n)
    phi = 2 * np.pi * np.arange(2 * n) / (2 * n)
    Z, P = np.meshgrid(z, phi, indexing="ij")
    W = np.outer(wz, np.full(2 * n, 1.0 / (2 * n))) / 2.0
    S = np.sqrt(1 - Z * Z)
    return np.stack([(S * np.cos(P)).ravel(), (S * np.sin(P)).ravel(), Z.ravel()], axis=1), W.ravel()


def gram_schmidt(vectors, inner):
    """Modified Gram-Schmidt of the rows of ``vectors`` under the form ``inner``."""
    out = []
    for v in vectors:
        w = np.array(v, dtype=float)
        for q in out:
            w = w - inner(q, w) * q
        for q in out:  # second pass for stability
            w = w - inner(q, w) * q
        out.append(w / math.sqrt(inner(w, w)))
    return np.array(out)


def _veronese_coefficients(k, nquad=60):
    mons, basis = _harmonic_basis(k)
    pts, w = sphere_quadrature(nquad)
    vander = np.stack([pts[:, 0] ** a * pts[:, 1] ** b * pts[:, 2] ** c for a, b, c in mons], axis=1)

    def inner(p, q):
        return float(np.sum(w * (vander @ p) * (vander @ q)))

    ortho = gram_schmidt(basis, inner)
    # addition theorem: sum of squares of an orthonormal basis is 2k+1
    return mons, ortho / math.sqrt(2 * k + 1)


def veronese_sphere(k=2, nquad=60):
    """Veronese surface S^2 -> S^(2k) in spherical coordinates (theta, phi)."""
    if k not in (2, 3):
        raise GalleryError(f"veronese: unsupported degree {k} (2 or 3)")
    if k == 2:
        r3 = math.sqrt(3.0)

        def f(u):
            x, y, z = _sphere_point(u)
            return [
                r3 * x * y,
                r3 * x * z,
                r3 * y * z,
                0.5 * r3 * (x * x - y * y),
                0.5 * (2 * z * z - x * x - y * y),
            ]

    else:
        mons, coef = _veronese_coefficients(k, nquad)

        def f(u):
            x, y, z = _sphere_point(u)
            powers = {}
            terms = []
            for a, b, c in mons:
                key = (a, b, c)
                if key not in powers:
                    powers[key] = (x**a if a else 1.0) * (y**b if b else 1.0) * (z**c if c else 1.0)
                terms.append(powers[key])
            out = []
            for row in coef:
                acc = 0.0
                for cf, t in zip(row, terms):
                    if cf != 0.0:
                        acc = acc + cf * t
                out.append(acc)
            return out

    name = "veronese_s4" if k == 2 else "veronese_s2k"
    return Immersion(name, 2, 2 * k + 1, "sphere", f, (0.3, 0.0), (math.pi - 0.3, 2 * math.pi), {"k": k})


# ---------------------------------------------------------------- Hopf lift


def hopf_veronese(n=2):
    """Hopf lift e^{is} V_n(x+iy) of the Veronese curve CP^1 -> CP^n into S^(2n+1)."""
    if n < 2:
        raise GalleryError("hopf_veronese: n must be at least 2")
    coef = [math.sqrt(math.comb(n, k)) for k in range(n + 1)]

    def f(u):
        s, x, y = u
        denom = (1.0 + x * x + y * y) ** (0.5 * n)
        cs, sn = cos(s), sin(s)
        out = []
        re, im = 1.0, 0.0
        for k in range(n + 1):
            if k:
                re, im = re * x - im * y, re * y + im * x
            a = coef[k] / denom
            out += [a * (cs * re - sn * im), a * (sn * re + cs * im)]
        return out

    return Immersion(
        "hopf_veronese", 3, 2 * n + 2, "sphere", f, (0.0, -1.5, -1.5), (2 * math.pi, 1.5, 1.5), {"n": n}
    )


# ---------------------------------------------------------------- constructions


def cone(base, extra_flat_dims=0, t_range=(0.5, 2.0)):
    """The cone f(t, y, w) = (y, t * base(w)) over a sphere-valued immersion."""
    if not base.sphere:
        raise GalleryError("cone: the base must be sphere-valued")
    e = int(extra_flat_dims)
    if e < 0:
        raise GalleryError("cone: extra_flat_dims must be non-negative")

    def f(u):
        t = u[0]
        return list(u[1 : 1 + e]) + [t * c for c in base.func(u[1 + e :])]

    return Immersion(
        f"cone({base.name})",
        1 + e + base.chart_dim,
        base.embed_dim + e,
        "euclidean",
        f,
        (t_range[0],) + (-1.0,) * e + tuple(base.lo),
        (t_range[1],) + (1.0,) * e + tuple(base.hi),
        {"base": base.name, "base_params": dict(base.params), "extra_flat_dims": e},
    )


def plane(dim=3, embed_dim=5):
    if dim < 1 or embed_dim <= dim:
        raise GalleryError("plane: need 1 <= dim < embed_dim")

    def f(u):
        return list(u) + [0.0] * (embed_dim - dim)

    return Immersion("plane", dim, embed_dim, "euclidean", f, (-1.0,) * dim, (1.0,) * dim, {"dim": dim, "n": embed_dim})


def perturbed(base, eps=0.05, seed=0, waves=3):
    """``base`` plus a smooth seeded trigonometric bump (renormalized onto the sphere)."""
    rng = np.random.default_rng(seed)
    freqs = rng.integers(1, 3, size=(base.embed_dim, waves, base.chart_dim)).astype(float)
    phases = rng.uniform(0, 2 * math.pi, size=(base.embed_dim, waves))
    amps = rng.normal(size=(base.embed_dim, waves))

    def f(u):
        vals = base.func(u)
        out = []
        for k, v in enumerate(vals):
            bump = 0.0
            for j in range(waves):
                arg = phases[k, j]
                for a in range(base.chart_dim):
                    arg = arg + freqs[k, j, a] * u[a]
                bump = bump + amps[k, j] * sin(arg)
            out.append(v + eps * bump)
        if base.sphere:
            norm = sqrt(sum(c * c for c in out[1:]) + out[0] * out[0])
            out = [c / norm for c in out]
        return out

    return Immersion(
        f"perturbed({base.name})", base.chart_dim, base.embed_dim, base.ambient, f, base.lo, base.hi,
        {"base": base.name, "eps": eps, "seed": seed},
    )


def from_dsl(components, chart_dim, ambient="euclidean", lo=None, hi=None, name="dsl"):
    """Immersion whose components are DSL expression strings in u1..u_m."""
    asts = dsl.compile_components(components, chart_dim)
    if ambient not in ("euclidean", "sphere"):
        raise GalleryError(f"unknown ambient {ambient!r}")

    def f(u):
        return [dsl.evaluate(a, u) for a in asts]

    lo = tuple(lo) if lo is not None else (-1.0,) * chart_dim
    hi = tuple(hi) if hi is not None else (1.0,) * chart_dim
    return Immersion(name, chart_dim, len(asts), ambient, f, lo, hi, {"components": list(components)})


# ---------------------------------------------------------------- stereographic


def stereo_point(x):
    """Stereographic projection from the pole (0, ..., 0, 1)."""
    x = np.asarray(x, dtype=float)
    d = 1.0 - x[-1]
    if d < 1e-6:
        raise PoleError(f"point {x.tolist()} is within 1e-6 of the projection pole")
    return x[:-1] / d


def inverse_stereo_point(y):
    y = np.asarray(y, dtype=float)
    s = float(np.dot(y, y))
    return np.append(2 * y, s - 1.0) / (s + 1.0)


def _householder_to_last(pole):
    """Orthogonal matrix Q with Q @ pole = e_last."""
    pole = np.asarray(pole, dtype=float) / np.linalg.norm(pole)
    e = np.zeros_like(pole)
    e[-1] = 1.0
    v = pole - e
    if np.linalg.norm(v) < 1e-14:
        return np.eye(pole.size)
    v /= np.linalg.norm(v)
    return np.eye(pole.size) - 2.0 * np.outer(v, v)


def stereographic(immersion, direction="sphere_to_euclid", pole=None):
    """Re-ambient an immersion by stereographic projection.

    ``sphere_to_euclid`` maps a sphere-valued immersion into R^(n-1) using
    ``pole`` (default (0, ..., 0, 1)); ``euclid_to_sphere`` applies the inverse.
    """
    if direction == "sphere_to_euclid":
        if not immersion.sphere:
            raise GalleryError("stereographic: immersion is not sphere-valued")
        Q = None if pole is None else _householder_to_last(pole)

        def f(u):
            x = immersion.func(u)
            if Q is not None:
                x = [sum(Q[i, j] * x[j] for j in range(len(x)) if Q[i, j] != 0.0) for i in range(len(x))]
            d = 1.0 - x[-1]
            if float(d if not isinstance(d, jets.JET_TYPES) else d.value) < 1e-6:
                raise PoleError("image point within 1e-6 of the projection pole")
            return [c / d for c in x[:-1]]

        return Immersion(
            f"stereo({immersion.name})", immersion.chart_dim, immersion.embed_dim - 1, "euclidean", f,
            immersion.lo, immersion.hi, dict(immersion.params),
        )
    if direction == "euclid_to_sphere":
        if immersion.sphere:
            raise GalleryError("stereographic: immersion is already sphere-valued")

        def f(u):
            y = immersion.func(u)
            s = sum(c * c for c in y[1:]) + y[0] * y[0]
            return [2 * c / (s + 1.0) for c in y] + [(s - 1.0) / (s + 1.0)]

        return Immersion(
            f"istereo({immersion.name})", immersion.chart_dim, immersion.embed_dim + 1, "sphere", f,
            immersion.lo, immersion.hi, dict(immersion.params),
        )
    raise GalleryError(f"unknown stereographic direction {direction!r}")


# ---------------------------------------------------------------- Moebius group


def lorentz_metric(n):
    eta = np.eye(n + 2)
    eta[0, 0] = -1.0
    return eta


# (a, b, x) null coordinates: a = v0 + v1, b = v0 - v1
def _from_null(M):
    k = M.shape[0]
    P = np.eye(k)
    P[:2, :2] = [[0.5, 0.5], [0.5, -0.5]]
    Pinv = np.eye(k)
    Pinv[:2, :2] = [[1.0, 1.0], [1.0, -1.0]]
    return P @ M @ Pinv


@dataclass(frozen=True)
class LorentzMatrix:
    """Element of O(n+1, 1) acting on the light-cone model of R^n."""

    T: np.ndarray

    def __post_init__(self):
        T = np.asarray(self.T, dtype=float)
        k = T.shape[0]
        if T.shape != (k, k) or k < 3:
            raise ValueError("Lorentz matrix must be square of size n+2 >= 3")
        eta = lorentz_metric(k - 2)
        err = np.max(np.abs(T.T @ eta @ T - eta))
        if err > 1e-10 * max(1.0, np.max(np.abs(T)) ** 2):
            raise ValueError(f"matrix does not preserve the Lorentz metric (error {err:.3g})")
        if T[0, 0] < 1.0 - 1e-10:
            raise ValueError("matrix reverses time orientation")
        object.__setattr__(self, "T", T)

    @property
    def n(self):
        return self.T.shape[0] - 2

    def __matmul__(self, other):
        return LorentzMatrix(self.T @ other.T)

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n + 2))

    @classmethod
    def rotation(cls, R):
        R = np.asarray(R, dtype=float)
        T = np.eye(R.shape[0] + 2)
        T[2:, 2:] = R
        return cls(T)

    @classmethod
    def dilation(cls, n, lam):
        M = np.eye(n + 2)
        M[0, 0] = 1.0 / lam
        M[1, 1] = lam
        return cls(_from_null(M))

    @classmethod
    def translation(cls, c):
        c = np.asarray(c, dtype=float)
        n = c.size
        M = np.eye(n + 2)
        M[1, 0] = c @ c
        M[1, 2:] = 2 * c
        M[2:, 0] = c
        return cls(_from_null(M))

    @classmethod
    def inversion(cls, n):
        M = np.eye(n + 2)
        M[:2, :2] = [[0.0, 1.0], [1.0, 0.0]]
        return cls(_from_null(M))


def light_cone_lift(x):
    x = np.asarray(x, dtype=float)
    s = float(x @ x)
    return np.concatenate([[(1 + s) / 2, (1 - s) / 2], x])


def apply_moebius(T, x):
    """Image of a point of R^n under the Moebius transformation ``T``."""
    w = T.T @ light_cone_lift(x)
    d = w[0] + w[1]
    if abs(d) <= 1e-9:
        raise PoleError(f"point {np.asarray(x).tolist()} is sent to infinity")
    return w[2:] / d


def random_moebius(n, seed):
    """Seeded composition of rotation, dilation, translations and at most one inversion."""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    T = LorentzMatrix.dilation(n, math.exp(rng.uniform(-0.5, 0.5))) @ LorentzMatrix.rotation(q)
    if rng.random() < 0.5:
        d = rng.normal(size=n)
        d *= rng.uniform(3.0, 4.0) / np.linalg.norm(d)
        T = LorentzMatrix.inversion(n) @ LorentzMatrix.translation(d) @ T
    return LorentzMatrix.translation(rng.normal(scale=0.5, size=n)) @ T


def moebius_image(immersion, T):
    """The Euclidean immersion ``T o f``; a sphere-valued ``f`` is taken inside R^n."""
    n = immersion.embed_dim
    if T.n != n:
        raise ValueError(f"Moebius transformation acts on R^{T.n}, immersion lives in R^{n}")
    M = T.T

    def f(u):
        x = immersion.func(u)
        s = x[0] * x[0]
        for c in x[1:]:
            s = s + c * c
        v = [(1.0 + s) * 0.5, (1.0 - s) * 0.5] + list(x)
        w = []
        for i in range(n + 2):
            acc = 0.0
            for j in range(n + 2):
                if M[i, j] != 0.0:
                    acc = acc + M[i, j] * v[j]
            w.append(acc)
        d = w[0] + w[1]
        if abs(float(d if not isinstance(d, jets.JET_TYPES) else d.value)) <= 1e-9:
            raise PoleError("point sent to infinity")
        return [c / d for c in w[2:]]

    return Immersion(
        f"moebius({immersion.name})", immersion.chart_dim, n, "euclidean", f, immersion.lo, immersion.hi,
        dict(immersion.params),
    )


# ---------------------------------------------------------------- gallery

GALLERY = {
    "veronese_s4": "Veronese surface S^2 -> S^4 (no parameters)",
    "veronese_s2k": "Veronese surface S^2 -> S^(2k); k=2|3",
    "clifford": "Clifford-type flat torus R^2 -> S^(2m-1); r=r1,..,rm theta=t1,..,tm | m=M (equilateral, default m=3)",
    "hopf_veronese": "Hopf lift of the Veronese curve CP^1 -> CP^n into S^(2n+1); n>=2",
    "cone_of": "cone (y, t*u) over a sphere-valued member; base=NAME extra=E base.KEY=VALUE",
    "plane": "affine plane R^dim -> R^n; dim=3 n=5",
}


def _as_list(v):
    if isinstance(v, str):
        return [float(x) for x in v.split(",") if x.strip()]
    if np.isscalar(v):
        return [float(v)]
    return [float(x) for x in v]


def _as_int(v, name):
    try:
        f = float(v)
    except (TypeError, ValueError):
        raise GalleryError(f"parameter {name} must be an integer, got {v!r}") from None
    if f != int(f):
        raise GalleryError(f"parameter {name} must be an integer, got {v!r}")
    return int(f)


def gallery_get(name, params=None):
    """Build a gallery immersion from its name and a key -> value parameter map."""
    params = dict(params or {})

    def take(key, default=None):
        return params.pop(key, default)

    if name == "veronese_s4":
        imm = veronese_sphere(2)
    elif name == "veronese_s2k":
        k = _as_int(take("k", 2), "k")
        if k < 2:
            raise GalleryError("veronese_s2k: k must be at least 2")
        imm = veronese_sphere(k)
    elif name == "clifford":
        m = take("m")
        r, th = take("r"), take("theta")
        if m is None and r is None and th is None:
            m = 3
        if m is not None:
            if r is not None or th is not None:
                raise GalleryError("clifford: give either m or r/theta")
            m = _as_int(m, "m")
            if m < 2:
                raise GalleryError("clifford: m must be at least 2")
            imm = clifford(CliffordParams.equilateral(m))
        else:
            if r is None or th is None:
                raise GalleryError("clifford: need r and theta (or m)")
            imm = clifford(CliffordParams(tuple(_as_list(r)), tuple(_as_list(th))))
    elif name == "hopf_veronese":
        n = _as_int(take("n", 2), "n")
        if n < 2:
            raise GalleryError("hopf_veronese: n must be at least 2")
        imm = hopf_veronese(n)
    elif name == "cone_of":
        base_name = take("base", "veronese_s4")
        extra = _as_int(take("extra", 0), "extra")
        base_params = {k[5:]: params.pop(k) for k in list(params) if k.startswith("base.")}
        if base_name in ("cone_of", "plane"):
            raise GalleryError(f"cone_of: base {base_name!r} is not sphere-valued")
        imm = cone(gallery_get(base_name, base_params), extra)
    elif name == "plane":
        dim = _as_int(take("dim", 3), "dim")
        n = _as_int(take("n", 5), "n")
        if n < 2:
            raise GalleryError("plane: n must be at least 2")
        imm = plane(dim, n)
    else:
        raise GalleryError(f"unknown gallery member {name!r}; known: {', '.join(GALLERY)}")
    if params:
        raise GalleryError(f"{name}: unknown parameter(s) {', '.join(sorted(params))}")
    return imm
