"""Moebius invariants of an umbilic-free immersion.

Everything is computed for a Euclidean immersion f: M^m -> R^n. A sphere-valued
immersion is first projected stereographically from the antipode of the image
of the evaluation point, which keeps the projection well conditioned there.

Notation: h, H are the second fundamental form and mean curvature in
orthonormal frames e_i of the induced metric I, and

    rho^2 = m/(m-1) |h - H I|^2,   Y = rho ((1+|f|^2)/2, (1-|f|^2)/2, f),
    g = rho^2 I,                   B = (h - H I) / rho.

The Moebius form C and the Blaschke tensor A involve derivatives of rho and of
the mean curvature vector; those come from finite differences of exact
pointwise jets, while all derivatives of f itself are exact.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ddvv import ddvv_report
from .geometry import christoffel, fundamental_forms, gauss_curvature_tensor
from .immersions import stereographic
from .jets.fd import DEFAULT_SPEC, CachedSampler, field_gradient, field_hessian

UMBILIC_TOL = 1e-12


class UmbilicError(ValueError):
    """Moebius invariants are undefined at umbilic points."""


def lorentz_inner(y, z):
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    return float(-y[0] * z[0] + y[1:] @ z[1:])


def euclidean_view(immersion, point):
    """The immersion itself, or its stereographic image from the pole -f(point)."""
    if not immersion.sphere:
        return immersion
    return stereographic(immersion, "sphere_to_euclid", pole=-immersion.value(point))


def _rho(ff):
    m = ff.m
    s = float(np.sum(ff.tracefree**2))
    if s <= UMBILIC_TOL:
        raise UmbilicError(f"Moebius invariants undefined here: umbilic point (|h - H I|^2 = {s:.3g})")
    return np.sqrt(m / (m - 1) * s)


def _light_cone(f):
    s = float(f @ f)
    return np.concatenate([[(1 + s) / 2, (1 - s) / 2], f])


@dataclass(frozen=True)
class MoebiusInvariants:
    rho: float
    Y: np.ndarray
    g: np.ndarray  # chart basis
    B: np.ndarray  # (p, m, m)
    C: np.ndarray  # (p, m)
    N: Optional[np.ndarray] = None
    A: Optional[np.ndarray] = None
    curvature: Optional[np.ndarray] = None  # Moebius-metric Riemann tensor, g-orthonormal frame
    kappa: Optional[float] = None

    @property
    def m(self):
        return self.g.shape[0]

    @property
    def B_norm2(self):
        return float(np.sum(self.B**2))

    @property
    def Phi_norm2(self):
        return float(np.sum(self.C**2))

    @property
    def gap(self):
        """DDVV gap of the Moebius-normalized operators B (c = 0)."""
        return ddvv_report(self.B, 0.0).gap


class _Site:
    """Local data at a chart point; stencil samples are cached and shared."""

    def __init__(self, immersion, point, spec):
        self.x0 = np.atleast_1d(np.asarray(point, dtype=float))
        self.spec = spec
        self.euclid = euclidean_view(immersion, self.x0)
        self.ff = fundamental_forms(self.euclid, self.x0)
        self.rho = _rho(self.ff)
        self.sampler = CachedSampler(self._fields)

    def _fields(self, x):
        ff = fundamental_forms(self.euclid, x)
        return np.concatenate([[_rho(ff)], ff.mean_curvature_vector])

    @property
    def B(self):
        return self.ff.tracefree / self.rho

    def metric(self):
        return self.rho**2 * self.ff.metric

    def position(self):
        return self.rho * _light_cone(self.ff.jet.value)

    def moebius_form(self):
        ff = self.ff
        T = ff.frame.tangent_map
        dF = field_gradient(self.sampler, self.x0, self.spec)
        drho, dH = dF[:, 0], dF[:, 1:]
        # normal part of the derivative of the mean curvature vector = covariant derivative
        eH = (T @ dH @ ff.frame.normals.T).T  # (p, m)
        elog = T @ drho / self.rho
        return -(eH + ff.tracefree @ elog) / self.rho**2

    def blaschke(self):
        ff, rho = self.ff, self.rho
        mj = ff.jet
        m = ff.m
        f, J, Hf = mj.value, mj.grad, mj.hess
        d2F = field_hessian(self.sampler, self.x0, self.spec)
        d2rho = d2F[:, :, 0]
        drho = field_gradient(self.sampler, self.x0, self.spec)[:, 0]

        L = _light_cone(f)
        fJ = f @ J
        dL = np.column_stack([fJ, -fJ, J.T])  # (m, n+2)
        JJ = J.T @ J
        fH = np.einsum("n,nab->ab", f, Hf)
        d2L = np.concatenate(
            [(JJ + fH)[..., None], -(JJ + fH)[..., None], np.moveaxis(Hf, 0, -1)], axis=-1
        )  # (m, m, n+2)
        Y = rho * L
        dY = np.outer(drho, L) + rho * dL
        d2Y = (
            d2rho[..., None] * L
            + drho[:, None, None] * dL[None, :, :]
            + drho[None, :, None] * dL[:, None, :]
            + rho * d2L
        )

        I = ff.metric
        Iinv = np.linalg.inv(I)
        dphi = drho / rho
        eye = np.eye(m)
        G0 = christoffel(mj)
        Gg = (
            G0
            + np.einsum("ca,b->cab", eye, dphi)
            + np.einsum("cb,a->cab", eye, dphi)
            - np.einsum("ab,c->cab", I, Iinv @ dphi)
        )
        lap = np.einsum("ab,abk->k", Iinv / rho**2, d2Y - np.einsum("cab,ck->abk", Gg, dY))
        lap2 = lorentz_inner(lap, lap)
        N = -lap / m - lap2 / (2 * m * m) * Y

        Tp = ff.frame.tangent_map / rho
        eta = np.ones(L.size)
        eta[0] = -1.0
        G = np.einsum("abk,k->ab", d2Y, eta * N)
        A = -Tp @ G @ Tp.T
        asym = float(np.max(np.abs(A - A.T)))
        if asym > 1e-3:
            raise ArithmeticError(f"Blaschke tensor is not symmetric (asymmetry {asym:.3g}); try another step")
        A = 0.5 * (A + A.T)

        # Riemann tensor of g = e^{2 phi} I by the conformal change formula
        T = ff.frame.tangent_map
        d2phi = d2rho / rho - np.outer(dphi, dphi)
        hess = d2phi - np.einsum("cab,c->ab", G0, dphi)
        He = T @ hess @ T.T
        de = T @ dphi
        S = He - np.outer(de, de) + 0.5 * float(de @ de) * eye
        kn = (
            np.einsum("ik,jl->ijkl", eye, S)
            + np.einsum("jl,ik->ijkl", eye, S)
            - np.einsum("il,jk->ijkl", eye, S)
            - np.einsum("jk,il->ijkl", eye, S)
        )
        R = (gauss_curvature_tensor(ff) - kn) / rho**2
        kappa = float(np.einsum("ijij->", R)) / (m * (m - 1))
        return A, N, R, kappa


def conformal_factor(immersion, point):
    """rho = sqrt(m/(m-1) |h - H I|^2) of the (Euclidean view of the) immersion."""
    return _Site(immersion, point, DEFAULT_SPEC).rho


def moebius_position(immersion, point):
    """Light-cone lift Y; null by construction."""
    return _Site(immersion, point, DEFAULT_SPEC).position()


def moebius_metric(immersion, point):
    """Moebius metric g = rho^2 I in the chart basis."""
    return _Site(immersion, point, DEFAULT_SPEC).metric()


def moebius_B(immersion, point):
    """Moebius second fundamental form B^alpha_ij = (h^alpha_ij - H^alpha delta_ij) / rho."""
    return _Site(immersion, point, DEFAULT_SPEC).B


def moebius_form(immersion, point, spec=DEFAULT_SPEC):
    """Moebius form coefficients C^alpha_i, shape (p, m)."""
    return _Site(immersion, point, spec).moebius_form()


def blaschke_A(immersion, point, spec=DEFAULT_SPEC):
    """Blaschke tensor A (g-orthonormal frame) and the second light-cone vector N."""
    A, N, _, _ = _Site(immersion, point, spec).blaschke()
    return A, N


def moebius_invariants(immersion, point, spec=DEFAULT_SPEC, blaschke=True):
    site = _Site(immersion, point, spec)
    C = site.moebius_form()
    extra = {}
    if blaschke:
        A, N, R, kappa = site.blaschke()
        extra = dict(N=N, A=A, curvature=R, kappa=kappa)
    return MoebiusInvariants(site.rho, site.position(), site.metric(), site.B, C, **extra)


def invariant_scalars(immersion, point, spec=DEFAULT_SPEC, blaschke=True):
    """Scalar Moebius invariants at a point.

    ``gap`` is the DDVV gap of B (the Moebius-normalized operators); it vanishes
    exactly where the metric-level gap does. ``rho`` is included for reference
    but is not an invariant.
    """
    inv = moebius_invariants(immersion, point, spec, blaschke)
    out = {
        "B_norm2": inv.B_norm2,
        "Phi_norm2": inv.Phi_norm2,
        "phi_norm": float(np.sqrt(inv.Phi_norm2)),
        "gap": inv.gap,
        "rho": inv.rho,
    }
    if blaschke:
        out["A_eigenvalues"] = np.sort(np.linalg.eigvalsh(inv.A)).tolist()
        out["trA"] = float(np.trace(inv.A))
        out["kappa"] = inv.kappa
    return out


def integrability_residual(inv):
    """Max deviation of the Moebius Gauss equation R = B*B + A (Kulkarni-Nomizu with delta)."""
    m = inv.m
    eye = np.eye(m)
    A, B = inv.A, inv.B
    rhs = (
        np.einsum("pik,pjl->ijkl", B, B)
        - np.einsum("pil,pjk->ijkl", B, B)
        + np.einsum("ik,jl->ijkl", eye, A)
        + np.einsum("jl,ik->ijkl", eye, A)
        - np.einsum("il,jk->ijkl", eye, A)
        - np.einsum("jk,il->ijkl", eye, A)
    )
    return float(np.max(np.abs(inv.curvature - rhs)))


def mean_curvature_spheres(immersion, point):
    """Mean curvature spheres xi_alpha = H^alpha L + (f.n_alpha, -f.n_alpha, n_alpha), shape (p, n+2)."""
    site = _Site(immersion, point, DEFAULT_SPEC)
    ff = site.ff
    f = ff.jet.value
    L = _light_cone(f)
    fn = ff.frame.normals @ f
    return ff.H[:, None] * L + np.column_stack([fn, -fn, ff.frame.normals])
