"""Pointwise extrinsic geometry of an immersion: frames, fundamental forms, shape operators."""
from dataclasses import dataclass

import numpy as np

from .jets.fd import DEFAULT_SPEC, field_gradient

DEGENERACY_TOL = 1e-10


class NotAnImmersion(ValueError):
    pass


@dataclass(frozen=True)
class FrameData:
    """``tangent_map`` T with e_i = sum_a T[i, a] d_a f; ``normals`` has shape (p, n)."""

    tangent_map: np.ndarray
    tangents: np.ndarray  # (m, n), rows e_i
    normals: np.ndarray  # (p, n), rows n_alpha
    metric: np.ndarray  # induced metric I in the chart basis

    @property
    def codim(self):
        return self.normals.shape[0]


@dataclass(frozen=True)
class FundamentalForms:
    metric: np.ndarray  # I, chart basis
    h: np.ndarray  # (p, m, m) in the orthonormal frames
    H: np.ndarray  # (p,)
    c: float
    frame: FrameData
    jet: object  # MapJet of the immersion at the point

    @property
    def m(self):
        return self.metric.shape[0]

    @property
    def mean_curvature_vector(self):
        return self.H @ self.frame.normals

    @property
    def tracefree(self):
        return self.h - self.H[:, None, None] * np.eye(self.m)


def _frames_from_jet(mj, sphere):
    J = mj.grad  # (n, m), columns d_a f
    n, m = J.shape
    I = J.T @ J
    w = np.linalg.eigvalsh(I)
    if w[0] <= DEGENERACY_TOL * max(w[-1], 1e-300):
        raise NotAnImmersion(f"not an immersion here: induced metric eigenvalues {w.tolist()}")
    L = np.linalg.cholesky(I)
    T = np.linalg.inv(L)
    tangents = T @ J.T
    span = np.column_stack([J, mj.value]) if sphere else J
    k = span.shape[1]
    if n <= k:
        raise NotAnImmersion(f"ambient dimension {n} leaves no normal directions")
    U, s, _ = np.linalg.svd(span, full_matrices=True)
    if s[-1] <= DEGENERACY_TOL * s[0]:
        raise NotAnImmersion("tangent space is degenerate")
    normals = U[:, k:].T
    return FrameData(T, tangents, normals, I)


def frames(immersion, point):
    """Orthonormal tangent frame (Cholesky of I) and normal frame (SVD complement)."""
    return _frames_from_jet(immersion.jet(point), immersion.sphere)


def forms_from_jet(mj, sphere):
    fr = _frames_from_jet(mj, sphere)
    T = fr.tangent_map
    # n_alpha . d_ab f ; in the sphere case n_alpha is orthogonal to f as well
    proj = np.einsum("pn,nab->pab", fr.normals, mj.hess)
    h = np.einsum("ia,pab,jb->pij", T, proj, T)
    h = 0.5 * (h + np.swapaxes(h, 1, 2))
    m = T.shape[0]
    H = np.trace(h, axis1=1, axis2=2) / m
    return FundamentalForms(fr.metric, h, H, 1.0 if sphere else 0.0, fr, mj)


def fundamental_forms(immersion, point):
    return forms_from_jet(immersion.jet(point), immersion.sphere)


def shape_operators(ff):
    """Shape operators A_alpha in the orthonormal tangent frame (= the h^alpha matrices)."""
    return [a.copy() for a in ff.h]


def christoffel(mj):
    """Christoffel symbols Gamma[c, a, b] of the induced metric from an order-2 jet."""
    J = mj.grad
    I = J.T @ J
    # Gamma_{d,ab} = d_ab f . d_d f
    low = np.einsum("nab,nd->dab", mj.hess, J)
    return np.linalg.solve(I, low.reshape(I.shape[0], -1)).reshape(low.shape)


def gauss_curvature_tensor(ff):
    """R_ijkl in the orthonormal frame from the Gauss equation (R_ijij = sectional curvature)."""
    h = ff.h
    m = ff.m
    d = np.eye(m)
    R = np.einsum("pik,pjl->ijkl", h, h) - np.einsum("pil,pjk->ijkl", h, h)
    return R + ff.c * (np.einsum("ik,jl->ijkl", d, d) - np.einsum("il,jk->ijkl", d, d))


def intrinsic_curvature_fd(immersion, point, spec=DEFAULT_SPEC):
    """Riemann tensor R_ijkl of the induced metric in the orthonormal frame.

    Christoffel symbols are exact at each point (from jets); their chart
    derivatives come from finite differences. Independent of the Gauss equation.
    """
    x0 = np.atleast_1d(np.asarray(point, dtype=float))
    mj = immersion.jet(x0)
    G = christoffel(mj)
    dG = field_gradient(lambda x: christoffel(immersion.jet(x)), x0, spec)  # dG[e, c, a, b] = d_e G^c_ab
    # R^a_{bcd} = d_c G^a_{db} - d_d G^a_{cb} + G^a_{ce} G^e_{db} - G^a_{de} G^e_{cb}
    Rup = (
        np.einsum("cadb->abcd", dG)
        - np.einsum("dacb->abcd", dG)
        + np.einsum("ace,edb->abcd", G, G)
        - np.einsum("ade,ecb->abcd", G, G)
    )
    I = mj.grad.T @ mj.grad
    # <R(d_c, d_d) d_b, d_a>, the same convention as the Gauss equation
    Rlow = np.einsum("ae,ebcd->abcd", I, Rup)
    T = np.linalg.inv(np.linalg.cholesky(I))
    return np.einsum("ia,jb,kc,ld,abcd->ijkl", T, T, T, T, Rlow)
