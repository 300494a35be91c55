"""DDVV quantities of a tuple of shape operators and the Wintgen equality certificate.

For shape operators A_1..A_p (symmetric m x m, orthonormal frames) in a space
form of curvature c::

    rho      = 2/(m(m-1)) * sum_{i<j} [c + sum_a (A_a[i,i] A_a[j,j] - A_a[i,j]^2)]
    rho_perp = 2/(m(m-1)) * sqrt(sum_{a<b} sum_{i<j} <[A_a, A_b] e_i, e_j>^2)
    h2       = sum_a (tr A_a / m)^2
    gap      = h2 + c - rho - rho_perp  (>= 0)

Equality at a point holds iff the operators can be rotated into the canonical
form: A_1 = l1 I + mu0 (E12 + E21), A_2 = l2 I + mu0 (E11 - E22),
A_3 = l3 I, A_r = 0 for r >= 4.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

SYMMETRY_TOL = 1e-9
RANK_CUTOFF = 1e-8


@dataclass(frozen=True)
class DdvvReport:
    rho: float
    rho_perp: float
    h2: float
    c: float
    gap: float
    equality: bool


@dataclass(frozen=True)
class WintgenCertificate:
    """Frames R (tangent, columns new e_i) and S (normal, columns new n_beta) bringing
    the operators to canonical form: canonical_beta = sum_a S[a, beta] R^T A_a R."""

    R: np.ndarray
    S: np.ndarray
    mu0: float
    lam: np.ndarray
    residual: float
    gap: float


def as_operators(ops):
    A = np.asarray(ops, dtype=float)
    if A.ndim == 2:
        A = A[None]
    if A.ndim != 3 or A.shape[1] != A.shape[2]:
        raise ValueError(f"expected p square matrices, got shape {A.shape}")
    p, m, _ = A.shape
    if m < 2 or p < 1:
        raise ValueError(f"need m >= 2 and p >= 1, got m={m}, p={p}")
    asym = np.max(np.abs(A - np.swapaxes(A, 1, 2)))
    if asym > SYMMETRY_TOL:
        raise ValueError(f"shape operators are not symmetric (max asymmetry {asym:.3g})")
    return 0.5 * (A + np.swapaxes(A, 1, 2))


def ddvv_report(ops, c=0.0, tol=1e-7):
    A = as_operators(ops)
    p, m, _ = A.shape
    norm = 2.0 / (m * (m - 1))
    iu = np.triu_indices(m, 1)
    diag = np.einsum("aii->ai", A)
    pair = diag[:, iu[0]] * diag[:, iu[1]] - A[:, iu[0], iu[1]] ** 2
    rho = norm * (len(iu[0]) * c + float(pair.sum()))
    comm2 = 0.0
    for a in range(p):
        for b in range(a + 1, p):
            C = A[a] @ A[b] - A[b] @ A[a]
            comm2 += float(np.sum(C[iu] ** 2))
    rho_perp = norm * np.sqrt(comm2)
    h2 = float(np.sum((np.trace(A, axis1=1, axis2=2) / m) ** 2))
    gap = h2 + c - rho - rho_perp
    return DdvvReport(rho, rho_perp, h2, float(c), gap, bool(abs(gap) < tol))


def canonical_operators(m, p, mu0, lam):
    """The canonical equality form with umbilic parts ``lam`` (length p, entries >= 3 ignored)."""
    lam = np.zeros(p) if lam is None else np.asarray(lam, dtype=float)
    E = np.zeros((p, m, m))
    eye = np.eye(m)
    for b in range(min(p, 3)):
        E[b] = lam[b] * eye
    if p >= 1:
        E[0, 0, 1] = E[0, 1, 0] = mu0
    if p >= 2:
        E[1, 0, 0] += mu0
        E[1, 1, 1] -= mu0
    return E


def planted_instance(m, p, mu0, lam=None, seed_r=None, seed_s=None):
    """Canonical operators conjugated by seeded random rotations.

    ``A_a = sum_b S[a, b] R E_b R^T``; a ``None`` seed means the identity.
    """
    lam = np.zeros(p) if lam is None else np.asarray(lam, dtype=float)
    E = canonical_operators(m, p, mu0, lam)
    R = np.eye(m) if seed_r is None else random_rotation(m, seed_r)
    S = np.eye(p) if seed_s is None else random_rotation(p, seed_s)
    return np.einsum("ab,ij,bjk,lk->ail", S, R, E, R)


def random_rotation(n, seed):
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def _householder(v):
    """Orthogonal H with H^T v = |v| e_0."""
    k = v.size
    nv = np.linalg.norm(v)
    if k <= 1 or nv == 0.0:
        return np.eye(k)
    e = np.zeros(k)
    e[0] = nv
    w = v - e
    nw = np.linalg.norm(w)
    if nw < 1e-15 * nv:
        return np.eye(k)
    w /= nw
    return np.eye(k) - 2.0 * np.outer(w, w)


def _conjugate(A, R, S):
    return np.einsum("ab,ji,ajk,kl->bil", S, R, A, R)


def wintgen_certificate(ops, tol=1e-7) -> Optional[WintgenCertificate]:
    """Constructive DDVV-equality certificate, or ``None`` when none exists at ``tol``.

    The residual is compared against ``tol * max(1, max|A|)``.
    """
    A = as_operators(ops)
    p, m, _ = A.shape
    scale = max(1.0, float(np.max(np.abs(A))))
    gap = ddvv_report(A).gap if p else 0.0
    lam = np.trace(A, axis1=1, axis2=2) / m
    hat = A - lam[:, None, None] * np.eye(m)
    G = np.einsum("aij,bij->ab", hat, hat)
    w, V = np.linalg.eigh(G)
    w, V = w[::-1], V[:, ::-1]
    total = float(np.sum(hat * hat))

    if np.sqrt(max(w[0], 0.0) / 2.0) <= tol * scale:
        residual = float(np.max(np.abs(hat)))
        if residual >= tol * scale:
            return None
        return WintgenCertificate(np.eye(m), np.eye(p), 0.0, lam, residual, gap)

    rank = int(np.sum(w > RANK_CUTOFF * w[0]))
    if rank > 2 or p < 2:
        return None

    S = V.copy()
    rot = np.einsum("ab,aij->bij", S, hat)
    P, Q = rot[0], rot[1]
    wm, R = np.linalg.eigh(P @ P + Q @ Q)
    R = R[:, ::-1]
    # diagonalize Q on the distinguished plane, larger eigenvalue first
    q2 = R[:, :2].T @ Q @ R[:, :2]
    _, v2 = np.linalg.eigh(q2)
    R[:, :2] = R[:, :2] @ v2[:, ::-1]
    if np.linalg.det(R) < 0 and m >= 3:
        R[:, -1] = -R[:, -1]
    if (R[:, 0] @ P @ R[:, 1]) < 0:
        S[:, 0] = -S[:, 0]
    if p >= 3:
        lam_rot = S.T @ lam
        S[:, 2:] = S[:, 2:] @ _householder(lam_rot[2:])
        if np.linalg.det(S) < 0 and p >= 4:
            S[:, -1] = -S[:, -1]
        elif np.linalg.det(S) < 0:
            S[:, 2] = -S[:, 2]

    mu0 = float(np.sqrt(total / 4.0))
    lam_c = S.T @ lam
    got = _conjugate(A, R, S)
    want = canonical_operators(m, p, mu0, lam_c)
    residual = float(np.max(np.abs(got - want)))
    if residual >= tol * scale:
        return None
    return WintgenCertificate(R, S, mu0, lam_c, residual, gap)


def reconstruct(cert, m, p):
    """Operators implied by a certificate (inverse of the canonicalizing conjugation)."""
    E = canonical_operators(m, p, cert.mu0, cert.lam)
    return np.einsum("ab,ij,bjk,lk->ail", cert.S, cert.R, E, cert.R)
