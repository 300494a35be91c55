"""Shared generators for Clifford-type parameter sets."""
import math

import numpy as np

from mwlab.immersions import CliffordParams, clifford_conditions


def minimal_clifford_set(rng, m=4, margin=0.05):
    """Random angles with positive weights solving sum w = 1, sum w e^{2i theta} = 0.

    Returns None when the drawn angles admit no interior solution.
    """
    theta = np.sort(rng.uniform(0, math.pi, m))
    A = np.vstack([np.ones(m), np.cos(2 * theta), np.sin(2 * theta)])
    w0 = np.linalg.lstsq(A, np.array([1.0, 0.0, 0.0]), rcond=None)[0]
    null = np.linalg.svd(A)[2][3:]
    if m == 3:
        w = w0
    else:
        n = null[0]
        # feasible interval of t in w0 + t n >= margin / m
        lo, hi = -np.inf, np.inf
        for a, b in zip(w0, n):
            if abs(b) < 1e-14:
                if a < margin / m:
                    return None
                continue
            t = (margin / m - a) / b
            lo, hi = (max(lo, t), hi) if b > 0 else (lo, min(hi, t))
        if not lo < hi:
            return None
        w = w0 + rng.uniform(lo, hi) * n
    if np.any(w <= 0):
        return None
    return CliffordParams(tuple(np.sqrt(w)), tuple(theta))


def clifford_sets(seed, count=10):
    """Seeded mix of Wintgen-ideal (equilateral) and merely minimal parameter sets."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        if len(out) % 2 == 0:
            m = int(rng.choice([3, 4, 5]))
            out.append(CliffordParams.equilateral(m, float(rng.uniform(0, math.pi))))
            continue
        p = minimal_clifford_set(rng)
        if p is None:
            continue
        d = clifford_conditions(p.radii, p.angles)["wintgen_defect"]
        if d > 1e-2:  # keep non-Wintgen sets well away from the boundary
            out.append(p)
    return out


def nonminimal_clifford_set(rng, m=3):
    r = rng.uniform(0.3, 1.0, m)
    r /= np.linalg.norm(r)
    theta = np.sort(rng.uniform(0, math.pi, m))
    return CliffordParams(tuple(r), tuple(theta))
