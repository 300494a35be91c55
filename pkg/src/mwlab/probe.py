"""Sampling scans, homogeneity probes and Moebius-invariance regression checks.

Per-point failures (umbilic points, projection poles, failed stencils) are
recorded as data, never raised. Work items may run on a thread pool sized by
the ``MWL_THREADS`` environment variable; results always come back in the
order of the deterministic point list.
"""
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .ddvv import ddvv_report, wintgen_certificate
from .geometry import NotAnImmersion, fundamental_forms
from .immersions import LorentzMatrix, moebius_image
from .jets import EvaluationError
from .jets.fd import DEFAULT_SPEC, StencilError
from .moebius import UmbilicError, invariant_scalars, moebius_metric

JET_TOL = 1e-6
FD_TOL = 1e-3
EQUALITY_TOL = 1e-7
MAX_RESAMPLES = 100

# failure kinds that are data for a scan rather than bugs
POINT_ERRORS = (UmbilicError, EvaluationError, StencilError, NotAnImmersion, ArithmeticError)


def thread_count():
    raw = os.environ.get("MWL_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"MWL_THREADS must be an integer >= 1, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"MWL_THREADS must be an integer >= 1, got {raw!r}")
    return n


def ordered_map(fn, items):
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _error_kind(exc):
    if isinstance(exc, UmbilicError):
        return "umbilic"
    if isinstance(exc, StencilError):
        return "stencil"
    if isinstance(exc, EvaluationError):
        return "evaluation"
    if isinstance(exc, NotAnImmersion):
        return "degenerate"
    return "numeric"


@dataclass
class ScanRecord:
    point: list
    gap: Optional[float] = None
    rho: Optional[float] = None
    rho_perp: Optional[float] = None
    h2: Optional[float] = None
    b_norm2: Optional[float] = None
    phi_norm: Optional[float] = None
    certified: bool = False
    mu0: Optional[float] = None
    tolerance_class: str = "jet_exact"
    error: Optional[str] = None
    error_kind: Optional[str] = None

    def as_dict(self):
        return asdict(self)


def scan_point(immersion, point, spec=DEFAULT_SPEC, tol=EQUALITY_TOL, moebius=True):
    """DDVV data (exact jets), certificate, and optionally Moebius scalars at one point."""
    rec = ScanRecord(point=[float(x) for x in point])
    try:
        ff = fundamental_forms(immersion, point)
        rep = ddvv_report(ff.h, ff.c, tol)
        rec.gap, rec.rho, rec.rho_perp, rec.h2 = rep.gap, rep.rho, rep.rho_perp, rep.h2
        cert = wintgen_certificate(ff.h, tol)
        if cert is not None:
            rec.certified, rec.mu0 = True, cert.mu0
        if moebius:
            sc = invariant_scalars(immersion, point, spec, blaschke=False)
            rec.b_norm2, rec.phi_norm = sc["B_norm2"], sc["phi_norm"]
    except POINT_ERRORS as exc:
        rec.error, rec.error_kind = str(exc), _error_kind(exc)
    return rec


def grid_points(region, n):
    lo, hi = (np.asarray(b, dtype=float) for b in region)
    axes = [np.linspace(a, b, n) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


def random_points(region, count, seed):
    lo, hi = (np.asarray(b, dtype=float) for b in region)
    rng = np.random.default_rng(seed)
    return lo + (hi - lo) * rng.random((count, lo.size))


def _region(immersion, region):
    if region is None:
        return immersion.domain
    lo, hi = (np.asarray(b, dtype=float) for b in region)
    if lo.shape != (immersion.chart_dim,) or hi.shape != lo.shape or np.any(hi < lo):
        raise ValueError(f"region must be two length-{immersion.chart_dim} bounds with lo <= hi")
    return lo, hi


def grid_scan(immersion, region=None, n=None, count=None, seed=None, spec=DEFAULT_SPEC, tol=EQUALITY_TOL,
              moebius=True):
    """Scan a row-major ``n``-per-axis grid, or ``count`` seeded random points."""
    region = _region(immersion, region)
    if (n is None) == (count is None):
        raise ValueError("give exactly one of a grid size n or a random count")
    if n is not None:
        pts = grid_points(region, int(n))
    else:
        if seed is None:
            raise ValueError("random sampling needs a seed")
        pts = random_points(region, int(count), seed)
    return ordered_map(lambda x: scan_point(immersion, x, spec, tol, moebius), pts)


@dataclass
class ScalarStats:
    min: float
    max: float
    mean: float
    max_abs_deviation_from_mean: float
    spread: float

    @classmethod
    def of(cls, values):
        v = np.asarray(values, dtype=float)
        mean = float(np.mean(v))
        # clamp the mean into [min, max] against summation rounding
        mean = min(max(mean, float(v.min())), float(v.max()))
        return cls(float(v.min()), float(v.max()), mean, float(np.max(np.abs(v - mean))), float(np.ptp(v)))


@dataclass
class ProbeSummary:
    scalars: dict
    tolerances: dict
    certified: int
    uncertified: int
    errors: int
    seed: Optional[int]
    samples: int
    consistent: bool = field(default=False)

    def deviations(self):
        return {k: s.spread for k, s in self.scalars.items()}


def summarize(records, seed=None):
    """Statistics of the DDVV gap and Moebius scalars over successful records."""
    ok = [r for r in records if r.error is None]
    scalars = {}
    for key in ("gap", "rho_perp", "b_norm2", "phi_norm"):
        vals = [getattr(r, key) for r in ok if getattr(r, key) is not None]
        if vals:
            scalars[key] = ScalarStats.of(vals)
    cert = sum(r.certified for r in ok)
    return ProbeSummary(scalars, {}, cert, len(ok) - cert, len(records) - len(ok), seed, len(records))


def _tolerance_of(key):
    return JET_TOL if key in ("B_norm2", "gap") else FD_TOL


def homogeneity_probe(immersion, samples, seed, spec=DEFAULT_SPEC, tol=EQUALITY_TOL):
    """Spread of the scalar Moebius invariants over seeded random points.

    Constancy is necessary for Moebius homogeneity; the verdict ``consistent``
    holds when every spread is below its tolerance class (jet-exact scalars
    1e-6, finite-difference scalars 1e-3).
    """
    pts = random_points(immersion.domain, int(samples), seed)

    def work(x):
        rec = scan_point(immersion, x, spec, tol, moebius=False)
        if rec.error is not None:
            return rec, None
        try:
            return rec, invariant_scalars(immersion, x, spec)
        except POINT_ERRORS as exc:
            rec.error, rec.error_kind = str(exc), _error_kind(exc)
            return rec, None

    results = ordered_map(work, pts)
    values = {}
    for _, sc in results:
        if sc is None:
            continue
        flat = {k: sc[k] for k in ("B_norm2", "Phi_norm2", "gap", "kappa")}
        for i, ev in enumerate(sc["A_eigenvalues"]):
            flat[f"A_eigenvalue_{i}"] = ev
        for k, v in flat.items():
            values.setdefault(k, []).append(v)
    stats = {k: ScalarStats.of(v) for k, v in sorted(values.items())}
    tols = {k: _tolerance_of(k) for k in stats}
    records = [r for r, _ in results]
    ok = [r for r in records if r.error is None]
    cert = sum(r.certified for r in ok)
    consistent = bool(stats) and all(s.spread < tols[k] for k, s in stats.items())
    return ProbeSummary(stats, tols, cert, len(ok) - cert, len(records) - len(ok), seed, len(records), consistent)


@dataclass
class InvarianceReport:
    discrepancies: dict
    tolerances: dict
    samples: int
    resampled: int
    passed: bool


def invariance_check(immersion, T: LorentzMatrix, samples, seed, spec=DEFAULT_SPEC, blaschke=False):
    """Compare scalar invariants of f and T o f at the same chart points.

    Points where either side fails (sent to infinity, umbilic, stencil error)
    are replaced by fresh seeded draws; more than 100 replacements is an error.
    """
    # the identity image is the immersion itself; skip the light-cone round trip
    image = immersion if np.array_equal(T.T, np.eye(T.T.shape[0])) else moebius_image(immersion, T)
    rng = np.random.default_rng(seed)
    lo, hi = immersion.domain
    worst, resampled, done = {}, 0, 0
    while done < samples:
        x = lo + (hi - lo) * rng.random(lo.size)
        try:
            a = invariant_scalars(immersion, x, spec, blaschke)
            b = invariant_scalars(image, x, spec, blaschke)
            ga, gb = moebius_metric(immersion, x), moebius_metric(image, x)
        except POINT_ERRORS:
            resampled += 1
            if resampled > MAX_RESAMPLES:
                raise RuntimeError(f"invariance check: more than {MAX_RESAMPLES} sample points failed") from None
            continue
        diffs = {k: float(np.max(np.abs(np.asarray(a[k]) - np.asarray(b[k])))) for k in a if k not in ("rho",)}
        diffs["metric"] = float(np.max(np.abs(ga - gb)) / np.max(np.abs(ga)))
        for k, d in diffs.items():
            worst[k] = max(worst.get(k, 0.0), d)
        done += 1
    tols = {k: (FD_TOL if k in ("Phi_norm2", "phi_norm", "A_eigenvalues", "trA", "kappa") else JET_TOL) for k in worst}
    passed = all(worst[k] < tols[k] for k in worst)
    return InvarianceReport(dict(sorted(worst.items())), dict(sorted(tols.items())), samples, resampled, passed)

