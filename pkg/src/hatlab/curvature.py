"""Directional curvature from osculating radii.

For a boundary point x with inward normal nu and a tangent direction tau,
boundary points z of the section through x spanned by (nu, tau) define
circles through x and z centered on the ray x + lambda*nu. Their radii
r_z have liminf/limsup as z -> x; the reciprocals are the upper/lower
directional curvatures. Limits are approximated by the extreme radii over
the finest scales of a geometric ladder.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, NumericFailure, PreconditionError
from .geometry import as_direction
from .hat import has_hat
from .sphere import tangent_basis

WINDOW = 8
HALVINGS = 40
EXIST_GAP = 1e-2
TREND = 0.1
NOISE = 1e3 * np.finfo(float).eps


def osculating_radius(x, nu, z):
    """Radius of the circle through x and z centered on {x + lambda*nu, lambda >= 0}.

    From |z - x - r*nu| = r: r = |z - x|^2 / (2 <z - x, nu>).
    """
    x, z = np.asarray(x, dtype=float), np.asarray(z, dtype=float)
    w = z - x
    den = 2.0 * float(np.dot(w, nu))
    if not den > 0:
        raise PreconditionError("z must lie strictly on the inward side of x")
    return float(np.dot(w, w)) / den


def default_ladder(K, t0=None, halvings=HALVINGS):
    diam = K.diameter()
    t0 = 0.1 * diam if t0 is None else t0
    ladder = t0 * 2.0 ** -np.arange(halvings + 1)
    return ladder[ladder >= 1e-9 * diam]


@dataclass(frozen=True)
class DirectionalRecord:
    tau: np.ndarray
    kappa_i: float
    kappa_s: float
    scales: np.ndarray = field(repr=False)
    radii: np.ndarray = field(repr=False)
    reliable: int = 0

    @property
    def trend(self):
        """Log-log slope of r against t over the tail window; near 0 once the limit has settled."""
        t, r = self.scales[-WINDOW:], self.radii[-WINDOW:]
        if len(t) < 3 or not np.isfinite(r).all():
            return 0.0
        return float(np.polyfit(np.log(t), np.log(r), 1)[0])


def _tail_kappa(radii, diam):
    if not len(radii):
        # every sagitta under the noise floor: the section is flat at these scales
        return 0.0, 0.0
    tail = radii[-WINDOW:]
    lo, hi = float(np.min(tail)), float(np.max(tail))
    to_k = lambda r: math.inf if r < 1e-7 * diam else (0.0 if r > 1e7 * diam else 1.0 / r)  # noqa: E731
    # kappa_i = 1/rho_s (largest radius), kappa_s = 1/rho_i
    return to_k(hi), to_k(lo)


def directional_curvature(K, x, nu, tau, ladder=None, full=False):
    """(kappa_i^tau, kappa_s^tau) at boundary point x with inward normal nu.

    Scales whose sagitta falls under the rounding floor are dropped; the
    estimates use the last WINDOW reliable scales.
    """
    nu = as_direction(nu, K.dim)
    tau = as_direction(tau, K.dim)
    if abs(float(np.dot(nu, tau))) > 1e-9:
        raise InvalidInputError("tau must be orthogonal to nu")
    x = np.asarray(x, dtype=float)
    auto = ladder is None
    ladder = default_ladder(K) if auto else np.asarray(ladder, dtype=float)
    diam = K.diameter()
    scales, radii = [], []
    for k, t in enumerate(ladder):
        try:
            s = K.section_sagitta(x, nu, tau, float(t))
        except NumericFailure as exc:
            # default ladders may start wider than the section; skip leading misses
            if auto and not scales and k < len(ladder) - WINDOW:
                continue
            exc.diagnostics.update({"x": x.tolist(), "tau": tau.tolist(), "scale": float(t)})
            raise
        if not K.exact_sagitta and s < NOISE * max(float(np.linalg.norm(x)), t):
            if s == 0.0:
                scales.append(float(t))
                radii.append(math.inf)
            continue
        scales.append(float(t))
        radii.append((t * t + s * s) / (2.0 * s))
    radii = np.asarray(radii)
    ki, ks = _tail_kappa(radii, diam)
    rec = DirectionalRecord(tau, ki, ks, np.asarray(scales), radii, len(scales))
    return rec if full else (ki, ks)


@dataclass(frozen=True)
class CurvatureEstimate:
    x: np.ndarray
    nu: np.ndarray
    records: tuple = field(repr=False)
    kappa_i: float = 0.0
    kappa_s: float = 0.0
    ladder: np.ndarray = field(repr=False, default=None)
    verdict: str = "indeterminate"
    gap: float = math.nan

    @property
    def kappa(self):
        return self.kappa_i if self.verdict == "exists" else None

    def rows(self):
        """Long-format rows (x, tau, scale, r_z)."""
        out = []
        for rec in self.records:
            for t, r in zip(rec.scales, rec.radii):
                out.append((list(self.x), list(rec.tau), float(t), float(r)))
        return out

    def to_dict(self):
        enc = lambda v: v if math.isfinite(v) else ("inf" if v > 0 else "-inf")  # noqa: E731
        return {
            "x": self.x.tolist(),
            "nu": self.nu.tolist(),
            "kappa_i": enc(self.kappa_i),
            "kappa_s": enc(self.kappa_s),
            "verdict": self.verdict,
            "gap": enc(self.gap) if not math.isnan(self.gap) else None,
            "directions": [
                {"tau": r.tau.tolist(), "kappa_i": enc(r.kappa_i), "kappa_s": enc(r.kappa_s), "reliable_scales": r.reliable}
                for r in self.records
            ],
            "ladder": [float(t) for t in self.ladder],
            "window": WINDOW,
        }


def tangent_directions(nu, n=None):
    nu = np.asarray(nu, dtype=float)
    B = tangent_basis(nu)
    if len(nu) == 2:
        return np.vstack([B[0], -B[0]])
    n = n or 8
    ang = 2.0 * math.pi * np.arange(n) / n
    if len(nu) == 3:
        return np.cos(ang)[:, None] * B[0] + np.sin(ang)[:, None] * B[1]
    rng = np.random.default_rng(0)
    V = rng.standard_normal((n, len(B))) @ B
    return V / np.linalg.norm(V, axis=1, keepdims=True)


def _gap(ki, ks):
    if ki == ks:
        return 0.0
    if math.isinf(ks):
        return math.inf
    return (ks - ki) / ks


def point_curvature(K, x, nu, n=None, ladder=None):
    """Aggregate kappa_i = inf and kappa_s = sup over tangent directions."""
    nu = as_direction(nu, K.dim)
    x = np.asarray(x, dtype=float)
    recs = tuple(directional_curvature(K, x, nu, t, ladder, full=True) for t in tangent_directions(nu, n))
    ladder = default_ladder(K) if ladder is None else np.asarray(ladder, dtype=float)
    ki = min(r.kappa_i for r in recs)
    ks = max(r.kappa_s for r in recs)
    gap = _gap(ki, ks)
    unsettled = any(abs(r.trend) > TREND for r in recs)
    if unsettled or (any(r.reliable < WINDOW for r in recs) and not ks == 0.0):
        verdict = "indeterminate"
    else:
        verdict = "exists" if gap <= EXIST_GAP else "does-not-exist"
    return CurvatureEstimate(x, nu, recs, ki, ks, ladder, verdict, gap)


def hat_bound_check(K, cap, ladder=None, tol=1e-6):
    """Check kappa_i at the tip of a hat against the bound 1/eps."""
    verdict = has_hat(K, cap)
    if not verdict:
        raise PreconditionError(f"{cap} is not a hat of the body ({verdict.status})")
    est = point_curvature(K, cap.tip, -cap.axis, ladder=ladder)
    bound = 1.0 / cap.eps
    return {
        "kappa_i": est.kappa_i,
        "bound": bound,
        "pass": bool(est.kappa_i >= bound - 10 * tol * max(1.0, bound)),
        "estimate": est,
    }
