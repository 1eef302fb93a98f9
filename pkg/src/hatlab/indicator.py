"""The curvature indicator: how far the hat anchored at a touching point has
to be pushed outward before it swallows the body."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericFailure, PreconditionError
from .geometry import as_direction, hausdorff_distance
from .hat import CapSpec, axial_slack, excess
from .sphere import angle_between, direction_net, local_maximize

BISECT_TOL = 1e-13
ROUND_TOL = 1e-14


@dataclass(frozen=True)
class IndicatorValue:
    alpha: float
    error: float
    witness: np.ndarray = field(repr=False)
    tip: np.ndarray = field(repr=False)

    def __float__(self):
        return self.alpha


def anchored_cap(K, tau, eps, delta):
    """Cap with tip at the touching point x_tau and axis -tau (outward)."""
    tau = as_direction(tau, K.dim)
    return CapSpec(K._touching(-tau[None, :])[0], -tau, eps, delta)


def push_thresholds(cap, Y, tau=None):
    """Least a >= 0 per row with excess(y + a*tau) <= eps, tau = -axis."""
    return np.maximum(0.0, -axial_slack(cap, Y))


def push_thresholds_bisect(cap, Y, tau):
    """Same thresholds by bisection; independent check of the closed form.

    a -> excess(y + a tau) is convex and tends to -inf, so the feasible set
    is an interval [a*, inf).
    """
    Y = np.atleast_2d(Y)
    g = lambda a: excess(cap, Y + a[:, None] * tau) - cap.eps  # noqa: E731
    lo = np.zeros(len(Y))
    if not (g(lo) > 0).any():
        return lo
    hi = np.full(len(Y), cap.eps)
    for _ in range(200):
        bad = g(hi) > 0
        if not bad.any():
            break
        lo[bad] = hi[bad]
        hi[bad] *= 2.0
    else:
        raise NumericFailure("no feasible push found for the indicator bracket")
    feasible0 = g(np.zeros(len(Y))) <= 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        ok = g(mid) <= 0
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
        if np.max(hi - lo) <= BISECT_TOL * (1.0 + np.max(hi)):
            break
    return np.where(feasible0, 0.0, hi)


def curvature_indicator(K, tau, eps, delta, n=None):
    """min{a >= 0 : K lies in H - a*tau}, H the hat at x_tau with axis -tau.

    Zero exactly when K has the hat (x_tau, -tau, eps, delta). The sup of the
    per-point thresholds is taken over extreme points, sampled by outward
    normals and polished locally.
    """
    if not K.strictly_convex:
        raise PreconditionError("the curvature indicator needs a strictly convex body")
    cap = anchored_cap(K, tau, eps, delta)
    tau = -cap.axis
    n = n or (1440 if K.dim == 2 else 4096)
    net = direction_net(K.dim, n)
    vals = push_thresholds(cap, K._touching(net), tau)
    i = int(np.argmax(vals))
    best, best_u = float(vals[i]), net[i]
    if best > 0:
        f = lambda U: push_thresholds(cap, K._touching(U), tau)  # noqa: E731
        step = 4.0 * math.pi / len(net) if K.dim == 2 else 3.0 / math.sqrt(len(net))
        tried = []
        for j in np.argsort(vals)[::-1][:16]:
            if len(tried) >= 3:
                break
            if any(np.dot(net[j], t) > math.cos(3 * step) for t in tried):
                continue
            tried.append(net[j])
            v, u = local_maximize(f, net[j], step)
            if v > best:
                best, best_u = float(v), u
    witness = K._touching(best_u[None, :])[0]
    return IndicatorValue(best, ROUND_TOL * (1.0 + best), witness, cap.tip)


def indicator_sum(K, tau, specs, n=None):
    """Sum of indicators over (eps_i, delta_i); zero iff all hats hold at x_tau."""
    return float(sum(curvature_indicator(K, tau, e, d, n).alpha for e, d in specs))


def continuity_probe(K, K2, tau, tau2, eps, delta, n=None):
    a = curvature_indicator(K, tau, eps, delta, n).alpha
    b = curvature_indicator(K2, tau2, eps, delta, n).alpha
    dist = hausdorff_distance(K, K2, tol=1e-7)
    return {
        "delta_indicator": abs(a - b),
        "indicator": a,
        "indicator_prime": b,
        "hausdorff": dist.value,
        "angle": float(angle_between(np.asarray(tau, float), np.asarray(tau2, float))),
    }


def ball_indicator(R, eps, delta):
    """Closed form for a ball of radius R: max(0, (R - eps)(sec(delta pi) - 1))."""
    return max(0.0, (R - eps) * (1.0 / math.cos(delta * math.pi) - 1.0))
