"""Spike perturbations: K_theta = conv(K u {x + theta*tau}).

Adding a point at height theta over a boundary point moves the body by
exactly theta in Hausdorff distance, and its apex carries hats of small
radius. Repeating this raises the order of curvature inside any budget.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSpikeError, InvalidInputError, NumericFailure
from .geometry import as_direction, hausdorff_distance, hull_with_point, minkowski_ball
from .hat import CapSpec, has_hat
from .order import AngleSequence, maximal_indicator, verify_certificates

SHRINK_GRID = tuple(round(0.1 * k, 1) for k in range(9, 0, -1))
ANGLE_CAP = 0.5 - 1e-6


def spike(K, x, tau, theta):
    """Hull of K with x + theta*tau; tau is the outward direction of the spike."""
    if not theta >= 0:
        raise InvalidInputError("spike height must be nonnegative")
    tau = as_direction(tau, K.dim)
    x = np.asarray(x, dtype=float)
    apex = x + theta * tau
    if theta == 0:
        return K
    if K.level(apex[None, :])[0] <= 0:
        raise DegenerateSpikeError("spike apex lies inside the body")
    return hull_with_point(K, apex)


@dataclass
class PerturbationRecord:
    base_id: str
    tip: np.ndarray
    direction: np.ndarray
    theta: float
    hausdorff: float
    order_before: object = field(repr=False)
    order_after: object = field(repr=False)
    shrink_factor: float = None
    next_index: int = None
    accepted: bool = False

    def to_dict(self):
        return {
            "base_id": self.base_id,
            "tip": np.asarray(self.tip).tolist(),
            "direction": np.asarray(self.direction).tolist(),
            "theta": self.theta,
            "hausdorff": self.hausdorff,
            "index_set_before": list(self.order_before.index_set),
            "index_set_after": list(self.order_after.index_set),
            "shrink_factor": self.shrink_factor,
            "next_index": self.next_index,
            "accepted": self.accepted,
        }

    def json_line(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def shrink_factor(K_theta, apex, axis, indices, seq, i_max, grid=SHRINK_GRID):
    """Largest f on the grid for which the scaled hats (f/i, a_i/f) sit on the
    spiked body at its apex, and the least new index j they admit.

    Angles are capped below 1/2. Returns (f, j), with None where nothing fits.
    """
    def ok(i, f):
        cap = CapSpec(apex, axis, f / i, min(seq(i) / f, ANGLE_CAP))
        return bool(has_hat(K_theta, cap, check_tip=False))

    last = max(indices, default=0)
    for f in grid:
        if all(ok(i, f) for i in indices):
            j = next((j for j in range(last + 1, i_max + 1) if ok(j, f)), None)
            return f, j
    return None, None


@dataclass
class RaiseResult:
    body: object
    records: list
    order: object
    certificates_verified: list
    hausdorff: float
    success: bool

    def __iter__(self):
        # unpacks as (K', records)
        return iter((self.body, self.records))


def raise_order(K, m, budget, seq=None, i_max=None, eta=None, n_dirs=None, max_steps=12, base_id="K"):
    """Spike K until its order of curvature reaches m, spending at most ``budget``.

    Each step spikes the deepest certificate tip outward along its axis with
    theta = min(remaining/2, eps_last/4) and accepts the step only if the
    recomputed index set contains the old one and is larger; otherwise theta
    is halved.
    """
    if not budget > 0:
        raise InvalidInputError("budget must be positive")
    if m < 1:
        raise InvalidInputError("target order must be at least 1")
    seq = seq or AngleSequence.named()
    i_max = i_max or max(8, m)
    diam = K.diameter()
    eta = 1e-6 * diam if eta is None else eta
    cur = K
    res = maximal_indicator(cur, seq, i_max, eta, n_dirs)
    records, spent = [], 0.0
    steps = 0
    while res.order < m and steps < max_steps:
        steps += 1
        if res.certificates:
            x, u = res.certificates[-1]
            eps_last = 1.0 / res.index_set.elements[-1]
        else:
            u = np.eye(K.dim)[-1]
            x = cur.touching(u)
            eps_last = diam
        u = np.asarray(u, dtype=float)
        theta = min((budget - spent) / 2.0, eps_last / 4.0)
        accepted = False
        while theta > 1e-6 * diam:
            cand = spike(cur, x, u, theta)
            new = maximal_indicator(cand, seq, i_max, eta, n_dirs)
            f, j = shrink_factor(cand, x + theta * u, u, res.index_set.elements, seq, i_max)
            accepted = res.index_set.issubset(new.index_set) and new.order > res.order
            records.append(
                PerturbationRecord(base_id, x, u, theta, theta, res, new, f, j, accepted)
            )
            if accepted:
                cur, res = cand, new
                spent += theta
                break
            theta /= 2.0
        if not accepted:
            break
    dist = hausdorff_distance(K, cur, tol=1e-6 * budget, threshold=budget).upper
    verified = verify_certificates(cur, res, seq, tol=eta / 10)
    return RaiseResult(cur, records, res, verified, float(dist), res.order >= m and dist <= budget and all(verified))


def perturbation_sample(K, budget, seed=0, n=10, max_spikes=3):
    """n random bodies within Hausdorff distance ``budget`` of K.

    Each is K with up to ``max_spikes`` random spikes followed by a Minkowski
    rounding, with spike heights and rounding radius summing to at most the
    budget. Every distance is checked before returning.
    """
    if not budget > 0:
        raise InvalidInputError("budget must be positive")
    if n < 1:
        raise InvalidInputError("sample count must be at least 1")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        k = int(rng.integers(1, max_spikes + 1))
        w = rng.dirichlet(np.ones(k + 1)) * budget * rng.uniform(0.5, 1.0)
        body = K
        for h in w[:k]:
            u = rng.standard_normal(K.dim)
            u /= np.linalg.norm(u)
            try:
                body = spike(body, K.touching(u), u, float(h))
            except DegenerateSpikeError:
                pass  # swallowed by an earlier spike
        body = minkowski_ball(body, float(w[k]))
        d = hausdorff_distance(K, body, tol=1e-3 * budget, threshold=budget)
        if d.upper > budget:
            raise NumericFailure("sampled body left the budget ball", bracket=(d.lower, d.upper))
        out.append(body)
    return out
