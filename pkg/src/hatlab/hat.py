"""Spherical caps and hats.

A cap is the part of the sphere of radius ``eps`` around ``c = tip - eps*axis``
within central angle ``delta*pi`` of the axis. The hat over a cap is the
union of all convex bodies whose boundary contains the cap. A point y lies
in that union exactly when it violates no tangent halfspace of the sphere
at a cap point (any such y can be hulled with the cap-bounded ball piece
without losing the cap from the boundary, and a violated tangent halfspace
would put a cap point in the interior). Hence

    y in hat  <=>  max_{v in cone} <y - c, v> <= eps
              <=>  |y - c| * cos(max(0, angle(y - c, axis) - delta*pi)) <= eps,

the left-hand side being the *excess* of y. Excess is convex and
1-Lipschitz, so sup-excess over a body is attained at extreme points.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .bodies import ConvexBody
from .errors import InvalidInputError, PreconditionError
from .geometry import hausdorff_distance
from .sphere import angle_between, direction_net, local_maximize, normalize

DEFAULT_TOL = 1e-7


@dataclass(frozen=True)
class CapSpec:
    tip: np.ndarray
    axis: np.ndarray
    eps: float
    delta: float

    def __post_init__(self):
        tip = np.array(self.tip, dtype=float)
        axis = np.array(self.axis, dtype=float)
        if tip.shape != axis.shape or tip.ndim != 1 or tip.shape[0] < 2:
            raise InvalidInputError("tip and axis must be vectors of the same dimension >= 2")
        n = np.linalg.norm(axis)
        if abs(n - 1.0) > 1e-9:
            raise InvalidInputError("cap axis must be a unit vector")
        if not self.eps > 0:
            raise InvalidInputError("cap radius must be positive")
        if not 0 < self.delta < 0.5:
            raise InvalidInputError("cap angle must lie in (0, 1/2)")
        object.__setattr__(self, "tip", tip)
        object.__setattr__(self, "axis", axis / n)
        object.__setattr__(self, "eps", float(self.eps))
        object.__setattr__(self, "delta", float(self.delta))

    @property
    def center(self):
        return self.tip - self.eps * self.axis

    @property
    def beta(self):
        """Central angle of the cap in radians."""
        return self.delta * math.pi

    def to_dict(self):
        return {"tip": self.tip.tolist(), "axis": self.axis.tolist(), "eps": self.eps, "delta": self.delta}

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - {"tip", "axis", "eps", "delta"}
        if unknown:
            raise InvalidInputError(f"unknown cap fields {sorted(unknown)}")
        return cls(d["tip"], d["axis"], d["eps"], d["delta"])


@dataclass(frozen=True)
class CapFamily:
    """Caps with a shared tip and axis over a finite index set."""

    tip: np.ndarray
    axis: np.ndarray
    eps: tuple
    delta: tuple

    def __post_init__(self):
        eps, delta = tuple(float(e) for e in self.eps), tuple(float(d) for d in self.delta)
        if len(eps) != len(delta) or not eps:
            raise InvalidInputError("a cap family needs matching nonempty radius and angle sequences")
        if any(a <= b for a, b in zip(eps, eps[1:])):
            raise InvalidInputError("family radii must be strictly decreasing")
        if any(a < b for a, b in zip(delta, delta[1:])):
            raise InvalidInputError("family angles must be nonincreasing")
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "caps", tuple(CapSpec(self.tip, self.axis, e, d) for e, d in zip(eps, delta)))
        object.__setattr__(self, "tip", self.caps[0].tip)
        object.__setattr__(self, "axis", self.caps[0].axis)

    def slack(self, Y):
        """min_i (eps_i - excess_i(y)); nonnegative exactly on the intersection.

        For a point inside, this is its distance to the boundary of the
        intersection of hats (each hat is an intersection of halfspaces).
        """
        return np.min([c.eps - excess(c, Y) for c in self.caps], axis=0)


def excess(cap, Y):
    """|y - c| cos(max(0, theta - delta*pi)); membership is excess <= eps."""
    Y = np.asarray(Y, dtype=float)
    W = Y - cap.center
    norm = np.linalg.norm(W, axis=-1)
    safe = np.where(norm[..., None] > 0, W, cap.axis)
    theta = angle_between(safe, cap.axis)
    return norm * np.cos(np.maximum(0.0, theta - cap.beta))


def axial_slack(cap, Y):
    """Signed shift s per row with excess(y + s*axis) = eps exactly.

    Pushing along the axis keeps y in the plane spanned by the axis and
    y - c, where the excess of a point at axial coordinate a and radial
    distance r is |(a, r)| inside the cap cone and a cos(beta) + r sin(beta)
    outside it. Excess increases with a, so the root is unique.
    """
    W = np.atleast_2d(np.asarray(Y, dtype=float)) - cap.center
    a0 = W @ cap.axis
    r = np.linalg.norm(W - a0[:, None] * cap.axis, axis=1)
    sb, cb = math.sin(cap.beta), math.cos(cap.beta)
    on_sphere = r <= cap.eps * sb
    root = np.where(
        on_sphere,
        np.sqrt(np.maximum(cap.eps**2 - r**2, 0.0)),
        (cap.eps - r * sb) / cb,
    )
    return root - a0


def _excess_many(tips, axes, eps, beta, P):
    """excess of every point of P for hats with the given tips/axes.

    tips, axes: (m, d); P: (n, d). Returns (m, n).
    """
    C = tips - eps * axes
    W = P[None, :, :] - C[:, None, :]
    norm = np.linalg.norm(W, axis=-1)
    dot = np.einsum("mnd,md->mn", W, axes)
    cross = np.sqrt(np.maximum(norm**2 - dot**2, 0.0))
    theta = np.arctan2(cross, dot)
    return norm * np.cos(np.maximum(0.0, theta - beta))


def sup_excess(K, cap, n=None, refine=True):
    """(sup over K of excess, witness point, exact flag)."""
    pts, exact = K.extreme_points(n)
    vals = excess(cap, pts)
    i = int(np.argmax(vals))
    best, witness = float(vals[i]), pts[i]
    if exact or not refine:
        return best, witness, exact
    # smooth part: boundary parametrized by outward normals
    net = direction_net(K.dim, n or (1440 if K.dim == 2 else 4096))
    X = K._touching(net)
    nvals = excess(cap, X)
    step = 4.0 * math.pi / len(net) if K.dim == 2 else 3.0 / math.sqrt(len(net))
    f = lambda U: excess(cap, K._touching(U))  # noqa: E731
    tried = []
    for j in np.argsort(nvals)[::-1][:16]:
        if len(tried) >= 4:
            break
        if any(np.dot(net[j], t) > math.cos(3 * step) for t in tried):
            continue
        tried.append(net[j])
        val, u = local_maximize(f, net[j], step)
        if val > best:
            best, witness = float(val), K._touching(u[None, :])[0]
    return best, witness, False


@dataclass(frozen=True)
class HatVerdict:
    """Outcome of a hat test: status is 'hat', 'no-hat' or 'indeterminate'."""

    status: str
    sup_excess: float
    eps: float
    tol: float
    witness: np.ndarray = field(repr=False)
    exact: bool

    def __bool__(self):
        return self.status == "hat"

    @property
    def margin(self):
        return self.eps - self.sup_excess


def has_hat(K, cap, tol=DEFAULT_TOL, check_tip=True, n=None):
    """Decide whether K lies in the hat over ``cap`` with the tip in K.

    Polytopal bodies are decided exactly over their vertices. For smooth
    bodies a refined boundary-net maximum is a certified lower bound of the
    sup-excess, so 'no-hat' is always certified; near the threshold a second
    rotated net of double density is consulted and disagreement is reported
    as 'indeterminate'.
    """
    if K.dim != cap.tip.shape[0]:
        raise InvalidInputError("cap and body dimensions differ")
    if check_tip:
        lvl = float(K.level(cap.tip[None, :])[0])
        if lvl > tol + 1e-12 * (1.0 + float(np.linalg.norm(cap.tip))):
            raise PreconditionError(f"cap tip is not a point of the body (level {lvl:.3g})")
    val, witness, exact = sup_excess(K, cap, n)
    limit = cap.eps + tol
    if val > limit:
        return HatVerdict("no-hat", val, cap.eps, tol, witness, exact)
    if exact or val < limit - 1e-4 * cap.eps:
        return HatVerdict("hat", val, cap.eps, tol, witness, exact)
    n2 = 2 * (n or (1440 if K.dim == 2 else 4096)) + 1
    val2, witness2, _ = sup_excess(K, cap, n2)
    if val2 > limit:
        return HatVerdict("indeterminate", val2, cap.eps, tol, witness2, exact)
    return HatVerdict("hat", max(val, val2), cap.eps, tol, witness, exact)


def _as_specs(specs):
    specs = [tuple(map(float, s)) for s in (specs if np.ndim(specs) == 2 else [specs])]
    for e, d in specs:
        if not e > 0 or not 0 < d < 0.5:
            raise InvalidInputError("hat parameters need eps > 0 and delta in (0, 1/2)")
    return specs


def joint_deficit(K, tips, axes, specs, P):
    """max_i (max_{y in P} excess_i(y) - eps_i) for each candidate (tip, axis)."""
    out = np.full(len(tips), -np.inf)
    chunk = max(1, 2_000_000 // max(len(P), 1))
    for s in range(0, len(tips), chunk):
        t, a = tips[s : s + chunk], axes[s : s + chunk]
        for e, d in specs:
            v = _excess_many(t, a, e, d * math.pi, P).max(axis=1) - e
            out[s : s + chunk] = np.maximum(out[s : s + chunk], v)
    return out


@dataclass(frozen=True)
class HatSearch:
    tip: np.ndarray
    axis: np.ndarray
    deficit: float
    verdicts: tuple


def find_hat(K, specs, eta=None, n_dirs=None, top_k=6, tol=None):
    """Search a tip and axis realizing all hats (eps_i, delta_i) at once.

    Tips are touching points of the searched axes (the axis is the outward
    direction there). A coarse extreme-point sample gives a lower bound of
    each candidate's deficit, which prunes the direction net soundly; the
    best survivors get a fine check and, failing that, local descent on the
    axis. Returns a HatSearch, or None when nothing on the net qualifies.
    """
    specs = _as_specs(specs)
    d = K.dim
    if eta is None:
        eta = 1e-6 * K.diameter()
    if tol is None:
        tol = eta
    n_dirs = n_dirs or (720 if d == 2 else 4096)
    net = direction_net(d, n_dirs)
    tips = K._touching(net)
    coarse, _ = K.extreme_points(360 if d == 2 else 512)
    fine, exact = K.extreme_points(None)
    cdef = joint_deficit(K, tips, net, specs, coarse)
    order = np.argsort(cdef)

    def check(u):
        x = K._touching(u[None, :])[0]
        verdicts = tuple(has_hat(K, CapSpec(x, u, e, dl), tol=tol, check_tip=False) for e, dl in specs)
        if all(verdicts):
            worst = max(v.sup_excess - v.eps for v in verdicts)
            return HatSearch(x, u, worst, verdicts)
        return None

    def fine_deficit(U):
        U = normalize(U)
        return joint_deficit(K, K._touching(U), U, specs, fine)

    tried = []
    for idx in order[:top_k]:
        if cdef[idx] > eta:
            break
        u = net[idx]
        if any(np.dot(u, t) > 1 - 1e-12 for t in tried):
            continue
        tried.append(u)
        if fine_deficit(u[None, :])[0] <= eta:
            found = check(u)
            if found:
                return found
    # local descent from the most promising axes
    step = 2.0 * math.pi / n_dirs if d == 2 else 2.0 / math.sqrt(n_dirs)
    for idx in order[:2]:
        if cdef[idx] > 0.25 * min(e for e, _ in specs):
            continue
        val, u = local_maximize(lambda U: -fine_deficit(U), net[idx], 2 * step)
        if -val <= eta:
            found = check(u)
            if found:
                return found
    return None


@dataclass(frozen=True)
class StabilityWitness:
    perturbed: ConvexBody = field(repr=False)
    cap: CapSpec
    phi: float
    delta_step: float
    hausdorff: float
    axis_angle: float
    tip_displacement: float
    displacement_bound: float
    verified: bool

    @property
    def axis_angle_normalized(self):
        """Axis deviation in the hat-angle unit (radians / pi)."""
        return self.axis_angle / math.pi

    def row(self, trial):
        return {
            "trial": trial,
            "phi": self.phi,
            "Delta": self.delta_step,
            "eps_prime": self.cap.eps,
            "delta_prime": self.cap.delta,
            "axis_angle": self.axis_angle,
            "tip_displacement": self.tip_displacement,
            "verified": self.verified,
        }


def stability_radius(Delta):
    """Hausdorff radius Delta (1 - cos(Delta pi)) / 3 of guaranteed hat stability."""
    return Delta * (1.0 - math.cos(Delta * math.pi)) / 3.0


def _push_thresholds(H, Y, direction):
    """Largest a per row with excess_H(y + a*axis) <= eps."""
    return axial_slack(H, Y)


def stability_witness(K, cap, Delta, K_prime, tol=DEFAULT_TOL, check_hat=True):
    """Hat (eps + Delta, delta - Delta) of a perturbation K' of K.

    Follows the contact construction: the hat of radius eps + Delta and
    angle delta whose tip is pushed out by Delta is slid along the axis
    until it touches K'; the contact point is the new tip and the axis is
    re-aimed at it, which costs at most Delta of cap angle.
    """
    if not 0 < Delta < cap.delta:
        raise PreconditionError("need 0 < Delta < delta")
    phi = stability_radius(Delta)
    if check_hat and not has_hat(K, cap, tol=tol):
        raise PreconditionError("the unperturbed body does not have the given hat")
    dist = hausdorff_distance(K, K_prime, tol=phi / 8, threshold=phi)
    if dist.upper >= phi:
        raise PreconditionError(f"perturbation {dist.lower:.3g} is not within phi = {phi:.3g}")
    u = cap.axis
    H = CapSpec(cap.tip + Delta * u, u, cap.eps + Delta, cap.delta)
    pts, exact = K_prime.extreme_points(None)
    a = _push_thresholds(H, pts, u)
    i = int(np.argmin(a))
    alpha0, contact = float(a[i]), pts[i]
    if not exact:
        def neg_a(U):
            return -_push_thresholds(H, K_prime._touching(U), u)

        net = direction_net(K.dim, 1440 if K.dim == 2 else 4096)
        j = int(np.argmax(neg_a(net)))
        val, uu = local_maximize(neg_a, net[j], 0.05)
        if -val < alpha0:
            alpha0, contact = -val, K_prime._touching(uu[None, :])[0]
    # in K' coordinates: K' + alpha0 u touches H, i.e. K' touches H - alpha0 u
    center = H.center - alpha0 * u
    new_axis = normalize(contact - center)
    wcap = CapSpec(contact, new_axis, cap.eps + Delta, cap.delta - Delta)
    verified = bool(has_hat(K_prime, wcap, tol=tol, check_tip=False))
    if not verified:
        found = find_hat(K_prime, [(wcap.eps, wcap.delta)], eta=tol)
        if found is not None:
            wcap = CapSpec(found.tip, found.axis, wcap.eps, wcap.delta)
            verified = True
    return StabilityWitness(
        perturbed=K_prime,
        cap=wcap,
        phi=phi,
        delta_step=Delta,
        hausdorff=dist.lower,
        axis_angle=float(angle_between(wcap.axis, u)),
        tip_displacement=float(np.linalg.norm(wcap.tip - cap.tip)),
        displacement_bound=phi + Delta * (cap.eps + Delta) * math.pi,
        verified=verified,
    )


@dataclass(frozen=True)
class NestingReport:
    samples: int
    violations: int
    violation_witness: object
    min_boundary_distance: float
    boundary_samples: int
    degenerate: bool

    @property
    def ok(self):
        return self.violations == 0 and (self.degenerate or self.min_boundary_distance > 0)


def _boundary_samples(fam, n, rng, reach):
    """Points of the boundary of the intersection of hats, by ray bisection."""
    p0 = fam.caps[-1].center
    d = p0.shape[0]
    # rays along the open cone never leave within reach; redraw until n hit
    found = []
    for _ in range(64):
        W = normalize(rng.standard_normal((2 * n, d)))
        found.append(W[fam.slack(p0 + reach * W) < 0])
        if sum(len(w) for w in found) >= n:
            break
    W = np.vstack(found)[:n]
    hi = np.full(len(W), reach)
    lo = np.zeros(len(W))
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        ok = fam.slack(p0 + mid[:, None] * W) >= 0
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    return p0 + lo[:, None] * W


def nesting_check(outer, inner, samples=10_000, radius=0.05, seed=0):
    """Sampled check that the inner family's hats nest in the outer ones.

    ``outer`` has radii eps_i and angles delta_i, ``inner`` radii eps'_i <
    eps_i and angles delta'_i >= delta_i. Reports inclusion violations and
    the least distance from the inner boundary (outside a ball of the given
    radius around the tip) to the outer boundary.
    """
    if not (np.allclose(outer.tip, inner.tip) and np.allclose(outer.axis, inner.axis)):
        raise PreconditionError("families must share tip and axis")
    if len(outer.eps) != len(inner.eps):
        raise PreconditionError("families must share the index set")
    if any(e < ep for e, ep in zip(outer.eps, inner.eps)) or any(
        dp < dl for dl, dp in zip(outer.delta, inner.delta)
    ):
        raise PreconditionError("need eps_i >= eps'_i and delta'_i >= delta_i")
    rng = np.random.default_rng(seed)
    d = outer.tip.shape[0]
    reach = 3.0 * outer.eps[0]
    center = outer.caps[0].center
    half = samples // 2
    box = center + reach * rng.uniform(-1.0, 1.0, (half, d))
    near = _boundary_samples(inner, samples - half, rng, reach)
    near = near + 1e-9 * rng.standard_normal(near.shape)
    Y = np.vstack([box, near])
    in_inner = inner.slack(Y) >= 0
    in_outer = outer.slack(Y) >= -1e-12
    bad = in_inner & ~in_outer
    witness = Y[np.argmax(bad)] if bad.any() else None
    degenerate = not all(e > ep for e, ep in zip(outer.eps, inner.eps))
    bpts = _boundary_samples(inner, samples, rng, reach)
    far = np.linalg.norm(bpts - outer.tip, axis=1) > radius
    bpts = bpts[far]
    mind = float(np.min(outer.slack(bpts))) if len(bpts) else math.inf
    return NestingReport(len(Y), int(bad.sum()), witness, mind, int(len(bpts)), degenerate)
