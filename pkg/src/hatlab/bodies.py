"""Convex body variants behind a common support-function interface.

Every body answers, for arrays of unit directions U of shape (n, d):

* ``support(U)``   -- h_K(u) = max_{y in K} <y, u>
* ``touching(U)``  -- a maximizer of <y, u> (u is the OUTWARD normal there)
* ``cap_sup(U, r, S)`` -- an upper bound of max h_K(v) - <s, v> over unit v
  within angle r of u, used to certify sphere searches
* ``level(Y)``     -- a convex function negative inside, zero on the boundary

All bodies are immutable values.
"""

import math

import numpy as np
from scipy import optimize
from scipy.spatial import ConvexHull, QhullError

from .errors import InvalidInputError, NumericFailure
from .sphere import cap_max_linear, direction_net, local_maximize

TIE_TOL = 1e-12


def _as_dirs(U, d):
    U = np.asarray(U, dtype=float)
    single = U.ndim == 1
    U = np.atleast_2d(U)
    if U.shape[-1] != d:
        raise InvalidInputError(f"direction has dimension {U.shape[-1]}, body has dimension {d}")
    return U, single


def _lex_greater(a, b):
    """Row-wise strict lexicographic comparison a > b."""
    diff = a != b
    first = np.argmax(diff, axis=1)
    rows = np.arange(len(a))
    return diff.any(axis=1) & (a[rows, first] > b[rows, first])


def _pick_lex(cands, vals):
    """Pick per row the max-value candidate, ties broken lexicographically.

    cands: (n, m, d), vals: (n, m).
    """
    n, m, _ = cands.shape
    best = cands[:, 0, :].copy()
    best_val = vals[:, 0].copy()
    for j in range(1, m):
        c, v = cands[:, j, :], vals[:, j]
        tol = TIE_TOL * (1.0 + np.abs(best_val))
        better = (v > best_val + tol) | ((np.abs(v - best_val) <= tol) & _lex_greater(c, best))
        best[better] = c[better]
        best_val = np.where(better, v, best_val)
    return best


class ConvexBody:
    """Common machinery; subclasses supply the variant-specific pieces."""

    kind = "abstract"
    polytopal = False

    def __init__(self, dim):
        if dim < 2:
            raise InvalidInputError("ambient dimension must be at least 2")
        self.dim = int(dim)
        self._diameter = None

    # -- variant interface -------------------------------------------------
    def _support(self, U):
        raise NotImplementedError

    def _touching(self, U):
        raise NotImplementedError

    @property
    def strictly_convex(self):
        raise NotImplementedError

    @property
    def radius(self):
        """Upper bound of max ||y|| over K (Lipschitz constant of h_K)."""
        raise NotImplementedError

    def to_spec(self):
        raise NotImplementedError

    # -- public vectorized API ---------------------------------------------
    def support(self, U):
        U, single = _as_dirs(U, self.dim)
        h = self._support(U)
        return float(h[0]) if single else h

    def touching(self, U):
        U, single = _as_dirs(U, self.dim)
        x = self._touching(U)
        return x[0] if single else x

    def extreme_points(self, n=None):
        """Points containing all extreme points (exact) or a dense sample.

        Returns (points, exact).
        """
        if n is None:
            n = 1440 if self.dim == 2 else 4096
        return self._touching(direction_net(self.dim, n)), False

    def cap_sup(self, U, r, S):
        # Lipschitz fallback: <y - s, v> <= <y - s, u> + ||y - s|| * chord
        chord = 2.0 * np.sin(np.minimum(r, math.pi) / 2.0)
        ref, rad = self.bounding_ball()
        reach = np.linalg.norm(S - ref, axis=-1) + rad
        return self._support(U) - np.sum(S * U, axis=-1) + reach * chord

    def bounding_ball(self):
        return np.zeros(self.dim), self.radius

    def level(self, Y):
        """Signed distance via the dual formula max_u <y, u> - h_K(u)."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        net = direction_net(self.dim, 2048 if self.dim == 2 else 4096)
        hn = self._support(net)
        vals = Y @ net.T - hn[None, :]
        out = np.empty(len(Y))
        step = 4.0 * math.pi / len(net) if self.dim == 2 else 0.1
        for i, y in enumerate(Y):
            j = int(np.argmax(vals[i]))
            out[i], _ = local_maximize(lambda V, y=y: V @ y - self._support(V), net[j], step)
        return out

    def contains(self, y, tol=1e-9):
        return bool(self.level(np.atleast_2d(y))[0] <= tol)

    def diameter(self):
        if self._diameter is None:
            net = direction_net(self.dim, 720 if self.dim == 2 else 2048)
            self._diameter = float(np.max(self._support(net) + self._support(-net)))
        return self._diameter

    # analytic sagitta, free of cancellation at small scales
    exact_sagitta = False

    def section_sagitta(self, x, nu, tau, t):
        """Least s >= 0 with x + t*tau + s*nu in K, for x on the boundary.

        Generic path: scan s on a geometric grid for the first inside
        point, then bracket the entry crossing.
        """
        x, nu, tau = (np.asarray(a, dtype=float) for a in (x, nu, tau))
        base = x + t * tau

        def f(s):
            return float(self.level((base + s * nu)[None, :])[0])

        # only a base point inside K means a flat section; tiny positive
        # levels still get a (tiny) root, which callers may drop as noise
        if f(0.0) <= 0.0:
            return 0.0
        span = self.diameter()
        prev = 0.0
        for s in span * 2.0 ** -np.arange(80, -1, -0.5):
            if f(s) < 0:
                return optimize.brentq(f, prev, s, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
            prev = s
        raise NumericFailure("no boundary crossing in the section quadrant", diagnostics={"t": t})

    def __repr__(self):
        return f"{type(self).__name__}({self.to_spec()})"

    def __eq__(self, other):
        return type(self) is type(other) and self.to_spec() == other.to_spec()

    def __hash__(self):
        return hash(repr(self))


class Ball(ConvexBody):
    kind = "ball"
    exact_sagitta = True

    def __init__(self, center, radius):
        center = np.array(center, dtype=float)
        super().__init__(center.shape[0])
        if not radius > 0:
            raise InvalidInputError("ball radius must be positive")
        self.center = center
        self.center.setflags(write=False)
        self.r = float(radius)

    @property
    def strictly_convex(self):
        return True

    @property
    def radius(self):
        return float(np.linalg.norm(self.center)) + self.r

    def bounding_ball(self):
        return self.center, self.r

    def _support(self, U):
        return U @ self.center + self.r

    def _touching(self, U):
        return self.center + self.r * U

    def cap_sup(self, U, r, S):
        return self.r + cap_max_linear(self.center - S, U, r)

    def level(self, Y):
        return np.linalg.norm(np.atleast_2d(Y) - self.center, axis=-1) - self.r

    def diameter(self):
        return 2.0 * self.r

    def section_sagitta(self, x, nu, tau, t):
        # x is taken to lie exactly on the sphere: |x - c| = r
        q = np.asarray(x, dtype=float) - self.center
        b = 2.0 * float(np.dot(q, nu))
        c0 = 2.0 * t * float(np.dot(q, tau)) + t * t
        disc = b * b - 4.0 * c0
        if disc < 0 or b >= 0:
            raise NumericFailure("no boundary crossing in the section quadrant", diagnostics={"t": t})
        return max(0.0, 2.0 * c0 / (-b + math.sqrt(disc)))

    def to_spec(self):
        return {"type": "ball", "center": self.center.tolist(), "radius": self.r}


class Ellipsoid(ConvexBody):
    """center + Q diag(semi_axes) B, with Q orthogonal (identity by default)."""

    kind = "ellipsoid"
    exact_sagitta = True

    def __init__(self, semi_axes, center=None, rotation=None):
        a = np.array(semi_axes, dtype=float)
        super().__init__(a.shape[0])
        if np.any(a <= 0):
            raise InvalidInputError("semi-axes must be positive")
        self.a = a
        self.center = np.zeros(self.dim) if center is None else np.array(center, dtype=float)
        self.rotation = np.eye(self.dim) if rotation is None else np.array(rotation, dtype=float)
        if not np.allclose(self.rotation @ self.rotation.T, np.eye(self.dim), atol=1e-10):
            raise InvalidInputError("rotation must be orthogonal")
        for arr in (self.a, self.center, self.rotation):
            arr.setflags(write=False)

    @property
    def strictly_convex(self):
        return True

    @property
    def radius(self):
        return float(np.linalg.norm(self.center)) + float(self.a.max())

    def bounding_ball(self):
        return self.center, float(self.a.max())

    def _local(self, U):
        return (U @ self.rotation) * self.a

    def _support(self, U):
        return U @ self.center + np.linalg.norm(self._local(U), axis=-1)

    def _touching(self, U):
        w = self._local(U)
        n = np.linalg.norm(w, axis=-1, keepdims=True)
        return self.center + ((w * self.a) / n) @ self.rotation.T

    def cap_sup(self, U, r, S):
        # second-order bound: h(v) <= <x(u), v> + M |v - u|^2 / 2 on the cap
        x0 = self._touching(U)
        half = np.minimum(r, math.pi) / 2.0
        m = self.a.max() ** 2 / (self.a.min() * np.maximum(np.cos(half), 1e-12))
        quad = m * 2.0 * np.sin(half) ** 2
        lip = super().cap_sup(U, r, S)
        return np.minimum(cap_max_linear(x0 - S, U, r) + quad, lip)

    def level(self, Y):
        z = ((np.atleast_2d(Y) - self.center) @ self.rotation) / self.a
        return np.linalg.norm(z, axis=-1) - 1.0

    def section_sagitta(self, x, nu, tau, t):
        # |A^-1 (x + t tau + s nu - c)| = 1 with |A^-1 (x - c)| = 1 taken exact
        inv = lambda v: (np.asarray(v, dtype=float) @ self.rotation) / self.a  # noqa: E731
        px, pt, pn = inv(np.asarray(x) - self.center), inv(tau), inv(nu)
        qa = float(pn @ pn)
        qb = 2.0 * float(px @ pn) + 2.0 * t * float(pt @ pn)
        qc = 2.0 * t * float(px @ pt) + t * t * float(pt @ pt)
        disc = qb * qb - 4.0 * qa * qc
        if disc < 0 or qb >= 0:
            raise NumericFailure("no boundary crossing in the section quadrant", diagnostics={"t": t})
        return max(0.0, 2.0 * qc / (-qb + math.sqrt(disc)))

    def to_spec(self):
        spec = {"type": "ellipsoid", "semi_axes": self.a.tolist()}
        if np.any(self.center != 0):
            spec["center"] = self.center.tolist()
        if not np.array_equal(self.rotation, np.eye(self.dim)):
            spec["rotation"] = self.rotation.tolist()
        return spec


class Polytope(ConvexBody):
    """Convex hull of finitely many points; redundant points are dropped."""

    kind = "polytope"
    polytopal = True

    def __init__(self, vertices):
        pts = np.array(vertices, dtype=float)
        if pts.ndim != 2:
            raise InvalidInputError("vertices must be a list of points")
        super().__init__(pts.shape[1])
        try:
            hull = ConvexHull(pts)
        except QhullError as exc:
            raise InvalidInputError(f"polytope has empty interior: {exc}") from None
        v = pts[np.sort(hull.vertices)]
        order = np.lexsort(v.T[::-1])[::-1]
        self.vertices = v[order]
        self.vertices.setflags(write=False)
        self.equations = hull.equations

    @property
    def strictly_convex(self):
        return False

    @property
    def radius(self):
        return float(np.max(np.linalg.norm(self.vertices, axis=1)))

    def bounding_ball(self):
        c = self.vertices.mean(axis=0)
        return c, float(np.max(np.linalg.norm(self.vertices - c, axis=1)))

    def _support(self, U):
        return np.max(U @ self.vertices.T, axis=1)

    def _touching(self, U):
        vals = U @ self.vertices.T
        top = vals.max(axis=1, keepdims=True)
        tied = vals >= top - TIE_TOL * (1.0 + np.abs(top))
        # vertices are stored in descending lexicographic order
        return self.vertices[np.argmax(tied, axis=1)]

    def extreme_points(self, n=None):
        return self.vertices, True

    def cap_sup(self, U, r, S):
        w = self.vertices[None, :, :] - S[:, None, :]
        return np.max(cap_max_linear(w, U[:, None, :], r), axis=1)

    def level(self, Y):
        Y = np.atleast_2d(Y)
        return np.max(Y @ self.equations[:, :-1].T + self.equations[:, -1], axis=1)

    def to_spec(self):
        return {"type": "polytope", "vertices": self.vertices.tolist()}


class Revolution(ConvexBody):
    """Body of revolution around the last axis with pole at the origin.

    Below height ``height`` the body is the epigraph {z >= |t|^p}. Above it
    the body is closed by the ball tangent to the profile along the rim
    |t| = height**(1/p), so the boundary is C^1. The pole has infinite
    curvature for 1 < p < 2 and zero curvature for p > 2.
    """

    kind = "revolution"

    def __init__(self, exponent, height=0.5, dim=2):
        super().__init__(dim)
        p, h = float(exponent), float(height)
        if not p > 1:
            raise InvalidInputError("exponent must exceed 1")
        if not h > 0:
            raise InvalidInputError("height must be positive")
        self.p, self.h = p, h
        self.rim = h ** (1.0 / p)
        # normal of the profile at the rim is proportional to (p rim^(p-1), -1)
        rise = self.rim ** (2.0 - p) / p
        self.cap_center = np.zeros(dim)
        self.cap_center[-1] = h + rise
        self.cap_radius = math.hypot(self.rim, rise)
        rho = np.linspace(0.0, self.rim, 4001)
        self._reach = float(
            max(self.cap_radius, np.max(np.hypot(rho, self.cap_center[-1] - rho**p)))
        ) * (1 + 1e-9)
        self._rmax = self._max_curvature_radius()

    def _max_curvature_radius(self):
        # profile radii grow towards the rim for p < 2; for p > 2 the pole is flat
        if self.p > 2:
            return math.inf
        t = np.linspace(0.0, self.rim, 4001)[1:]
        d1, d2 = self.p * t ** (self.p - 1), self.p * (self.p - 1) * t ** (self.p - 2)
        radii = [(1 + d1**2) ** 1.5 / d2, [self.cap_radius]]
        if self.dim > 2:
            radii.append(t * np.sqrt(1 + d1**2) / d1)
        return float(max(np.max(r) for r in radii)) * (1 + 1e-6)

    @property
    def strictly_convex(self):
        return True

    @property
    def radius(self):
        return float(self.cap_center[-1] + self.cap_radius)

    def cap_sup(self, U, r, S):
        lip = super().cap_sup(U, r, S)
        if not math.isfinite(self._rmax):
            return lip
        # all curvature radii <= rmax, so K rolls freely inside that ball
        quad = self._rmax * (1.0 - math.cos(min(r, math.pi)))
        return np.minimum(cap_max_linear(self._touching(U) - S, U, r) + quad, lip)

    def bounding_ball(self):
        return self.cap_center, self._reach

    def _split(self, U):
        ut = U[:, :-1]
        nt = np.linalg.norm(ut, axis=1)
        w = np.where(nt[:, None] > 0, ut / np.where(nt > 0, nt, 1.0)[:, None], 0.0)
        return nt, w, U[:, -1]

    def _profile_rho(self, nt, uz):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            rho = (nt / (self.p * -uz)) ** (1.0 / (self.p - 1.0))
        rho = np.where(uz < 0, rho, self.rim)
        return np.clip(np.nan_to_num(rho, nan=self.rim, posinf=self.rim), 0.0, self.rim)

    def _candidates(self, U):
        nt, w, uz = self._split(U)
        rho = self._profile_rho(nt, uz)
        g = np.empty_like(U)
        g[:, :-1] = rho[:, None] * w
        g[:, -1] = rho**self.p
        gval = rho * nt + rho**self.p * uz
        a = self.cap_center + self.cap_radius * U
        on_arc = a[:, -1] >= self.h
        aval = np.where(on_arc, U @ self.cap_center + self.cap_radius, -np.inf)
        return g, gval, a, aval

    def _support(self, U):
        _, gval, _, aval = self._candidates(U)
        return np.maximum(gval, aval)

    def _touching(self, U):
        g, gval, a, aval = self._candidates(U)
        return np.where((aval > gval)[:, None], a, g)

    def level(self, Y):
        Y = np.atleast_2d(Y)
        rho = np.linalg.norm(Y[:, :-1], axis=1)
        below = rho**self.p - Y[:, -1]
        above = np.linalg.norm(Y - self.cap_center, axis=1) - self.cap_radius
        return np.where(Y[:, -1] <= self.h, below, above)

    def to_spec(self):
        return {"type": "revolution", "exponent": self.p, "height": self.h, "dim": self.dim}


class HullWithPoints(ConvexBody):
    """conv(base U points) for a non-polytopal base."""

    kind = "hull"

    def __init__(self, base, points):
        super().__init__(base.dim)
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != base.dim:
            raise InvalidInputError("point dimension does not match base body")
        self.base = base
        keep = base.level(pts) > 1e-12 if len(pts) else np.zeros(0, bool)
        self.points = pts[keep]
        self.points.setflags(write=False)

    @property
    def strictly_convex(self):
        return False if len(self.points) else self.base.strictly_convex

    @property
    def radius(self):
        extra = float(np.max(np.linalg.norm(self.points, axis=1))) if len(self.points) else 0.0
        return max(self.base.radius, extra)

    def bounding_ball(self):
        c, r = self.base.bounding_ball()
        if len(self.points):
            r = max(r, float(np.max(np.linalg.norm(self.points - c, axis=1))))
        return c, r

    def _support(self, U):
        h = self.base._support(U)
        if len(self.points):
            h = np.maximum(h, np.max(U @ self.points.T, axis=1))
        return h

    def _touching(self, U):
        if not len(self.points):
            return self.base._touching(U)
        cands = np.concatenate(
            [self.base._touching(U)[:, None, :], np.broadcast_to(self.points, (len(U),) + self.points.shape)],
            axis=1,
        )
        vals = np.einsum("nmd,nd->nm", cands, U)
        return _pick_lex(cands, vals)

    def extreme_points(self, n=None):
        pts, exact = self.base.extreme_points(n)
        return np.vstack([pts, self.points]), exact

    def cap_sup(self, U, r, S):
        b = self.base.cap_sup(U, r, S)
        if len(self.points):
            w = self.points[None, :, :] - S[:, None, :]
            b = np.maximum(b, np.max(cap_max_linear(w, U[:, None, :], r), axis=1))
        return b

    def to_spec(self):
        return {"type": "hull", "base": self.base.to_spec(), "points": self.points.tolist()}


class Rounded(ConvexBody):
    """Minkowski sum K + B(0, phi)."""

    kind = "rounded"

    def __init__(self, base, phi):
        super().__init__(base.dim)
        if not phi >= 0:
            raise InvalidInputError("rounding radius must be nonnegative")
        self.base = base
        self.phi = float(phi)

    @property
    def strictly_convex(self):
        # rounding keeps the flat pieces of a polytope base
        return self.base.strictly_convex

    @property
    def radius(self):
        return self.base.radius + self.phi

    def bounding_ball(self):
        c, r = self.base.bounding_ball()
        return c, r + self.phi

    def _support(self, U):
        return self.base._support(U) + self.phi

    def _touching(self, U):
        return self.base._touching(U) + self.phi * U

    def cap_sup(self, U, r, S):
        return self.base.cap_sup(U, r, S) + self.phi

    def to_spec(self):
        return {"type": "rounded", "base": self.base.to_spec(), "phi": self.phi}


def body_from_spec(spec):
    """Build a body from its JSON body-spec dictionary."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise InvalidInputError("body spec must be an object with a 'type' field")
    kind = spec["type"]
    allowed = {
        "ball": {"center", "radius"},
        "ellipsoid": {"semi_axes", "center", "rotation"},
        "polytope": {"vertices"},
        "revolution": {"exponent", "height", "dim"},
        "hull": {"base", "points"},
        "rounded": {"base", "phi"},
    }
    if kind not in allowed:
        raise InvalidInputError(f"unknown body type {kind!r}")
    extra = set(spec) - allowed[kind] - {"type", "id"}
    if extra:
        raise InvalidInputError(f"unknown fields for {kind}: {sorted(extra)}")
    try:
        if kind == "ball":
            return Ball(spec["center"], spec["radius"])
        if kind == "ellipsoid":
            return Ellipsoid(spec["semi_axes"], spec.get("center"), spec.get("rotation"))
        if kind == "polytope":
            return Polytope(spec["vertices"])
        if kind == "revolution":
            return Revolution(spec["exponent"], spec.get("height", 0.5), spec.get("dim", 2))
        if kind == "hull":
            from .geometry import hull_with_points

            return hull_with_points(body_from_spec(spec["base"]), spec["points"])
        return Rounded(body_from_spec(spec["base"]), spec["phi"])
    except KeyError as exc:
        raise InvalidInputError(f"missing field {exc.args[0]!r} for {kind}") from None
