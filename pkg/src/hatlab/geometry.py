"""Operations on convex bodies: support queries, touching points, the
Pompeiu-Hausdorff distance, Minkowski rounding and hulls with points."""

from dataclasses import dataclass

import numpy as np

from .bodies import Ball, ConvexBody, Ellipsoid, HullWithPoints, Polytope, Rounded
from .errors import InvalidInputError
from .sphere import branch_and_bound_max, normalize

UNIT_TOL = 1e-12


def as_direction(u, dim=None):
    """Validate a unit vector (norm 1 within 1e-12, dimension >= 2)."""
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.shape[0] < 2:
        raise InvalidInputError("a direction is a vector of dimension >= 2")
    if dim is not None and u.shape[0] != dim:
        raise InvalidInputError(f"direction has dimension {u.shape[0]}, expected {dim}")
    if abs(np.linalg.norm(u) - 1.0) > UNIT_TOL:
        raise InvalidInputError("direction must be a unit vector")
    return u


def support(K, u):
    return K.support(as_direction(u, K.dim))


def touching_point(K, tau):
    """Boundary point at which ``tau`` is an inward normal.

    For bodies with faces the lexicographically greatest maximizer of
    <y, -tau> is returned.
    """
    return K.touching(-as_direction(tau, K.dim))


@dataclass(frozen=True)
class HausdorffResult:
    value: float
    lower: float
    upper: float
    method: str

    @property
    def error(self):
        return self.upper - self.lower

    def __float__(self):
        return self.value


def _closed_form(K, L):
    if K == L:
        return 0.0
    if isinstance(K, Ball) and isinstance(L, Ball):
        return float(np.linalg.norm(K.center - L.center)) + abs(K.r - L.r)
    if isinstance(K, Ellipsoid) and isinstance(L, Ellipsoid):
        if np.array_equal(K.a, L.a) and np.array_equal(K.rotation, L.rotation):
            return float(np.linalg.norm(K.center - L.center))
    if isinstance(K, Polytope) and isinstance(L, Polytope) and K.vertices.shape == L.vertices.shape:
        shift = L.vertices - K.vertices
        if np.allclose(shift, shift[0], rtol=0.0, atol=1e-15):
            return float(np.linalg.norm(shift[0]))
    if isinstance(L, Rounded) and L.base == K:
        return L.phi
    if isinstance(K, Rounded) and isinstance(L, Rounded) and K.base == L.base:
        # constant support gap: no cap bound can prune it, so use the identity
        return abs(K.phi - L.phi)
    if isinstance(L, HullWithPoints) and L.base == K:
        if not len(L.points):
            return 0.0
        # the farthest added point realizes the distance
        return max(0.0, float(np.max(ConvexBody.level(K, L.points))))
    return None


def hausdorff_distance(K, L, tol=1e-6, max_evals=2_000_000, threshold=None):
    """d_PH(K, L) = sup_u |h_K(u) - h_L(u)| with certified bracket.

    Exact for pairs related by a known identity (balls, translates, a body
    and its rounding or hull with points). Otherwise a sphere
    branch-and-bound whose cap bounds come from each body's ``cap_sup``;
    NumericFailure (with the best bracket) when the budget runs out.
    """
    if K.dim != L.dim:
        raise InvalidInputError("bodies live in different dimensions")
    for a, b in ((K, L), (L, K)):
        v = _closed_form(a, b)
        if v is not None:
            v = float(v)
            return HausdorffResult(v, v, v, "closed-form")

    def g(U):
        return np.abs(K._support(U) - L._support(U))

    def upper(U, r):
        return np.maximum(K.cap_sup(U, r, L._touching(U)), L.cap_sup(U, r, K._touching(U)))

    lo, up, _ = branch_and_bound_max(g, upper, K.dim, tol, max_evals=max_evals, threshold=threshold)
    return HausdorffResult(float(lo), float(lo), float(max(lo, up)), "branch-and-bound")


def minkowski_ball(K, phi):
    if phi < 0:
        raise InvalidInputError("rounding radius must be nonnegative")
    if phi == 0:
        return K
    if isinstance(K, Ball):
        return Ball(K.center, K.r + phi)
    if isinstance(K, Rounded):
        return Rounded(K.base, K.phi + phi)
    return Rounded(K, phi)


def hull_with_points(K, points):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        return K
    if pts.shape[1] != K.dim:
        raise InvalidInputError("point dimension does not match body")
    if isinstance(K, Polytope):
        return Polytope(np.vstack([K.vertices, pts]))
    if isinstance(K, HullWithPoints):
        merged = HullWithPoints(K.base, np.vstack([K.points, pts]))
        return _drop_absorbed(merged)
    return HullWithPoints(K, pts)


def _drop_absorbed(H):
    keep = []
    for i in range(len(H.points)):
        others = np.delete(H.points, i, axis=0)
        rest = HullWithPoints(H.base, others) if len(others) else H.base
        if ConvexBody.level(rest, H.points[i : i + 1])[0] > 1e-12:
            keep.append(i)
    if len(keep) == len(H.points):
        return H
    return HullWithPoints(H.base, H.points[keep])


def hull_with_point(K, p):
    return hull_with_points(K, np.asarray(p, dtype=float)[None, :])


def translate(K, v):
    """Rigid translation by v (used for fixtures and invariance checks)."""
    v = np.asarray(v, dtype=float)
    if isinstance(K, Ball):
        return Ball(K.center + v, K.r)
    if isinstance(K, Ellipsoid):
        return Ellipsoid(K.a, K.center + v, K.rotation)
    if isinstance(K, Polytope):
        return Polytope(K.vertices + v)
    if isinstance(K, Rounded):
        return Rounded(translate(K.base, v), K.phi)
    if isinstance(K, HullWithPoints):
        return HullWithPoints(translate(K.base, v), K.points + v)
    raise InvalidInputError(f"translation not supported for {K.kind}")


def rotate(K, Q):
    """Apply the orthogonal map y -> Q y."""
    Q = np.asarray(Q, dtype=float)
    if isinstance(K, Ball):
        return Ball(Q @ K.center, K.r)
    if isinstance(K, Ellipsoid):
        return Ellipsoid(K.a, Q @ K.center, Q @ K.rotation)
    if isinstance(K, Polytope):
        return Polytope(K.vertices @ Q.T)
    if isinstance(K, Rounded):
        return Rounded(rotate(K.base, Q), K.phi)
    if isinstance(K, HullWithPoints):
        return HullWithPoints(rotate(K.base, Q), K.points @ Q.T)
    raise InvalidInputError(f"rotation not supported for {K.kind}")


def rotation_2d(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def random_rotation(d, rng):
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def unit(v):
    return normalize(np.asarray(v, dtype=float))
