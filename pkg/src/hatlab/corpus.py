"""Named fixture bodies and seeded perturbations used by the verification suites."""

import itertools
import math

import numpy as np

from .bodies import Ball, Ellipsoid, HullWithPoints, Polytope, Revolution, Rounded
from .geometry import minkowski_ball, random_rotation, rotate, rotation_2d, translate
from .hat import CapSpec
from .sphere import direction_net


def square(half=1.0):
    return Polytope([[-half, -half], [half, -half], [half, half], [-half, half]])


def cube(half=1.0):
    return Polytope(np.array(list(itertools.product([-half, half], repeat=3))))


def stadium():
    """Rectangle [-1,1] x [-0.1,0.1] rounded by 0.5: flat sides, round ends."""
    return Rounded(Polytope([[-1, -0.1], [1, -0.1], [1, 0.1], [-1, 0.1]]), 0.5)


def strictly_convex_corpus(dim):
    """Strictly convex fixtures keyed by name."""
    if dim == 2:
        return {
            "ball": Ball([0.0, 0.0], 1.0),
            "ball-small": Ball([0.3, -0.2], 0.5),
            "ellipse": Ellipsoid([2.0, 1.0]),
            "ellipse-rot": Ellipsoid([1.5, 0.7], center=[0.2, 0.1], rotation=rotation_2d(0.4)),
            "rounded-ellipse": Rounded(Ellipsoid([1.0, 0.6]), 0.2),
            "revolution-1.5": Revolution(1.5),
            "revolution-3": Revolution(3.0),
        }
    rot = random_rotation(3, np.random.default_rng(3))
    return {
        "sphere": Ball([0.0, 0.0, 0.0], 1.0),
        "ellipsoid": Ellipsoid([2.0, 1.0, 1.0]),
        "ellipsoid-rot": Ellipsoid([1.5, 1.0, 0.7], rotation=rot),
        "revolution-1.5": Revolution(1.5, dim=3),
    }


def full_corpus(dim):
    bodies = dict(strictly_convex_corpus(dim))
    if dim == 2:
        bodies.update(
            {
                "triangle": Polytope([[0, 0], [1, 0], [0, 1]]),
                "square": square(),
                "stadium": stadium(),
                "spiked-ball": HullWithPoints(Ball([0, 0], 1.0), [[0.0, -1.2]]),
            }
        )
    else:
        bodies.update({"cube": cube(), "rounded-cube": Rounded(cube(), 0.1)})
    return bodies


def stability_cases(dim):
    """(name, body, cap) triples where the cap is a hat of the body."""
    if dim == 2:
        return [
            ("ball", Ball([0.0, 1.0], 1.0), CapSpec([0.0, 0.0], [0.0, -1.0], 1.0, 0.3)),
            ("ellipse", Ellipsoid([2.0, 1.0]), CapSpec([2.0, 0.0], [1.0, 0.0], 1.0, 0.3)),
            ("revolution", Revolution(1.5), CapSpec([0.0, 0.0], [0.0, -1.0], 1.0, 1.0 / 3.0)),
            ("triangle", Polytope([[0, 0], [-0.1, 1], [0.1, 1]]), CapSpec([0.0, 0.0], [0.0, -1.0], 0.05, 0.2)),
        ]
    return [
        ("sphere", Ball([0.0, 0.0, 0.0], 1.0), CapSpec([0.0, 0.0, -1.0], [0.0, 0.0, -1.0], 1.0, 0.3)),
        ("ellipsoid", Ellipsoid([2.0, 1.0, 1.0]), CapSpec([2.0, 0.0, 0.0], [1.0, 0.0, 0.0], 1.0, 0.3)),
        ("revolution", Revolution(1.5, dim=3), CapSpec([0.0, 0.0, 0.0], [0.0, 0.0, -1.0], 1.0, 1.0 / 3.0)),
    ]


def _unit(rng, d):
    v = rng.standard_normal(d)
    return v / np.linalg.norm(v)


def inscribed_polytope(K, n, rng=None, jitter=0.0):
    """Hull of the touching points of n normals, optionally jittered."""
    pts = K._touching(direction_net(K.dim, n, include_axes=False))
    if jitter and rng is not None:
        pts = pts + jitter * rng.uniform(-1.0, 1.0, pts.shape)
    return Polytope(pts)


def perturb(K, budget, rng, kind=None):
    """A seeded perturbation of K meant to stay within ``budget`` of it.

    The bound is by construction (sums of the parts); callers certify the
    actual distance with hausdorff_distance.
    """
    d = K.dim
    # revolution bodies have no translated variant
    kinds = ["round", "hull"] if isinstance(K, Revolution) else ["translate", "round", "hull", "composite"]
    if isinstance(K, (Ball, Ellipsoid)):
        kinds += ["axes", "rotate"]
    if d == 2:
        kinds.append("polygon")
    kind = kind or kinds[int(rng.integers(len(kinds)))]
    b = budget * rng.uniform(0.2, 0.9)
    if kind == "translate":
        return translate(K, b * _unit(rng, d)), kind
    if kind == "round":
        return minkowski_ball(K, b), kind
    if kind == "hull":
        U = np.array([_unit(rng, d) for _ in range(int(rng.integers(1, 4)))])
        heights = b * rng.uniform(0.1, 1.0, len(U))
        return HullWithPoints(K, K._touching(U) + heights[:, None] * U), kind
    if kind == "composite":
        f = rng.uniform(0.2, 0.8)
        return minkowski_ball(translate(K, f * b * _unit(rng, d)), (1 - f) * b), kind
    if kind == "axes":
        if isinstance(K, Ball):
            return Ball(K.center, K.r + b * rng.uniform(-1.0, 1.0)), kind
        da = b * rng.uniform(-1.0, 1.0, d)
        return Ellipsoid(K.a + da, K.center, K.rotation), kind
    if kind == "rotate":
        # rotation about the center moves points by at most angle * radius
        rad = float(np.max(K.a)) if isinstance(K, Ellipsoid) else K.r
        ang = b / rad
        Q = rotation_2d(ang) if d == 2 else _small_rotation(rng, ang)
        c = K.center
        return translate(rotate(translate(K, -c), Q), c), kind
    if kind == "polygon":
        # inscribed polygon gap ~ rho * (2 pi / n)^2 / 8 for curvature radius rho
        if isinstance(K, Polytope):
            return Polytope(K.vertices + 0.5 * b * rng.uniform(-1.0, 1.0, K.vertices.shape) / math.sqrt(2)), kind
        rho = 4.0 * K.diameter()
        n = int(min(4096, max(64, math.ceil(2 * math.pi * math.sqrt(rho / (8 * 0.5 * b))))))
        return inscribed_polytope(K, n, rng, jitter=0.4 * b / math.sqrt(2)), kind
    raise ValueError(kind)


def _small_rotation(rng, angle):
    axis = _unit(rng, 3)
    Kx = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + math.sin(angle) * Kx + (1 - math.cos(angle)) * Kx @ Kx
