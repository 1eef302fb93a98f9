"""Search and optimization on the unit sphere.

Direction nets, local refinement of a sampled maximum, and a Lipschitz /
second-order branch-and-bound over the cube-face subdivision of the sphere.
"""

import itertools
import math

import numpy as np
from scipy import optimize

from .errors import NumericFailure

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


def normalize(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / n


def angle_between(u, v):
    """Angle in radians between (arrays of) vectors, computed stably."""
    u = normalize(u)
    v = normalize(v)
    cross = np.linalg.norm(v - u * np.sum(u * v, axis=-1, keepdims=True), axis=-1)
    dot = np.sum(u * v, axis=-1)
    return np.arctan2(cross, dot)


def direction_net(d, n, include_axes=True, seed=0):
    """Roughly uniform unit directions in R^d.

    A regular angular grid in the plane, a Fibonacci lattice in 3-space and
    seeded Gaussian samples beyond. The coordinate directions are appended
    so that symmetric fixtures are hit exactly.
    """
    if d == 2:
        t = 2.0 * np.pi * np.arange(n) / n
        net = np.column_stack([np.cos(t), np.sin(t)])
    elif d == 3:
        k = np.arange(n) + 0.5
        z = 1.0 - 2.0 * k / n
        rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
        phi = GOLDEN_ANGLE * k
        net = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    else:
        rng = np.random.default_rng(seed)
        net = normalize(rng.standard_normal((n, d)))
    if include_axes:
        eye = np.eye(d)
        net = np.vstack([net, eye, -eye])
    return net


def tangent_basis(u):
    """Orthonormal basis (rows) of the orthogonal complement of u."""
    u = normalize(u)
    d = u.shape[0]
    m = np.eye(d) - np.outer(u, u)
    q, _ = np.linalg.qr(np.column_stack([u, m]))
    return q[:, 1:d].T


def local_maximize(f, u0, step):
    """Polish a sampled maximum of ``f`` near the unit direction ``u0``.

    ``f`` maps an (n, d) array of unit vectors to n values. Returns the
    best (value, direction) found, never worse than the starting point.
    """
    u0 = normalize(u0)
    basis = tangent_basis(u0)

    def at(w):
        return normalize(u0 + np.atleast_1d(w) @ basis)

    def neg(w):
        return -float(f(at(w)[None, :])[0])

    best_val = -neg(np.zeros(basis.shape[0]))
    best_u = u0
    if basis.shape[0] == 1:
        res = optimize.minimize_scalar(
            lambda s: neg(np.array([s])),
            bounds=(-step, step),
            method="bounded",
            options={"xatol": 1e-13},
        )
        w = np.array([res.x])
        val = -res.fun
    else:
        k = basis.shape[0]
        simplex = np.vstack([np.zeros(k), step * np.eye(k)]) - step / (k + 1)
        res = optimize.minimize(
            neg,
            np.zeros(k),
            method="Nelder-Mead",
            options={"initial_simplex": simplex, "xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000},
        )
        w = res.x
        val = -res.fun
    if val > best_val:
        return val, at(w)
    return best_val, best_u


def maximize_on_sphere(f, d, n=720, top_k=4, step=None, net=None):
    """Global maximum of a vectorized function on the sphere by net + polish."""
    if net is None:
        net = direction_net(d, n)
    vals = f(net)
    order = np.argsort(vals)[::-1]
    if step is None:
        step = 4.0 * math.pi / max(len(net), 1) if d == 2 else 3.0 / math.sqrt(len(net))
    best_val, best_u = float(vals[order[0]]), net[order[0]]
    seen = []
    for idx in order:
        if len(seen) >= top_k:
            break
        if any(np.dot(net[idx], s) > math.cos(2 * step) for s in seen):
            continue
        seen.append(net[idx])
        val, u = local_maximize(f, net[idx], step)
        if val > best_val:
            best_val, best_u = val, u
    return best_val, best_u


def _initial_boxes(d, m):
    faces = []
    centers = []
    h = 1.0 / m
    grid = -1.0 + h * (2 * np.arange(m) + 1)
    cells = np.array(list(itertools.product(grid, repeat=d - 1))).reshape(-1, d - 1)
    for k in range(d):
        for s in (-1.0, 1.0):
            faces.append(np.tile([k, s], (len(cells), 1)))
            centers.append(cells)
    return np.vstack(faces), np.vstack(centers), h


def _box_directions(faces, centers, d):
    n = len(faces)
    w = np.empty((n, d))
    k = faces[:, 0].astype(int)
    rows = np.arange(n)
    mask = np.ones((n, d), dtype=bool)
    mask[rows, k] = False
    w[mask] = centers.reshape(-1)
    w[rows, k] = faces[:, 1]
    return normalize(w)


def _chunked(f, U, size=8192):
    if len(U) <= size:
        return f(U)
    return np.concatenate([f(U[i : i + size]) for i in range(0, len(U), size)])


def branch_and_bound_max(g, upper, d, tol, max_evals=2_000_000, threshold=None, polish=True):
    """Certified maximum of ``g`` over the unit sphere.

    ``g(U)`` evaluates the objective at unit directions; ``upper(U, r)``
    returns, for each row of U, an upper bound of ``g`` over the spherical
    cap of angular radius r around it. The sphere is covered by the faces
    of the cube [-1, 1]^d, radially projected; a face box of half side h
    projects into a cap of chord radius sqrt(d - 1) * h.

    Returns (lower, upper, argmax). With ``threshold`` set the search stops
    as soon as the maximum is certified to lie on one side of it.
    """
    faces, centers, h = _initial_boxes(d, 4 if d > 2 else 16)
    best = -math.inf
    best_u = None
    pruned_upper = -math.inf
    evals = 0
    offsets = np.array(list(itertools.product((-0.5, 0.5), repeat=d - 1))).reshape(-1, d - 1)
    while len(faces):
        dirs = _box_directions(faces, centers, d)
        vals = _chunked(g, dirs)
        evals += len(dirs)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, best_u = float(vals[i]), dirs[i]
            if polish:
                step = min(0.5, 4.0 * math.sqrt(d - 1) * h)
                pv, pu = local_maximize(g, best_u, step)
                if pv > best:
                    best, best_u = pv, pu
        chord = min(2.0, math.sqrt(d - 1) * h)
        r = 2.0 * math.asin(chord / 2.0)
        ups = np.maximum(_chunked(lambda U: upper(U, r), dirs), vals)
        # with a threshold only boxes that could still reach it matter
        keep = ups > best + tol if threshold is None else ups >= threshold
        if np.any(~keep):
            pruned_upper = max(pruned_upper, float(np.max(ups[~keep])))
        global_upper = max(best, pruned_upper, float(np.max(ups[keep])) if np.any(keep) else -math.inf)
        if threshold is not None and (global_upper < threshold or best > threshold):
            return best, global_upper, best_u
        if not np.any(keep):
            break
        if evals > max_evals:
            raise NumericFailure(
                "sphere branch-and-bound exceeded its evaluation budget",
                bracket=(best, global_upper),
                diagnostics={"evals": evals, "alive": int(np.sum(keep))},
            )
        faces = np.repeat(faces[keep], len(offsets), axis=0)
        centers = (centers[keep][:, None, :] + h * offsets[None, :, :]).reshape(-1, d - 1)
        h = h / 2.0
    return best, max(best, pruned_upper), best_u


def cap_max_linear(w, u0, r):
    """max of <w, v> over unit v within angle r of u0 (vectorized over rows)."""
    norm = np.linalg.norm(w, axis=-1)
    theta = angle_between(np.where(norm[..., None] > 0, w, u0), u0)
    return norm * np.cos(np.maximum(0.0, theta - r))
