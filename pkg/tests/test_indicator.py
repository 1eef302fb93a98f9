import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import unit_vectors
from hatlab import Ball, Ellipsoid, PreconditionError, curvature_indicator, excess, has_hat, indicator_sum
from hatlab.corpus import full_corpus, strictly_convex_corpus
from hatlab.geometry import random_rotation, rotate, rotation_2d, translate
from hatlab.indicator import (
    anchored_cap,
    ball_indicator,
    continuity_probe,
    push_thresholds,
    push_thresholds_bisect,
)
from hatlab.sphere import direction_net

A = lambda n: 1.0 / (n + 2)  # noqa: E731


def brute_force_alpha(K, tau, eps, delta, n=20000, iters=60):
    """Oracle: bisect the least push for every point of a dense boundary sample."""
    cap = anchored_cap(K, tau, eps, delta)
    tau = -cap.axis
    Y = K.touching(direction_net(K.dim, n))
    lo, hi = np.zeros(len(Y)), np.full(len(Y), 4.0 * K.diameter() + 4 * eps)
    assert np.all(excess(cap, Y + hi[:, None] * tau) <= eps)
    if np.all(excess(cap, Y) <= eps):
        return 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        ok = excess(cap, Y + mid[:, None] * tau) <= eps
        hi, lo = np.where(ok, mid, hi), np.where(ok, lo, mid)
    return float(np.max(hi))


# closed form -----------------------------------------------------------------


def test_unit_ball_example():
    K = Ball([0.3, -0.7], 1.0)
    v = curvature_indicator(K, [0, 1], 0.5, 1 / 3)
    # (1 - 0.5)(sec(pi/3) - 1) = 0.5 * (2 - 1)
    assert v.alpha == pytest.approx(0.5, abs=1e-9)
    assert ball_indicator(1.0, 0.5, 1 / 3) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("R,eps,delta,d", [(1.0, 0.5, 1 / 3, 2), (2.0, 0.25, 0.4, 2), (0.5, 0.25, 0.1, 3)])
def test_closed_form_confirmed_by_bisection(R, eps, delta, d):
    K = Ball(np.zeros(d), R)
    tau = unit_vectors(np.random.default_rng(1), 1, d)[0]
    oracle = brute_force_alpha(K, tau, eps, delta, n=20000 if d == 2 else 60000)
    # dense samples approach the sup from below
    assert oracle <= ball_indicator(R, eps, delta) + 1e-9
    assert oracle == pytest.approx(ball_indicator(R, eps, delta), abs=2e-4 if d == 3 else 1e-6)


@given(
    R=st.floats(0.3, 3),
    eps=st.floats(0.1, 3),
    delta=st.floats(0.02, 0.45),
    d=st.sampled_from([2, 3]),
    seed=st.integers(0, 1000),
)
def test_ball_closed_form_property(R, eps, delta, d, seed):
    rng = np.random.default_rng(seed)
    K = Ball(rng.uniform(-2, 2, d), R)
    tau = unit_vectors(rng, 1, d)[0]
    assert curvature_indicator(K, tau, eps, delta).alpha == pytest.approx(ball_indicator(R, eps, delta), abs=1e-6)


def test_large_radius_gives_zero_and_hat():
    K = Ball([1, 2], 1)
    v = curvature_indicator(K, [0, 1], 2.0, 0.25)
    assert v.alpha == 0.0
    assert has_hat(K, anchored_cap(K, [0, 1], 2.0, 0.25))


def test_closed_form_thresholds_match_bisection():
    rng = np.random.default_rng(3)
    for d in (2, 3):
        for _ in range(5):
            cap = anchored_cap(Ellipsoid(rng.uniform(0.5, 2, d)), unit_vectors(rng, 1, d)[0], rng.uniform(0.2, 2), rng.uniform(0.05, 0.45))
            Y = cap.tip + rng.uniform(-2, 2, (500, d))
            tau = -cap.axis
            assert np.allclose(push_thresholds(cap, Y, tau), push_thresholds_bisect(cap, Y, tau), atol=1e-10)


@pytest.mark.parametrize("name", ["ellipse", "ellipse-rot", "rounded-ellipse", "revolution-3", "ball-small"])
def test_indicator_matches_brute_force(name):
    K = strictly_convex_corpus(2)[name]
    rng = np.random.default_rng(7)
    for tau in unit_vectors(rng, 3, 2):
        for eps, delta in ((0.3, 0.2), (0.8, 0.35)):
            got = curvature_indicator(K, tau, eps, delta).alpha
            oracle = brute_force_alpha(K, tau, eps, delta)
            assert got >= oracle - 1e-9
            assert got == pytest.approx(oracle, abs=1e-5)


def test_indicator_matches_brute_force_3d():
    K = strictly_convex_corpus(3)["ellipsoid-rot"]
    tau = unit_vectors(np.random.default_rng(8), 1, 3)[0]
    got = curvature_indicator(K, tau, 0.5, 0.3).alpha
    oracle = brute_force_alpha(K, tau, 0.5, 0.3, n=60000)
    assert got >= oracle - 1e-9
    assert got == pytest.approx(oracle, rel=1e-3)


def test_rigid_invariance():
    rng = np.random.default_rng(4)
    K = Ellipsoid([1.5, 0.7])
    tau = np.array([0.6, 0.8])
    Q = rotation_2d(1.1)
    g = translate(rotate(K, Q), [0.4, -2.0])
    a = curvature_indicator(K, tau, 0.6, 0.3).alpha
    b = curvature_indicator(g, Q @ tau, 0.6, 0.3).alpha
    assert b == pytest.approx(a, abs=1e-9)
    K3 = Ellipsoid([1.5, 1.0, 0.7])
    Q3 = random_rotation(3, rng)
    t3 = unit_vectors(rng, 1, 3)[0]
    a3 = curvature_indicator(K3, t3, 0.6, 0.3).alpha
    b3 = curvature_indicator(translate(rotate(K3, Q3), [1, 2, 3]), Q3 @ t3, 0.6, 0.3).alpha
    assert b3 == pytest.approx(a3, abs=1e-6)


def test_requires_strict_convexity():
    for name in ("triangle", "square", "stadium", "spiked-ball"):
        with pytest.raises(PreconditionError):
            curvature_indicator(full_corpus(2)[name], [0, 1], 0.5, 0.25)


# sums ----------------------------------------------------------------------


def test_indicator_sum_examples():
    assert indicator_sum(Ball([0, 0], 1), [0, 1], []) == 0.0
    K = Ball([0.5, 0.5], 1 / 3)
    assert indicator_sum(K, [0.6, 0.8], [(1, A(1)), (1 / 2, A(2)), (1 / 3, A(3))]) == pytest.approx(0.0, abs=1e-12)
    K = Ball([0.5, 0.5], 1.0)
    expected = 0.5 * (1 / math.cos(math.pi / 4) - 1)
    assert expected == pytest.approx(0.2071, abs=1e-4)
    assert indicator_sum(K, [0, 1], [(1, A(1)), (1 / 2, A(2))]) == pytest.approx(expected, abs=1e-9)


# continuity --------------------------------------------------------------------


def test_continuity_examples():
    K = Ball([0, 0], 1)
    assert continuity_probe(K, K, [0, 1], [0, 1], 0.5, 1 / 3)["delta_indicator"] == 0.0
    r = continuity_probe(K, Ball([0, 0], 1.01), [0, 1], [0, 1], 0.5, 1 / 3)
    assert r["delta_indicator"] == pytest.approx(0.01, abs=1e-9)
    assert r["hausdorff"] == pytest.approx(0.01, abs=1e-12)
    tau2 = rotation_2d(0.01) @ np.array([0.0, 1.0])
    r = continuity_probe(K, K, [0, 1], tau2, 0.5, 1 / 3)
    assert r["delta_indicator"] == pytest.approx(0.0, abs=1e-9)
    assert r["angle"] == pytest.approx(0.01, abs=1e-12)


# properties ---------------------------------------------------------------------


@given(
    name=st.sampled_from(sorted(strictly_convex_corpus(2))),
    ang=st.floats(0, 2 * math.pi),
    eps=st.floats(0.05, 3),
    delta=st.floats(0.02, 0.48),
)
def test_nonnegative(name, ang, eps, delta):
    K = strictly_convex_corpus(2)[name]
    assert curvature_indicator(K, [math.cos(ang), math.sin(ang)], eps, delta).alpha >= 0.0


@pytest.mark.parametrize("dim", [2, 3])
def test_zero_hat_equivalence(dim):
    tol = 1e-7
    rng = np.random.default_rng(dim)
    seen = {True: 0, False: 0}
    for name, K in strictly_convex_corpus(dim).items():
        for tau in unit_vectors(rng, 3, dim):
            for eps, delta in ((0.1, 0.1), (0.5, 0.25), (2.0, 0.3), (5.0, 0.4)):
                a = curvature_indicator(K, tau, eps, delta).alpha
                v = has_hat(K, anchored_cap(K, tau, eps, delta), tol=tol)
                if v.status == "indeterminate":
                    continue
                if a <= tol:
                    assert v, (name, eps, delta, a)
                if a > 10 * tol:
                    assert not v, (name, eps, delta, a)
                seen[bool(v)] += 1
    assert seen[True] > 0 and seen[False] > 0


@given(
    name=st.sampled_from(sorted(strictly_convex_corpus(2))),
    ang=st.floats(0, 2 * math.pi),
    delta=st.floats(0.05, 0.45),
)
def test_monotone_in_eps(name, ang, delta):
    K = strictly_convex_corpus(2)[name]
    tau = [math.cos(ang), math.sin(ang)]
    vals = [curvature_indicator(K, tau, e, delta).alpha for e in np.geomspace(0.05, 5, 12)]
    assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))
