import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hatlab import Ball, CapSpec, Ellipsoid, InvalidInputError, NumericFailure, PreconditionError, Revolution, Rounded
from hatlab import directional_curvature, osculating_radius, point_curvature
from hatlab.corpus import stadium
from hatlab.curvature import WINDOW, default_ladder, hat_bound_check
from hatlab.geometry import rotation_2d


def circle_through(p, q, r):
    """Oracle: radius of the circle through three points."""
    a, b, c = np.linalg.norm(q - r), np.linalg.norm(p - r), np.linalg.norm(p - q)
    area = abs((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])) / 2
    return a * b * c / (4 * area)


def ellipse_curvature(a, b, s):
    return a * b / (a**2 * math.sin(s) ** 2 + b**2 * math.cos(s) ** 2) ** 1.5


# osculating radius -------------------------------------------------------------


@pytest.mark.parametrize("R", [0.5, 2.0])
def test_radius_on_sphere_is_exact(R):
    # x at the origin so z - x carries no cancellation
    K = Ball([0.0, R], R)
    x, nu, tau = np.zeros(2), np.array([0.0, 1.0]), np.array([1.0, 0.0])
    ladder = default_ladder(K)
    for t in ladder[ladder >= 1e-6]:
        s = K.section_sagitta(x, nu, tau, t)
        # chord identity |z - x|^2 = 2 R <z - x, nu>
        assert t * t + s * s == pytest.approx(2 * R * s, rel=1e-14)
        assert abs(osculating_radius(x, nu, x + t * tau + s * nu) - R) <= 1e-9
    # the estimator's own records, off the origin too
    for center in ([0.0, R], [3.0, -7.0]):
        K = Ball(center, R)
        rec = directional_curvature(K, K.touching([0, -1]), nu, tau, full=True)
        keep = rec.scales >= 1e-6
        assert keep.sum() >= 8
        assert np.all(np.abs(rec.radii[keep] - R) <= 1e-9)


@pytest.mark.parametrize("t", [1e-1, 1e-2, 1e-3])
def test_radius_on_parabola(t):
    z = np.array([t, t * t / 2])
    assert osculating_radius([0, 0], [0, 1], z) == pytest.approx(1 + t * t / 4, rel=1e-12)


@pytest.mark.parametrize("t", [1e-2, 1e-4, 1e-6])
def test_radius_on_three_halves_profile(t):
    z = np.array([t, t**1.5])
    r = osculating_radius([0, 0], [0, 1], z)
    assert r == pytest.approx((t * t + t**3) / (2 * t**1.5), rel=1e-12)
    assert r == pytest.approx(math.sqrt(t) / 2, rel=2 * t)


def test_radius_needs_inward_point():
    with pytest.raises(PreconditionError):
        osculating_radius([0, 0], [0, 1], [1, 0])
    with pytest.raises(PreconditionError):
        osculating_radius([0, 0], [0, 1], [1, -0.1])


# directional ------------------------------------------------------------------


def test_circle_radius_two():
    K = Ball([0, 0], 2)
    ki, ks = directional_curvature(K, [0, -2], [0, 1], [1, 0])
    assert ki == pytest.approx(0.5, abs=1e-3) and ks == pytest.approx(0.5, abs=1e-3)


def test_ellipse_major_vertex():
    K = Ellipsoid([2, 1])
    # oracle: circle through three nearby boundary points at t = 1e-4
    s = 1e-4 / 1.0
    P = [np.array([2 * math.cos(v), math.sin(v)]) for v in (-s, 0.0, s)]
    fit = 1 / circle_through(*P)
    assert fit == pytest.approx(2.0, abs=1e-6)
    ki, ks = directional_curvature(K, [2, 0], [-1, 0], [0, 1])
    assert ki == pytest.approx(fit, abs=1e-2) and ks == pytest.approx(fit, abs=1e-2)
    assert ki == pytest.approx(2.0, abs=1e-6)


def test_stadium_flat_side():
    K = stadium()
    ki, ks = directional_curvature(K, [0, -0.6], [0, 1], [1, 0])
    assert ki == 0.0 and ks == 0.0


def test_tau_must_be_tangent():
    with pytest.raises(InvalidInputError):
        directional_curvature(Ball([0, 0], 1), [0, -1], [0, 1], [0.6, 0.8])


def test_explicit_ladder_wider_than_section_fails():
    K = Ellipsoid([2.0, 0.5])
    with pytest.raises(NumericFailure) as info:
        directional_curvature(K, [2, 0], [-1, 0], [0, 1], ladder=[1.0, 0.5])
    assert info.value.diagnostics["scale"] == 1.0
    # the default ladder starts wide and skips the scales that miss
    ki, ks = directional_curvature(K, [2, 0], [-1, 0], [0, 1])
    assert ki == pytest.approx(2 / 0.25, rel=1e-6) and ks == pytest.approx(ki, rel=1e-9)


def test_reciprocity_on_records():
    K = Revolution(1.5)
    for x, nu in (([0, 0], [0, 1]), (K.touching([0.3, -0.95394]), None)):
        if nu is None:
            nu = -np.array([0.3, -0.95394]) / np.linalg.norm([0.3, -0.95394])
        est = point_curvature(K, x, nu)
        for rec in est.records:
            tail = rec.radii[-WINDOW:]
            assert rec.kappa_i == pytest.approx(1 / np.max(tail), rel=1e-15)
            assert rec.kappa_s == pytest.approx(1 / np.min(tail), rel=1e-15)


@given(a=st.floats(0.5, 2.5), b=st.floats(0.5, 2.5), s=st.floats(0, 2 * math.pi), rot=st.floats(0, math.pi))
def test_ellipse_curvature_everywhere(a, b, s, rot):
    Q = rotation_2d(rot)
    K = Ellipsoid([a, b], center=[0.3, -0.1], rotation=Q)
    p = np.array([a * math.cos(s), b * math.sin(s)])
    n = np.array([math.cos(s) / a, math.sin(s) / b])
    x = Q @ p + [0.3, -0.1]
    nu = -(Q @ n) / np.linalg.norm(n)
    est = point_curvature(K, x, nu)
    k = ellipse_curvature(a, b, s)
    assert est.kappa_i == pytest.approx(k, rel=1e-3)
    assert est.kappa_s == pytest.approx(k, rel=1e-3)


@pytest.mark.parametrize("K", [Ball([0, 0], 1.3), Ellipsoid([2, 1]), Rounded(Ellipsoid([1, 0.6]), 0.2)], ids=["ball", "ellipse", "rounded"])
def test_refining_ladder_does_not_raise_kappa_i(K):
    u = np.array([0.6, -0.8])
    x, nu = K.touching(u), -u
    coarse = point_curvature(K, x, nu, ladder=default_ladder(K, halvings=20))
    fine = point_curvature(K, x, nu, ladder=default_ladder(K, halvings=40))
    band = max(abs(fine.gap), abs(coarse.gap), 1e-6) * max(1.0, coarse.kappa_s)
    assert fine.kappa_i <= coarse.kappa_i + band


# point curvature ------------------------------------------------------------------


def test_unit_sphere_exists():
    est = point_curvature(Ball([0, 0, 0], 1), [0, 0, -1], [0, 0, 1])
    assert est.verdict == "exists"
    assert est.kappa == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("R", [0.25, 1.0, 3.0])
def test_ball_scaling(R):
    d = 3
    est = point_curvature(Ball(np.zeros(d), R), [R, 0, 0], [-1, 0, 0])
    assert est.verdict == "exists" and est.kappa == pytest.approx(1 / R, rel=1e-9)


def test_ellipsoid_vertex_both_principal_curvatures():
    est = point_curvature(Ellipsoid([2, 1, 1]), [2, 0, 0], [-1, 0, 0])
    assert est.verdict == "exists"
    assert est.kappa_i == pytest.approx(2.0, abs=1e-6) and est.kappa_s == pytest.approx(2.0, abs=1e-6)


def test_non_umbilical_point_has_no_curvature():
    est = point_curvature(Ellipsoid([2, 1, 0.5]), [2, 0, 0], [-1, 0, 0])
    # principal curvatures a/b^2 = 2 and a/c^2 = 8
    assert est.verdict == "does-not-exist"
    assert est.kappa_i == pytest.approx(2.0, rel=1e-6)
    assert est.kappa_s == pytest.approx(8.0, rel=1e-6)
    assert est.kappa is None


@pytest.mark.parametrize("d", [2, 3])
def test_revolution_pole_infinite_curvature(d):
    K = Revolution(1.5, dim=d)
    pole, nu = np.zeros(d), np.eye(d)[-1]
    est = point_curvature(K, pole, nu)
    assert min(est.ladder) <= 1e-8
    assert est.kappa_i >= 1e3
    # r_z ~ sqrt(t)/2 at the finest reliable scale
    t = est.records[0].scales[-1]
    assert est.records[0].radii[-1] == pytest.approx(math.sqrt(t) / 2, rel=1e-2)


def test_flat_pole_zero_curvature():
    est = point_curvature(Revolution(3.0), [0, 0], [0, 1])
    assert est.kappa_s <= 1e-2
    assert est.verdict in ("exists", "indeterminate")


def test_to_dict_encodes_infinity():
    est = point_curvature(Revolution(1.5), [0, 0], [0, 1])
    d = est.to_dict()
    assert d["window"] == WINDOW and len(d["directions"]) == 2
    rows = est.rows()
    assert len(rows[0]) == 4


# hat bound -----------------------------------------------------------------------


def test_hat_bound_tangent_sphere_equality():
    K = Ball([0, 0], 1)
    r = hat_bound_check(K, CapSpec([0, -1], [0, -1], 1.0, 0.3))
    assert r["pass"] and r["kappa_i"] == pytest.approx(1.0, abs=1e-9) and r["bound"] == 1.0


def test_hat_bound_slack():
    r = hat_bound_check(Ball([0, 0], 1), CapSpec([0, -1], [0, -1], 2.0, 0.3))
    assert r["pass"] and r["kappa_i"] >= 0.5


def test_hat_bound_revolution_pole():
    r = hat_bound_check(Revolution(1.5), CapSpec([0, 0], [0, -1], 0.1, 0.1))
    assert r["pass"] and r["kappa_i"] >= 10


def test_hat_bound_needs_a_hat():
    with pytest.raises(PreconditionError):
        hat_bound_check(Ball([0, 0], 1), CapSpec([0, -1], [0, -1], 0.5, 0.3))
