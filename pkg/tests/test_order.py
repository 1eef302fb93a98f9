import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hatlab import AngleSequence, Ball, CapSpec, IndexSet, InvalidInputError, Revolution, Rounded, find_hat, has_hat
from hatlab import maximal_indicator, order_of_curvature, point_curvature
from hatlab.corpus import square
from hatlab.order import compare_index_sets, infinite_curvature_witness, verify_certificates

SEQ = AngleSequence.named("harmonic2")


def ball(r, d=2):
    return Ball(np.zeros(d), r)


# sequences and index sets ----------------------------------------------------


def test_named_sequences():
    assert SEQ(1) == pytest.approx(1 / 3) and SEQ(8) == pytest.approx(0.1)
    geo = AngleSequence.named("geometric")
    assert geo(1) == pytest.approx(0.45) and geo(2) == pytest.approx(0.36)
    assert SEQ.specs([1, 3]) == [(1.0, 1 / 3), (1 / 3, 0.2)]
    with pytest.raises(InvalidInputError):
        AngleSequence.named("fibonacci")


def test_sequence_validation():
    assert len(SEQ.validate(64)) == 64
    with pytest.raises(InvalidInputError):
        AngleSequence(lambda n: 0.6 / n).validate(3)
    with pytest.raises(InvalidInputError):
        AngleSequence(lambda n: 0.2).validate(3)
    with pytest.raises(InvalidInputError):
        SEQ(0)


def test_index_set_basics():
    I = IndexSet((1, 3, 7))
    assert I(1) == 1 and I(3) == 7 and I(4) == math.inf
    assert len(I) == 3 and list(I) == [1, 3, 7]
    assert IndexSet((1, 7)).issubset(I)
    with pytest.raises(InvalidInputError):
        IndexSet((3, 1))
    with pytest.raises(InvalidInputError):
        IndexSet((0, 1))


def test_compare_examples():
    assert compare_index_sets({1, 3} and (1, 3), (2, 3)) == -1
    assert compare_index_sets((1, 2), (1, 2)) == 0
    # I(2) = 2 < inf = I'(2)
    assert compare_index_sets((1, 2), (1,)) == -1
    assert compare_index_sets((1,), (1, 2)) == 1


subsets = st.lists(st.integers(1, 12), unique=True, max_size=6).map(sorted).map(tuple)


@given(a=subsets, b=subsets, c=subsets)
def test_compare_is_a_total_order(a, b, c):
    ab, ba = compare_index_sets(a, b), compare_index_sets(b, a)
    assert ab == -ba
    assert (ab == 0) == (a == b)
    if ab <= 0 and compare_index_sets(b, c) <= 0:
        assert compare_index_sets(a, c) <= 0


@given(a=subsets, b=subsets)
def test_compare_matches_padded_lexicographic(a, b):
    # oracle: pad with infinity and compare lexicographically
    n = max(len(a), len(b)) + 1
    pa = list(a) + [math.inf] * (n - len(a))
    pb = list(b) + [math.inf] * (n - len(b))
    expected = (pa > pb) - (pa < pb)
    assert compare_index_sets(a, b) == expected


# order of balls --------------------------------------------------------------


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("r,expected", [(1.0, (1,)), (0.5, (1, 2)), (1 / 3, (1, 2, 3))])
def test_ball_orders(d, r, expected):
    res = maximal_indicator(ball(r, d), SEQ, 8)
    assert tuple(res.index_set) == expected
    assert res.order == len(expected)
    assert res.verdict == "exact"
    assert all(verify_certificates(ball(r, d), res, SEQ))


@given(R=st.floats(0.13, 1.9))
def test_order_matches_ball_radius(R):
    # hats of radius 1/i exist on a ball of radius R exactly when 1/i >= R
    if min(abs(R - 1 / i) for i in range(1, 9)) < 1e-3:
        return
    expected = sum(1 for i in range(1, 9) if 1 / i >= R)
    assert order_of_curvature(ball(R), SEQ, 8).order == expected


def test_revolution_order_reaches_horizon():
    res = maximal_indicator(Revolution(1.5), SEQ, 8)
    assert tuple(res.index_set) == tuple(range(1, 9))
    assert res.verdict == ">= 8 at horizon 8"
    assert res.is_lower_bound


def test_certificates_reverify_and_prefixes_nest():
    for K in (Revolution(1.5), Rounded(square(), 0.25), ball(1 / 3, 3)):
        res = maximal_indicator(K, SEQ, 8)
        eta = res.eta
        assert all(verify_certificates(K, res, SEQ, tol=eta / 10))
        idx = res.index_set.elements
        for m in range(1, len(idx)):
            # the certificate of prefix m+1 also carries every hat of prefix m
            x, u = res.certificates[m]
            for i in idx[:m]:
                assert has_hat(K, CapSpec(x, u, 1 / i, SEQ(i)), tol=eta / 10, check_tip=False)


@pytest.mark.parametrize("K", [ball(0.5), Rounded(square(), 0.25)], ids=["half-ball", "rounded-square"])
def test_greedy_minimality_exhaustive(K):
    res = maximal_indicator(K, SEQ, 8)
    found = tuple(res.index_set)
    earlier = [
        s
        for k in range(1, 9)
        for s in itertools.combinations(range(1, 9), k)
        if compare_index_sets(s, found) < 0
    ]
    assert earlier
    for s in earlier:
        assert find_hat(K, SEQ.specs(s), eta=res.eta) is None, s


def test_to_dict_round_numbers():
    res = maximal_indicator(ball(0.5), SEQ, 8)
    d = res.to_dict()
    assert d["index_set"] == [1, 2] and d["order"] == 2 and d["sequence"] == "harmonic2"
    assert len(d["certificates"]) == 2


# witness ----------------------------------------------------------------------


@pytest.mark.parametrize("d", [2, 3])
def test_witness_at_revolution_pole(d):
    K = Revolution(1.5, dim=d)
    res = maximal_indicator(K, SEQ, 8)
    w = infinite_curvature_witness(K, res, m_max=8, seq=SEQ)
    assert w["kappa_lower_bound"] >= 8
    assert np.linalg.norm(w["point"]) <= 1e-3 * K.diameter()
    # every direction close to the pole axis has a zero indicator sum, so
    # the minimizer is only determined up to a few net spacings
    assert math.acos(min(1.0, w["tau"][-1])) < 0.05


def test_witness_on_balls():
    w = infinite_curvature_witness(ball(1.0), maximal_indicator(ball(1.0), SEQ, 8), m_max=1, seq=SEQ)
    assert w["kappa_lower_bound"] == 1
    K = ball(1 / 3)
    w = infinite_curvature_witness(K, maximal_indicator(K, SEQ, 8), m_max=3, seq=SEQ)
    assert w["kappa_lower_bound"] == 3
    assert np.linalg.norm(w["point"]) == pytest.approx(1 / 3, abs=1e-12)


@pytest.mark.parametrize("K", [ball(0.5), ball(1 / 3, 3), Revolution(1.5)], ids=["ball-half", "ball-third-3d", "revolution"])
def test_certificates_bound_curvature(K):
    res = maximal_indicator(K, SEQ, 8)
    for m, (x, u) in enumerate(res.certificates):
        i = res.index_set.elements[m]
        est = point_curvature(K, x, -np.asarray(u))
        assert est.kappa_i >= i - 1e-6 * i
