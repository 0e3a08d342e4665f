import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from strongkkt.convexsets import (RealSet1D, SetOracle, contains, horizon_set_1d, min_norm_in_hull, normal_cone_1d,
                                  polar_member, support_value, tangent_contains)
from strongkkt.errors import EmptyInput, PointNotInSet


def test_parse_and_format_round_trip():
    for text in ["(-inf,-0.5]", "[0.25,2]", "{0}", "R", "empty", "[0,1) U (2,inf)"]:
        S = RealSet1D.parse(text)
        assert RealSet1D.parse(str(S)) == S


def test_record_round_trip():
    S = RealSet1D.parse("(-inf,-1/2] U [1,2)")
    assert RealSet1D.from_record(S.to_record()) == S


def test_contains_examples():
    assert contains(RealSet1D.parse("(-inf,-1/2]"), -0.5)
    assert not contains(RealSet1D.empty(), 0.0)
    assert not contains(RealSet1D.parse("[1/4,2]"), 0.2)


def test_set_algebra():
    A = RealSet1D.parse("[0,2]")
    B = RealSet1D.parse("[1,3]")
    assert (A | B) == RealSet1D.parse("[0,3]")
    assert (A & B) == RealSet1D.parse("[1,2]")
    assert A.scale(-2) == RealSet1D.parse("[-4,0]")
    assert RealSet1D.parse("[1/4,2]").cone() == RealSet1D.parse("[0,inf)")
    assert RealSet1D.parse("[0,1]").polar() == RealSet1D.parse("(-inf,0]")
    assert RealSet1D.empty().cone() == RealSet1D.point(0.0)


def test_polar_member():
    grid = np.linspace(-2, 2, 401)
    assert polar_member(RealSet1D.parse("[0,1]"), 0.0, -3.0, grid).status == "Member"
    assert polar_member(RealSet1D.parse("[0,1]"), 0.0, 0.0, grid).status == "Member"
    v = polar_member(RealSet1D.parse("[0,1]"), 0.0, 1.0, grid)
    assert v.status == "NonMember" and v.witness[0] == pytest.approx(1.0)


def test_tangent_contains():
    S = RealSet1D.parse("[-1,0]")
    assert tangent_contains(S, 0.0, -1.0)
    assert tangent_contains(S, 0.0, 0.0)
    assert not tangent_contains(S, 0.0, 1.0)
    with pytest.raises(PointNotInSet):
        tangent_contains(S, 2.0, 1.0)


def test_normal_cone_1d():
    assert normal_cone_1d(RealSet1D.parse("[-1,0]"), 0.0) == RealSet1D.nonneg()
    assert normal_cone_1d(RealSet1D.parse("[-1,0]"), -0.5) == RealSet1D.point(0.0)
    assert normal_cone_1d(RealSet1D.parse("{0}"), 0.0) == RealSet1D.real_line()


def test_horizon_set_1d():
    assert horizon_set_1d(RealSet1D.parse("[1/4,2]")) == RealSet1D.point(0.0)
    assert horizon_set_1d(RealSet1D.empty()).is_empty
    assert horizon_set_1d(RealSet1D.parse("[1/2,inf)")) == RealSet1D.nonneg()


def test_support_value():
    assert support_value(RealSet1D.parse("(-inf,-1/2]"), 1.0) == -0.5
    assert support_value(RealSet1D.point(0.0), -3.0) == 0.0
    assert support_value(RealSet1D.parse("[1/4,2]"), -1.0) == -0.25
    assert support_value(RealSet1D.empty(), 1.0) == -math.inf


def test_min_norm_in_hull():
    x, d = min_norm_in_hull([[1, 0], [-1, 0]])
    assert d == pytest.approx(0.0, abs=1e-12)
    x, d = min_norm_in_hull([[1, 1]])
    assert d == pytest.approx(math.sqrt(2))
    x, d = min_norm_in_hull([[2, 0], [0, 2], [2, 2]])
    assert np.allclose(x, [1, 1], atol=1e-9) and d == pytest.approx(math.sqrt(2))
    with pytest.raises(EmptyInput):
        min_norm_in_hull([])


def test_set_oracles():
    B = SetOracle.ball([0.0, 0.0], 1.0)
    assert B.contains(np.array([[0.5, 0.5]]))[0]
    assert not B.contains(np.array([[1.0, 1.0]]))[0]
    P = SetOracle.from_halfspaces([[1.0, 1.0]], [1.0])
    assert P.contains(np.array([[0.2, 0.3]]))[0]
    assert np.allclose(P.project([1.0, 1.0]), [0.5, 0.5], atol=1e-6)


_ends = st.floats(-5, 5, allow_nan=False).map(lambda v: round(v, 3))


@settings(max_examples=200)
@given(a=_ends, b=_ends, x=st.floats(-6, 6, allow_nan=False))
def test_normal_cone_is_closed_cone(a, b, x):
    lo, hi = min(a, b), max(a, b)
    S = RealSet1D.interval(lo, hi)
    p = min(max(x, lo), hi)
    N = normal_cone_1d(S, p)
    assert N in (RealSet1D.point(0.0), RealSet1D.nonneg(), RealSet1D.nonpos(), RealSet1D.real_line())
    grid = np.linspace(lo, hi, 65)
    for v in (-1.0, 1.0):
        if N.contains(v):
            assert polar_member(S, p, v, grid).member


@settings(max_examples=200)
@given(a=_ends, b=_ends, ua=st.booleans(), ub=st.booleans())
def test_horizon_zero_iff_bounded(a, b, ua, ub):
    lo, hi = min(a, b), max(a, b)
    S = RealSet1D.interval(-math.inf if ua else lo, math.inf if ub else hi, not ua, not ub)
    assert (horizon_set_1d(S) == RealSet1D.point(0.0)) == (not ua and not ub)


@settings(max_examples=200)
@given(pts=st.lists(st.tuples(st.floats(-3, 3), st.floats(-3, 3)), min_size=1, max_size=3))
def test_min_norm_matches_enumeration(pts):
    P = np.array(pts)
    _, d = min_norm_in_hull(P)
    w = np.linspace(0, 1, 201)
    if len(P) == 1:
        best = np.linalg.norm(P[0])
    elif len(P) == 2:
        best = np.min(np.linalg.norm(w[:, None] * P[0] + (1 - w)[:, None] * P[1], axis=1))
    else:
        W1, W2 = np.meshgrid(w, w)
        m = W1 + W2 <= 1
        C = W1[m][:, None] * P[0] + W2[m][:, None] * P[1] + (1 - W1[m] - W2[m])[:, None] * P[2]
        best = np.min(np.linalg.norm(C, axis=1))
    assert d <= best + 1e-9
    assert d >= best - 0.05
    assert (d < 1e-9) == (best < 1e-9) or abs(best) < 0.05
