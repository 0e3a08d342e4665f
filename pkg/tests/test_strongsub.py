import math

import numpy as np
import pytest

from strongkkt.convexsets import RealSet1D
from strongkkt.errors import InvalidParams, PointOutsideDomain, UnsupportedDim
from strongkkt.funcspace import catalog_instantiate
from strongkkt.strongsub import (SubdiffSpec, classical_subdiff_1d, f_regularity_check, normal_operator_1d,
                                 ss_member, strong_interval_1d, strong_member, strong_set_1d, worst_lambda_margin)

R11 = SubdiffSpec(1.0, 1.0, "R")


def brute_member(h, x, beta, gamma, K, xi, n_y=4001, n_lam=2001):
    """Direct check of the defining inequality on a (y, lambda) grid."""
    K = RealSet1D.parse(K)
    lo, hi = max(K.inf, x - 5), min(K.sup, x + 5)
    y = np.linspace(lo, hi, n_y)
    y = y[K.contains(y)]
    lam = np.linspace(0, 1, n_lam)[None, :]
    hy = h.evaluate(y[:, None])[:, None]
    hx = h(x)
    d = (y - x)[:, None]
    rhs = hx + (lam / beta) * xi * d + 0.5 * lam * (gamma - lam / beta - lam * gamma) * d * d
    lhs = np.maximum(hy, hx)
    return bool(np.all(lhs >= rhs - 1e-9))


def test_worst_lambda_margin_examples():
    assert worst_lambda_margin(0.3, 0.0, 1.0, 1.0)[1] == 0.0
    lam, sup = worst_lambda_margin(-1.0, 1.0, 1.0, 1.0)
    assert lam == 0.0 and sup == 0.0
    lam, sup = worst_lambda_margin(1.0, 1.0, 1.0, 1.0)
    assert lam == pytest.approx(0.75) and sup == pytest.approx(0.5625)
    grid = np.linspace(0, 1, 100001)
    assert np.max(1.5 * grid - grid ** 2) == pytest.approx(sup, abs=1e-10)


def test_strong_member_examples():
    g1 = catalog_instantiate("recip_right")
    assert strong_member(g1, 0.0, R11, -1.0).status == "Member"
    v = strong_member(g1, 0.0, R11, 0.0)
    assert v.status == "NonMember" and v.witness is not None and v.margin < 0
    single = SubdiffSpec(1.0, 1.0, "{0}")
    for xi in (-100.0, 0.0, 42.0):
        assert strong_member(catalog_instantiate("neg_square"), 0.0, single, xi).member


def test_strong_member_outside_domain():
    with pytest.raises(PointOutsideDomain):
        strong_member(catalog_instantiate("recip_right"), 2.0, R11, 0.0)


def test_spec_validation():
    with pytest.raises(InvalidParams):
        SubdiffSpec(0.0, 1.0, "R")
    with pytest.raises(InvalidParams):
        SubdiffSpec(1.0, -1.0, "R")
    with pytest.raises(InvalidParams):
        SubdiffSpec(1.0, 1.0, "empty")


def test_ss_member_examples():
    g1 = catalog_instantiate("recip_right")
    assert ss_member(g1, 0.0, 1.0, 1.0, -1.0).member
    assert ss_member(catalog_instantiate("sqrt_abs"), 0.3, 1.0, 0.0, 0.0).member
    v = ss_member(catalog_instantiate("half_square"), 1.0, 1.0, 1.0, 0.0)
    assert not v.member and v.witness[0][0] == pytest.approx(-1.0, abs=1e-2)


def test_interval_jump_affine_derived():
    g = catalog_instantiate("jump_affine")
    S = strong_set_1d(g, 0.0, SubdiffSpec(1, 1, "[-1,1]"))
    assert S.approx_equal(RealSet1D.parse("[1/2,2]"), 1e-3)
    # brute force agrees: 0.49 fails because of y = -1 at lambda = 1, 0.51 passes
    assert not brute_member(g, 0.0, 1, 1, "[-1,1]", 0.49)
    assert brute_member(g, 0.0, 1, 1, "[-1,1]", 0.51)
    assert not brute_member(g, 0.0, 1, 1, "[-1,1]", 0.25)


def test_interval_jump_affine_left_half():
    S = strong_set_1d(catalog_instantiate("jump_affine"), 0.0, SubdiffSpec(1, 1, "[-1,0]"))
    assert S.approx_equal(RealSet1D.parse("[1/2,inf)"), 1e-3)


@pytest.mark.parametrize("beta", [1.0, 2.0])
def test_interval_sqrt_abs(beta):
    S = strong_set_1d(catalog_instantiate("sqrt_abs"), 0.0, SubdiffSpec(beta, 0.5, "[-1,1]"))
    assert S.approx_equal(RealSet1D.interval(-beta - 0.5, beta + 0.5), 1e-3)


def test_interval_sqrt_abs_half_beta_derived():
    h = catalog_instantiate("sqrt_abs")
    S = strong_set_1d(h, 0.0, SubdiffSpec(0.5, 0.5, "[-1,1]"))
    assert S.approx_equal(RealSet1D.parse("[-0.9449408,0.9449408]"), 1e-4)
    assert brute_member(h, 0.0, 0.5, 0.5, "[-1,1]", 0.94)
    assert not brute_member(h, 0.0, 0.5, 0.5, "[-1,1]", 0.95)


def test_interval_recip_pair():
    assert strong_set_1d(catalog_instantiate("recip_right"), 0.0, R11).approx_equal(
        RealSet1D.parse("(-inf,-1/2]"), 1e-3)
    assert strong_set_1d(catalog_instantiate("recip_outside"), 0.0, R11).is_empty


def test_interval_approx_brackets():
    A = strong_interval_1d(catalog_instantiate("jump_affine"), 0.0, SubdiffSpec(1, 1, "[-1,1]"))
    assert A.inner.issubset(A.outer)
    assert abs(A.outer.inf - A.inner.inf) <= 1e-6 and abs(A.outer.sup - A.inner.sup) <= 1e-6
    assert "set" in A.to_record()


def test_remark_4_1_sets():
    g = catalog_instantiate("neg_part")
    assert strong_set_1d(g, 0.0, SubdiffSpec(1, 1, "[-1,0]")).approx_equal(RealSet1D.parse("[-1,inf)"), 1e-3)
    assert strong_set_1d(g, 0.0, SubdiffSpec(1, 1, "[0,1]")).approx_equal(RealSet1D.parse("(-inf,-1/2]"), 1e-3)


def test_classical_examples():
    g = catalog_instantiate("recip_right")
    assert classical_subdiff_1d(g, 0.0, "regular").value.is_empty
    assert classical_subdiff_1d(g, 0.0, "greenberg_pierskalla").value.approx_equal(RealSet1D.parse("(-inf,0)"), 1e-6)
    assert classical_subdiff_1d(catalog_instantiate("abs"), 0.0, "fenchel_moreau").value.approx_equal(
        RealSet1D.parse("[-1,1]"), 1e-6)


def test_classical_limiting_and_horizon():
    j = catalog_instantiate("jump_affine")
    assert classical_subdiff_1d(j, 0.0, "limiting").value.approx_equal(RealSet1D.parse("{2}"), 1e-3)
    assert classical_subdiff_1d(j, 0.0, "horizon").value == RealSet1D.point(0.0)
    assert classical_subdiff_1d(catalog_instantiate("recip_outside"), 0.0, "horizon").value == RealSet1D.real_line()


def test_classical_rejects_dim_2():
    with pytest.raises(UnsupportedDim):
        classical_subdiff_1d(catalog_instantiate("half_square", {"dim": 2}), 0.0, "regular")


def test_normal_operator():
    assert normal_operator_1d(catalog_instantiate("recip_right"), 0.0) == RealSet1D.nonpos()
    assert normal_operator_1d(catalog_instantiate("jump_affine"), 0.0) == RealSet1D.nonneg()


def test_regularity_remark_4_1():
    g = catalog_instantiate("neg_part")
    assert f_regularity_check(g, 0.0, SubdiffSpec(1, 1, "[-1,0]")).status == "Regular"
    v = f_regularity_check(g, 0.0, SubdiffSpec(1, 1, "[0,1]"))
    assert v.status == "CounterDirection" and v.direction[0] > 0

    c = catalog_instantiate("constant")
    assert f_regularity_check(c, 0.0, SubdiffSpec(1, 0, "R")).status == "Regular"


def test_constant_function_strong_sets():
    c = catalog_instantiate("constant")
    assert strong_set_1d(c, 0.0, SubdiffSpec(1, 0, "R")) == RealSet1D.point(0.0)
    # with gamma > 0 the quadratic term (lambda/2)(1 - 2 lambda)|d|^2 is positive for small lambda
    assert strong_set_1d(c, 0.0, R11).is_empty
    assert not brute_member(c, 0.0, 1, 1, "R", 0.0)


def test_regularity_empty_is_flagged():
    v = f_regularity_check(catalog_instantiate("recip_outside"), 0.0, R11)
    assert v.regular and v.vacuous
