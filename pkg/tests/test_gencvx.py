import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from strongkkt.convexsets import RealSet1D, SetOracle
from strongkkt.errors import InvariantViolation, NotQuasiconvex, PointNotInSet
from strongkkt.funcspace import catalog_instantiate, eval_extended
from strongkkt.gencvx import QFPInstance, modulus_estimate, qfp_build, sq_check, strong_minimum_check

UNIT = RealSet1D.parse("[-1,1]")


def test_sq_check_examples():
    assert sq_check(catalog_instantiate("half_square"), UNIT, 1.0).status == "Verified"
    r = sq_check(catalog_instantiate("frac_abs"), RealSet1D.real_line(), 0.1)
    assert r.status == "Refuted" and r.violation > 0
    x, y, lam = r.witness
    assert 0 <= lam <= 1
    assert sq_check(catalog_instantiate("abs"), UNIT, 0.0).verified


def test_sq_check_rejects_concave():
    assert sq_check(catalog_instantiate("neg_square"), UNIT, 0.0).status == "Refuted"


def test_modulus_estimates():
    lo, hi = modulus_estimate(catalog_instantiate("sqrt_abs"), UNIT)
    assert lo > 0 and hi - lo <= 1e-3
    lo, hi = modulus_estimate(catalog_instantiate("half_square"), UNIT)
    assert lo >= 1 - 1e-3
    # strictly quasiconvex; on [-10,10] the modulus is at most min slope * 2 / width = 1/1210
    lo, hi = modulus_estimate(catalog_instantiate("frac_abs"), RealSet1D.parse("[-10,10]"))
    assert hi <= 1e-3


def test_modulus_estimate_not_quasiconvex():
    with pytest.raises(NotQuasiconvex):
        modulus_estimate(catalog_instantiate("neg_square"), UNIT)


def test_qfp_build_identity():
    inst = QFPInstance.from_params({"A": [[1.0]], "m": 1, "M": 1})
    h = qfp_build(inst)
    assert inst.modulus == 1.0
    assert eval_extended(h, 0.6) == pytest.approx(0.18)


def test_qfp_modulus_scaling():
    inst = QFPInstance.from_params({"A": [[2.0, 0], [0, 2.0]], "m": 1, "M": 4, "beta_const": 2})
    assert inst.modulus == 0.5


def test_qfp_2d_verified():
    inst = QFPInstance.from_params({"A": [[1.0, 0.0], [0.0, 3.0]], "m": 1, "M": 2, "beta_const": 1.5,
                                    "b": [0.25, 0.0]})
    h = qfp_build(inst)
    assert inst.modulus == 0.5
    assert sq_check(h, inst.region(box=3.0), inst.modulus, n_grid=96).verified


def test_qfp_invariants():
    with pytest.raises(InvariantViolation):
        qfp_build(QFPInstance.from_params({"A": [[-1.0]], "m": 1, "M": 1}))
    with pytest.raises(InvariantViolation):
        qfp_build(QFPInstance.from_params({"A": [[1.0]], "m": 2, "M": 1}))


def test_strong_minimum_examples():
    sq = catalog_instantiate("square")
    assert strong_minimum_check(sq, UNIT, 0.0, 1.0).status == "Holds"
    v = strong_minimum_check(sq, UNIT, 0.0, 2.0)
    assert v.status == "Fails" and v.witness[0] != 0
    assert strong_minimum_check(catalog_instantiate("abs"), UNIT, 0.0, 1.0).status == "Holds"
    with pytest.raises(PointNotInSet):
        strong_minimum_check(sq, UNIT, 3.0, 1.0)


def test_strongly_convex_catalog_is_sq():
    for fid in ("half_square", "square"):
        f = catalog_instantiate(fid)
        g = f.annotation("strongly_convex")
        for region in ("[-1,1]", "[0,3]", "[-5,-2]"):
            assert sq_check(f, RealSet1D.parse(region), g).verified


@settings(max_examples=25)
@given(g_hi=st.floats(0.0, 1.0), frac=st.floats(0.0, 1.0))
def test_sq_monotone_in_gamma(g_hi, frac):
    f = catalog_instantiate("sqrt_abs")
    if sq_check(f, UNIT, g_hi, n_grid=48).verified:
        assert sq_check(f, UNIT, frac * g_hi, n_grid=48).verified
