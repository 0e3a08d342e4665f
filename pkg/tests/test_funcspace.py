import math

import numpy as np
import pytest

from strongkkt.errors import DimensionMismatch, InvalidParams, UnknownCatalogId
from strongkkt.funcspace import (FnModel, LimitSchedule, catalog_ids, catalog_instantiate, dini_upper,
                                 eval_extended, hadamard_upper, sublevel_interval_1d, sublevel_isc_probe,
                                 sublevel_set)
from strongkkt.convexsets import RealSet1D, SetOracle


def test_eval_recip_right():
    g1 = catalog_instantiate("recip_right")
    assert eval_extended(g1, 0.5) == -2.0
    assert eval_extended(g1, 2.0) == math.inf
    assert eval_extended(g1, 0.0) == 0.0


def test_eval_zero_any_dim():
    z = catalog_instantiate("zero", {"dim": 3})
    assert eval_extended(z, [1.0, -2.0, 7.0]) == 0.0


def test_eval_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        eval_extended(catalog_instantiate("zero", {"dim": 2}), [1.0, 2.0, 3.0])


def test_dini_neg_part():
    g = catalog_instantiate("neg_part")
    assert dini_upper(g, 0.0, -1.0) == pytest.approx(1.0, abs=1e-12)
    assert dini_upper(g, 0.0, 1.0) == pytest.approx(0.0, abs=1e-12)


def test_dini_constant_and_square():
    assert dini_upper(catalog_instantiate("constant"), 3.0, -2.0) == 0.0
    assert dini_upper(catalog_instantiate("square"), 1.0, 1.0) == pytest.approx(2.0, abs=1e-4)


def test_hadamard_neg_part():
    g = catalog_instantiate("neg_part")
    assert hadamard_upper(g, 0.0, 1.0) == pytest.approx(0.0, abs=1e-4)
    assert hadamard_upper(catalog_instantiate("constant"), 0.0, 1.0) == 0.0


def test_hadamard_abs_zero_direction_shrinks_with_jitter():
    h = catalog_instantiate("abs")
    wide = hadamard_upper(h, 0.0, 0.0, LimitSchedule(direction_jitter=1.0))
    narrow = hadamard_upper(h, 0.0, 0.0, LimitSchedule(direction_jitter=1e-3))
    assert wide >= 0 and narrow >= 0
    assert narrow < wide


def test_sublevel_sets():
    assert sublevel_interval_1d(catalog_instantiate("recip_right"), 0.0).approx_equal(RealSet1D.parse("[0,1]"), 1e-6)
    assert sublevel_interval_1d(catalog_instantiate("square"), 1.0).approx_equal(RealSet1D.parse("[-1,1]"), 1e-6)
    S = sublevel_set(catalog_instantiate("square"), 0.0, strict=True)
    assert not S.contains(np.linspace(-2, 2, 101)[:, None]).any()


def test_sublevel_contains_point():
    f = catalog_instantiate("frac_abs")
    for x in (-3.0, 0.0, 0.7):
        assert sublevel_set(f, x).contains(np.array([[x]]))[0]
        assert not sublevel_set(f, x, strict=True).contains(np.array([[x]]))[0]


def test_isc_probe_constant():
    assert sublevel_isc_probe(catalog_instantiate("constant"), 0.0).status == "NoViolation"


def test_isc_probe_recip_right_has_witness():
    # S(y) = (0, y] for y in (0, 1], so points of S(0) = [0, 1] away from 0 are not approached
    v = sublevel_isc_probe(catalog_instantiate("recip_right"), 0.0)
    assert v.status == "ViolationWitness"
    assert v.y[0] > 0.01 and np.all(v.x_seq[:, 0] > 0)


def test_isc_probe_isolated_domain_is_vacuous():
    # dom = {0, 1}: no sequence in dom approaches 0 except the constant one
    def func(X):
        x = X[:, 0]
        return np.where(x == 0, 0.0, np.where(x == 1.0, -1.0, np.inf))

    f = FnModel(1, func, None, {}, "two_points")
    grid = np.array([[0.0], [1.0], [0.5]])
    assert sublevel_isc_probe(f, 0.0, V=RealSet1D.parse("[-2,2]"), probe_grid=grid).status == "NoViolation"


def test_isc_probe_step_down_witness():
    v = sublevel_isc_probe(catalog_instantiate("step_down"), 0.0, V=RealSet1D.parse("[-1,1]"))
    assert v.status == "ViolationWitness"
    assert v.y[0] >= 0 and np.all(v.x_seq[:, 0] < 0)


def test_catalog():
    assert "sqrt_abs" in catalog_ids()
    h = catalog_instantiate("sqrt_abs")
    assert eval_extended(h, 4.0) == 2.0 and eval_extended(h, -9.0) == 3.0
    q = catalog_instantiate("qfp", {"A": [[1.0]], "m": 1, "M": 1})
    assert eval_extended(q, 2.0) == pytest.approx(2.0)
    assert q.annotation("sq_modulus") == pytest.approx(1.0)
    with pytest.raises(UnknownCatalogId):
        catalog_instantiate("nope")
    with pytest.raises(InvalidParams):
        catalog_instantiate("abs", {"bogus": 1})


def test_schedule_validation():
    with pytest.raises(InvalidParams):
        LimitSchedule(t0=-1)
    with pytest.raises(InvalidParams):
        LimitSchedule(shrink=1.5)


@pytest.mark.parametrize("fid", ["recip_right", "neg_part", "jump_affine", "abs", "sqrt_abs", "frac_abs"])
def test_catalog_closed_forms(fid):
    f = catalog_instantiate(fid)
    x = np.linspace(-3, 3, 6001)
    forms = {
        "recip_right": np.where(x == 0, 0.0, np.where((x > 0) & (x <= 1), -1 / np.where(x == 0, 1, x), np.inf)),
        "neg_part": np.maximum(-x, 0.0),
        "jump_affine": np.where(x > 0, 2 * x, np.where(x == 0, 0.0, -x - 1)),
        "abs": np.abs(x),
        "sqrt_abs": np.sqrt(np.abs(x)),
        "frac_abs": x / (1 + np.abs(x)),
    }
    assert np.array_equal(f.evaluate(x[:, None]), forms[fid])


def test_hadamard_dominates_dini():
    sched = LimitSchedule(direction_jitter=0.5)
    for fid in ("neg_part", "abs", "jump_affine", "sqrt_abs", "frac_abs", "square"):
        f = catalog_instantiate(fid)
        for x in (-0.5, 0.0, 0.3):
            for d in (-1.0, 1.0, 0.25):
                assert hadamard_upper(f, x, d, sched) >= dini_upper(f, x, d, sched)
