"""Property suites over catalog configurations (hypothesis, >= 200 draws each).

Each suite bumps TRIALS[name] once per draw so the acceptance run can report counts.
"""

from __future__ import annotations

import math
from collections import Counter
from functools import lru_cache

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from strongkkt.convexsets import RealSet1D, polar_member, sample_points, tangent_contains
from strongkkt.funcspace import (LimitSchedule, catalog_instantiate, eval_extended, hadamard_upper, pointwise_max,
                                 sublevel_interval_1d)
from strongkkt.levelcone import ConstraintSystem, feasible_set_1d, max_rule_check, normal_cone_lower
from strongkkt.strongsub import (SubdiffSpec, classical_subdiff_1d, default_grid, ss_member, strong_member,
                                 strong_set_1d)

N_TRIALS = 200
TRIALS: Counter = Counter()
PROPS = settings(max_examples=N_TRIALS, deadline=None, derandomize=True)

# (catalog id, params, xbar)
POINTS = [
    ("jump_affine", (), 0.0), ("jump_affine", (), -0.5), ("jump_affine", (), 0.7),
    ("neg_part", (), 0.0), ("neg_part", (), -1.0), ("neg_part", (), 0.5),
    ("recip_right", (), 0.0), ("recip_right", (), 0.5),
    ("sqrt_abs", (), 0.0), ("sqrt_abs", (), 0.4),
    ("half_square", (), 0.0), ("half_square", (), 1.0),
    ("abs", (), 0.0), ("frac_abs", (), 0.0), ("frac_abs", (), -2.0), ("square", (), 0.3),
    ("half_square_left", (), 0.0), ("half_square_right", (), 0.0),
]
REACH = (0.0, 0.5, 1.0, 3.0, math.inf)
BETAS = (0.5, 1.0, 2.0)
GAMMAS = (0.0, 0.5, 1.0, 2.0)


@lru_cache(maxsize=None)
def fn(fid: str, params: tuple = ()):
    return catalog_instantiate(fid, dict(params))


def window(x: float, a: float, b: float) -> RealSet1D:
    """[x - a, x + b], open at infinite ends."""
    if a == 0.0 and b == 0.0:
        return RealSet1D.point(x)
    lo = "(-inf" if math.isinf(a) else f"[{x - a!r}"
    hi = "inf)" if math.isinf(b) else f"{x + b!r}]"
    return RealSet1D.parse(f"{lo},{hi}")


@lru_cache(maxsize=None)
def strong_set(pi: int, a: float, b: float, beta: float, gamma: float) -> tuple:
    fid, params, x = POINTS[pi]
    h = fn(fid, params)
    K = window(x, a, b)
    return h, x, K, strong_set_1d(h, x, SubdiffSpec(beta, gamma, K))


def pick(S: RealSet1D, u: float, pad: float = 5.0) -> float | None:
    """A point of S chosen by u in [0,1]; infinite ends are cut at distance pad."""
    if S.is_empty:
        return None
    ivs = S.intervals
    iv = ivs[min(int(u * len(ivs)), len(ivs) - 1)]
    lo = iv.lo if math.isfinite(iv.lo) else (min(iv.hi, 0.0) - pad if math.isfinite(iv.hi) else -pad)
    hi = iv.hi if math.isfinite(iv.hi) else max(lo, 0.0) + pad
    v = lo + (u * len(ivs) % 1.0) * (hi - lo)
    v = min(max(v, lo), hi)
    return v if S.contains(v) else (lo if S.contains(lo) else hi)


config = st.tuples(st.integers(0, len(POINTS) - 1), st.sampled_from(REACH), st.sampled_from(REACH),
                   st.sampled_from(BETAS), st.sampled_from(GAMMAS))
unit = st.floats(0.0, 1.0)
candidate = st.one_of(st.tuples(st.just("set"), unit), st.tuples(st.just("free"), st.floats(-5.0, 5.0)))


def draw_xi(S: RealSet1D, c) -> float | None:
    kind, val = c
    return pick(S, val) if kind == "set" else val


# ---------------------------------------------------------------------------
# P1: the strong subdifferential is convex
# ---------------------------------------------------------------------------


@PROPS
@given(config, candidate, candidate)
def test_midpoint_convexity(cfg, c1, c2):
    TRIALS["midpoint_convexity"] += 1
    h, x, K, S = strong_set(*cfg)
    beta, gamma = cfg[3], cfg[4]
    xi1, xi2 = draw_xi(S, c1), draw_xi(S, c2)
    if xi1 is None or xi2 is None:
        return
    spec = SubdiffSpec(beta, gamma, K)
    grid = default_grid(h, x, spec.oracle)
    if strong_member(h, x, spec, xi1, grid).member and strong_member(h, x, spec, xi2, grid).member:
        assert strong_member(h, x, spec, 0.5 * (xi1 + xi2), grid).member


# ---------------------------------------------------------------------------
# P6: shrinking K can only enlarge the subdifferential
# ---------------------------------------------------------------------------


@PROPS
@given(st.integers(0, len(POINTS) - 1), st.sampled_from(REACH), st.sampled_from(REACH), unit, unit,
       st.sampled_from(BETAS), st.sampled_from(GAMMAS), candidate)
def test_antimonotone_in_K(pi, a2, b2, sa, sb, beta, gamma, c):
    TRIALS["antimonotone_in_K"] += 1
    a1 = a2 * sa if math.isfinite(a2) else REACH[int(sa * 4.999)]
    b1 = b2 * sb if math.isfinite(b2) else REACH[int(sb * 4.999)]
    h, x, K2, S2 = strong_set(pi, a2, b2, beta, gamma)
    K1 = window(x, a1, b1)
    assert K1.issubset(K2)
    xi = draw_xi(S2, c)
    if xi is None:
        return
    grid = default_grid(h, x, SubdiffSpec(beta, gamma, K2).oracle)
    if strong_member(h, x, SubdiffSpec(beta, gamma, K2), xi, grid).member:
        assert strong_member(h, x, SubdiffSpec(beta, gamma, K1), xi, grid).member


# ---------------------------------------------------------------------------
# inside the sublevel set the strong and Suzuki-type tests coincide
# ---------------------------------------------------------------------------


@PROPS
@given(st.integers(0, len(POINTS) - 1), st.sampled_from((0.5, 1.0, 3.0)), st.sampled_from(BETAS),
       st.sampled_from(GAMMAS), st.floats(-5.0, 5.0))
def test_sublevel_reduction(pi, r, beta, gamma, xi):
    TRIALS["sublevel_reduction"] += 1
    fid, params, x = POINTS[pi]
    h = fn(fid, params)
    K = sublevel_interval_1d(h, x) & window(x, r, r)
    grid = default_grid(h, x, SubdiffSpec(beta, gamma, K).oracle)
    a = strong_member(h, x, SubdiffSpec(beta, gamma, K), xi, grid).member
    b = ss_member(h, x, beta, gamma, xi, grid).member
    assert a == b


# ---------------------------------------------------------------------------
# K = R with beta, gamma > 0 gives Greenberg-Pierskalla subgradients
# ---------------------------------------------------------------------------


@PROPS
@given(st.integers(0, len(POINTS) - 1), st.sampled_from(BETAS), st.sampled_from(GAMMAS[1:]), unit)
def test_gp_inclusion(pi, beta, gamma, u):
    TRIALS["gp_inclusion"] += 1
    h, x, K, S = strong_set(pi, math.inf, math.inf, beta, gamma)
    v = pick(S, u)
    if v is None:
        return
    Y = default_grid(h, x, K)[:, 0]
    hy, hx = h.evaluate(Y[:, None]), eval_extended(h, x)
    ahead = v * (Y - x) >= 0.0
    assert np.all(hy[ahead] >= hx - 1e-12)
    assert classical_subdiff_1d(h, x, "greenberg_pierskalla").value.closure().contains(v)


# ---------------------------------------------------------------------------
# K = [h <= 0], h(xbar) < 0: empty for gamma > 0 and {0} for gamma = 0
# ---------------------------------------------------------------------------

INTERIOR = [
    (("shifted", (("base", "square"), ("offset", -1.0))), 0.0),
    (("shifted", (("base", "square"), ("offset", -1.0))), 0.5),
    (("shifted", (("base", "frac_abs"), ("offset", -0.5))), 0.0),
    (("shifted", (("base", "abs"), ("offset", -1.0))), 0.3),
    (("shifted", (("base", "neg_square"), ("offset", -1.0))), 0.0),
    (("shifted", (("base", "neg_square"), ("offset", -2.0))), 0.0),
    (("constant", (("c", -2.0),)), 0.3),
    (("shifted", (("base", "neg_part"), ("offset", -1.0))), 0.5),
    (("shifted", (("base", "half_square_left"), ("offset", -1.0))), 1.0),
]
# entries from here on have xbar a local maximizer of h
LOCAL_MAX = list(range(4, len(INTERIOR)))


@lru_cache(maxsize=None)
def _dichotomy(i: int, beta: float, gamma: float) -> tuple:
    (fid, params), x = INTERIOR[i]
    h = fn(fid, params)
    spec = SubdiffSpec(beta, gamma, feasible_set_1d([h]))
    want = RealSet1D.empty() if gamma > 0 else RealSet1D.point(0.0)
    return h, x, spec, strong_set_1d(h, x, spec), want


def _check_dichotomy(i, beta, gamma, xi):
    h, x, spec, S, want = _dichotomy(i, beta, gamma)
    assert S.approx_equal(want, 1e-6)
    assert strong_member(h, x, spec, xi).member == want.contains(xi)


# exactly 0 or clear of the tolerance band around it
probe = st.one_of(st.just(0.0), st.floats(1e-3, 5.0), st.floats(-5.0, -1e-3))


# red by design: square - 1 at 0 with gamma = 1 has {0}, frac_abs - 1/2 at 0 with gamma = 0 has [0, 0.914]
@PROPS
@given(st.integers(0, len(INTERIOR) - 1), st.sampled_from(BETAS), st.sampled_from(GAMMAS), probe)
def test_interior_dichotomy_as_stated(i, beta, gamma, xi):
    TRIALS["interior_dichotomy_as_stated"] += 1
    _check_dichotomy(i, beta, gamma, xi)


@PROPS
@given(st.sampled_from(LOCAL_MAX), st.sampled_from(BETAS), st.sampled_from(GAMMAS), probe)
def test_interior_dichotomy_at_local_max(i, beta, gamma, xi):
    TRIALS["interior_dichotomy_local_max"] += 1
    _check_dichotomy(i, beta, gamma, xi)


# ---------------------------------------------------------------------------
# forward max rule: active pieces embed in the subdifferential of the max
# ---------------------------------------------------------------------------

FAMILIES = [
    (("half_square_left", "half_square_right"), 0.0),
    (("jump_affine", "neg_part"), 0.0),
    (("abs", "neg_part"), 0.0),
    (("square", "abs"), 0.0),
    (("half_square", "abs"), 0.0),
    (("neg_part", "half_square_left"), -2.0),
    (("half_square", "half_square_right"), 1.0),
]


@lru_cache(maxsize=None)
def _max_report(fi, g1, g2, beta, a, b, ka, kb):
    (ids, x) = FAMILIES[fi]
    gs = [fn(i) for i in ids]
    K = window(x, a, b)
    specs = [SubdiffSpec(beta, g1, window(x, max(a, ka), max(b, kb))), SubdiffSpec(beta, g2, K)]
    return gs, x, specs, K, max_rule_check(gs, x, specs, K)


@PROPS
@given(st.integers(0, len(FAMILIES) - 1), st.sampled_from(GAMMAS[:3]), st.sampled_from(GAMMAS[:3]),
       st.sampled_from(BETAS), st.sampled_from(REACH[1:]), st.sampled_from(REACH[1:]), st.sampled_from(REACH),
       st.sampled_from(REACH), st.integers(0, 1), unit)
def test_max_rule_forward(fi, g1, g2, beta, a, b, ka, kb, j, u):
    TRIALS["max_rule_forward"] += 1
    gs, x, specs, K, rep = _max_report(fi, g1, g2, beta, a, b, ka, kb)
    vals = [eval_extended(g, x) for g in gs]
    if abs(vals[j] - max(vals)) > 1e-8:
        j = 1 - j
    piece = strong_set_1d(gs[j], x, specs[j])
    w = pick(piece, u)
    if w is None:
        return
    gmax = max(vals)
    sup_spec = SubdiffSpec(beta, rep.gamma_m, K)
    assert rep.gamma_m == min(specs[i].gamma for i in range(2) if abs(vals[i] - gmax) <= 1e-8)
    assert strong_member(pointwise_max(gs), x, sup_spec, w).member
    assert rep.forward_ok


# ---------------------------------------------------------------------------
# the lower estimate lies in the normal cone of the feasible set
# ---------------------------------------------------------------------------

SYSTEMS = [
    ((("jump_affine", (), "[-1,1]"),), 0.0), ((("jump_affine", (), "[-1,0]"),), 0.0),
    ((("jump_affine", (), "[-2,2]"),), -1.0), ((("jump_affine", (), "R"),), -0.5),
    ((("recip_right", (), "R"), ("recip_outside", (), "R")), 0.0),
    ((("shifted", (("base", "square"), ("offset", -1.0)), "[-1,1]"),), 1.0),
    ((("shifted", (("base", "square"), ("offset", -1.0)), "R"),), -1.0),
    ((("neg_part", (), "R"),), 0.0), ((("neg_part", (), "[-1,inf)"),), 0.0),
    ((("shifted", (("base", "square"), ("offset", -1.0)), "R"), ("linear", (("c", 1.0),), "R")), 0.0),
    ((("shifted", (("base", "square"), ("offset", -1.0)), "R"), ("linear", (("c", 1.0),), "R")), -1.0),
    ((("sqrt_pos", (), "R"),), 0.0),
]


@lru_cache(maxsize=None)
def _lower(si: int, beta: float, gamma: float):
    cons, x = SYSTEMS[si]
    gs = [fn(fid, params) for fid, params, _ in cons]
    cs = ConstraintSystem(gs, [SubdiffSpec(beta, gamma, K) for _, _, K in cons])
    desc = normal_cone_lower(cs, x)
    return cs, x, desc, sample_points(cs.omega, x, far_field=1e4)


@PROPS
@given(st.integers(0, len(SYSTEMS) - 1), st.sampled_from(BETAS), st.sampled_from(GAMMAS), unit)
def test_lower_estimate_is_polar(si, beta, gamma, u):
    TRIALS["lower_estimate_polar"] += 1
    cs, x, desc, grid = _lower(si, beta, gamma)
    assert not [f for f in desc.flags if f.startswith("sample")]
    v = pick(desc.closed, u, pad=1e3)
    if v is None:
        return
    assert polar_member(cs.omega, x, v, grid, tol=1e-9 * max(1.0, abs(v))).member


# ---------------------------------------------------------------------------
# directional bound: lambda <w, d> <= beta max{g^{H+}(xbar; d), 0} on T(K, xbar)
# ---------------------------------------------------------------------------

JITTER = LimitSchedule(direction_jitter=1.0)


@lru_cache(maxsize=None)
def _hadamard(pi: int, d: float) -> float:
    fid, params, x = POINTS[pi]
    return hadamard_upper(fn(fid, params), x, d, JITTER)


@PROPS
@given(config, st.sampled_from((-2.0, -1.0, -0.5, 0.5, 1.0, 2.0)), st.sampled_from((0.0, 0.5, 1.0)), unit)
def test_directional_bound(cfg, d, lam, u):
    TRIALS["directional_bound"] += 1
    h, x, K, S = strong_set(*cfg)
    w = pick(S, u)
    if w is None or not tangent_contains(K, x, d):
        return
    H = _hadamard(cfg[0], d)
    assert lam * w * d <= cfg[3] * max(H, 0.0) + 1e-4
