"""Strong subdifferentials: membership, 1-D reconstruction, classical relatives.

A vector xi belongs to the strong subdifferential of h at xbar on (K, beta,
gamma) when for every y in K and lambda in [0, 1]

    max{h(y), h(xbar)} - h(xbar) >= phi(lambda),
    phi(lambda) = lambda*(<xi,d>/beta + gamma|d|^2/2) - lambda^2*(1/beta + gamma)|d|^2/2,

with d = y - xbar.  phi is a concave quadratic, so the lambda quantifier is
eliminated exactly at the clamped vertex; only y is sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .convexsets import (
    INF,
    TOL,
    STRICT_MARGIN,
    RealSet1D,
    SetOracle,
    as_realset,
    sample_points,
    support_value,
)
from .errors import BracketTooSmall, InvalidParams, PointOutsideDomain, UnsupportedDim
from .funcspace import FnModel, LimitSchedule, dini_upper, eval_extended, hadamard_upper

SENTINEL = 1e6
_EPS = float(np.finfo(float).eps)
SUBDIFF_SCHEDULE = LimitSchedule(t0=1e-2, shrink=0.5, steps=20, tail=10)


@dataclass(frozen=True)
class SubdiffSpec:
    """The triple (beta, gamma, K)."""

    beta: float
    gamma: float
    K: RealSet1D | SetOracle

    def __post_init__(self):
        if not self.beta > 0:
            raise InvalidParams("beta must be positive")
        if not self.gamma >= 0:
            raise InvalidParams("gamma must be nonnegative")
        if isinstance(self.K, str):
            object.__setattr__(self, "K", RealSet1D.parse(self.K))
        if isinstance(self.K, RealSet1D) and self.K.is_empty:
            raise InvalidParams("K must be nonempty")

    @property
    def oracle(self) -> SetOracle:
        return self.K if isinstance(self.K, SetOracle) else SetOracle.from_interval(self.K)

    def describe(self) -> dict:
        K = str(self.K) if isinstance(self.K, RealSet1D) else self.oracle.name
        return {"beta": self.beta, "gamma": self.gamma, "K": K}


@dataclass(frozen=True)
class IntervalApprox:
    """Inner (certified members) and outer (non-members excluded) brackets."""

    inner: RealSet1D
    outer: RealSet1D
    resolution: float
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def value(self) -> RealSet1D:
        return self.inner

    @property
    def is_empty(self) -> bool:
        return self.inner.is_empty

    def matches(self, expected: RealSet1D, tol: float = 1e-3) -> bool:
        return self.inner.approx_equal(expected, tol)

    def to_record(self) -> dict:
        rec = {"set": str(self.inner), "outer": str(self.outer), "resolution": self.resolution}
        rec.update({k: v for k, v in self.meta.items() if isinstance(v, (str, int, float, bool, type(None)))})
        return rec


@dataclass(frozen=True)
class MembershipVerdict:
    member: bool
    margin: float
    witness: tuple[np.ndarray, float] | None = None
    n_samples: int = 0
    evidence: str = "grid-certified"

    @property
    def status(self) -> str:
        return "Member" if self.member else "NonMember"


# ---------------------------------------------------------------------------
# lambda elimination
# ---------------------------------------------------------------------------


def worst_lambda_margin(xi, d, beta: float, gamma: float) -> tuple[float, float]:
    """Exact (argmax, max) of phi over lambda in [0, 1]."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    d = np.atleast_1d(np.asarray(d, dtype=float))
    dd = float(d @ d)
    if dd == 0.0:
        return 0.0, 0.0
    s = float(xi @ d) / beta + 0.5 * gamma * dd
    c = 0.5 * (1.0 / beta + gamma) * dd
    lam = min(max(s / (2.0 * c), 0.0), 1.0)
    return lam, lam * s - lam * lam * c


# ---------------------------------------------------------------------------
# membership
# ---------------------------------------------------------------------------


def default_grid(h: FnModel, xbar, K, n_uniform: int = 2048, n_refined: int = 64, seed: int = 0) -> np.ndarray:
    """Sample grid of K around xbar (breakpoints of h included in 1-D)."""
    bps = h.annotations.get("breakpoints", ()) if h.dim == 1 else ()
    return sample_points(K, xbar, n_uniform=n_uniform, n_refined=n_refined, breakpoints=bps, seed=seed)


class _Rows:
    """Precomputed grid rows for repeated membership queries."""

    def __init__(self, h: FnModel, xbar, K, y_grid=None):
        self.xbar = np.atleast_1d(np.asarray(xbar, dtype=float)).reshape(-1)
        hx = eval_extended(h, self.xbar)
        if not math.isfinite(hx):
            raise PointOutsideDomain(f"{h.name}({self.xbar}) is not finite")
        K_or = K if isinstance(K, SetOracle) else SetOracle.from_interval(as_realset(K))
        if not K_or.contains(self.xbar):
            raise PointOutsideDomain("xbar must lie in K")
        Y = default_grid(h, self.xbar, K_or) if y_grid is None else np.asarray(y_grid, float).reshape(-1, h.dim)
        Y = Y[K_or.contains(Y)] if Y.shape[0] else Y
        D = Y - self.xbar[None, :]
        keep = np.any(D != 0.0, axis=1)
        self.Y, self.D = Y[keep], D[keep]
        hy = h.evaluate(self.Y) if self.Y.shape[0] else np.zeros(0)
        self.rhs = np.where(np.isposinf(hy), INF, np.maximum(hy, hx) - hx)
        self.dd = np.einsum("ij,ij->i", self.D, self.D)
        self.scale = np.minimum(np.sqrt(self.dd), 1.0)
        # rounding in h(y) - h(xbar) is amplified by 1/|d| on short rows
        self.err = 16.0 * _EPS * (np.where(np.isfinite(hy), np.abs(hy), 0.0) + abs(hx))
        self.hx = hx

    def margins(self, xi, beta, gamma) -> np.ndarray:
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        xd = self.D @ xi
        m = _kernels.strong_margins(xd, self.dd, self.rhs, beta, gamma)
        slack = self.err + 16.0 * _EPS * (np.abs(xd) / beta + gamma * self.dd)
        return (m + slack) / self.scale


def _verdict(rows: _Rows, m: np.ndarray, xi, beta, gamma, tol) -> MembershipVerdict:
    if m.size == 0:
        return MembershipVerdict(True, 0.0, None, 0)
    i = int(np.argmin(m))
    worst = float(m[i])
    if worst >= -tol:
        return MembershipVerdict(True, min(worst, 0.0) if math.isfinite(worst) else 0.0, None, m.size)
    lam, _ = worst_lambda_margin(xi, rows.D[i], beta, gamma)
    return MembershipVerdict(False, worst, (rows.Y[i].copy(), lam), m.size)


def strong_member(h: FnModel, xbar, spec: SubdiffSpec, xi, y_grid=None, tol: float = TOL) -> MembershipVerdict:
    """Grid verdict for xi in the strong subdifferential of h at xbar.

    Each grid row contributes RHS - sup phi divided by min(|d|, 1), so the
    closed-inequality tolerance does not loosen the test near xbar where both
    sides shrink linearly in |d|.  A few ulps of rounding slack per row keep
    short rows from reporting float noise as violations.  Rows with vanishing RHS are scored by the
    initial slope of phi.
    """
    rows = _Rows(h, xbar, spec.K, y_grid)
    return _verdict(rows, rows.margins(xi, spec.beta, spec.gamma), xi, spec.beta, spec.gamma, tol)


def ss_member(h: FnModel, xbar, beta: float, gamma: float, xi, y_grid=None, tol: float = TOL) -> MembershipVerdict:
    """<xi, y - xbar> <= -(beta*gamma/2)|y - xbar|^2 on sampled y in S_h(xbar).

    The margin is reported in the same units as ``strong_member``: violations
    are measured through the initial slope and divided by min(|d|, 1).
    """
    xbar = np.atleast_1d(np.asarray(xbar, dtype=float)).reshape(-1)
    hx = eval_extended(h, xbar)
    if not math.isfinite(hx):
        raise PointOutsideDomain(f"{h.name}({xbar}) is not finite")
    if y_grid is None:
        y_grid = default_grid(h, xbar, SetOracle.whole_space(h.dim))
    Y = np.asarray(y_grid, dtype=float).reshape(-1, h.dim)
    Y = Y[h.evaluate(Y) <= hx]
    D = Y - xbar[None, :]
    keep = np.any(D != 0.0, axis=1)
    Y, D = Y[keep], D[keep]
    if Y.shape[0] == 0:
        return MembershipVerdict(True, 0.0, None, 0)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    dd = np.einsum("ij,ij->i", D, D)
    s = (D @ xi) / beta + 0.5 * gamma * dd
    m = -s / np.minimum(np.sqrt(dd), 1.0)
    i = int(np.argmin(m))
    if m[i] >= -tol:
        return MembershipVerdict(True, float(min(m[i], 0.0)), None, Y.shape[0])
    return MembershipVerdict(False, float(m[i]), (Y[i].copy(), 0.0), Y.shape[0])


# ---------------------------------------------------------------------------
# 1-D reconstruction by bisection
# ---------------------------------------------------------------------------


def _classify(rows: _Rows, xi: float, beta: float, gamma: float, tol: float) -> int:
    """0 member, +1 too large only, -1 too small only, 2 violated on both sides."""
    m = rows.margins(np.array([xi]), beta, gamma)
    d = rows.D[:, 0]
    big = bool(np.any(m[d > 0] < -tol))
    small = bool(np.any(m[d < 0] < -tol))
    if big and small:
        return 2
    return 1 if big else (-1 if small else 0)


def strong_interval_1d(h: FnModel, xbar: float, spec: SubdiffSpec, bracket: tuple[float, float] = (-SENTINEL, SENTINEL),
                       resolution: float = 1e-9, y_grid=None, tol: float = TOL) -> IntervalApprox:
    """Reconstruct the (convex) member set on the line by bisection.

    Each probe is a ``strong_member`` sweep; violated rows with y > xbar show
    that xi is too large, rows with y < xbar that it is too small.  Bracket
    ends that are members are re-probed at the sentinel magnitude and reported
    as infinite endpoints.
    """
    if h.dim != 1:
        raise UnsupportedDim("strong_interval_1d needs dim = 1")
    rows = _Rows(h, xbar, spec.K, y_grid)
    b, g = spec.beta, spec.gamma
    meta = {"grid_points": int(rows.Y.shape[0]), "evidence": "grid-certified", "sentinel": SENTINEL}

    def cls(x):
        return _classify(rows, x, b, g, tol)

    lo, hi = float(bracket[0]), float(bracket[1])
    c_lo, c_hi = cls(lo), cls(hi)
    empty = IntervalApprox(RealSet1D.empty(), RealSet1D.empty(), resolution, meta)

    # locate one member
    if c_lo == 0:
        m = lo
    elif c_hi == 0:
        m = hi
    else:
        if c_lo != -1 or c_hi != 1:
            return empty
        a, z = lo, hi
        m = None
        while z - a > resolution:
            mid = 0.5 * (a + z)
            if mid in (a, z):
                break
            c = cls(mid)
            if c == 0:
                m = mid
                break
            if c == 2:
                return empty
            if c == -1:
                a = mid
            else:
                z = mid
        if m is None:
            meta = dict(meta, note="member set thinner than the resolution")
            return IntervalApprox(RealSet1D.empty(), RealSet1D.interval(a, z), resolution, meta)

    def endpoint(m, far, sign):
        if cls(far) == 0:
            probe = sign * max(abs(far), SENTINEL)
            if cls(probe) == 0:
                return sign * INF, sign * INF
            raise BracketTooSmall(f"bracket end {far} is a member but the sentinel {probe} is not")
        a, z = m, far
        while abs(z - a) > resolution:
            mid = 0.5 * (a + z)
            if mid in (a, z):
                break
            if cls(mid) == 0:
                a = mid
            else:
                z = mid
        return a, z

    u_in, u_out = endpoint(m, hi, 1.0)
    l_in, l_out = endpoint(m, lo, -1.0)
    inner = RealSet1D.interval(l_in, u_in)
    outer = RealSet1D.interval(l_out, u_out)
    return IntervalApprox(inner, outer, resolution, meta)


def strong_set_1d(h: FnModel, xbar: float, spec: SubdiffSpec, **kw) -> RealSet1D:
    """Convenience wrapper returning the certified inner set."""
    return strong_interval_1d(h, xbar, spec, **kw).inner


# ---------------------------------------------------------------------------
# classical subdifferentials in 1-D
# ---------------------------------------------------------------------------

KINDS = ("regular", "limiting", "horizon", "fenchel_moreau", "greenberg_pierskalla", "quasiconvex")


def _tail_liminf(q: np.ndarray) -> float:
    """liminf of quotients ordered by decreasing t, extrapolating divergence."""
    if np.all(np.isposinf(q)):
        return INF
    fin = q[np.isfinite(q)]
    if fin.size == q.size and _diverges(q):
        return INF if q[-1] > 0 else -INF
    if fin.size == q.size and (np.all(np.diff(q) <= 0) or np.all(np.diff(q) >= 0)):
        return float(q[-1])
    return float(np.min(fin)) if fin.size else INF


def _clip_sentinel(S: RealSet1D) -> RealSet1D:
    """Intersect with [-SENTINEL, SENTINEL]; endpoints on the sentinel become infinite."""
    S = S & RealSet1D.interval(-SENTINEL, SENTINEL)
    if S.is_empty:
        return S
    lo, hi = S.inf, S.sup
    if lo <= -SENTINEL or hi >= SENTINEL:
        from .convexsets import Interval

        ivs = list(S.intervals)
        if lo <= -SENTINEL:
            iv = ivs[0]
            ivs[0] = Interval(-INF, iv.hi, False, iv.hi_closed)
        if hi >= SENTINEL:
            iv = ivs[-1]
            ivs[-1] = Interval(iv.lo, INF, iv.lo_closed, False)
        S = RealSet1D(ivs)
    return S


def _regular_at(h: FnModel, x: float, ts: np.ndarray) -> RealSet1D:
    hx = float(h.evaluate(np.array([[x]]))[0])
    if not math.isfinite(hx):
        return RealSet1D.empty()
    vr = h.evaluate((x + ts)[:, None])
    vl = h.evaluate((x - ts)[:, None])
    with np.errstate(invalid="ignore"):
        qr = np.where(np.isposinf(vr), INF, (vr - hx) / ts)
        ql = np.where(np.isposinf(vl), INF, (vl - hx) / ts)
    upper = _tail_liminf(qr)
    lower = -_tail_liminf(ql)
    if lower > upper + 1e-7 * (1.0 + min(abs(lower), abs(upper))):
        return RealSet1D.empty()
    if lower > upper:
        lower = upper = 0.5 * (lower + upper)
    return RealSet1D.interval(lower, upper)


def _side_sequence(h: FnModel, x: float, sign: float, sched: LimitSchedule):
    """Regular subdifferentials along x + sign*t_k when the values converge to h(x)."""
    hx = eval_extended(h, x)
    ts = sched.tail_steps()
    pts = x + sign * ts
    vals = h.evaluate(pts[:, None])
    if not np.all(np.isfinite(vals)):
        return None
    delta = np.abs(vals - hx)
    attentive = delta[-1] <= 1e-4 and np.all(np.diff(delta) <= 1e-12 + 1e-9 * delta[:-1])
    if not attentive:
        return None
    seq = []
    for p, t in zip(pts, ts):
        inner = t * 1e-3 * 0.5 ** np.arange(15)
        seq.append(_regular_at(h, float(p), inner))
    return seq


def _diverges(v: np.ndarray) -> bool:
    if np.any(np.isinf(v)):
        return True
    a = np.abs(v)
    return bool(a[-1] >= 8.0 * max(1.0, a[0]) and np.all(np.diff(a) > 0) and np.all(np.sign(v) == np.sign(v[-1])))


def _limiting_and_horizon(h: FnModel, x: float, sched: LimitSchedule) -> tuple[RealSet1D, RealSet1D, dict]:
    base = _regular_at(h, x, sched.tail_steps())
    lim = base
    up = base.sup == INF if not base.is_empty else False
    down = base.inf == -INF if not base.is_empty else False
    any_reg = not base.is_empty
    info = {"regular_at_point": str(base)}
    for sign in (1.0, -1.0):
        seq = _side_sequence(h, x, sign, sched)
        key = "right" if sign > 0 else "left"
        if seq is None:
            info[key] = "not attentive"
            continue
        if any(s.is_empty for s in seq):
            info[key] = "empty regular subdifferentials"
            seq = [s for s in seq if not s.is_empty]
            if len(seq) < 3:
                continue
        any_reg = True
        los = np.array([s.inf for s in seq])
        his = np.array([s.sup for s in seq])
        hi_div = _diverges(his) and his[-1] > 0
        lo_div = _diverges(los) and los[-1] < 0
        up |= hi_div
        down |= lo_div
        if not hi_div and not lo_div:
            last = seq[-3:]
            spread = max(abs(last[0].inf - last[-1].inf) if math.isfinite(last[0].inf) else 0.0,
                         abs(last[0].sup - last[-1].sup) if math.isfinite(last[0].sup) else 0.0)
            lim = (lim | seq[-1]).merge_close(1e-6)
            info[key] = f"limit {seq[-1]} (tail spread {spread:.2e})"
        else:
            info[key] = "unbounded regular subgradients"
    hor = RealSet1D.empty()
    if any_reg:
        hor = RealSet1D.point(0.0)
        if up:
            hor = hor | RealSet1D.nonneg()
        if down:
            hor = hor | RealSet1D.nonpos()
    return lim, hor, info


def _line_grid(h: FnModel, x: float, window: float = 10.0) -> np.ndarray:
    bps = h.annotations.get("breakpoints", ())
    return sample_points(RealSet1D.real_line(), x, n_uniform=8193, n_refined=64, radius=window,
                         far_field=1e30, breakpoints=bps)[:, 0]


def _fenchel_moreau(h: FnModel, x: float, y: np.ndarray) -> RealSet1D:
    hx = eval_extended(h, x)
    hy = h.evaluate(y[:, None])
    d = y - x
    ok = np.isfinite(hy) & (d != 0)
    q = (hy[ok] - hx) / d[ok]
    right = d[ok] > 0
    upper = float(np.min(q[right])) if right.any() else INF
    lower = float(np.max(q[~right])) if (~right).any() else -INF
    if lower > upper + TOL:
        return RealSet1D.empty()
    return RealSet1D.interval(lower, max(lower, upper))


def _side_flags(h: FnModel, x: float, y: np.ndarray, strict: bool) -> tuple[bool, bool]:
    hx = eval_extended(h, x)
    hy = h.evaluate(y[:, None])
    below = hy < hx - STRICT_MARGIN if strict else hy <= hx
    return bool(np.any(below & (y > x))), bool(np.any(below & (y < x)))


def _polar_from_sides(right: bool, left: bool) -> RealSet1D:
    out = RealSet1D.real_line()
    if right:
        out = out & RealSet1D.nonpos()
    if left:
        out = out & RealSet1D.nonneg()
    return out


def normal_operator_1d(h: FnModel, x: float, strict: bool = False, window: float = 10.0) -> RealSet1D:
    """Polar of the shifted (strict) sublevel set, sampled on a line grid."""
    right, left = _side_flags(h, x, _line_grid(h, x, window), strict)
    return _polar_from_sides(right, left)


def classical_subdiff_1d(h: FnModel, xbar: float, kind: str, sched: LimitSchedule | None = None,
                         window: float = 10.0) -> IntervalApprox:
    """Regular, limiting, horizon, Fenchel-Moreau, GP or quasiconvex subdifferential."""
    if h.dim != 1:
        raise UnsupportedDim("classical subdifferentials are computed for dim = 1 only")
    if kind not in KINDS:
        raise InvalidParams(f"unknown kind {kind!r}")
    xbar = float(xbar)
    if not math.isfinite(eval_extended(h, xbar)):
        raise PointOutsideDomain(f"{h.name}({xbar}) is not finite")
    sched = sched or SUBDIFF_SCHEDULE
    meta: dict = {"kind": kind, "evidence": "sampled", "t0": sched.t0, "shrink": sched.shrink,
                  "steps": sched.steps, "tail": sched.tail}
    if kind == "regular":
        out = _clip_sentinel(_regular_at(h, xbar, sched.tail_steps()))
    elif kind in ("limiting", "horizon"):
        lim, hor, info = _limiting_and_horizon(h, xbar, sched)
        meta.update(info)
        out = lim if kind == "limiting" else hor
    else:
        y = _line_grid(h, xbar, window)
        meta["grid_points"] = int(y.size)
        if kind == "fenchel_moreau":
            out = _clip_sentinel(_fenchel_moreau(h, xbar, y))
        elif kind == "greenberg_pierskalla":
            right, left = _side_flags(h, xbar, y, strict=True)
            if right and left:
                out = RealSet1D.empty()
            elif right:
                out = RealSet1D.interval(-INF, 0.0, False, False)
            elif left:
                out = RealSet1D.interval(0.0, INF, False, False)
            else:
                out = RealSet1D.real_line()
        else:
            gate = _polar_from_sides(*_side_flags(h, xbar, y, strict=True))
            meta["strict_sublevel_normal"] = str(gate)
            if gate == RealSet1D.point(0.0):
                out = RealSet1D.empty()
            else:
                out = _clip_sentinel(_fenchel_moreau(h, xbar, y)) & _polar_from_sides(*_side_flags(h, xbar, y, strict=False))
    known = h.annotations.get("known", {}).get(f"{kind}@{xbar:g}")
    if known is not None:
        meta["sampled"] = str(out)
        meta["evidence"] = "analytic"
        out = RealSet1D.parse(known)
    return IntervalApprox(out, out, 0.0, meta)


# ---------------------------------------------------------------------------
# F- and F_H-regularity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegularityVerdict:
    regular: bool
    direction: np.ndarray | None = None
    vacuous: bool = False
    details: tuple = ()

    @property
    def status(self) -> str:
        if not self.regular:
            return "CounterDirection"
        return "Regular (vacuous: empty subdifferential)" if self.vacuous else "Regular"


def f_regularity_check(h: FnModel, xbar, spec: SubdiffSpec, directions: Sequence | None = None,
                       variant: str = "hadamard", subdiff: RealSet1D | np.ndarray | None = None,
                       sched: LimitSchedule | None = None, deriv_tol: float = 1e-7) -> RegularityVerdict:
    """Nonnegative directional derivative must force sigma(subdiff; d) >= 0."""
    if variant not in ("dini", "hadamard"):
        raise InvalidParams("variant must be 'dini' or 'hadamard'")
    if subdiff is None:
        if h.dim != 1:
            raise UnsupportedDim("supply the subdifferential analytically when dim > 1")
        subdiff = strong_interval_1d(h, float(np.asarray(xbar).reshape(-1)[0]), spec).inner
    if directions is None:
        directions = [np.array([1.0]), np.array([-1.0])] if h.dim == 1 else list(np.vstack([np.eye(h.dim), -np.eye(h.dim)]))
    empty = isinstance(subdiff, RealSet1D) and subdiff.is_empty or (
        not isinstance(subdiff, RealSet1D) and np.asarray(subdiff).size == 0)
    details = []
    for d in directions:
        d = np.atleast_1d(np.asarray(d, dtype=float))
        if variant == "dini":
            der = dini_upper(h, xbar, d, sched)
        else:
            der = hadamard_upper(h, xbar, d, sched or LimitSchedule(direction_jitter=1.0))
        sig = support_value(subdiff, d)
        details.append({"d": d.tolist(), "derivative": der, "support": sig})
        if der >= -deriv_tol and not empty and sig < -TOL:
            return RegularityVerdict(False, d, False, tuple(details))
    return RegularityVerdict(True, None, empty, tuple(details))
