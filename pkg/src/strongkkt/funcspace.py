"""Extended-real-valued function models, directional derivatives, sublevel sets.

Functions are evaluated in batches: ``FnModel.evaluate`` takes an (N, dim)
array and returns N values in R U {+inf}.  The catalog hosts every function
used by the worked examples together with analytic annotations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from .convexsets import RealSet1D, SetOracle, as_realset
from .errors import DimensionMismatch, InvalidParams, UnknownCatalogId

INF = math.inf


@dataclass(frozen=True)
class LimitSchedule:
    """Geometric step sizes t_k = t0 * shrink**k used to approximate t -> 0+."""

    t0: float = 1e-2
    shrink: float = 0.5
    steps: int = 30
    direction_jitter: float = 0.0
    tail: int = 10

    def __post_init__(self):
        if not (self.t0 > 0 and 0 < self.shrink < 1 and self.steps >= 1):
            raise InvalidParams("schedule needs t0 > 0, 0 < shrink < 1, steps >= 1")
        if not self.t0 * self.shrink ** self.steps > 0:
            raise InvalidParams("schedule underflows to zero")
        if self.direction_jitter < 0 or self.tail < 1:
            raise InvalidParams("jitter must be >= 0 and tail >= 1")

    def steps_array(self) -> np.ndarray:
        return self.t0 * self.shrink ** np.arange(self.steps)

    def tail_steps(self) -> np.ndarray:
        return self.steps_array()[-min(self.tail, self.steps):]


@dataclass(frozen=True)
class FnModel:
    """f : R^dim -> R U {+inf} with a vectorised oracle.

    ``func`` receives an (N, dim) array and returns N values; ``domain`` is the
    effective domain when it is known in closed form.  ``annotations`` holds
    analytic facts (moduli, continuity flags, breakpoints, known sets).
    """

    dim: int
    func: Callable[[np.ndarray], np.ndarray]
    domain: SetOracle | None = None
    annotations: Mapping[str, Any] = field(default_factory=dict)
    name: str = "f"

    def evaluate(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1 and self.dim == 1:
            X = X.reshape(-1, 1)
        X = np.atleast_2d(X)
        if X.shape[1] != self.dim:
            raise DimensionMismatch(f"{self.name} expects dim {self.dim}, got {X.shape[1]}")
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            v = np.asarray(self.func(X), dtype=float).reshape(-1)
        v = np.where(np.isnan(v), INF, v)
        return v

    def __call__(self, x) -> float:
        return eval_extended(self, x)

    def annotation(self, key, default=None):
        return self.annotations.get(key, default)


def _as_point(f: FnModel, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float)).reshape(-1)
    if x.size != f.dim:
        raise DimensionMismatch(f"{f.name} expects dim {f.dim}, got {x.size}")
    return x


def eval_extended(f: FnModel, x) -> float:
    """f(x) in R U {+inf}."""
    return float(f.evaluate(_as_point(f, x)[None, :])[0])


def _quotients(f: FnModel, x: np.ndarray, D: np.ndarray, ts: np.ndarray, fx: float) -> np.ndarray:
    # D: (m, dim) directions, one per t (broadcast when m == 1)
    pts = x[None, :] + ts[:, None] * D
    vals = f.evaluate(pts)
    with np.errstate(invalid="ignore"):
        q = (vals - fx) / ts
    return np.where(np.isposinf(vals), INF, q)


def dini_upper(f: FnModel, x, d, sched: LimitSchedule | None = None) -> float:
    """Upper Dini derivative estimated as the max quotient over the schedule tail."""
    sched = sched or LimitSchedule()
    x = _as_point(f, x)
    d = _as_point(f, d)
    fx = eval_extended(f, x)
    if not math.isfinite(fx):
        raise DimensionMismatch("directional derivatives need f(x) finite")
    ts = sched.tail_steps()
    q = _quotients(f, x, np.broadcast_to(d, (ts.size, f.dim)), ts, fx)
    return float(np.max(q))


def _jitter_dirs(dim: int, n: int = 8) -> np.ndarray:
    if dim == 1:
        return np.array([[1.0], [-1.0], [0.5], [-0.5]])
    rng = np.random.default_rng(12345)
    U = rng.normal(size=(n, dim))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    return np.vstack([np.eye(dim), -np.eye(dim), U])


def hadamard_upper(f: FnModel, x, d, sched: LimitSchedule | None = None) -> float:
    """Upper Hadamard derivative: Dini quotients also over d' with |d'-d| <= jitter*t."""
    sched = sched or LimitSchedule(direction_jitter=1.0)
    x = _as_point(f, x)
    d = _as_point(f, d)
    best = dini_upper(f, x, d, sched)
    if sched.direction_jitter == 0:
        return best
    fx = eval_extended(f, x)
    ts = sched.tail_steps()
    for u in _jitter_dirs(f.dim):
        D = d[None, :] + sched.direction_jitter * ts[:, None] * u[None, :]
        best = max(best, float(np.max(_quotients(f, x, D, ts, fx))))
    return best


def sublevel_set(f: FnModel, x, strict: bool = False) -> SetOracle:
    """Membership oracle of {y : f(y) <= f(x)} (or < for the strict variant)."""
    fx = eval_extended(f, x)

    def pred(Y, f=f, fx=fx, strict=strict):
        v = f.evaluate(Y)
        return v < fx if strict else v <= fx

    return SetOracle(dim=f.dim, contains_fn=pred, name=f"S_{f.name}{'<' if strict else ''}({fx:g})",
                     meta={"level": fx, "strict": strict})


def sublevel_interval_1d(f: FnModel, x: float, strict: bool = False, window: float = 10.0,
                         n: int = 20001) -> RealSet1D:
    """Grid reconstruction of a 1-D sublevel set inside [x-window, x+window]."""
    y = np.unique(np.concatenate([np.linspace(x - window, x + window, n), [x],
                                  x + np.geomspace(1e-10, window, 64), x - np.geomspace(1e-10, window, 64)]))
    fx = eval_extended(f, x)
    v = f.evaluate(y)
    mask = v < fx if strict else v <= fx
    return _mask_to_set(y, mask)


def _mask_to_set(y: np.ndarray, mask: np.ndarray) -> RealSet1D:
    from .convexsets import Interval

    ivs = []
    i = 0
    n = y.size
    while i < n:
        if mask[i]:
            j = i
            while j + 1 < n and mask[j + 1]:
                j += 1
            ivs.append(Interval(y[i], y[j]))
            i = j + 1
        else:
            i += 1
    return RealSet1D(ivs)


@dataclass(frozen=True)
class IscVerdict:
    violation: bool
    y: np.ndarray | None = None
    x_seq: np.ndarray | None = None
    gap: float = 0.0
    note: str = "NoViolation is sampled evidence, not proof"

    @property
    def status(self) -> str:
        return "ViolationWitness" if self.violation else "NoViolation"


def sublevel_isc_probe(f: FnModel, xbar, V: SetOracle | RealSet1D | None = None, probe_grid=None,
                       sched: LimitSchedule | None = None, threshold: float = 1e-2) -> IscVerdict:
    """Refutation-oriented probe of inner semicontinuity of y -> S_f(y) at xbar.

    Sequences x_k -> xbar inside dom f are taken along the schedule in each
    probe direction.  A witness is reported when some y in S_f(xbar) n V keeps
    distance > threshold from S_f(x_k) n V over the whole schedule tail.
    """
    from .convexsets import sample_points

    sched = sched or LimitSchedule()
    xbar = _as_point(f, xbar)
    if V is None:
        V = SetOracle.ball(xbar, 1.0)
    V_or = V if isinstance(V, SetOracle) else SetOracle.from_interval(as_realset(V))
    if probe_grid is None:
        probe_grid = sample_points(V_or, xbar, n_uniform=1024, n_refined=32, radius=10.0, far_field=1e3)
    Y = np.asarray(probe_grid, dtype=float).reshape(-1, f.dim)
    Y = Y[V_or.contains(Y)]
    fY = f.evaluate(Y)
    fx = eval_extended(f, xbar)
    base = Y[fY <= fx]
    if base.shape[0] == 0:
        return IscVerdict(False)
    ts = sched.tail_steps()
    for u in _jitter_dirs(f.dim):
        xs = xbar[None, :] + ts[:, None] * u[None, :]
        fxs = f.evaluate(xs)
        if not np.all(np.isfinite(fxs)):
            continue
        # distance from each base point to S_f(x_k) n V for every tail x_k
        worst = np.zeros(base.shape[0]) + INF
        for xk, level in zip(xs, fxs):
            cand = Y[fY <= level]
            if cand.shape[0] == 0:
                dist = np.full(base.shape[0], INF)
            else:
                dist = np.min(np.linalg.norm(base[:, None, :] - cand[None, :, :], axis=2), axis=1)
            worst = np.minimum(worst, dist)
        i = int(np.argmax(worst))
        if worst[i] > threshold:
            return IscVerdict(True, base[i].copy(), xs.copy(), float(worst[i]), "witness")
    return IscVerdict(False)


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------


def _x(X):
    return X[:, 0]


def _pw(cond_vals, default=INF):
    """Piecewise helper: list of (mask, values) evaluated in order."""
    def inner(X):
        x = _x(X)
        out = np.full(x.shape, default, dtype=float)
        done = np.zeros(x.shape, dtype=bool)
        for cond, fn in cond_vals:
            m = cond(x) & ~done
            if m.any():
                with np.errstate(divide="ignore", invalid="ignore"):
                    out[m] = fn(x[m])
            done |= m
        return out
    return inner


def _dom(S: str) -> SetOracle:
    return SetOracle.from_interval(RealSet1D.parse(S))


def _cat_zero(p):
    dim = int(p.get("dim", 1))
    return FnModel(dim, lambda X: np.zeros(X.shape[0]), SetOracle.whole_space(dim),
                   {"lsc": True, "usc": True, "locally_lipschitz": True, "convex": True, "sq_modulus": 0.0,
                    "isc": True},
                   "zero")


def _cat_constant(p):
    dim = int(p.get("dim", 1))
    c = float(p.get("c", 1.0))
    return FnModel(dim, lambda X, c=c: np.full(X.shape[0], c), SetOracle.whole_space(dim),
                   {"lsc": True, "usc": True, "locally_lipschitz": True, "convex": True, "isc": True}, "constant")


def _cat_sqrt_abs(p):
    dim = int(p.get("dim", 1))
    return FnModel(dim, lambda X: np.sqrt(np.linalg.norm(X, axis=1)), SetOracle.whole_space(dim),
                   {"lsc": True, "usc": True, "quasiconvex": True, "isc": True, "sq_on_bounded": True,
                    "breakpoints": [0.0]}, "sqrt_abs")


def _cat_frac_abs(p):
    return FnModel(1, lambda X: _x(X) / (1.0 + np.abs(_x(X))), SetOracle.whole_space(1),
                   {"lsc": True, "usc": True, "quasiconvex": True, "strictly_quasiconvex": True,
                    "locally_lipschitz": True, "isc": True}, "frac_abs")


def _cat_recip_right(p):
    # 0 at 0, -1/x on (0,1], +inf otherwise
    f = _pw([(lambda x: x == 0.0, lambda x: 0.0 * x), (lambda x: (x > 0) & (x <= 1), lambda x: -1.0 / x)])
    return FnModel(1, f, _dom("[0,1]"),
                   {"lsc": True, "usc": True, "sq_modulus": 1.0, "isc_claimed": True,
                    "breakpoints": [0.0, 1.0],
                    "known": {"regular@0": "empty", "limiting@0": "empty", "horizon@0": "empty",
                              "fenchel_moreau@0": "empty"}},
                   "recip_right")


def _cat_recip_outside(p):
    # 0 at 0, +inf on (0,1], -1/x otherwise
    f = _pw([(lambda x: x == 0.0, lambda x: 0.0 * x), (lambda x: (x > 0) & (x <= 1), lambda x: np.full(x.shape, INF)),
             (lambda x: np.ones(x.shape, dtype=bool), lambda x: -1.0 / x)])
    dom = RealSet1D.parse("(-inf,0] U (1,inf)")
    return FnModel(1, f, SetOracle.from_interval(dom),
                   {"lsc": True, "breakpoints": [0.0, 1.0]}, "recip_outside")


def _cat_half_square_left(p):
    f = _pw([(lambda x: x >= 0, lambda x: 0.0 * x), (lambda x: x < 0, lambda x: 0.5 * x * x)])
    return FnModel(1, f, SetOracle.whole_space(1),
                   {"lsc": True, "usc": True, "locally_lipschitz": True, "quasiconvex": True, "breakpoints": [0.0]},
                   "half_square_left")


def _cat_half_square_right(p):
    f = _pw([(lambda x: x >= 0, lambda x: 0.5 * x * x), (lambda x: x < 0, lambda x: 0.0 * x)])
    return FnModel(1, f, SetOracle.whole_space(1),
                   {"lsc": True, "usc": True, "locally_lipschitz": True, "quasiconvex": True, "breakpoints": [0.0]},
                   "half_square_right")


def _cat_neg_part(p):
    f = _pw([(lambda x: x >= 0, lambda x: 0.0 * x), (lambda x: x < 0, lambda x: -x)])
    return FnModel(1, f, SetOracle.whole_space(1),
                   {"lsc": True, "usc": True, "locally_lipschitz": True, "convex": True, "quasiconvex": True,
                    "breakpoints": [0.0]}, "neg_part")


def _cat_jump_affine(p):
    f = _pw([(lambda x: x > 0, lambda x: 2.0 * x), (lambda x: x == 0, lambda x: 0.0 * x),
             (lambda x: x < 0, lambda x: -x - 1.0)])
    return FnModel(1, f, SetOracle.whole_space(1),
                   {"lsc": False, "usc": True, "quasiconvex": True, "breakpoints": [0.0],
                    "known": {"limiting@0": "{2}", "horizon@0": "{0}"}}, "jump_affine")


def _cat_half_square(p):
    dim = int(p.get("dim", 1))
    return FnModel(dim, lambda X: 0.5 * np.einsum("ij,ij->i", X, X), SetOracle.whole_space(dim),
                   {"lsc": True, "usc": True, "locally_lipschitz": True, "convex": True, "strongly_convex": 1.0,
                    "sq_modulus": 1.0, "isc": True, "gradient": lambda x: np.asarray(x, float)}, "half_square")


def _cat_square(p):
    dim = int(p.get("dim", 1))
    shift = float(p.get("shift", 0.0))
    return FnModel(dim, lambda X, s=shift: np.einsum("ij,ij->i", X, X) + s, SetOracle.whole_space(dim),
                   {"lsc": True, "usc": True, "locally_lipschitz": True, "convex": True, "strongly_convex": 2.0,
                    "sq_modulus": 2.0, "isc": True, "gradient": lambda x: 2.0 * np.asarray(x, float)}, "square")


def _cat_abs(p):
    return FnModel(1, lambda X: np.abs(_x(X)), SetOracle.whole_space(1),
                   {"lsc": True, "usc": True, "locally_lipschitz": True, "convex": True, "quasiconvex": True,
                    "isc": True, "breakpoints": [0.0]}, "abs")


def _cat_linear(p):
    c = np.atleast_1d(np.asarray(p.get("c", 1.0), dtype=float))
    dim = c.size
    return FnModel(dim, lambda X, c=c: X @ c, SetOracle.whole_space(dim),
                   {"lsc": True, "usc": True, "locally_lipschitz": True, "convex": True, "quasiconvex": True,
                    "alpha_pseudoconvex": 0.0, "gradient": lambda x, c=c: c.copy()}, "linear")


def _cat_neg_square(p):
    return FnModel(1, lambda X: -_x(X) ** 2, SetOracle.whole_space(1),
                   {"lsc": True, "usc": True, "locally_lipschitz": True, "gradient": lambda x: -2.0 * np.asarray(x, float)},
                   "neg_square")


def _cat_step_down(p):
    # -1 left of 0, 0 from 0 on: the sublevel map jumps at 0
    f = _pw([(lambda x: x < 0, lambda x: -np.ones_like(x)), (lambda x: x >= 0, lambda x: 0.0 * x)])
    return FnModel(1, f, SetOracle.whole_space(1), {"lsc": False, "usc": True, "breakpoints": [0.0]}, "step_down")


def _cat_sqrt_pos(p):
    return FnModel(1, lambda X: np.sqrt(np.maximum(_x(X), 0.0)), SetOracle.whole_space(1),
                   {"lsc": True, "usc": True, "quasiconvex": True, "breakpoints": [0.0]}, "sqrt_pos")


def _cat_sqrt_neg(p):
    return FnModel(1, lambda X: np.sqrt(np.maximum(-_x(X), 0.0)), SetOracle.whole_space(1),
                   {"lsc": True, "usc": True, "quasiconvex": True, "breakpoints": [0.0]}, "sqrt_neg")


def _cat_qfp(p):
    from .gencvx import QFPInstance, qfp_build

    return qfp_build(QFPInstance.from_params(p))


def _cat_shifted(p):
    """base(x) + offset for a 1-D catalog base; handy for strict-interior tests."""
    base = catalog_instantiate(p["base"], p.get("base_params", {}))
    off = float(p.get("offset", 0.0))
    ann = dict(base.annotations)
    ann.pop("known", None)
    return FnModel(base.dim, lambda X, b=base, o=off: b.evaluate(X) + o, base.domain, ann, f"{base.name}{off:+g}")


_CATALOG: dict[str, Callable[[Mapping], FnModel]] = {
    "zero": _cat_zero,
    "constant": _cat_constant,
    "sqrt_abs": _cat_sqrt_abs,
    "frac_abs": _cat_frac_abs,
    "recip_right": _cat_recip_right,
    "recip_outside": _cat_recip_outside,
    "half_square_left": _cat_half_square_left,
    "half_square_right": _cat_half_square_right,
    "neg_part": _cat_neg_part,
    "jump_affine": _cat_jump_affine,
    "half_square": _cat_half_square,
    "square": _cat_square,
    "abs": _cat_abs,
    "linear": _cat_linear,
    "neg_square": _cat_neg_square,
    "step_down": _cat_step_down,
    "sqrt_pos": _cat_sqrt_pos,
    "sqrt_neg": _cat_sqrt_neg,
    "qfp": _cat_qfp,
    "shifted": _cat_shifted,
}

_PARAMS: dict[str, set] = {
    "zero": {"dim"}, "constant": {"dim", "c"}, "sqrt_abs": {"dim"}, "half_square": {"dim"},
    "square": {"dim", "shift"}, "linear": {"c"}, "shifted": {"base", "base_params", "offset"},
    "qfp": {"A", "B", "a", "b", "alpha", "beta_const", "m", "M", "dim", "case", "box"},
}


def catalog_ids() -> list[str]:
    return sorted(_CATALOG)


def catalog_instantiate(id: str, params: Mapping | None = None) -> FnModel:
    """Build a catalog function by id."""
    params = dict(params or {})
    if id not in _CATALOG:
        raise UnknownCatalogId(f"unknown catalog id {id!r}; known: {', '.join(catalog_ids())}")
    allowed = _PARAMS.get(id, set())
    extra = set(params) - allowed
    if extra:
        raise InvalidParams(f"{id}: unexpected parameters {sorted(extra)}")
    if "dim" in params and (not isinstance(params["dim"], int) or params["dim"] < 1):
        raise InvalidParams(f"{id}: dim must be a positive integer")
    try:
        return _CATALOG[id](params)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidParams(f"{id}: {exc}") from exc


def pointwise_max(fs, name: str = "max") -> FnModel:
    """g = max_j g_j (the sup of a finite family)."""
    fs = list(fs)
    dim = fs[0].dim
    if any(f.dim != dim for f in fs):
        raise DimensionMismatch("family members must share a dimension")
    bps = sorted({b for f in fs for b in f.annotations.get("breakpoints", [])})
    return FnModel(dim, lambda X, fs=fs: np.max(np.vstack([f.evaluate(X) for f in fs]), axis=0), None,
                   {"breakpoints": bps}, name)
