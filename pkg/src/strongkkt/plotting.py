"""Byte-deterministic SVG figures of 1-D results."""

from __future__ import annotations

import math
from typing import Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .convexsets import RealSet1D  # noqa: E402
from .funcspace import FnModel  # noqa: E402

RAY = 3.0


def _clip_interval(lo: float, hi: float, a: float, b: float) -> tuple[float, float]:
    return max(lo, a), min(hi, b)


def _band(ax, S: RealSet1D, y: float, a: float, b: float, color: str, label: str) -> None:
    ax.hlines(y, a, b, color="0.85", lw=1)
    if S is None:
        return
    if S.is_empty:
        ax.text(0.5 * (a + b), y + 0.12, f"{label} = ∅", ha="center", va="bottom", fontsize=8, color=color)
        return
    for iv in S.intervals:
        lo, hi = _clip_interval(iv.lo, iv.hi, a, b)
        if lo > hi:
            continue
        if lo == hi:
            ax.plot([lo], [y], "o", color=color, ms=4)
        else:
            ax.plot([lo, hi], [y, y], color=color, lw=4, solid_capstyle="butt")
        for end, closed, finite in ((lo, iv.lo_closed, math.isfinite(iv.lo)), (hi, iv.hi_closed, math.isfinite(iv.hi))):
            if finite and a <= end <= b and lo != hi:
                ax.plot([end], [y], "o", ms=4, color=color, mfc=color if closed else "white")
    ax.text(a, y + 0.12, f"{label}: {S}", fontsize=8, color=color, va="bottom")


def _rays(ax, N: RealSet1D, x: float, y: float, color: str) -> None:
    if N is None:
        return
    for s in (1.0, -1.0):
        if N.contains(s):
            ax.annotate("", xy=(x + s * RAY * 0.3, y), xytext=(x, y),
                        arrowprops={"arrowstyle": "->", "color": color, "lw": 1.5})
    ax.plot([x], [y], "o", color=color, ms=3)
    ax.text(x, y - 0.3, f"N: {N}", fontsize=8, color=color, ha="center", va="top")


def emit_plot(result: Mapping, path: str) -> str:
    """Write an SVG with the graph of h, its sublevel band, a subdifferential band and normal rays.

    result keys: function (FnModel), xbar, window, and optional RealSet1D entries
    sublevel, subdiff, normal_cone, feasible, plus title.
    """
    plt.rcParams["svg.hashsalt"] = "strongkkt"
    plt.rcParams["svg.fonttype"] = "path"
    x = float(result.get("xbar", 0.0))
    w = float(result.get("window", 2.0))
    a, b = x - w, x + w
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.0, 5.0), gridspec_kw={"height_ratios": [3, 2]})
    h: FnModel | None = result.get("function")
    if h is not None:
        t = np.linspace(a, b, 801)
        v = h.evaluate(t[:, None])
        v = np.where(np.isfinite(v), v, np.nan)
        ax1.plot(t, v, color="k", lw=1.2)
        fx = h.evaluate(np.array([[x]]))[0]
        if np.isfinite(fx):
            ax1.plot([x], [fx], "o", color="tab:red", ms=4)
    for key, color in (("sublevel", "tab:blue"), ("feasible", "tab:green")):
        S = result.get(key)
        if S is None:
            continue
        for iv in S.intervals:
            lo, hi = _clip_interval(iv.lo, iv.hi, a, b)
            if lo <= hi:
                ax1.axvspan(lo, hi if hi > lo else lo + 1e-3 * w, color=color, alpha=0.15, lw=0)
    ax1.set_xlim(a, b)
    ax1.set_title(str(result.get("title", "")), fontsize=9)
    sub = result.get("subdiff")
    lo = min([-RAY] + ([iv.lo for iv in sub.intervals if math.isfinite(iv.lo)] if sub is not None else []))
    hi = max([RAY] + ([iv.hi for iv in sub.intervals if math.isfinite(iv.hi)] if sub is not None else []))
    _band(ax2, sub, 1.0, lo - 0.5, hi + 0.5, "tab:purple", result.get("subdiff_label", "subdifferential"))
    _rays(ax2, result.get("normal_cone"), 0.0, 0.0, "tab:orange")
    ax2.set_ylim(-1.0, 1.6)
    ax2.set_yticks([])
    ax2.set_xlim(lo - 0.5, hi + 0.5)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return path
