"""Empirical integral probability metrics.

Two generator classes are supported: the Kantorovich class (1-Lipschitz
functions, giving the Wasserstein-1 distance under the Euclidean ground
metric) and the total-variation class (functions bounded by 1 in sup
norm, giving ``sum |p - q|``, which ranges over [0, 2]).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

# POT probes every installed autodiff backend on import; none is needed here.
for _backend in ("TENSORFLOW", "PYTORCH", "JAX", "CUPY"):
    os.environ.setdefault(f"POT_BACKEND_DISABLE_{_backend}", "1")
import ot  # noqa: E402

KANTOROVICH = "kantorovich"
TOTAL_VARIATION = "total_variation"

CLOSED_FORM_1D = "closed_form_1d"
EXACT_TRANSPORT = "exact_transport"
HISTOGRAM_TV = "histogram_tv"
DISCRETE_TV = "discrete_tv"

_LEGAL = {
    CLOSED_FORM_1D: KANTOROVICH,
    EXACT_TRANSPORT: KANTOROVICH,
    HISTOGRAM_TV: TOTAL_VARIATION,
    DISCRETE_TV: TOTAL_VARIATION,
}

WEIGHT_TOL = 1e-12
EXACT_CAP = 512


@dataclass(frozen=True)
class IpmEstimate:
    value: float
    generator: str
    method: str
    sizes: tuple[int, int]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if _LEGAL.get(self.method) != self.generator:
            raise ValueError(f"method {self.method!r} cannot estimate the {self.generator!r} metric")
        if not self.value >= 0:
            raise ValueError(f"IPM value must be nonnegative, got {self.value}")

    def to_dict(self) -> dict:
        return {
            "generator": self.generator,
            "method": self.method,
            "value": self.value,
            "sizes": list(self.sizes),
            **({"meta": self.meta} if self.meta else {}),
        }


def kantorovich_1d(a, b) -> IpmEstimate:
    """W1 between two equal-size, equal-weight samples on the line.

    The optimal plan matches order statistics, so the distance is the mean
    absolute gap between the sorted samples.
    """
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.size == 0 or b.size == 0:
        raise ValueError("empty sample")
    if a.size != b.size:
        raise ValueError(f"sizes differ: {a.size} vs {b.size}")
    gap = np.abs(np.sort(a, kind="stable") - np.sort(b, kind="stable"))
    return IpmEstimate(float(np.mean(gap)), KANTOROVICH, CLOSED_FORM_1D, (a.size, b.size))


def wasserstein_1d(a, b, wa=None, wb=None) -> IpmEstimate:
    """W1 between weighted samples on the line, as the L1 distance of CDFs.

    Sizes may differ; weights default to uniform.
    """
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.size == 0 or b.size == 0:
        raise ValueError("empty sample")
    wa = _check_weights(np.full(a.size, 1.0 / a.size) if wa is None else wa, a.size)
    wb = _check_weights(np.full(b.size, 1.0 / b.size) if wb is None else wb, b.size)
    support = np.concatenate([a, b])
    mass = np.concatenate([wa, -wb])
    order = np.argsort(support, kind="stable")
    support, mass = support[order], mass[order]
    cdf_gap = np.cumsum(mass)[:-1]
    value = float(np.sum(np.abs(cdf_gap) * np.diff(support)))
    return IpmEstimate(value, KANTOROVICH, CLOSED_FORM_1D, (a.size, b.size))


def _check_weights(w, n: int) -> np.ndarray:
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.size != n:
        raise ValueError("one weight per point required")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    if abs(w.sum() - 1.0) > WEIGHT_TOL:
        raise ValueError(f"weights sum to {w.sum()!r}, not 1")
    return w


def _as_points(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    return x


def kantorovich_exact(a, b, wa=None, wb=None, cap: int = EXACT_CAP) -> IpmEstimate:
    """Optimal transport cost between two weighted point sets in R^n.

    Solved exactly by network simplex on the complete bipartite graph with
    Euclidean edge costs.  ``cap`` bounds the total number of points.
    """
    a, b = _as_points(a), _as_points(b)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("empty sample")
    if a.shape[1] != b.shape[1]:
        raise ValueError("point sets live in different dimensions")
    if len(a) + len(b) > cap:
        raise ValueError(f"{len(a) + len(b)} points exceed the exact-solver cap of {cap}")
    wa = _check_weights(np.full(len(a), 1.0 / len(a)) if wa is None else wa, len(a))
    wb = _check_weights(np.full(len(b), 1.0 / len(b)) if wb is None else wb, len(b))
    cost = ot.dist(a, b, metric="euclidean")
    plan, log = ot.emd(wa, wb, cost, numItermax=1_000_000, log=True)
    if log["warning"] is not None:
        raise RuntimeError(f"transport solver did not converge: {log['warning']}")
    value = max(float(np.sum(plan * cost)), 0.0)
    return IpmEstimate(value, KANTOROVICH, EXACT_TRANSPORT, (len(a), len(b)))


def tv_discrete(p, q) -> IpmEstimate:
    """Total variation IPM between probability vectors: ``sum |p_i - q_i|``."""
    p = np.asarray(p, dtype=float).reshape(-1)
    q = np.asarray(q, dtype=float).reshape(-1)
    if p.size != q.size:
        raise ValueError(f"lengths differ: {p.size} vs {q.size}")
    if p.size == 0:
        raise ValueError("empty distribution")
    for v in (p, q):
        if np.any(v < 0) or abs(v.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError("inputs must be probability vectors")
    return IpmEstimate(float(np.sum(np.abs(p - q))), TOTAL_VARIATION, DISCRETE_TV, (p.size, q.size))


@dataclass(frozen=True)
class Grid:
    """Axis-aligned box split into ``bins`` equal cells per axis."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    bins: tuple[int, ...]

    def __post_init__(self):
        if not (len(self.lo) == len(self.hi) == len(self.bins)):
            raise ValueError("grid dimensions disagree")
        if any(b < 1 for b in self.bins):
            raise ValueError("need at least one bin per axis")
        if any(not h > l for l, h in zip(self.lo, self.hi)):
            raise ValueError("degenerate bounding box")

    @classmethod
    def covering(cls, *samples, bins: int | tuple[int, ...] = 10, pad: float = 0.0) -> "Grid":
        pts = np.concatenate([_as_points(s) for s in samples])
        lo, hi = pts.min(axis=0) - pad, pts.max(axis=0) + pad
        widen = hi <= lo
        lo, hi = np.where(widen, lo - 0.5, lo), np.where(widen, hi + 0.5, hi)
        nb = (bins,) * pts.shape[1] if isinstance(bins, int) else tuple(bins)
        return cls(tuple(map(float, lo)), tuple(map(float, hi)), nb)

    def histogram(self, x: np.ndarray) -> np.ndarray:
        x = _as_points(x)
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        if np.any(x < lo - 1e-12) or np.any(x > hi + 1e-12):
            raise ValueError("sample falls outside the grid box")
        nb = np.asarray(self.bins)
        cell = np.floor((x - lo) / (hi - lo) * nb).astype(int)
        cell = np.clip(cell, 0, nb - 1)
        flat = np.ravel_multi_index(cell.T, self.bins)
        counts = np.bincount(flat, minlength=int(np.prod(nb))).astype(float)
        return counts / counts.sum()

    def to_dict(self) -> dict:
        return {"lo": list(self.lo), "hi": list(self.hi), "bins": list(self.bins)}


def tv_histogram(a, b, grid: Grid | int = 10) -> IpmEstimate:
    """Total-variation estimate from histograms of two samples on a shared grid.

    This is a plug-in estimator whose value depends on the grid; an integer
    ``grid`` means that many bins per axis over the joint bounding box.
    """
    a, b = _as_points(a), _as_points(b)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("empty sample")
    if isinstance(grid, int):
        grid = Grid.covering(a, b, bins=grid)
    tv = tv_discrete(grid.histogram(a), grid.histogram(b))
    return IpmEstimate(tv.value, TOTAL_VARIATION, HISTOGRAM_TV, (len(a), len(b)), {"grid": grid.to_dict()})


def kantorovich(a, b, method: str | None = None) -> IpmEstimate:
    """Uniform-weight W1 between two samples, choosing a solver by dimension."""
    a, b = _as_points(a), _as_points(b)
    if method is None:
        method = CLOSED_FORM_1D if a.shape[1] == 1 else EXACT_TRANSPORT
    if method == CLOSED_FORM_1D:
        if a.shape[1] != 1:
            raise ValueError("closed_form_1d needs one-dimensional samples")
        if len(a) == len(b):
            return kantorovich_1d(a, b)
        return wasserstein_1d(a, b)
    if method == EXACT_TRANSPORT:
        return kantorovich_exact(a, b)
    raise ValueError(f"{method!r} is not a Kantorovich estimator")


def estimate(a, b, generator: str, method: str | None = None, bins: int | Grid = 10) -> IpmEstimate:
    """Plug-in IPM between the empirical measures of two samples."""
    if generator == KANTOROVICH:
        return kantorovich(a, b, method)
    if generator == TOTAL_VARIATION:
        if method not in (None, HISTOGRAM_TV):
            raise ValueError(f"{method!r} cannot estimate TV between samples")
        return tv_histogram(a, b, bins)
    raise ValueError(f"unknown generator {generator!r}")
