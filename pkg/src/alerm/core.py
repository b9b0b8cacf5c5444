"""Data model, builtin synthetic tasks and experiment configuration.

All randomness flows through :func:`make_rng`, which wraps numpy's PCG64
bit generator.  PCG64 is fixed as the algorithm of record; a seed is a
non-negative integer below 2**64, and derived streams are keyed by
``(seed, counter)`` so results never depend on evaluation order.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

NORM_TOL = 1e-12

REGRESSION = "real"
LABELS_PM1 = "pm1"
LABELS_01 = "01"


def make_rng(seed: int, *counters: int) -> np.random.Generator:
    """PCG64 generator for ``seed``, optionally keyed by stream counters."""
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must lie in [0, 2**64), got {seed}")
    if counters:
        return np.random.Generator(np.random.PCG64([seed, *counters]))
    return np.random.Generator(np.random.PCG64(seed))


def clip_to_ball(x: np.ndarray, radius: float) -> np.ndarray:
    """Radially shrink rows of ``x`` whose Euclidean norm exceeds ``radius``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    norms = np.linalg.norm(x, axis=1)
    scale = np.ones_like(norms)
    over = norms > radius
    scale[over] = radius / norms[over]
    return x * scale[:, None]


@dataclass(frozen=True)
class LabeledSample:
    x: np.ndarray
    y: float


@dataclass(frozen=True, eq=False)
class Pool:
    """Points in R^n with optional labels.

    Unlabeled rows carry ``nan`` in ``labels``.  ``mx`` bounds the norm of
    every stored point and ``my`` bounds the absolute value of any label.
    """

    points: np.ndarray
    labels: np.ndarray
    mx: float
    my: float

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.size == 0:
            pts = pts.reshape(0, pts.shape[-1] if pts.ndim == 2 else 1)
        labels = np.asarray(self.labels, dtype=float).reshape(-1)
        if labels.shape[0] != pts.shape[0]:
            raise ValueError("labels must have one entry per point")
        if self.mx < 0 or self.my < 0:
            raise ValueError("domain and label bounds must be nonnegative")
        if pts.shape[0] and np.max(np.linalg.norm(pts, axis=1)) > self.mx + NORM_TOL:
            raise ValueError(f"point outside the ball of radius M_X={self.mx}")
        present = labels[~np.isnan(labels)]
        if present.size and np.max(np.abs(present)) > self.my + NORM_TOL:
            raise ValueError(f"label exceeds M_Y={self.my}")
        pts.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def labeled_mask(self) -> np.ndarray:
        return ~np.isnan(self.labels)

    @property
    def is_fully_labeled(self) -> bool:
        return bool(np.all(self.labeled_mask))

    def labeled_indices(self) -> np.ndarray:
        return np.flatnonzero(self.labeled_mask)

    def unlabeled_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.labeled_mask)

    def labeled(self) -> "Pool":
        """Sub-pool of labeled rows, in index order."""
        mask = self.labeled_mask
        return Pool(self.points[mask], self.labels[mask], self.mx, self.my)

    def subset(self, indices: Sequence[int]) -> "Pool":
        idx = np.asarray(indices, dtype=int)
        return Pool(self.points[idx], self.labels[idx], self.mx, self.my)

    def with_labels(self, indices: Sequence[int], values: Sequence[float]) -> "Pool":
        labels = self.labels.copy()
        labels[np.asarray(indices, dtype=int)] = np.asarray(values, dtype=float)
        return Pool(self.points, labels, self.mx, self.my)

    def samples(self) -> list[LabeledSample]:
        return [LabeledSample(x, float(y)) for x, y in zip(self.points, self.labels)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"x{i + 1}" for i in range(self.dim)] + ["y"])
        for x, y in zip(self.points, self.labels):
            writer.writerow([repr(float(v)) for v in x] + ["" if np.isnan(y) else repr(float(y))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, mx: float | None = None, my: float | None = None) -> "Pool":
        """Parse ``x1,...,xn,y`` CSV; empty ``y`` marks an unlabeled row.

        Missing bounds default to the tightest values covering the data.
        """
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty CSV")
        header = [h.strip() for h in rows[0]]
        if not header or header[-1] != "y" or header[:-1] != [f"x{i + 1}" for i in range(len(header) - 1)]:
            raise ValueError(f"CSV header must be x1,...,xn,y; got {','.join(header)}")
        dim = len(header) - 1
        pts, labels = [], []
        for lineno, row in enumerate(rows[1:], start=2):
            if not row:
                continue
            if len(row) != dim + 1:
                raise ValueError(f"line {lineno}: expected {dim + 1} fields")
            pts.append([float(v) for v in row[:-1]])
            labels.append(float(row[-1]) if row[-1].strip() else math.nan)
        pts_arr = np.asarray(pts, dtype=float).reshape(-1, dim)
        lab_arr = np.asarray(labels, dtype=float)
        if mx is None:
            mx = float(np.max(np.linalg.norm(pts_arr, axis=1))) if len(pts_arr) else 0.0
        if my is None:
            present = lab_arr[~np.isnan(lab_arr)]
            my = float(np.max(np.abs(present))) if present.size else 0.0
        return cls(pts_arr, lab_arr, mx, my)

    @classmethod
    def read_csv(cls, path: str | Path, mx: float | None = None, my: float | None = None) -> "Pool":
        return cls.from_csv(Path(path).read_text(), mx=mx, my=my)


Marginal = Callable[[np.random.Generator, int], np.ndarray]
Conditional = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class SyntheticTask:
    """A distribution P_X * P_{Y|X} with known bounds.

    ``marginal(rng, m)`` returns an ``(m, dim)`` array; its output is
    clipped to the ball of radius ``mx`` before use.  ``conditional(X)``
    is the deterministic labeling rule.  ``noise`` is the label-noise
    level (Gaussian std for regression, flip probability otherwise),
    zero by default.
    """

    name: str
    dim: int
    marginal: Marginal
    conditional: Conditional
    mx: float
    my: float
    label_space: str = REGRESSION
    noise: float = 0.0
    seed: int = 0
    description: str = ""

    def draw_x(self, rng: np.random.Generator, m: int) -> np.ndarray:
        x = np.asarray(self.marginal(rng, m), dtype=float).reshape(m, self.dim)
        return clip_to_ball(x, self.mx)

    def label(self, x: np.ndarray, rng: np.random.Generator | None = None) -> np.ndarray:
        y = np.asarray(self.conditional(np.atleast_2d(x)), dtype=float).reshape(-1)
        if self.noise > 0:
            if rng is None:
                raise ValueError("label noise needs a generator")
            if self.label_space == REGRESSION:
                y = np.clip(y + self.noise * rng.standard_normal(y.shape), -self.my, self.my)
            else:
                flip = rng.random(y.shape) < self.noise
                if self.label_space == LABELS_PM1:
                    y = np.where(flip, -y, y)
                else:
                    y = np.where(flip, 1.0 - y, y)
        return y


def sample_iid(task: SyntheticTask, m: int, seed: int) -> Pool:
    """Draw ``m`` labeled points from ``task``; a pure function of its arguments."""
    if m < 1:
        raise ValueError(f"sample size must be >= 1, got {m}")
    rng = make_rng(seed)
    x = task.draw_x(rng, m)
    y = task.label(x, rng)
    return Pool(x, y, task.mx, task.my)


def sample_unlabeled(task: SyntheticTask, m: int, seed: int) -> Pool:
    if m < 1:
        raise ValueError(f"sample size must be >= 1, got {m}")
    x = task.draw_x(make_rng(seed), m)
    return Pool(x, np.full(m, np.nan), task.mx, task.my)


def sample_region(task: SyntheticTask, m: int, seed: int, lo: float, hi: float) -> Pool:
    """Labeled draws from the marginal conditioned on ``lo <= x1 <= hi``.

    Rejection sampling; used as a biased query distribution P_Q.
    """
    if m < 1:
        raise ValueError(f"sample size must be >= 1, got {m}")
    if not lo < hi:
        raise ValueError("empty region")
    rng = make_rng(seed)
    kept: list[np.ndarray] = []
    count = 0
    for _ in range(10_000):
        x = task.draw_x(rng, max(4 * m, 64))
        x = x[(x[:, 0] >= lo) & (x[:, 0] <= hi)]
        kept.append(x)
        count += len(x)
        if count >= m:
            break
    else:
        raise RuntimeError("region has negligible mass under the marginal")
    x = np.concatenate(kept)[:m]
    return Pool(x, task.label(x, rng), task.mx, task.my)


# builtin registry ---------------------------------------------------------


def _uniform_interval(lo: float, hi: float) -> Marginal:
    return lambda rng, m: rng.uniform(lo, hi, size=(m, 1))


def _gaussian_clusters(centers: np.ndarray, std: float, weights: Sequence[float]) -> Marginal:
    centers = np.asarray(centers, dtype=float)
    p = np.asarray(weights, dtype=float)

    def draw(rng: np.random.Generator, m: int) -> np.ndarray:
        which = rng.choice(len(centers), size=m, p=p)
        return centers[which] + std * rng.standard_normal((m, centers.shape[1]))

    return draw


def _sign_first(x: np.ndarray) -> np.ndarray:
    return np.where(x[:, 0] >= 0, 1.0, -1.0)


_MIX2D_CENTERS = np.array([[-1.5, 0.0], [1.5, 0.0]])


def _builtin(name: str) -> SyntheticTask:
    if name == "lin1d":
        return SyntheticTask(
            "lin1d", 1, _uniform_interval(-1.0, 1.0), lambda x: 0.5 * x[:, 0],
            mx=1.0, my=0.5, description="x ~ U[-1,1], y = 0.5 x",
        )
    if name == "lin2d":
        w = np.array([0.3, -0.4])
        return SyntheticTask(
            "lin2d", 2, lambda rng, m: rng.uniform(-1 / math.sqrt(2), 1 / math.sqrt(2), size=(m, 2)),
            lambda x: x @ w, mx=1.0, my=0.5,
            description="x ~ U[-1/sqrt2, 1/sqrt2]^2, y = 0.3 x1 - 0.4 x2",
        )
    if name == "sign1d":
        return SyntheticTask(
            "sign1d", 1, _uniform_interval(-1.0, 1.0), _sign_first,
            mx=1.0, my=1.0, label_space=LABELS_PM1, description="x ~ U[-1,1], y = sign(x) in {-1,+1}",
        )
    if name == "mix2d":
        return SyntheticTask(
            "mix2d", 2, _gaussian_clusters(_MIX2D_CENTERS, 0.5, [0.5, 0.5]), _sign_first,
            mx=3.0, my=1.0, label_space=LABELS_PM1,
            description="equal mixture of N((+-1.5,0), 0.25 I) clipped to radius 3; y = +1 on the x1 >= 0 cluster side, else -1",
        )
    if name == "mix2d01":
        return SyntheticTask(
            "mix2d01", 2, _gaussian_clusters(_MIX2D_CENTERS, 0.5, [0.5, 0.5]),
            lambda x: (x[:, 0] >= 0).astype(float),
            mx=3.0, my=1.0, label_space=LABELS_01, description="mix2d with labels in {0,1}",
        )
    if name == "bimodal1d":
        return SyntheticTask(
            "bimodal1d", 1, _gaussian_clusters(np.array([[-0.7], [0.7]]), 0.1, [0.5, 0.5]), _sign_first,
            mx=1.0, my=1.0, label_space=LABELS_PM1,
            description="equal mixture of N(-0.7, 0.01) and N(0.7, 0.01) clipped to [-1,1]; y = sign(x)",
        )
    raise KeyError(f"unknown task {name!r}; known: {', '.join(BUILTIN_TASKS)}")


BUILTIN_TASKS = ("lin1d", "lin2d", "sign1d", "mix2d", "mix2d01", "bimodal1d")


def make_builtin_task(name: str, seed: int = 0) -> SyntheticTask:
    return replace(_builtin(name), seed=seed)


# configuration ------------------------------------------------------------


@dataclass(frozen=True)
class StrategyConfig:
    kind: str = "random"
    lam: float = 0.5
    generator: str | None = None
    method: str | None = None

    def __post_init__(self):
        if self.kind not in ("random", "uncertainty", "representative", "hybrid"):
            raise ValueError(f"unknown strategy {self.kind!r}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("hybrid weight must lie in [0, 1]")
        if self.generator not in (None, "kantorovich", "total_variation"):
            raise ValueError(f"unknown generator {self.generator!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one experiment; see docs/config.md for the JSON schema."""

    task: str = "lin1d"
    setting: str = "LIN_L1"
    delta: float = 0.1
    c_const: float = 1.0
    budgets: tuple[int, ...] = (10,)
    strategy: StrategyConfig = field(default_factory=StrategyConfig)
    mc_sizes: dict = field(default_factory=lambda: {"num_sigma": 256, "true_risk": 100_000})
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    pool_size: int = 200
    query_size: int = 20
    query_distribution: str = "marginal"
    query_region: tuple[float, float] = (0.0, 1.0)
    inner: str = "projected_ascent"
    bins: int = 10
    bias_bound: float = 1.0
    model: dict = field(default_factory=dict)
    optimizer: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.c_const <= 0:
            raise ValueError("c_const must be positive")
        for key in ("num_sigma", "true_risk"):
            if int(self.mc_sizes.get(key, 1)) < 1:
                raise ValueError(f"mc_sizes.{key} must be >= 1")
        if self.pool_size < 1 or self.query_size < 1 or self.bins < 1:
            raise ValueError("sample counts must be >= 1")
        if any(b < 1 for b in self.budgets):
            raise ValueError("budgets must be >= 1")
        if self.query_distribution not in ("marginal", "biased"):
            raise ValueError(f"unknown query distribution {self.query_distribution!r}")

    @property
    def num_sigma(self) -> int:
        return int(self.mc_sizes.get("num_sigma", 256))

    @property
    def true_risk_n(self) -> int:
        return int(self.mc_sizes.get("true_risk", 100_000))

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        kwargs = dict(doc)
        if "strategy" in kwargs:
            strat = kwargs["strategy"]
            if isinstance(strat, str):
                strat = {"kind": strat}
            kwargs["strategy"] = StrategyConfig(**strat)
        if "mc_sizes" in kwargs:
            kwargs["mc_sizes"] = {"num_sigma": 256, "true_risk": 100_000, **kwargs["mc_sizes"]}
        for key in ("budgets", "query_region"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))
