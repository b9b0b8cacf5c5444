"""Pool-based query strategies and the active-learning loop.

Strategies return pool indices in the order they were picked.  Every tie
is broken towards the lower index, so each strategy is a pure function of
its inputs (and seed, for the random baseline).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .bounds import assemble_bound, true_risk_mc
from .complexity import rademacher
from .core import ExperimentConfig, Pool, SyntheticTask, make_builtin_task, make_rng, sample_unlabeled
from .hypotheses import Hypothesis, LossKind, OptimizerConfig, score, setting_row, template_for, train
from .ipm import (
    CLOSED_FORM_1D,
    KANTOROVICH,
    TOTAL_VARIATION,
    Grid,
    IpmEstimate,
    kantorovich_exact,
    tv_histogram,
    wasserstein_1d,
)


def _check_k(pool: Pool, k: int) -> np.ndarray:
    free = pool.unlabeled_indices()
    if k < 0 or k > len(free):
        raise ValueError(f"cannot select {k} of {len(free)} unlabeled points")
    return free


def select_random(pool: Pool, k: int, seed: int) -> np.ndarray:
    free = _check_k(pool, k)
    return make_rng(seed).choice(free, size=k, replace=False) if k else free[:0]


def uncertainty_scores(pool: Pool, h: Hypothesis) -> np.ndarray:
    """Per-point score, smaller meaning more informative.

    Classification settings use the margin ``|score(x)|``.  For regression
    the residual at an unlabeled point is unknown, so the negative distance
    to the nearest labeled point stands in (far from the labeled set means
    informative); with no labeled points every score is 0.
    """
    if h.row.loss in (LossKind.HINGE, LossKind.LOG):
        return np.abs(score(h, pool.points))
    labeled = pool.points[pool.labeled_mask]
    if len(labeled) == 0:
        return np.zeros(len(pool))
    d = np.linalg.norm(pool.points[:, None, :] - labeled[None, :, :], axis=2)
    return -d.min(axis=1)


def select_uncertainty(pool: Pool, k: int, h: Hypothesis) -> np.ndarray:
    free = _check_k(pool, k)
    s = uncertainty_scores(pool, h)[free]
    order = np.lexsort((free, s))
    return free[order[:k]]


class _PoolDistance:
    """IPM between the empirical pool measure and a subset of it."""

    def __init__(self, pool: Pool, generator: str, method: str | None, bins: int):
        self.points = pool.points
        self.generator = generator
        if generator == KANTOROVICH:
            if method is None:
                method = CLOSED_FORM_1D if pool.dim == 1 else "exact_transport"
            if method not in (CLOSED_FORM_1D, "exact_transport"):
                raise ValueError(f"{method!r} is not a Kantorovich estimator")
            if method == CLOSED_FORM_1D and pool.dim != 1:
                raise ValueError("closed_form_1d needs a one-dimensional pool")
        elif generator == TOTAL_VARIATION:
            if method not in (None, "histogram_tv"):
                raise ValueError(f"{method!r} cannot estimate TV between samples")
            self.grid = Grid.covering(pool.points, bins=bins)
        else:
            raise ValueError(f"unknown generator {generator!r}")
        self.method = method

    def estimate(self, idx) -> IpmEstimate:
        sub = self.points[np.asarray(idx, dtype=int)]
        if self.generator == TOTAL_VARIATION:
            return tv_histogram(sub, self.points, self.grid)
        if self.method == CLOSED_FORM_1D:
            return wasserstein_1d(sub[:, 0], self.points[:, 0])
        return kantorovich_exact(sub, self.points, cap=len(sub) + len(self.points))

    def __call__(self, idx) -> float:
        return self.estimate(idx).value


@dataclass(frozen=True)
class GreedyStep:
    candidates: np.ndarray
    objective: np.ndarray
    chosen: int


def _greedy(pool, k, objective, trace):
    free = list(_check_k(pool, k))
    chosen = list(pool.labeled_indices())
    picks = []
    for _ in range(k):
        values = np.array([objective(chosen + [c]) for c in free])
        j = int(np.argmin(values))
        if trace is not None:
            trace.append(GreedyStep(np.array(free), values, free[j]))
        pick = free.pop(j)
        chosen.append(pick)
        picks.append(pick)
    return np.array(picks, dtype=int)


def select_representative(pool: Pool, k: int, generator: str = KANTOROVICH, method: str | None = None,
                          bins: int = 10, trace: list | None = None) -> np.ndarray:
    """Greedy forward selection minimizing the IPM to the pool.

    At each step the unlabeled point whose addition to (labeled + picked)
    gives the smallest IPM to the whole pool is taken.  Pass a list as
    ``trace`` to collect the per-step objective values.
    """
    dist = _PoolDistance(pool, generator, method, bins)
    return _greedy(pool, k, dist, trace)


def _minmax(v: np.ndarray) -> np.ndarray:
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.zeros_like(v)
    return (v - lo) / (hi - lo)


def select_hybrid(pool: Pool, k: int, h: Hypothesis, lam: float, generator: str = KANTOROVICH,
                  method: str | None = None, bins: int = 10, trace: list | None = None) -> np.ndarray:
    """Greedy mix of informativeness and representativeness.

    Each step maximizes ``lam * info + (1 - lam) * rep`` over the remaining
    candidates, both min-max normalized over those candidates: ``info`` is
    the negated uncertainty score (fixed for the batch) and ``rep`` the
    negated IPM to the pool after adding the candidate.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lam must lie in [0, 1]")
    dist = _PoolDistance(pool, generator, method, bins)
    info = -uncertainty_scores(pool, h)
    free = list(_check_k(pool, k))
    chosen = list(pool.labeled_indices())
    picks = []
    for _ in range(k):
        rep = -np.array([dist(chosen + [c]) for c in free])
        combined = lam * _minmax(info[free]) + (1.0 - lam) * _minmax(rep)
        j = int(np.argmax(combined))
        if trace is not None:
            trace.append(GreedyStep(np.array(free), -combined, free[j]))
        pick = free.pop(j)
        chosen.append(pick)
        picks.append(pick)
    return np.array(picks, dtype=int)


# active-learning loop -------------------------------------------------------


CURVE_COLUMNS = ("round", "m", "strategy", "emp_risk", "true_risk", "ipm", "rhs")


@dataclass(frozen=True)
class CurveRecord:
    round: int
    m: int
    strategy: str
    empirical_risk: float
    true_risk_mc: float
    ipm: float
    rhs_total: float
    rad: float
    deviation: float

    def row(self) -> dict:
        return {"round": self.round, "m": self.m, "strategy": self.strategy, "emp_risk": self.empirical_risk,
                "true_risk": self.true_risk_mc, "ipm": self.ipm, "rhs": self.rhs_total}


def curve_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CURVE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in rec.row().items()})
    return buf.getvalue()


def select(pool: Pool, k: int, cfg: ExperimentConfig, h: Hypothesis, seed: int) -> np.ndarray:
    strat = cfg.strategy
    generator = strat.generator or h.row.generator
    if strat.kind == "random":
        return select_random(pool, k, seed)
    if strat.kind == "uncertainty":
        return select_uncertainty(pool, k, h)
    if strat.kind == "representative":
        return select_representative(pool, k, generator, strat.method, cfg.bins)
    return select_hybrid(pool, k, h, strat.lam, generator, strat.method, cfg.bins)


def al_loop(cfg: ExperimentConfig, task: SyntheticTask | None = None) -> list[CurveRecord]:
    """Run the query / label / retrain cycle over ``cfg.budgets``.

    ``budgets`` lists the cumulative labeled count after each round and
    must be strictly increasing.  Before the first round the strategy sees
    the untrained starting hypothesis.
    """
    task = task or make_builtin_task(cfg.task, cfg.seed)
    row = setting_row(cfg.setting)
    budgets = list(cfg.budgets)
    if any(b2 <= b1 for b1, b2 in zip(budgets, budgets[1:])):
        raise ValueError("budgets must be strictly increasing")
    if budgets and budgets[-1] > cfg.pool_size:
        raise ValueError("budget exceeds the pool size")
    streams = make_rng(cfg.seed, 0xA1)
    pool = sample_unlabeled(task, cfg.pool_size, int(streams.integers(2**63)))
    template = template_for(row.id, task, cfg.model, cfg.bias_bound, seed=int(streams.integers(2**63)))
    label_rng = make_rng(int(streams.integers(2**63)))
    opt = OptimizerConfig.from_dict(cfg.optimizer)
    distance = _PoolDistance(pool, row.generator, cfg.strategy.method, cfg.bins)
    h = template
    records = []
    for rnd, target in enumerate(budgets):
        k = target - int(pool.labeled_mask.sum())
        picked = select(pool, k, cfg, h, seed=int(streams.integers(2**63)))
        pool = pool.with_labels(picked, task.label(pool.points[picked], label_rng))
        labeled = pool.labeled()
        h = train(template, labeled, opt)
        ipm_est = distance.estimate(pool.labeled_indices())
        rad = rademacher(template, labeled, cfg.num_sigma, cfg.inner, int(streams.integers(2**63)))
        tr = true_risk_mc(h, task, cfg.true_risk_n, int(streams.integers(2**63)))
        report = assemble_bound(h, labeled, ipm_est, rad, cfg.delta, cfg.c_const, tr)
        records.append(CurveRecord(rnd, len(labeled), cfg.strategy.kind, report.empirical_risk,
                                   report.true_risk_mc, report.ipm_term.value, report.rhs_total,
                                   rad.value, report.deviation_term))
    return records

