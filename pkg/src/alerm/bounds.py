"""Assembly and Monte-Carlo validation of the active-learning risk bound

    R(h) <= R_hat(h; D_m) + d_F(P_X, P_Q) + 2 Rad(loss o H o D_m) + c sqrt(2 log(4/delta) / m)

where D_m is the queried sample (drawn from P_Q and labeled by the true
conditional) and d_F is the IPM whose generator contains the loss class.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .complexity import RadEstimate, rademacher
from .core import ExperimentConfig, Pool, SyntheticTask, make_builtin_task, make_rng, sample_iid, sample_region
from .hypotheses import Hypothesis, OptimizerConfig, pointwise_loss, setting_row, template_for, train
from .ipm import IpmEstimate, estimate

log = logging.getLogger(__name__)

RAD_CAVEAT = ("rad_term is a Monte-Carlo estimate whose inner supremum is approximated from "
              "below, so rhs_total may understate the bound")


def empirical_risk(h: Hypothesis, data: Pool) -> float:
    if len(data) == 0:
        raise ValueError("empty sample")
    if not data.is_fully_labeled:
        raise ValueError("empirical risk needs labeled data")
    return float(np.mean(pointwise_loss(h, data.points, data.labels)))


def true_risk_mc(h: Hypothesis, task: SyntheticTask, n: int = 100_000, seed: int = 0) -> tuple[float, float]:
    """Mean loss over ``n`` fresh draws and its 95% normal CI half-width."""
    if n < 2:
        raise ValueError("need at least two draws")
    sample = sample_iid(task, n, seed)
    losses = pointwise_loss(h, sample.points, sample.labels)
    return float(np.mean(losses)), float(1.96 * np.std(losses, ddof=1) / math.sqrt(n))


def deviation_term(c: float, delta: float, m: int) -> float:
    return c * math.sqrt(2.0 * math.log(4.0 / delta) / m)


@dataclass(frozen=True)
class BoundReport:
    empirical_risk: float
    ipm_term: IpmEstimate
    rad_term: RadEstimate
    deviation_term: float
    rhs_total: float
    m: int
    delta: float
    c: float
    true_risk_mc: float | None = None
    true_risk_ci: float | None = None
    notes: tuple[str, ...] = field(default=(RAD_CAVEAT,))

    @property
    def holds(self) -> bool | None:
        if self.true_risk_mc is None:
            return None
        return self.rhs_total >= self.true_risk_mc

    @property
    def passive_rhs(self) -> float:
        """The same bound without the IPM term (the i.i.d. form)."""
        return self.empirical_risk + 2.0 * self.rad_term.value + self.deviation_term

    def to_dict(self) -> dict:
        return {
            "empirical_risk": self.empirical_risk,
            "ipm_term": self.ipm_term.to_dict(),
            "rad_term": self.rad_term.to_dict(),
            "deviation_term": self.deviation_term,
            "rhs_total": self.rhs_total,
            "true_risk_mc": self.true_risk_mc,
            "true_risk_ci": self.true_risk_ci,
            "m": self.m,
            "delta": self.delta,
            "c": self.c,
            "holds": self.holds,
            "notes": list(self.notes),
        }


def assemble_bound(h: Hypothesis, data: Pool, ipm_term: IpmEstimate, rad_term: RadEstimate,
                   delta: float, c: float, true_risk: tuple[float, float] | None = None) -> BoundReport:
    """Compose the four right-hand-side terms on the queried sample ``data``."""
    m = len(data)
    if m < 1:
        raise ValueError("empty queried sample")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if c <= 0:
        raise ValueError("c must be positive")
    if rad_term.m != m:
        raise ValueError(f"Rademacher term computed on {rad_term.m} points, sample has {m}")
    emp = empirical_risk(h, data)
    dev = deviation_term(c, delta, m)
    rhs = emp + ipm_term.value + 2.0 * rad_term.value + dev
    tr, ci = true_risk if true_risk is not None else (None, None)
    return BoundReport(emp, ipm_term, rad_term, dev, rhs, m, delta, c, tr, ci)


# experiments ----------------------------------------------------------------


def draw_query_sample(cfg: ExperimentConfig, task: SyntheticTask, seed: int) -> Pool:
    if cfg.query_distribution == "marginal":
        return sample_iid(task, cfg.query_size, seed)
    lo, hi = cfg.query_region
    return sample_region(task, cfg.query_size, seed, lo, hi)


def bound_once(cfg: ExperimentConfig, rep: int = 0, pool: Pool | None = None) -> BoundReport:
    """One draw of pool and queried sample, constrained training, and the bound.

    The pool (unlabeled proxy for P_X) and the queried sample use streams
    keyed by ``(seed, rep)``; pass ``pool`` to reuse a fixed pool.
    """
    task = make_builtin_task(cfg.task, cfg.seed)
    row = setting_row(cfg.setting)
    if pool is None:
        pool = sample_iid(task, cfg.pool_size, stream_seed(cfg.seed, rep, 1))
    queried = draw_query_sample(cfg, task, stream_seed(cfg.seed, rep, 2))
    template = template_for(row.id, task, cfg.model, cfg.bias_bound, seed=stream_seed(cfg.seed, rep, 3))
    h = train(template, queried, OptimizerConfig.from_dict(cfg.optimizer))
    ipm_term = estimate(pool.points, queried.points, row.generator, cfg.strategy.method, cfg.bins)
    rad = rademacher(template, queried, cfg.num_sigma, cfg.inner, stream_seed(cfg.seed, rep, 4))
    tr = true_risk_mc(h, task, cfg.true_risk_n, stream_seed(cfg.seed, rep, 5))
    return assemble_bound(h, queried, ipm_term, rad, cfg.delta, cfg.c_const, tr)


def stream_seed(seed: int, rep: int, purpose: int) -> int:
    return int(make_rng(seed, rep, purpose).integers(0, 2**63))


COVERAGE_COLUMNS = ("rep", "emp_risk", "ipm", "rad", "dev", "rhs", "true_risk", "holds")


@dataclass(frozen=True)
class CoverageRecord:
    rows: tuple[dict, ...]
    coverage: float
    delta: float
    means: dict
    failures: tuple[dict, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=COVERAGE_COLUMNS, lineterminator="\n", extrasaction="ignore")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
        return buf.getvalue()

    def summary(self) -> str:
        return f"coverage={self.coverage!r} delta={self.delta!r}"


def coverage_experiment(cfg: ExperimentConfig, repetitions: int) -> CoverageRecord:
    """Fraction of independent repetitions in which the bound covers the true risk."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    rows, failures = [], []
    for rep in range(repetitions):
        report = bound_once(cfg, rep)
        row = {
            "rep": rep,
            "emp_risk": report.empirical_risk,
            "ipm": report.ipm_term.value,
            "rad": report.rad_term.value,
            "dev": report.deviation_term,
            "rhs": report.rhs_total,
            "true_risk": report.true_risk_mc,
            "holds": int(report.holds),
            "rad_se": report.rad_term.std_error,
        }
        rows.append(row)
        if not report.holds:
            failures.append(row)
            log.warning("rep %d: rhs %.6g < true risk %.6g (rad %.6g +- %.2g se)", rep, report.rhs_total,
                        report.true_risk_mc, report.rad_term.value, report.rad_term.std_error)
    means = {k: float(np.mean([r[k] for r in rows])) for k in COVERAGE_COLUMNS[1:-1]}
    coverage = sum(r["holds"] for r in rows) / repetitions
    return CoverageRecord(tuple(rows), coverage, cfg.delta, means, tuple(failures))
