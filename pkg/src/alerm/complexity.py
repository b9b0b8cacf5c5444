"""Empirical Rademacher complexity of a constrained loss class.

For a labeled sample of size m the quantity is

    E_sigma [ sup_h (1/m) sum_i sigma_i loss(y_i, h(x_i)) ]

with sigma uniform on {-1, +1}^m.  The expectation is taken by Monte
Carlo (or exhaustively for small m) and the supremum either exactly over
a finite class or approximately over the projected parameter set.  The
approximate supremum never exceeds the true one, so estimates for
continuous classes are biased low.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Pool, make_rng
from .hypotheses import (
    Hypothesis,
    _dloss_dscore,
    _loss_from_score,
    constraint_radius,
    features,
    param_vector,
    pointwise_loss,
    project_batch,
    risk_and_grad,
    with_params,
)

ENUMERATION = "enumeration"
RANDOM_SEARCH = "random_search"
PROJECTED_ASCENT = "projected_ascent"
INNER_METHODS = (ENUMERATION, RANDOM_SEARCH, PROJECTED_ASCENT)

MAX_ENUM_M = 20
_CHUNK = 1 << 14


@dataclass(frozen=True)
class RadEstimate:
    value: float
    num_sigma: int
    inner_method: str
    std_error: float
    m: int
    sigma_enumerated: bool = False

    def to_dict(self) -> dict:
        return {"value": self.value, "num_sigma": self.num_sigma, "inner_method": self.inner_method,
                "std_error": self.std_error, "m": self.m, "sigma_enumerated": self.sigma_enumerated}


def all_sign_vectors(m: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Rows ``start..stop`` of the 2^m sign vectors in binary order.

    Row ``j`` and row ``2^m - 1 - j`` are negations of each other.
    """
    stop = 2**m if stop is None else stop
    codes = np.arange(start, stop, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(m - 1, -1, -1)) & 1
    return np.where(bits == 1, 1.0, -1.0)


def _sup_finite(values: np.ndarray, sigmas: np.ndarray) -> np.ndarray:
    m = values.shape[1]
    return np.max(sigmas @ values.T, axis=1) / m


def _enumerated_mean(values: np.ndarray) -> float:
    # sum each sign vector together with its negation so a symmetric class
    # cancels exactly
    m = values.shape[1]
    n = 2**m
    half = n // 2
    total = 0.0
    for start in range(0, half, _CHUNK):
        stop = min(half, start + _CHUNK)
        lo = _sup_finite(values, all_sign_vectors(m, start, stop))
        hi = _sup_finite(values, all_sign_vectors(m, n - stop, n - start))[::-1]
        total += float(np.sum(lo + hi))
    return total / n


def rademacher_exact_finite(values) -> float:
    """Exact Rademacher complexity of a finite class by sign enumeration.

    ``values[k, i]`` is the loss of hypothesis ``k`` at point ``i``.
    """
    values = np.atleast_2d(np.asarray(values, dtype=float))
    m = values.shape[1]
    if m < 1 or values.shape[0] < 1:
        raise ValueError("need at least one hypothesis and one point")
    if m > MAX_ENUM_M:
        raise ValueError(f"m={m} exceeds the enumeration limit {MAX_ENUM_M}")
    return _enumerated_mean(values)


def draw_signs(m: int, num_sigma: int, seed: int) -> np.ndarray:
    """Sign vectors; draw ``j`` is a function of ``(seed, j)`` alone.

    The bits come straight from the seed sequence keyed ``(seed, j)``, which
    avoids building a generator per draw.
    """
    words = (m + 31) // 32
    state = np.stack([np.random.SeedSequence([seed, j]).generate_state(words) for j in range(num_sigma)])
    bits = np.unpackbits(state.view(np.uint8), axis=1, bitorder="little")[:, :m]
    return np.where(bits == 1, 1.0, -1.0)


def _top_k(scores: np.ndarray, k: int) -> np.ndarray:
    """Column indices of the ``k`` largest entries per row, ties to the lower index."""
    scores = scores.copy()
    rows = np.arange(len(scores))
    out = np.empty((len(scores), k), dtype=int)
    for i in range(k):
        out[:, i] = np.argmax(scores, axis=1)
        scores[rows, out[:, i]] = -np.inf
    return out


def _feasible_probes(template: Hypothesis, count: int, seed: int) -> np.ndarray:
    """Random feasible parameter vectors spread from the origin to the boundary."""
    rng = make_rng(seed, 0xB0B)
    d = param_vector(template).size
    try:
        r = constraint_radius(template)
    except ValueError:
        r = 1.0
    r = 1.0 if not math.isfinite(r) else r
    scale = r * 10.0 ** rng.uniform(-2.0, 1.0, size=(count, 1))
    raw = rng.standard_normal((count, d)) * scale
    if template.row.has_bias:
        k = template.w.size
        bb = template.bias_bound if template.bias_bound is not None else 1.0
        raw[:, k] = rng.uniform(-bb, bb, size=count)
    return project_batch(template, raw)


def _loss_matrix(template: Hypothesis, thetas: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    if template.row.hclass == "nn":
        return np.stack([pointwise_loss(with_params(template, t), X, y) for t in thetas])
    S = thetas @ features(template, X).T
    return _loss_from_score(template.row.loss, np.broadcast_to(y, S.shape), S)


def _ascent_linear(template, Phi, y, sigmas, starts, steps, step_c):
    """Batched projected subgradient ascent for classes linear in parameters."""
    m = len(y)
    n_sig, restarts, d = starts.shape
    theta = starts.reshape(-1, d).copy()
    coef = np.repeat(sigmas, restarts, axis=0) / m
    yb = np.broadcast_to(y, (len(theta), m))
    best = np.full(len(theta), -np.inf)
    for t in range(steps + 1):
        S = theta @ Phi.T
        best = np.maximum(best, np.sum(coef * _loss_from_score(template.row.loss, yb, S), axis=1))
        if t == steps:
            break
        grad = (coef * _dloss_dscore(template.row.loss, yb, S)) @ Phi
        theta = project_batch(template, theta + step_c / math.sqrt(t + 1) * grad)
    return best.reshape(n_sig, restarts).max(axis=1)


def _ascent_generic(template, X, y, sigmas, starts, steps, step_c):
    m = len(y)
    out = np.empty(len(sigmas))
    for j, sigma in enumerate(sigmas):
        coef = sigma / m
        best = -np.inf
        for theta in starts[j]:
            h = with_params(template, theta)
            for t in range(steps + 1):
                value, grad = risk_and_grad(h, X, y, coef)
                best = max(best, value)
                if t == steps:
                    break
                theta = project_batch(template, (param_vector(h) + step_c / math.sqrt(t + 1) * grad)[None])[0]
                h = with_params(template, theta)
        out[j] = best
    return out


def rademacher(template: Hypothesis | None, data: Pool, num_sigma: int = 256,
               inner: str = PROJECTED_ASCENT, seed: int = 0, *,
               finite_class: Sequence[Hypothesis] | None = None,
               enumerate_sigma: bool = False, probes: int = 512, restarts: int = 2,
               steps: int = 30, step_c: float = 0.5) -> RadEstimate:
    """Estimate the empirical Rademacher complexity of the loss class on ``data``.

    ``template`` fixes the class (setting, architecture, bounds); every
    candidate is projected onto the setting's feasible set.  ``inner``
    selects how each supremum is taken:

    enumeration
        exact maximum over ``finite_class``.
    random_search
        maximum over ``probes`` random feasible parameter vectors.
    projected_ascent
        the random-search maximum refined by projected subgradient ascent
        started from the ``restarts`` best probes of each sign draw.

    With ``enumerate_sigma`` all 2^m sign vectors are used instead of
    ``num_sigma`` random ones and the standard error is reported as 0.
    """
    if len(data) == 0:
        raise ValueError("empty sample")
    if not data.is_fully_labeled:
        raise ValueError("Rademacher estimation needs labeled data")
    if inner not in INNER_METHODS:
        raise ValueError(f"unknown inner method {inner!r}")
    if num_sigma < 1:
        raise ValueError("num_sigma must be >= 1")
    X, y = data.points, data.labels
    m = len(y)

    if inner == ENUMERATION:
        if not finite_class:
            raise ValueError("enumeration needs a finite class")
        values = np.stack([pointwise_loss(h, X, y) for h in finite_class])
    elif template is None:
        raise ValueError(f"{inner} needs a class template")
    else:
        thetas = _feasible_probes(template, probes, seed)
        values = _loss_matrix(template, thetas, X, y)

    if enumerate_sigma:
        if m > MAX_ENUM_M:
            raise ValueError(f"m={m} exceeds the enumeration limit {MAX_ENUM_M}")
        if inner != PROJECTED_ASCENT:
            return RadEstimate(_enumerated_mean(values), 2**m, inner, 0.0, m, True)
        sigmas = all_sign_vectors(m)
    else:
        sigmas = draw_signs(m, num_sigma, seed)

    sups = _sup_finite(values, sigmas)
    if inner == PROJECTED_ASCENT:
        k = min(restarts, len(values))
        starts = thetas[_top_k(sigmas @ values.T, k)]
        if template.row.hclass == "nn":
            refined = _ascent_generic(template, X, y, sigmas, starts, steps, step_c)
        else:
            refined = _ascent_linear(template, features(template, X), y, sigmas, starts, steps, step_c)
        sups = np.maximum(sups, refined)

    n = len(sups)
    se = 0.0 if enumerate_sigma or n < 2 else float(np.std(sups, ddof=1) / math.sqrt(n))
    return RadEstimate(float(np.mean(sups)), n, inner, se, m, enumerate_sigma)
