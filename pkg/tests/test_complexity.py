import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from alerm.complexity import (
    all_sign_vectors,
    draw_signs,
    rademacher,
    rademacher_exact_finite,
)
from alerm.core import Pool, make_builtin_task, sample_iid
from alerm.hypotheses import Hypothesis, init_hypothesis, pointwise_loss, project
from factories import random_raw
from oracles import rademacher_bruteforce

finite_values = arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(1, 6)),
                       elements=st.floats(-3, 3, allow_nan=False))


def test_symmetric_pair():
    assert rademacher_exact_finite([[1.0, 1.0], [-1.0, -1.0]]) == pytest.approx(0.5, abs=1e-15)


def test_sign_vectors_pair_with_negations():
    s = all_sign_vectors(4)
    assert len(s) == 16 and len({tuple(r) for r in s}) == 16
    np.testing.assert_array_equal(s, -s[::-1])


def test_sign_draws_keyed_per_draw():
    a = draw_signs(7, 5, seed=3)
    b = draw_signs(7, 8, seed=3)
    np.testing.assert_array_equal(a, b[:5])
    assert set(np.unique(a)) <= {-1.0, 1.0}


def test_singleton_class_is_zero():
    data = sample_iid(make_builtin_task("lin2d"), 6, seed=1)
    h = Hypothesis("LIN_L1", [0.6, -0.8], 0.1, mx=1.0, my=1.0)
    est = rademacher(None, data, inner="enumeration", finite_class=[h], enumerate_sigma=True)
    assert est.value == 0.0
    assert est.std_error == 0.0 and est.sigma_enumerated


def test_enumeration_matches_bruteforce_for_random_hypotheses():
    task = make_builtin_task("mix2d")
    data = sample_iid(task, 3, seed=5)
    rng = np.random.default_rng(2)
    hs = [project(random_raw("SVM_HINGE", rng, task)) for _ in range(3)]
    values = np.stack([pointwise_loss(h, data.points, data.labels) for h in hs])
    est = rademacher(None, data, inner="enumeration", finite_class=hs, enumerate_sigma=True)
    assert est.value == pytest.approx(rademacher_bruteforce(values), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(finite_values)
def test_exact_matches_bruteforce(values):
    assert rademacher_exact_finite(values) == pytest.approx(rademacher_bruteforce(values), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(finite_values, st.floats(0.01, 10))
def test_positive_homogeneity(values, c):
    assert rademacher_exact_finite(c * values) == pytest.approx(c * rademacher_exact_finite(values),
                                                                abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(finite_values, arrays(np.float64, st.integers(1, 6), elements=st.floats(-3, 3)))
def test_monotone_in_class(values, extra):
    if extra.size != values.shape[1]:
        extra = np.resize(extra, values.shape[1])
    bigger = np.vstack([values, extra])
    assert rademacher_exact_finite(bigger) >= rademacher_exact_finite(values) - 1e-12


@settings(max_examples=100, deadline=None)
@given(finite_values)
def test_finite_class_bound(values):
    # Rad <= max ||v||_2 sqrt(2 log N) / m, and |Rad| <= max |v|
    n, m = values.shape
    r = rademacher_exact_finite(values)
    assert r <= np.max(np.linalg.norm(values, axis=1)) * math.sqrt(2 * math.log(n)) / m + 1e-12
    assert abs(r) <= np.max(np.abs(values)) + 1e-12


@pytest.mark.parametrize("m", [2, 5, 9])
def test_monte_carlo_within_standard_errors(m):
    task = make_builtin_task("mix2d")
    data = sample_iid(task, m, seed=m)
    rng = np.random.default_rng(m)
    hs = [project(random_raw("SVM_HINGE", rng, task)) for _ in range(6)]
    exact = rademacher(None, data, inner="enumeration", finite_class=hs, enumerate_sigma=True).value
    mc = rademacher(None, data, num_sigma=2000, inner="enumeration", finite_class=hs, seed=11)
    assert abs(mc.value - exact) <= 4 * mc.std_error


def test_ascent_agrees_with_random_search():
    data = Pool(np.array([[0.5], [-0.3]]), np.array([0.1, -0.2]), 1.0, 0.5)
    template = init_hypothesis("LIN_L1", 1, mx=1.0, my=0.5, bias_bound=0.5)
    a = rademacher(template, data, 400, "projected_ascent", seed=1)
    r = rademacher(template, data, 400, "random_search", seed=1, probes=4096)
    assert abs(a.value - r.value) <= 3 * math.hypot(a.std_error, r.std_error)


@pytest.mark.parametrize("setting", ["LIN_L1", "LIN_L2", "GAUSS_L1", "LOGISTIC_LOG", "SVM_HINGE", "NN_HINGE"])
def test_template_estimates_are_deterministic(setting):
    task = make_builtin_task({"LIN_L2": "lin1d", "LOGISTIC_LOG": "mix2d01"}.get(setting, "mix2d"))
    data = sample_iid(task, 8, seed=0)
    template = init_hypothesis(setting, task.dim, mx=task.mx, my=task.my, seed=0,
                               **({"bias_bound": 1.0} if setting in ("LIN_L1", "SVM_HINGE") else {}))
    a = rademacher(template, data, 16, seed=4)
    b = rademacher(template, data, 16, seed=4)
    assert a == b
    assert a.value >= rademacher(template, data, 16, "random_search", seed=4).value - 1e-12


def test_errors():
    data = sample_iid(make_builtin_task("lin1d"), 3, seed=0)
    with pytest.raises(ValueError):
        rademacher(None, data, inner="enumeration")
    with pytest.raises(ValueError):
        rademacher(None, data, inner="random_search")
    with pytest.raises(ValueError):
        rademacher_exact_finite(np.zeros((1, 21)))
    unlabeled = Pool(np.zeros((2, 1)), np.array([0.0, np.nan]), 1.0, 1.0)
    with pytest.raises(ValueError):
        rademacher(init_hypothesis("LIN_L1", 1, mx=1.0), unlabeled)
