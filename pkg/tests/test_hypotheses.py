import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alerm.core import Pool, make_builtin_task, sample_iid
from alerm.hypotheses import (
    SETTINGS,
    Hypothesis,
    LossKind,
    OptimizerConfig,
    SettingId,
    certify,
    fit,
    gaussian_features,
    init_hypothesis,
    loss,
    param_vector,
    predict,
    probe_membership,
    project,
    risk_and_grad,
    spectral_norm,
    train,
    with_params,
)
from alerm.ipm import KANTOROVICH, TOTAL_VARIATION
from factories import TASK_FOR, random_raw, violating
from oracles import finite_difference_grad

ALL = list(SettingId)


def test_registry_matches_table():
    expected = {
        "LIN_L1": ("L1", KANTOROVICH), "LIN_L2": ("L2", TOTAL_VARIATION),
        "GAUSS_L1": ("L1", KANTOROVICH), "LOGISTIC_LOG": ("LOG", TOTAL_VARIATION),
        "SVM_HINGE": ("HINGE", KANTOROVICH), "NN_HINGE": ("HINGE", KANTOROVICH),
    }
    assert {k.value: (r.loss.value, r.generator) for k, r in SETTINGS.items()} == expected
    for row in SETTINGS.values():
        assert row.certificate_kind == ("lipschitz_bound" if row.generator == KANTOROVICH else "sup_bound")


class TestPredict:
    def test_linear(self):
        h = Hypothesis("LIN_L1", [0.6, 0.8], 0.0)
        assert predict(h, np.array([1.0, 0.0])) == pytest.approx(0.6)

    def test_gaussian_at_center(self):
        h = Hypothesis("GAUSS_L1", [1.0], centers=[[0.3, -0.2]], width=0.5)
        assert predict(h, np.array([0.3, -0.2])) == 1.0

    def test_zero_network(self):
        layers = ((np.zeros((3, 2)), np.zeros(3)), (np.zeros((2, 3)), np.zeros(2)))
        h = Hypothesis("NN_HINGE", np.zeros(2), 0.0, layers, mx=3.0)
        np.testing.assert_array_equal(predict(h, np.random.default_rng(0).normal(size=(5, 2))), 0.0)

    def test_logistic_in_unit_interval(self):
        h = Hypothesis("LOGISTIC_LOG", [50.0, -50.0], mx=3.0)
        p = predict(h, np.random.default_rng(1).normal(size=(100, 2)))
        assert np.all((p >= 0) & (p <= 1))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            predict(Hypothesis("SVM_HINGE", [1.0, 0.0]), np.array([1.0]))


class TestLoss:
    def test_examples(self):
        assert loss("L1", 1.0, 0.25) == 0.75
        assert loss("HINGE", 1.0, 1.0) == 0.0
        z = 1.0
        assert loss("LOG", 1.0, 1.0 / (1.0 + math.exp(-z))) == pytest.approx(math.log1p(math.exp(-z)), abs=1e-15)
        assert loss("L2", 0.5, -0.5) == 1.0

    def test_log_clamped(self):
        assert math.isfinite(loss("LOG", 1.0, 0.0))
        assert loss("LOG", 1.0, 0.0) == pytest.approx(-math.log(1e-12))

    def test_inadmissible_labels(self):
        with pytest.raises(ValueError):
            loss("HINGE", 0.0, 1.0)
        with pytest.raises(ValueError):
            loss("LOG", -1.0, 0.5)

    @settings(max_examples=300, deadline=None)
    @given(st.sampled_from([-1.0, 1.0]), st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
    def test_hinge_is_1_lipschitz_in_score(self, y, s1, s2):
        assert abs(loss(LossKind.HINGE, y, s1) - loss(LossKind.HINGE, y, s2)) <= abs(s1 - s2) + 1e-9


class TestProject:
    def test_unit_ball(self):
        h = project(Hypothesis("LIN_L1", [3.0, 4.0]))
        np.testing.assert_allclose(h.w, [0.6, 0.8], rtol=0, atol=1e-15)

    def test_gaussian_l1_scaling(self):
        h = Hypothesis("GAUSS_L1", [1.0, 1.0], centers=[[0.0], [0.5]], width=1.0, mx=1.0)
        np.testing.assert_allclose(project(h).w, [0.25, 0.25], atol=1e-15)

    def test_lin_l2_infeasible(self):
        with pytest.raises(ValueError):
            project(Hypothesis("LIN_L2", [0.1], 0.0, mx=1.0, my=1.0))
        with pytest.raises(ValueError):
            project(Hypothesis("LIN_L2", [0.1], 0.6, mx=1.0, my=0.5))

    def test_feasible_unchanged(self):
        h = Hypothesis("SVM_HINGE", [0.3, 0.4], 5.0)
        p = project(h)
        assert p.w is h.w or np.array_equal(p.w, h.w)
        assert p.b == 5.0

    def test_bias_bound(self):
        assert project(Hypothesis("SVM_HINGE", [0.3, 0.4], 5.0, bias_bound=1.0)).b == 1.0

    def test_network_product(self):
        layers = ((np.array([[2.0, 0.0], [0.0, 1.0]]), np.zeros(2)), (np.array([[3.0, 0.0]]), np.zeros(1)))
        h = project(Hypothesis("NN_HINGE", [4.0], 0.0, layers, mx=3.0))
        norms = [np.linalg.norm(W, 2) for W, _ in h.layers]
        assert np.linalg.norm(h.w) * np.prod(norms) == pytest.approx(1.0, abs=1e-9)
        # scale-balanced: each factor shrinks by the same ratio
        gamma = (4.0 * 2.0 * 3.0) ** (-1 / 3)
        np.testing.assert_allclose(norms, [2.0 * gamma, 3.0 * gamma], rtol=1e-9)

    @pytest.mark.parametrize("setting", ALL)
    def test_feasibility_and_idempotence(self, setting):
        rng = np.random.default_rng(hash(setting.value) % 2**32)
        for _ in range(1000 if setting != SettingId.NN_HINGE else 300):
            p = project(random_raw(setting, rng))
            assert certify(p).passes
            q = project(p)
            assert np.array_equal(param_vector(p), param_vector(q))


class TestCertify:
    def test_unit_norm(self):
        c = certify(Hypothesis("LIN_L1", [0.6, 0.8]))
        assert c.value == pytest.approx(1.0) and c.passes and c.kind == "lipschitz_bound"

    def test_logistic_boundary(self):
        mx = 3.0
        w = np.array([math.log(math.e - 1) / mx, 0.0])
        c = certify(Hypothesis("LOGISTIC_LOG", w, mx=mx))
        assert c.kind == "sup_bound"
        assert c.value == pytest.approx(1.0, abs=1e-15)
        assert c.passes

    def test_network_against_svd(self):
        h = Hypothesis("NN_HINGE", [2.0], 0.0, ((np.array([[0.4]]), np.zeros(1)),))
        oracle = np.linalg.norm([2.0]) * np.linalg.svd(np.array([[0.4]]), compute_uv=False)[0]
        assert oracle == pytest.approx(0.8)
        c = certify(h)
        assert c.value == pytest.approx(0.8, abs=1e-12) and c.passes

    def test_lin_l2(self):
        c = certify(Hypothesis("LIN_L2", [0.3], 0.2, mx=1.0, my=0.5))
        assert c.detail["residual_bound"] == pytest.approx(1.0)
        assert c.passes
        assert not certify(Hypothesis("LIN_L2", [0.4], 0.2, mx=1.0, my=0.5)).passes

    def test_gaussian(self):
        c = certify(Hypothesis("GAUSS_L1", [0.25, -0.25], centers=[[0.0], [0.5]], width=1.0, mx=1.0))
        assert c.value == pytest.approx(1.0)


def test_spectral_norm_matches_svd():
    rng = np.random.default_rng(0)
    for shape in [(1, 1), (3, 2), (2, 5), (8, 8)]:
        W = rng.normal(size=shape)
        assert spectral_norm(W) == pytest.approx(np.linalg.svd(W, compute_uv=False)[0], rel=1e-8)
    assert spectral_norm(np.zeros((2, 2))) == 0.0


class TestProbe:
    def test_constant_loss(self):
        task = make_builtin_task("lin1d")
        assert probe_membership(Hypothesis("LIN_L1", [0.0], 0.0), task, 1000, seed=0) == 0.0

    def test_certified_svm(self):
        task = make_builtin_task("mix2d")
        h = project(Hypothesis("SVM_HINGE", [5.0, 1.0], 0.3, mx=task.mx, my=task.my))
        assert probe_membership(h, task, 10_000, seed=1) <= 1 + 1e-9

    def test_violation_along_w(self):
        # loss is affine along w away from the kink, so the ratio equals ||w|| = 2
        task = make_builtin_task("lin1d")
        h = Hypothesis("LIN_L1", [2.0], 0.0, mx=1.0, my=0.5)
        x1, x2, y = 0.6, 0.9, 0.0
        assert abs(loss("L1", y, predict(h, [x1])) - loss("L1", y, predict(h, [x2]))) / 0.3 == pytest.approx(2.0)
        assert probe_membership(h, task, 1000, seed=2) > 1.0

    @pytest.mark.parametrize("setting", ALL)
    def test_violating_rows_detected(self, setting):
        h = violating(setting)
        assert not certify(h).passes
        assert probe_membership(h, make_builtin_task(TASK_FOR[setting]), 10_000, seed=3) > 1.0


@pytest.mark.parametrize("setting", ALL)
def test_gradient_matches_finite_differences(setting):
    rng = np.random.default_rng(7)
    h = project(random_raw(setting, rng))
    task = make_builtin_task(TASK_FOR[setting])
    data = sample_iid(task, 15, seed=4)
    coef = rng.normal(size=15)
    _, grad = risk_and_grad(h, data.points, data.labels, coef)
    f = lambda th: risk_and_grad(with_params(h, th), data.points, data.labels, coef)[0]  # noqa: E731
    # kinks of L1 / hinge / ReLU are hit with probability zero
    np.testing.assert_allclose(grad, finite_difference_grad(f, param_vector(h)), rtol=1e-4, atol=1e-6)


def test_gaussian_gradient_bound():
    rng = np.random.default_rng(5)
    mx, width = 1.0, 0.4
    t = np.array([[0.2, -0.3]])
    bound = 2 * mx / width**2
    for _ in range(200):
        x = rng.uniform(-0.7, 0.7, size=2)
        g = finite_difference_grad(lambda z: gaussian_features(z[None], t, width)[0, 0], x)
        assert np.linalg.norm(g) <= bound


class TestTrain:
    def test_exact_fit(self):
        data = Pool(np.array([[-1.0], [1.0]]), np.array([-0.5, 0.5]), 1.0, 0.5)
        h = train(init_hypothesis("LIN_L1", 1, mx=1.0, my=0.5), data)
        assert np.mean(np.abs(data.labels - predict(h, data.points))) <= 1e-3
        assert certify(h).passes

    @pytest.mark.parametrize("setting", ALL)
    def test_single_point_no_worse_than_init(self, setting):
        task = make_builtin_task(TASK_FOR[setting])
        data = sample_iid(task, 1, seed=9)
        template = init_hypothesis(setting, task.dim, mx=task.mx, my=task.my, seed=1)
        result = fit(template, data, OptimizerConfig(steps=50))
        assert result.best_risks[-1] <= result.risks[0]
        assert np.all(np.diff(result.best_risks) <= 0)
        assert certify(result.hypothesis).passes

    def test_separable_svm(self):
        data = Pool(np.array([[2.0, 0.0], [-2.0, 0.0]]), np.array([1.0, -1.0]), 3.0, 1.0)
        # w = e1 is feasible and gives margin 2 on both points
        assert np.all(1 - data.labels * (data.points @ [1.0, 0.0]) <= 0)
        h = train(init_hypothesis("SVM_HINGE", 2, mx=3.0, my=1.0), data)
        assert np.mean(loss("HINGE", data.labels, predict(h, data.points))) == 0.0

    def test_errors(self):
        template = init_hypothesis("LIN_L1", 1, mx=1.0)
        with pytest.raises(ValueError):
            train(template, Pool(np.zeros((0, 1)), np.zeros(0), 1.0, 1.0))
        with pytest.raises(ValueError):
            train(template, Pool(np.zeros((2, 1)), np.array([0.0, np.nan]), 1.0, 1.0))


@pytest.mark.parametrize("setting", ALL)
def test_json_roundtrip(setting):
    h = project(random_raw(setting, np.random.default_rng(3)))
    back = Hypothesis.from_json(h.to_json())
    np.testing.assert_array_equal(param_vector(back), param_vector(h))
    assert certify(back).value == certify(h).value
