"""Random members of each setting's hypothesis class, before projection."""

import numpy as np

from alerm.core import make_builtin_task
from alerm.hypotheses import Hypothesis, SettingId

TASK_FOR = {
    SettingId.LIN_L1: "lin2d",
    SettingId.LIN_L2: "lin1d",
    SettingId.GAUSS_L1: "lin2d",
    SettingId.LOGISTIC_LOG: "mix2d01",
    SettingId.SVM_HINGE: "mix2d",
    SettingId.NN_HINGE: "mix2d",
}


def _ball(rng, n, dim, radius):
    x = rng.normal(size=(n, dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x * radius * rng.random((n, 1)) ** (1.0 / dim)


def random_raw(setting, rng, task=None):
    """A hypothesis with heavy-tailed parameters that usually violates the row."""
    setting = SettingId(setting)
    task = task or make_builtin_task(TASK_FOR[setting])
    dim, mx, my = task.dim, task.mx, task.my
    scale = 10.0 ** rng.uniform(-1.5, 1.5)
    if setting == SettingId.NN_HINGE:
        widths = [dim] + list(rng.integers(1, 7, size=rng.integers(1, 4)))
        layers = tuple(
            (rng.normal(size=(o, i)) * scale, rng.normal(size=o))
            for i, o in zip(widths[:-1], widths[1:])
        )
        return Hypothesis(setting, rng.normal(size=widths[-1]) * scale, rng.normal(), layers,
                          mx=mx, my=my)
    if setting == SettingId.GAUSS_L1:
        k = int(rng.integers(1, 6))
        return Hypothesis(setting, rng.normal(size=k) * scale, centers=_ball(rng, k, dim, mx),
                          width=10.0 ** rng.uniform(-0.7, 0.5), mx=mx, my=my)
    if setting == SettingId.LOGISTIC_LOG:
        return Hypothesis(setting, rng.normal(size=dim) * scale, mx=mx, my=my)
    if setting == SettingId.LIN_L2:
        b = rng.uniform(-1.0, 1.0) * (1.0 - my) * 0.999
        return Hypothesis(setting, rng.normal(size=dim) * scale, b, mx=mx, my=my)
    return Hypothesis(setting, rng.normal(size=dim) * scale, rng.normal() * 2, mx=mx, my=my)


def violating(setting):
    """A hypothesis breaking the row's condition in a region the probe reaches."""
    setting = SettingId(setting)
    task = make_builtin_task(TASK_FOR[setting])
    mx, my = task.mx, task.my
    if setting == SettingId.LIN_L1:
        return Hypothesis(setting, [2.0, 0.0], 0.0, mx=mx, my=my)
    if setting == SettingId.LIN_L2:
        return Hypothesis(setting, [2.0], 0.0, mx=mx, my=my)
    if setting == SettingId.GAUSS_L1:
        return Hypothesis(setting, [1.0], centers=[[0.0, 0.0]], width=0.2, mx=mx, my=my)
    if setting == SettingId.LOGISTIC_LOG:
        return Hypothesis(setting, [3.0 / mx, 0.0], mx=mx, my=my)
    if setting == SettingId.SVM_HINGE:
        return Hypothesis(setting, [2.0, 0.0], 0.0, mx=mx, my=my)
    return Hypothesis(setting, [1.0], 0.0, ((np.array([[2.0, 0.0]]), np.zeros(1)),), mx=mx, my=my)
