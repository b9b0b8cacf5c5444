"""Hypothesis classes, losses and the regularization constraints that
embed each loss class in an IPM generator class.

Six settings are supported:

=============  ==========  =======  ======================================  =====
id             class       loss     condition                               IPM
=============  ==========  =======  ======================================  =====
LIN_L1         linear      l1       ||w||_2 <= 1                            K
LIN_L2         linear      l2       ||w||_2 <= (1 - M_Y - |b|) / M_X        TV
GAUSS_L1       gaussian    l1       (2 M_X / sigma^2) ||w||_1 <= 1          K
LOGISTIC_LOG   logistic    log      ||w||_2 <= log(e - 1) / M_X             TV
SVM_HINGE      svm         hinge    ||w||_2 <= 1                            K
NN_HINGE       relu net    hinge    ||o||_2 prod_i ||W_i||_2 <= 1           K
=============  ==========  =======  ======================================  =====

K rows are certified by a Lipschitz bound on ``x -> loss(y, h(x))``, TV
rows by a sup bound on the loss itself.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .core import LABELS_01, LABELS_PM1, REGRESSION, Pool, SyntheticTask, clip_to_ball, make_rng
from .ipm import KANTOROVICH, TOTAL_VARIATION

LOG_CLAMP = 1e-12
FEAS_TOL = 1e-12
CERT_TOL = 1e-9
POWER_TOL = 1e-10
POWER_MAX_ITER = 10_000
LOGISTIC_RADIUS = math.log(math.e - 1.0)


class SettingId(str, enum.Enum):
    LIN_L1 = "LIN_L1"
    LIN_L2 = "LIN_L2"
    GAUSS_L1 = "GAUSS_L1"
    LOGISTIC_LOG = "LOGISTIC_LOG"
    SVM_HINGE = "SVM_HINGE"
    NN_HINGE = "NN_HINGE"


class LossKind(str, enum.Enum):
    L1 = "L1"
    L2 = "L2"
    LOG = "LOG"
    HINGE = "HINGE"


@dataclass(frozen=True)
class SettingRow:
    id: SettingId
    hclass: str
    loss: LossKind
    generator: str
    condition: str
    label_space: str

    @property
    def certificate_kind(self) -> str:
        return "lipschitz_bound" if self.generator == KANTOROVICH else "sup_bound"

    @property
    def has_bias(self) -> bool:
        return self.hclass in ("linear", "svm", "nn")

    def holds(self, h: "Hypothesis", tol: float = CERT_TOL) -> bool:
        return certify(h, tol).passes


SETTINGS: dict[SettingId, SettingRow] = {
    row.id: row
    for row in (
        SettingRow(SettingId.LIN_L1, "linear", LossKind.L1, KANTOROVICH, "||w||_2 <= 1", REGRESSION),
        SettingRow(SettingId.LIN_L2, "linear", LossKind.L2, TOTAL_VARIATION,
                   "||w||_2 <= (1 - M_Y - |b|) / M_X", REGRESSION),
        SettingRow(SettingId.GAUSS_L1, "gaussian", LossKind.L1, KANTOROVICH,
                   "(2 M_X / sigma^2) ||w||_1 <= 1", REGRESSION),
        SettingRow(SettingId.LOGISTIC_LOG, "logistic", LossKind.LOG, TOTAL_VARIATION,
                   "||w||_2 <= log(e - 1) / M_X", LABELS_01),
        SettingRow(SettingId.SVM_HINGE, "svm", LossKind.HINGE, KANTOROVICH, "||w||_2 <= 1", LABELS_PM1),
        SettingRow(SettingId.NN_HINGE, "nn", LossKind.HINGE, KANTOROVICH,
                   "||o||_2 prod_i ||W_i||_2 <= 1", LABELS_PM1),
    )
}


def setting_row(setting: SettingId | str) -> SettingRow:
    try:
        return SETTINGS[SettingId(setting)]
    except ValueError:
        raise KeyError(f"unknown setting {setting!r}") from None


# losses -------------------------------------------------------------------


def check_labels(kind: LossKind, y) -> None:
    y = np.asarray(y, dtype=float)
    if kind == LossKind.HINGE and not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("hinge loss needs labels in {-1, +1}")
    if kind == LossKind.LOG and not np.all(np.isin(y, (0.0, 1.0))):
        raise ValueError("logistic loss needs labels in {0, 1}")
    if not np.all(np.isfinite(y)):
        raise ValueError("labels must be finite")


def loss(kind: LossKind | str, y, pred):
    """Pointwise loss; broadcasts over arrays.

    ``pred`` is the hypothesis output: a real prediction for L1/L2, a
    probability for LOG (clamped to ``[1e-12, 1 - 1e-12]``) and the
    pre-sign score for HINGE.
    """
    kind = LossKind(kind)
    check_labels(kind, y)
    y = np.asarray(y, dtype=float)
    pred = np.asarray(pred, dtype=float)
    if kind == LossKind.L1:
        out = np.abs(y - pred)
    elif kind == LossKind.L2:
        out = (y - pred) ** 2
    elif kind == LossKind.HINGE:
        out = np.maximum(0.0, 1.0 - y * pred)
    else:
        p = np.clip(pred, LOG_CLAMP, 1.0 - LOG_CLAMP)
        out = -(y * np.log(p) + (1.0 - y) * np.log1p(-p))
    return float(out) if out.ndim == 0 else out


def _loss_from_score(kind: LossKind, y: np.ndarray, s: np.ndarray) -> np.ndarray:
    if kind == LossKind.LOG:
        return loss(kind, y, _sigmoid(s))
    return loss(kind, y, s)


def _dloss_dscore(kind: LossKind, y: np.ndarray, s: np.ndarray) -> np.ndarray:
    if kind == LossKind.L1:
        return np.sign(s - y)
    if kind == LossKind.L2:
        return 2.0 * (s - y)
    if kind == LossKind.HINGE:
        return np.where(1.0 - y * s > 0, -y, 0.0)
    return _sigmoid(s) - y


def _sigmoid(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


# hypotheses ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Hypothesis:
    """One member of a setting's hypothesis class.

    ``w`` is the weight vector of the linear, Gaussian, logistic and SVM
    classes and the output weight ``o`` of the network.  ``layers`` holds
    ``(W_i, b_i)`` pairs of the ReLU network, ``centers``/``width`` the
    frozen Gaussian centers and kernel width.  ``mx``/``my`` are the domain
    and label bounds the constraints refer to; ``bias_bound``, when set,
    caps ``|b|`` and the norm of each layer bias.
    """

    setting: SettingId
    w: np.ndarray
    b: float = 0.0
    layers: tuple[tuple[np.ndarray, np.ndarray], ...] = ()
    centers: np.ndarray | None = None
    width: float | None = None
    mx: float = 1.0
    my: float = 0.0
    bias_bound: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "setting", SettingId(self.setting))
        w = np.asarray(self.w, dtype=float).reshape(-1)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", float(self.b))
        row = self.row
        if not row.has_bias and self.b != 0.0:
            raise ValueError(f"{row.id.value} has no bias term")
        if row.hclass == "gaussian":
            if self.width is None or not self.width > 0:
                raise ValueError("Gaussian width must be positive")
            c = np.atleast_2d(np.asarray(self.centers, dtype=float))
            if c.shape[0] != w.size:
                raise ValueError("one Gaussian weight per center required")
            if np.max(np.linalg.norm(c, axis=1)) > self.mx + FEAS_TOL:
                raise ValueError("Gaussian centers must lie in the domain ball")
            object.__setattr__(self, "centers", c)
        if row.hclass == "nn":
            if not self.layers:
                raise ValueError("network needs at least one layer")
            layers = tuple(
                (np.atleast_2d(np.asarray(W, dtype=float)), np.asarray(bv, dtype=float).reshape(-1))
                for W, bv in self.layers
            )
            for i, (W, bv) in enumerate(layers):
                if bv.size != W.shape[0]:
                    raise ValueError(f"layer {i + 1}: bias length {bv.size} != {W.shape[0]} rows")
                if i and W.shape[1] != layers[i - 1][0].shape[0]:
                    raise ValueError(f"layer {i + 1}: input width mismatch")
            if layers[-1][0].shape[0] != w.size:
                raise ValueError("output weight length must equal the last layer width")
            object.__setattr__(self, "layers", layers)

    @property
    def row(self) -> SettingRow:
        return SETTINGS[self.setting]

    @property
    def input_dim(self) -> int:
        if self.row.hclass == "nn":
            return self.layers[0][0].shape[1]
        if self.row.hclass == "gaussian":
            return self.centers.shape[1]
        return self.w.size

    # serialization
    def to_dict(self) -> dict:
        doc: dict = {"setting": self.setting.value, "w": self.w.tolist(), "b": self.b,
                     "mx": self.mx, "my": self.my}
        if self.layers:
            doc["layers"] = [{"W": W.tolist(), "b": bv.tolist()} for W, bv in self.layers]
        if self.centers is not None:
            doc["centers"] = self.centers.tolist()
            doc["width"] = self.width
        if self.bias_bound is not None:
            doc["bias_bound"] = self.bias_bound
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "Hypothesis":
        layers = tuple((np.asarray(L["W"]), np.asarray(L["b"])) for L in doc.get("layers", ()))
        return cls(
            setting=SettingId(doc["setting"]),
            w=np.asarray(doc["w"] if "w" in doc else doc["o"], dtype=float),
            b=doc.get("b", 0.0),
            layers=layers,
            centers=None if doc.get("centers") is None else np.asarray(doc["centers"]),
            width=doc.get("width"),
            mx=doc.get("mx", 1.0),
            my=doc.get("my", 0.0),
            bias_bound=doc.get("bias_bound"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Hypothesis":
        return cls.from_dict(json.loads(text))


def gaussian_features(X: np.ndarray, centers: np.ndarray, width: float) -> np.ndarray:
    d2 = np.sum((X[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    return np.exp(-d2 / (2.0 * width**2))


def features(h: Hypothesis, X: np.ndarray) -> np.ndarray:
    """Design matrix of the classes that are linear in their parameters."""
    hclass = h.row.hclass
    if hclass == "gaussian":
        return gaussian_features(X, h.centers, h.width)
    if hclass in ("linear", "svm"):
        return np.hstack([X, np.ones((len(X), 1))])
    if hclass == "logistic":
        return X
    raise ValueError("network hypotheses have no fixed feature map")


def _forward(h: Hypothesis, X: np.ndarray):
    acts = [X]
    z = X
    for i, (W, bv) in enumerate(h.layers):
        z = z @ W.T + bv
        if i < len(h.layers) - 1:
            acts.append(z)
            z = np.maximum(z, 0.0)
    acts.append(z)
    return acts


def score(h: Hypothesis, X) -> np.ndarray:
    """Raw score: the value fed to the loss before any sigmoid."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != h.input_dim:
        raise ValueError(f"input has dimension {X.shape[1]}, hypothesis expects {h.input_dim}")
    if h.row.hclass == "nn":
        return _forward(h, X)[-1] @ h.w + h.b
    if h.row.hclass == "gaussian":
        return features(h, X) @ h.w
    return X @ h.w + h.b


def predict(h: Hypothesis, x):
    """Evaluate ``h`` at a point (returns a float) or at rows of a matrix.

    Hinge settings return the pre-sign score, the logistic class returns a
    probability in (0, 1).
    """
    single = np.ndim(x) == 1
    s = score(h, np.atleast_2d(np.asarray(x, dtype=float)))
    out = _sigmoid(s) if h.row.hclass == "logistic" else s
    return float(out[0]) if single else out


def pointwise_loss(h: Hypothesis, X, y) -> np.ndarray:
    return np.asarray(_loss_from_score(h.row.loss, np.asarray(y, dtype=float), score(h, X)), dtype=float)


# parameters as flat vectors -------------------------------------------------


def param_vector(h: Hypothesis) -> np.ndarray:
    parts = [h.w]
    if h.row.has_bias:
        parts.append(np.array([h.b]))
    for W, bv in h.layers:
        parts += [W.ravel(), bv]
    return np.concatenate(parts)


def with_params(h: Hypothesis, theta: np.ndarray) -> Hypothesis:
    theta = np.asarray(theta, dtype=float)
    k = h.w.size
    w = theta[:k]
    b = 0.0
    if h.row.has_bias:
        b = float(theta[k])
        k += 1
    layers = []
    for W, bv in h.layers:
        W2 = theta[k:k + W.size].reshape(W.shape)
        k += W.size
        layers.append((W2, theta[k:k + bv.size].copy()))
        k += bv.size
    return replace(h, w=w.copy(), b=b, layers=tuple(layers))


def risk_and_grad(h: Hypothesis, X: np.ndarray, y: np.ndarray, coef: np.ndarray) -> tuple[float, np.ndarray]:
    """``sum_i coef_i * loss(y_i, h(x_i))`` and a subgradient in parameter space."""
    kind = h.row.loss
    if h.row.hclass != "nn":
        Phi = features(h, X)
        s = Phi @ param_vector(h)
        value = float(coef @ _loss_from_score(kind, y, s))
        return value, Phi.T @ (coef * _dloss_dscore(kind, y, s))
    acts = _forward(h, X)
    out = acts[-1]
    s = out @ h.w + h.b
    value = float(coef @ _loss_from_score(kind, y, s))
    g_s = coef * _dloss_dscore(kind, y, s)
    grads = [out.T @ g_s, np.array([g_s.sum()])]
    delta = np.outer(g_s, h.w)
    layer_grads = []
    for i in range(len(h.layers) - 1, -1, -1):
        W, _ = h.layers[i]
        inp = X if i == 0 else np.maximum(acts[i], 0.0)
        layer_grads.append((delta.T @ inp, delta.sum(axis=0)))
        if i:
            delta = (delta @ W) * (acts[i] > 0)
    for gW, gb in reversed(layer_grads):
        grads += [gW.ravel(), gb]
    return value, np.concatenate(grads)


# spectral norms -------------------------------------------------------------


def spectral_norm(W: np.ndarray, tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER) -> float:
    """Largest singular value by power iteration on ``W^T W``.

    The start vector is fixed, so the result is deterministic.
    """
    W = np.atleast_2d(np.asarray(W, dtype=float))
    if not np.any(W):
        return 0.0
    v = _power_start(W.shape[1])
    sigma = 0.0
    for _ in range(max_iter):
        u = W @ v
        new_sigma = math.sqrt(u @ u)
        if new_sigma == 0.0:
            # start vector in the null space; restart along the heaviest row of W
            v = W[np.argmax(np.abs(W).sum(axis=1))].copy()
            v /= math.sqrt(v @ v)
            continue
        v = W.T @ u
        v /= math.sqrt(v @ v)
        if new_sigma - sigma <= tol * new_sigma:
            return new_sigma
        sigma = new_sigma
    return sigma


_POWER_STARTS: dict[int, np.ndarray] = {}


def _power_start(n: int) -> np.ndarray:
    if n not in _POWER_STARTS:
        v = make_rng(0x5EED).standard_normal(n)
        _POWER_STARTS[n] = v / np.linalg.norm(v)
    return _POWER_STARTS[n].copy()


def network_lipschitz(h: Hypothesis) -> float:
    return float(np.linalg.norm(h.w)) * math.prod(spectral_norm(W) for W, _ in h.layers)


# projection -----------------------------------------------------------------


def constraint_radius(h: Hypothesis, b: float | None = None) -> float:
    """Radius of the norm ball the weight vector must lie in.

    Raises ValueError when the setting's bound is not positive.
    """
    sid = h.setting
    if sid in (SettingId.LIN_L1, SettingId.SVM_HINGE, SettingId.NN_HINGE):
        return 1.0
    if sid == SettingId.GAUSS_L1:
        if h.mx == 0:
            return math.inf
        return h.width**2 / (2.0 * h.mx)
    if h.mx <= 0:
        raise ValueError(f"{sid.value} needs a positive domain bound M_X")
    if sid == SettingId.LOGISTIC_LOG:
        return LOGISTIC_RADIUS / h.mx
    b = h.b if b is None else b
    r = (1.0 - h.my - abs(b)) / h.mx
    if r <= 0:
        raise ValueError(f"infeasible LIN_L2 constraint: M_Y + |b| = {h.my + abs(b)} >= 1")
    return r


def _clip_norm(v: np.ndarray, r: float, ord=2) -> np.ndarray:
    n = float(np.linalg.norm(v, ord=ord))
    if n > r * (1.0 + FEAS_TOL):
        return v * (r / n)
    return v


def project(h: Hypothesis) -> Hypothesis:
    """Rescale parameters onto the setting's feasible set.

    Feasible parameters come back unchanged, so the map is idempotent.
    Norm constraints are enforced radially; the network's product
    constraint is split evenly across its ``L + 1`` factors.
    """
    sid = h.setting
    b = h.b
    if h.bias_bound is not None and h.row.has_bias:
        b = float(np.clip(b, -h.bias_bound, h.bias_bound))
    if sid == SettingId.NN_HINGE:
        layers = [(W, bv) for W, bv in h.layers]
        if h.bias_bound is not None:
            layers = [(W, _clip_norm(bv, h.bias_bound)) for W, bv in layers]
        o = h.w
        product = float(np.linalg.norm(o)) * math.prod(spectral_norm(W) for W, _ in layers)
        if product > 1.0 + FEAS_TOL:
            gamma = product ** (-1.0 / (len(layers) + 1))
            o = o * gamma
            layers = [(W * gamma, bv) for W, bv in layers]
        return replace(h, w=o, b=b, layers=tuple(layers))
    ord_ = 1 if sid == SettingId.GAUSS_L1 else 2
    r = constraint_radius(h, b)
    return replace(h, w=_clip_norm(h.w, r, ord_), b=b)


def project_batch(h: Hypothesis, theta: np.ndarray) -> np.ndarray:
    """Row-wise :func:`project` for stacked parameter vectors."""
    theta = np.array(theta, dtype=float, copy=True)
    if h.row.hclass == "nn":
        return np.stack([param_vector(project(with_params(h, t))) for t in theta])
    k = h.w.size
    if h.row.has_bias and h.bias_bound is not None:
        theta[:, k] = np.clip(theta[:, k], -h.bias_bound, h.bias_bound)
    if h.setting == SettingId.LIN_L2:
        r = (1.0 - h.my - np.abs(theta[:, k])) / h.mx
        if np.any(r <= 0):
            raise ValueError("infeasible LIN_L2 constraint in batch")
    else:
        r = np.full(len(theta), constraint_radius(h))
    ord_ = 1 if h.setting == SettingId.GAUSS_L1 else 2
    n = np.linalg.norm(theta[:, :k], ord=ord_, axis=1)
    over = n > r * (1.0 + FEAS_TOL)
    theta[over, :k] *= (r[over] / n[over])[:, None]
    return theta


# certificates ---------------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    setting: SettingId
    kind: str
    value: float
    passes: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"setting": self.setting.value, "kind": self.kind, "value": self.value,
                "passes": self.passes, **({"detail": self.detail} if self.detail else {})}


def certify(h: Hypothesis, tol: float = CERT_TOL) -> Certificate:
    """Analytic bound showing the loss class lies in the row's generator.

    Kantorovich rows report a Lipschitz constant of ``x -> loss(y, h(x))``;
    TV rows report a bound on ``sup |loss|`` over the domain and labels.
    """
    sid = h.setting
    kind = h.row.certificate_kind
    detail: dict = {}
    if sid in (SettingId.LIN_L1, SettingId.SVM_HINGE):
        value = float(np.linalg.norm(h.w))
        passes = value <= 1.0 + tol
    elif sid == SettingId.GAUSS_L1:
        value = 2.0 * h.mx / h.width**2 * float(np.linalg.norm(h.w, 1))
        passes = value <= 1.0 + tol
    elif sid == SettingId.NN_HINGE:
        norms = [spectral_norm(W) for W, _ in h.layers]
        detail = {"output_norm": float(np.linalg.norm(h.w)), "layer_norms": norms}
        value = float(np.linalg.norm(h.w)) * math.prod(norms)
        passes = value <= 1.0 + tol
    elif sid == SettingId.LIN_L2:
        residual = h.my + float(np.linalg.norm(h.w)) * h.mx + abs(h.b)
        detail = {"residual_bound": residual}
        value = residual**2
        passes = residual <= 1.0 + tol
    else:
        value = math.log1p(math.exp(float(np.linalg.norm(h.w)) * h.mx))
        passes = value <= 1.0 + tol
    return Certificate(sid, kind, value, bool(passes), detail)


def label_draws(row: SettingRow, my: float, rng: np.random.Generator, n: int) -> np.ndarray:
    if row.label_space == LABELS_PM1:
        return rng.choice([-1.0, 1.0], size=n)
    if row.label_space == LABELS_01:
        return rng.choice([0.0, 1.0], size=n)
    return rng.uniform(-my, my, size=n)


def probe_membership(h: Hypothesis, task: SyntheticTask, trials: int = 10_000, seed: int = 0,
                     local_scale: float = 0.05) -> float:
    """Worst empirical violation statistic of the generator membership.

    Kantorovich rows: max of ``|l(x1) - l(x2)| / ||x1 - x2||`` over sampled
    pairs; half the pairs are local perturbations ``x2 = x1 + eps`` so the
    steepest regions are reached.  TV rows: max of ``|l(x)|``.  Labels are
    drawn from the setting's whole label space, since membership must hold
    for every label.  Certified hypotheses score at most one.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = make_rng(seed)
    row = h.row
    x1 = task.draw_x(rng, trials)
    y = label_draws(row, task.my, rng, trials)
    if row.generator == TOTAL_VARIATION:
        return float(np.max(np.abs(pointwise_loss(h, x1, y))))
    far = task.draw_x(rng, trials)
    near = x1 + local_scale * task.mx * rng.standard_normal(x1.shape) * rng.random((trials, 1))
    near = clip_to_ball(near, task.mx)
    x2 = np.where((rng.random(trials) < 0.5)[:, None], near, far)
    dist = np.linalg.norm(x1 - x2, axis=1)
    keep = dist > 1e-12
    if not np.any(keep):
        return 0.0
    gap = np.abs(pointwise_loss(h, x1[keep], y[keep]) - pointwise_loss(h, x2[keep], y[keep]))
    return float(np.max(gap / dist[keep]))


# construction and training -------------------------------------------------


def init_hypothesis(setting: SettingId | str, dim: int, *, mx: float, my: float = 0.0,
                    hidden: Sequence[int] = (8,), centers=None, n_centers: int = 5,
                    width: float = 1.0, bias_bound: float | None = None, seed: int = 0) -> Hypothesis:
    """Feasible starting point for ``setting``.

    Linear-in-parameter classes start at zero.  Networks start from small
    random weights (all-zero ReLU networks have zero gradients).  Gaussian
    centers default to points drawn uniformly from the domain ball.
    """
    sid = SettingId(setting)
    rng = make_rng(seed)
    if sid == SettingId.NN_HINGE:
        sizes = [dim, *hidden]
        layers = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            layers.append((rng.standard_normal((fan_out, fan_in)) / math.sqrt(fan_in), np.zeros(fan_out)))
        o = rng.standard_normal(sizes[-1]) / math.sqrt(sizes[-1])
        h = Hypothesis(sid, o, 0.0, tuple(layers), mx=mx, my=my, bias_bound=bias_bound)
        return project(h)
    if sid == SettingId.GAUSS_L1:
        if centers is None:
            direction = rng.standard_normal((n_centers, dim))
            direction /= np.linalg.norm(direction, axis=1, keepdims=True)
            centers = direction * (mx * rng.random((n_centers, 1)) ** (1.0 / dim))
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        return Hypothesis(sid, np.zeros(len(centers)), centers=centers, width=width, mx=mx, my=my)
    if sid == SettingId.LIN_L2 and bias_bound is None:
        bias_bound = 0.5 * (1.0 - my)
    return Hypothesis(sid, np.zeros(dim), 0.0, mx=mx, my=my, bias_bound=bias_bound)


def template_for(setting: SettingId | str, task: SyntheticTask, model: dict | None = None,
                 bias_bound: float | None = 1.0, seed: int = 0) -> Hypothesis:
    """Class template for ``setting`` on ``task`` from a model options dict."""
    model = dict(model or {})
    sid = SettingId(setting)
    if sid == SettingId.LIN_L2 and bias_bound is not None:
        bias_bound = min(bias_bound, 0.5 * (1.0 - task.my))
    return init_hypothesis(
        sid, task.dim, mx=task.mx, my=task.my,
        hidden=tuple(model.get("hidden", (8,))),
        centers=model.get("centers"),
        n_centers=int(model.get("n_centers", 5)),
        width=float(model.get("width", 1.0)),
        bias_bound=bias_bound, seed=seed,
    )


@dataclass(frozen=True)
class OptimizerConfig:
    steps: int = 500
    step_c: float = 0.5

    @classmethod
    def from_dict(cls, doc: dict | None) -> "OptimizerConfig":
        return cls(**(doc or {}))


@dataclass(frozen=True, eq=False)
class TrainResult:
    hypothesis: Hypothesis
    risks: np.ndarray
    best_risks: np.ndarray


def fit(template: Hypothesis, data: Pool, opt: OptimizerConfig | None = None) -> TrainResult:
    """Projected subgradient descent on the empirical risk.

    Step ``t`` (from 1) uses size ``step_c / sqrt(t)``; every iterate is
    projected back onto the feasible set and the best iterate is returned.
    ``risks`` holds the risk of every iterate including the start, and
    ``best_risks`` its running minimum.
    """
    opt = opt or OptimizerConfig()
    if len(data) == 0:
        raise ValueError("cannot train on an empty sample")
    if not data.is_fully_labeled:
        raise ValueError("training data must be fully labeled")
    row = template.row
    check_labels(row.loss, data.labels)
    X, y = data.points, data.labels
    coef = np.full(len(y), 1.0 / len(y))
    h = project(template)
    best, best_risk = h, math.inf
    risks = []
    for t in range(opt.steps + 1):
        risk, grad = risk_and_grad(h, X, y, coef)
        risks.append(risk)
        if risk < best_risk:
            best, best_risk = h, risk
        if t == opt.steps:
            break
        h = project(with_params(h, param_vector(h) - opt.step_c / math.sqrt(t + 1) * grad))
    risks_arr = np.asarray(risks)
    return TrainResult(best, risks_arr, np.minimum.accumulate(risks_arr))


def train(template: Hypothesis, data: Pool, opt: OptimizerConfig | None = None) -> Hypothesis:
    return fit(template, data, opt).hypothesis
