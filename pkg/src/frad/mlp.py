"""Single-hidden-layer softmax MLP trained with mini-batch Adam.

Forward pass: softmax(W2' relu(W1' x + b1) + b2), numerically stabilized by
max-subtraction. The loss is mean cross-entropy plus an optional L2 term
l2 * (sum W1^2 + sum W2^2) on the weight matrices (biases are not decayed).
Gradients are exact analytic backprop; the test suite holds them to central
finite differences.

Training shuffles with a seeded permutation every epoch and applies Adam
updates in a fixed tensor order, so a (data, config) pair always yields the
same weights.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SchemaError, ShapeMismatchError
from .utils import child_rng

N_CLASSES = 3

# published reference configuration for this classifier family
PAPER_N_HIDDEN = 233
PAPER_LEARNING_RATE = 0.0021547501740925594


@dataclass(frozen=True)
class MlpTrainConfig:
    n_hidden: int = PAPER_N_HIDDEN
    initial_learning_rate: float = PAPER_LEARNING_RATE
    epochs: int = 300
    batch_size: int = 64
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    seed: int = 0
    l2_weight_decay: float = 0.0

    def __post_init__(self):
        if self.n_hidden < 1:
            raise SchemaError("n_hidden must be >= 1")
        if not self.initial_learning_rate > 0:
            raise SchemaError("initial_learning_rate must be positive")
        if self.epochs < 0:
            raise SchemaError("epochs must be >= 0")
        if self.batch_size < 1:
            raise SchemaError("batch_size must be >= 1")
        if self.l2_weight_decay < 0:
            raise SchemaError("l2_weight_decay must be >= 0")


@dataclass
class MlpModel:
    W1: np.ndarray  # (n_features, n_hidden)
    b1: np.ndarray  # (n_hidden,)
    W2: np.ndarray  # (n_hidden, 3)
    b2: np.ndarray  # (3,)
    activation: str = "relu"

    @property
    def n_features(self) -> int:
        return self.W1.shape[0]

    @property
    def n_hidden(self) -> int:
        return self.W1.shape[1]

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ShapeMismatchError(
                f"model expects {self.n_features} features, got {X.shape}")
        return np.exp(_forward_batch(self, X)[2])

    def as_dict(self) -> dict:
        return {
            "activation": self.activation,
            "shape": [int(self.n_features), int(self.n_hidden), N_CLASSES],
            "W1": self.W1.ravel().tolist(),
            "b1": self.b1.tolist(),
            "W2": self.W2.ravel().tolist(),
            "b2": self.b2.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MlpModel":
        n_in, n_hid, n_out = d["shape"]
        return cls(
            W1=np.array(d["W1"], dtype=np.float64).reshape(n_in, n_hid),
            b1=np.array(d["b1"], dtype=np.float64),
            W2=np.array(d["W2"], dtype=np.float64).reshape(n_hid, n_out),
            b2=np.array(d["b2"], dtype=np.float64),
            activation=d.get("activation", "relu"),
        )


def init_mlp(n_features: int, cfg: MlpTrainConfig, seed: int | None = None) -> MlpModel:
    """He-uniform weights in (-sqrt(6/fan_in), sqrt(6/fan_in)); zero biases."""
    if n_features < 1:
        raise SchemaError("n_features must be >= 1")
    rng = child_rng(cfg.seed if seed is None else seed, "mlp-init")
    lim1 = np.sqrt(6.0 / n_features)
    lim2 = np.sqrt(6.0 / cfg.n_hidden)
    return MlpModel(
        W1=rng.uniform(-lim1, lim1, size=(n_features, cfg.n_hidden)),
        b1=np.zeros(cfg.n_hidden),
        W2=rng.uniform(-lim2, lim2, size=(cfg.n_hidden, N_CLASSES)),
        b2=np.zeros(N_CLASSES),
    )


def _forward_batch(m: MlpModel, X: np.ndarray):
    pre = X @ m.W1 + m.b1
    hidden = np.maximum(pre, 0.0)
    logits = hidden @ m.W2 + m.b2
    z = logits - logits.max(axis=1, keepdims=True)
    log_probs = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    return pre, hidden, log_probs


def forward(m: MlpModel, x: np.ndarray) -> np.ndarray:
    """Probability vector for a single feature row."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (m.n_features,):
        raise ShapeMismatchError(f"expected a row of {m.n_features} features")
    return np.exp(_forward_batch(m, x.reshape(1, -1))[2][0])


def loss_and_gradients(m: MlpModel, X: np.ndarray, y: np.ndarray, l2: float = 0.0):
    """Mean cross-entropy (+ L2) and exact gradients for every tensor."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[1] != m.n_features:
        raise ShapeMismatchError("batch shapes do not match the model")
    n = X.shape[0]
    pre, hidden, log_probs = _forward_batch(m, X)
    loss = float(-log_probs[np.arange(n), y].mean()) + l2 * (
        float((m.W1 ** 2).sum()) + float((m.W2 ** 2).sum()))
    probs = np.exp(log_probs)
    dlogits = probs.copy()
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n
    dW2 = hidden.T @ dlogits + 2.0 * l2 * m.W2
    db2 = dlogits.sum(axis=0)
    dhidden = dlogits @ m.W2.T
    dhidden[pre <= 0.0] = 0.0
    dW1 = X.T @ dhidden + 2.0 * l2 * m.W1
    db1 = dhidden.sum(axis=0)
    return loss, {"W1": dW1, "b1": db1, "W2": dW2, "b2": db2}


def train_mlp(X: np.ndarray, y: np.ndarray, cfg: MlpTrainConfig):
    """Fit with mini-batch Adam at the configured constant learning rate.

    Returns (model, per-epoch mean training loss).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ShapeMismatchError("X rows and y length must match")
    if X.shape[0] == 0:
        raise SchemaError("cannot train on an empty dataset")
    model = init_mlp(X.shape[1], cfg)
    tensors = ("W1", "b1", "W2", "b2")
    adam_m = {t: np.zeros_like(getattr(model, t)) for t in tensors}
    adam_v = {t: np.zeros_like(getattr(model, t)) for t in tensors}
    shuffle_rng = child_rng(cfg.seed, "mlp-shuffle")
    n = X.shape[0]
    step = 0
    trace = []
    for _ in range(cfg.epochs):
        perm = shuffle_rng.permutation(n)
        epoch_losses = []
        for start in range(0, n, cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            loss, grads = loss_and_gradients(model, X[idx], y[idx], cfg.l2_weight_decay)
            epoch_losses.append(loss)
            step += 1
            bc1 = 1.0 - cfg.adam_beta1 ** step
            bc2 = 1.0 - cfg.adam_beta2 ** step
            for t in tensors:
                g = grads[t]
                adam_m[t] = cfg.adam_beta1 * adam_m[t] + (1.0 - cfg.adam_beta1) * g
                adam_v[t] = cfg.adam_beta2 * adam_v[t] + (1.0 - cfg.adam_beta2) * g * g
                update = (adam_m[t] / bc1) / (np.sqrt(adam_v[t] / bc2) + cfg.adam_epsilon)
                setattr(model, t, getattr(model, t) - cfg.initial_learning_rate * update)
        trace.append(float(np.mean(epoch_losses)))
    return model, trace
