import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from frad.errors import SchemaError, ShapeMismatchError
from frad.mlp import (
    MlpModel,
    MlpTrainConfig,
    PAPER_LEARNING_RATE,
    PAPER_N_HIDDEN,
    forward,
    init_mlp,
    loss_and_gradients,
    train_mlp,
)
from oracles import finite_diff_gradients


def _loss_only(model, X, y, l2):
    return loss_and_gradients(model, X, y, l2)[0]


def test_init_biases_zero_weights_bounded():
    cfg = MlpTrainConfig(n_hidden=16, seed=5)
    m = init_mlp(10, cfg)
    assert (m.b1 == 0).all() and (m.b2 == 0).all()
    assert np.abs(m.W1).max() <= math.sqrt(6.0 / 10)
    assert np.abs(m.W2).max() <= math.sqrt(6.0 / 16)


def test_init_deterministic():
    cfg = MlpTrainConfig(n_hidden=8, seed=9)
    a, b = init_mlp(5, cfg), init_mlp(5, cfg)
    assert np.array_equal(a.W1, b.W1) and np.array_equal(a.W2, b.W2)


def test_forward_uniform_at_zero_weights():
    m = MlpModel(W1=np.zeros((4, 6)), b1=np.zeros(6), W2=np.zeros((6, 3)), b2=np.zeros(3))
    out = forward(m, np.ones(4))
    assert np.abs(out - 1.0 / 3.0).max() < 1e-15


def test_forward_sums_to_one(rng):
    cfg = MlpTrainConfig(n_hidden=7, seed=1)
    m = init_mlp(5, cfg)
    for _ in range(20):
        out = forward(m, rng.normal(size=5))
        assert abs(out.sum() - 1.0) < 1e-12
        assert (out >= 0).all()


def test_softmax_shift_invariance(rng):
    cfg = MlpTrainConfig(n_hidden=7, seed=2)
    m = init_mlp(5, cfg)
    x = rng.normal(size=5)
    base = forward(m, x)
    shifted = MlpModel(W1=m.W1, b1=m.b1, W2=m.W2, b2=m.b2 + 13.7)
    assert np.abs(forward(shifted, x) - base).max() < 1e-12


def test_uniform_prediction_loss_is_ln3(rng):
    m = MlpModel(W1=np.zeros((4, 5)), b1=np.zeros(5), W2=np.zeros((5, 3)), b2=np.zeros(3))
    X = rng.normal(size=(12, 4))
    y = rng.integers(0, 3, size=12)
    loss, _ = loss_and_gradients(m, X, y)
    assert loss == pytest.approx(math.log(3.0), abs=1e-12)


def test_perfect_prediction_loss_vanishes():
    # bias-driven logits force probability >= 1 - 1e-9 on the true class
    m = MlpModel(W1=np.zeros((2, 2)), b1=np.zeros(2), W2=np.zeros((2, 3)),
                 b2=np.array([50.0, 0.0, 0.0]))
    X = np.zeros((4, 2))
    y = np.zeros(4, dtype=int)
    loss, _ = loss_and_gradients(m, X, y)
    assert loss < 1e-8


def test_gradients_match_finite_differences():
    worst = 0.0
    for seed in range(6):
        rng = np.random.default_rng(seed)
        cfg = MlpTrainConfig(n_hidden=5, seed=seed)
        m = init_mlp(4, cfg)
        X = rng.normal(size=(8, 4))
        y = rng.integers(0, 3, size=8)
        _, grads = loss_and_gradients(m, X, y, 0.001)
        fd = finite_diff_gradients(m, X, y, 0.001, _loss_only, step=1e-5)
        for name in ("W1", "b1", "W2", "b2"):
            denom = max(1e-6, np.abs(grads[name]).max(), np.abs(fd[name]).max())
            worst = max(worst, np.abs(grads[name] - fd[name]).max() / denom)
    assert worst <= 1e-5


def test_train_accepts_paper_configuration():
    cfg = MlpTrainConfig()
    assert cfg.n_hidden == PAPER_N_HIDDEN == 233
    assert cfg.initial_learning_rate == PAPER_LEARNING_RATE == 0.0021547501740925594


def test_train_reaches_high_accuracy_on_separable_subset(rng):
    # two linearly separable clusters, labels 0/1 only
    n = 200
    X = np.vstack([rng.normal(loc=-2.0, scale=0.5, size=(n // 2, 2)),
                   rng.normal(loc=+2.0, scale=0.5, size=(n // 2, 2))])
    y = np.array([0] * (n // 2) + [1] * (n // 2))
    cfg = MlpTrainConfig(n_hidden=16, epochs=200, batch_size=32, seed=3,
                         initial_learning_rate=0.005)
    model, trace = train_mlp(X, y, cfg)
    pred = np.argmax(model.predict_proba(X), axis=1)
    assert (pred == y).mean() >= 0.99
    assert len(trace) == 200


def test_train_deterministic(small_noisy_dataset):
    d = small_noisy_dataset
    cfg = MlpTrainConfig(n_hidden=12, epochs=5, batch_size=32, seed=11)
    m1, t1 = train_mlp(d.features, d.labels, cfg)
    m2, t2 = train_mlp(d.features, d.labels, cfg)
    assert np.array_equal(m1.W1, m2.W1) and np.array_equal(m1.b2, m2.b2)
    assert t1 == t2


def test_training_loss_trend_on_fixed_dataset(small_noisy_dataset):
    from frad.features import apply_standardizer, fit_standardizer

    d = small_noisy_dataset
    scaler = fit_standardizer(d.features[:200])
    X = apply_standardizer(scaler, d.features[:200])
    cfg = MlpTrainConfig(n_hidden=16, epochs=60, batch_size=50, seed=5,
                         initial_learning_rate=PAPER_LEARNING_RATE)
    _, trace = train_mlp(X, d.labels[:200], cfg)
    smoothed = np.convolve(trace, np.ones(5) / 5.0, mode="valid")
    assert (np.diff(smoothed) <= 1e-3).all()
    assert smoothed[-1] < smoothed[0]


def test_shape_validation(rng):
    cfg = MlpTrainConfig(n_hidden=4, seed=0)
    m = init_mlp(3, cfg)
    with pytest.raises(ShapeMismatchError):
        forward(m, np.ones(5))
    with pytest.raises(ShapeMismatchError):
        loss_and_gradients(m, rng.normal(size=(4, 7)), np.zeros(4, dtype=int))
    with pytest.raises(SchemaError):
        train_mlp(np.empty((0, 3)), np.empty(0, dtype=int), cfg)


def test_config_validation():
    with pytest.raises(SchemaError):
        MlpTrainConfig(n_hidden=0)
    with pytest.raises(SchemaError):
        MlpTrainConfig(initial_learning_rate=0.0)
    with pytest.raises(SchemaError):
        MlpTrainConfig(batch_size=0)


def test_model_dict_round_trip(rng):
    cfg = MlpTrainConfig(n_hidden=6, seed=8)
    m = init_mlp(4, cfg)
    m2 = MlpModel.from_dict(m.as_dict())
    x = rng.normal(size=4)
    assert np.array_equal(forward(m, x), forward(m2, x))


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (3,), elements=st.floats(-30, 30)))
def test_softmax_normalization_property(logits):
    m = MlpModel(W1=np.zeros((1, 1)), b1=np.zeros(1), W2=np.zeros((1, 3)), b2=logits)
    out = forward(m, np.zeros(1))
    assert abs(out.sum() - 1.0) < 1e-12
