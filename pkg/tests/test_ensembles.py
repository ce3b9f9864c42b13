import numpy as np
import pytest

import frad.ensembles as ensembles
from frad.datagen import GeneratorConfig, generate_dataset, rule_classify
from frad.ensembles import (
    BoostParams,
    ForestParams,
    fit_boosting,
    fit_random_forest,
    predict_proba,
    predicted_class,
)
from frad.errors import SchemaError, ShapeMismatchError
from frad.evaluate import stratified_split
from frad.tree import TreeParams, fit_classification_tree


def test_single_tree_no_bootstrap_reduces_to_tree(rng):
    X = rng.random((60, 4))
    y = rng.integers(0, 3, size=60)
    tp = TreeParams(max_depth=5, n_feature_candidates=0)
    forest = fit_random_forest(X, y, ForestParams(n_trees=1, bootstrap=False, tree=tp), seed=3)
    from frad.utils import child_seed

    single = fit_classification_tree(X, y, tp, child_seed(3, "tree", 0, "splits"))
    q = rng.random((30, 4))
    assert np.array_equal(forest.predict_proba(q), single.predict_rows(q))


def test_forest_determinism(rng):
    X = rng.random((80, 3))
    y = rng.integers(0, 3, size=80)
    p = ForestParams(n_trees=12)
    m1 = fit_random_forest(X, y, p, seed=9)
    m2 = fit_random_forest(X, y, p, seed=9)
    q = rng.random((20, 3))
    assert np.array_equal(m1.predict_proba(q), m2.predict_proba(q))


def test_forest_thread_count_does_not_change_results(rng):
    X = rng.random((100, 4))
    y = rng.integers(0, 3, size=100)
    p = ForestParams(n_trees=16)
    m1 = fit_random_forest(X, y, p, seed=4, n_threads=1)
    m8 = fit_random_forest(X, y, p, seed=4, n_threads=8)
    assert np.array_equal(m1.predict_proba(X), m8.predict_proba(X))


def test_forest_on_separable_synthetic_data():
    d = generate_dataset(GeneratorConfig(n_total=600, seed=21, noise_sigma=0.0))
    train, test = stratified_split(d, 0.8, seed=0)
    model = fit_random_forest(train.features, train.labels, ForestParams(n_trees=50), seed=1)
    pred = predicted_class(model.predict_proba(test.features))
    assert (pred == test.labels).mean() >= 0.99
    assert (rule_classify(test.features) == test.labels).mean() == 1.0


def test_probability_rows_sum_to_one(rng, small_noisy_dataset):
    d = small_noisy_dataset
    fm = fit_random_forest(d.features, d.labels, ForestParams(n_trees=10), seed=2)
    bm = fit_boosting(d.features, d.labels, BoostParams(n_rounds=5), seed=2)
    q = d.features[:50]
    for m in (fm, bm):
        probs = predict_proba(m, q)
        assert probs.min() >= 0.0 and probs.max() <= 1.0
        assert np.abs(probs.sum(axis=1) - 1.0).max() < 1e-9


def test_boosting_zero_rounds_predicts_priors(rng):
    X = rng.random((60, 3))
    y = np.array([0] * 30 + [1] * 18 + [2] * 12)
    m = fit_boosting(X, y, BoostParams(n_rounds=0), seed=0)
    probs = m.predict_proba(rng.random((7, 3)))
    expected = np.array([0.5, 0.3, 0.2])
    assert np.abs(probs - expected).max() < 1e-9


def test_boosting_zero_rounds_uniform_priors(rng):
    X = rng.random((30, 2))
    y = np.array([0, 1, 2] * 10)
    m = fit_boosting(X, y, BoostParams(n_rounds=0), seed=0)
    probs = m.predict_proba(rng.random((4, 2)))
    assert np.abs(probs - 1.0 / 3.0).max() < 1e-12


def test_boosting_one_round_improves_on_zero(small_noisy_dataset):
    d = small_noisy_dataset
    X, y = d.features[:100], d.labels[:100]
    m0 = fit_boosting(X, y, BoostParams(n_rounds=0), seed=1)
    m1 = fit_boosting(X, y, BoostParams(n_rounds=1), seed=1)
    assert m1.train_loss[1] <= m1.train_loss[0]
    assert m1.train_loss[0] == pytest.approx(m0.train_loss[0], abs=1e-12)


@pytest.mark.parametrize("variant", ["first_order", "second_order"])
def test_boosting_training_loss_monotone(variant, small_noisy_dataset):
    d = small_noisy_dataset
    params = BoostParams(n_rounds=25, learning_rate=0.2, variant=variant,
                         subsample_rows=1.0, subsample_cols=1.0)
    m = fit_boosting(d.features, d.labels, params, seed=7)
    losses = np.array(m.train_loss)
    assert len(losses) == 26
    assert (np.diff(losses) <= 1e-12).all()


def test_first_and_second_order_coincide_with_unit_hessians(rng, monkeypatch):
    X = rng.random((50, 3))
    y = rng.integers(0, 3, size=50)
    monkeypatch.setattr(ensembles, "_second_order_hessians", lambda p: np.ones_like(p))
    forced = fit_boosting(X, y, BoostParams(n_rounds=6, variant="second_order"), seed=5)
    natural = fit_boosting(X, y, BoostParams(n_rounds=6, variant="first_order"), seed=5)
    q = rng.random((20, 3))
    assert np.array_equal(forced.predict_proba(q), natural.predict_proba(q))


def test_boosting_thread_invariance_with_subsampling(rng):
    X = rng.random((90, 4))
    y = rng.integers(0, 3, size=90)
    p = BoostParams(n_rounds=8, subsample_rows=0.7, subsample_cols=0.6,
                    variant="second_order")
    m1 = fit_boosting(X, y, p, seed=11, n_threads=1)
    m8 = fit_boosting(X, y, p, seed=11, n_threads=8)
    assert np.array_equal(m1.predict_proba(X), m8.predict_proba(X))
    assert m1.train_loss == m8.train_loss


def test_shape_validation(rng):
    with pytest.raises(ShapeMismatchError):
        fit_random_forest(rng.random((5, 2)), np.zeros(4, dtype=int), ForestParams(), seed=0)
    m = fit_random_forest(rng.random((6, 2)), np.array([0, 1, 2, 0, 1, 2]),
                          ForestParams(n_trees=2), seed=0)
    with pytest.raises(ShapeMismatchError):
        m.predict_proba(rng.random((3, 5)))


def test_param_validation():
    with pytest.raises(SchemaError):
        ForestParams(n_trees=0)
    with pytest.raises(SchemaError):
        BoostParams(learning_rate=0.0)
    with pytest.raises(SchemaError):
        BoostParams(variant="third_order")
    with pytest.raises(SchemaError):
        BoostParams(subsample_rows=0.0)


def test_predicted_class_lowest_index_tie_break():
    probs = np.array([[0.4, 0.4, 0.2], [0.2, 0.4, 0.4]])
    assert predicted_class(probs).tolist() == [0, 1]
