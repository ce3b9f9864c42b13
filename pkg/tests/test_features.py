import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from frad.data import AttackClass, FEATURE_NAMES
from frad.datagen import generate_instance
from frad.errors import EmptyInputError, ShapeMismatchError
from frad.features import (
    apply_standardizer,
    featurize,
    fit_standardizer,
    invert_standardizer,
    pearson_correlation,
    render_heatmap,
)
from frad.svgplot import POS_HEX, diverging_color
from frad.utils import child_rng


def test_featurize_arity_and_order():
    inst = generate_instance(AttackClass.INSERTION, child_rng(0, "x"))
    row = featurize(inst)
    assert row.shape == (13,)
    assert row[0] == inst.attacker_tx_count
    assert row[8] == float(inst.same_block) == 1.0
    assert row[12] == inst.gas_limit_utilization


def test_featurize_pure():
    inst = generate_instance(AttackClass.SUPPRESSION, child_rng(1, "x"))
    assert np.array_equal(featurize(inst), featurize(inst))


def test_standardizer_hand_computed_column():
    s = fit_standardizer(np.array([[1.0], [2.0], [3.0]]), feature_names=("c",))
    assert s.means[0] == 2.0
    assert s.stds[0] == pytest.approx(0.816496580927726, abs=1e-15)


def test_standardizer_constant_column_maps_to_zero():
    m = np.array([[5.0], [5.0], [5.0]])
    s = fit_standardizer(m, feature_names=("c",))
    assert s.means[0] == 5.0
    assert s.stds[0] == 1.0
    assert np.array_equal(apply_standardizer(s, m), np.zeros((3, 1)))


def test_standardizer_single_row():
    m = np.array([[3.0, -2.0]])
    s = fit_standardizer(m, feature_names=("a", "b"))
    assert (s.stds == 1.0).all()
    assert np.array_equal(apply_standardizer(s, m), np.zeros((1, 2)))


def test_standardizer_empty_rejected():
    with pytest.raises(EmptyInputError):
        fit_standardizer(np.empty((0, 3)))


def test_apply_standardizer_definition(rng):
    m = rng.normal(size=(50, 4)) * np.array([1, 10, 100, 1000])
    s = fit_standardizer(m, feature_names=tuple("abcd"))
    out = apply_standardizer(s, m)
    assert np.abs(out.mean(axis=0)).max() < 1e-10
    assert np.abs(out.std(axis=0) - 1.0).max() < 1e-10


def test_apply_identity_when_unit_parameters(rng):
    m = rng.normal(size=(5, 3))
    s = fit_standardizer(np.zeros((2, 3)) + np.array([0.0, 0.0, 0.0]),
                         feature_names=tuple("abc"))
    # constant zero columns: means 0, stds stored as 1
    assert np.array_equal(apply_standardizer(s, m), m)


def test_apply_on_means_row_gives_zero(rng):
    m = rng.normal(size=(20, 3))
    s = fit_standardizer(m, feature_names=tuple("abc"))
    out = apply_standardizer(s, s.means.reshape(1, -1))
    assert np.abs(out).max() < 1e-12


def test_apply_column_mismatch():
    s = fit_standardizer(np.ones((3, 2)) + np.arange(3)[:, None],
                         feature_names=("a", "b"))
    with pytest.raises(ShapeMismatchError):
        apply_standardizer(s, np.zeros((2, 5)))


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (7, 3), elements=st.floats(0.001, 1e6)))
def test_standardize_round_trip(m):
    s = fit_standardizer(m, feature_names=tuple("abc"))
    back = invert_standardizer(s, apply_standardizer(s, m))
    assert np.allclose(back, m, rtol=1e-9, atol=1e-9)


def test_train_only_fitting_leaves_test_uncentered(rng):
    train = rng.normal(loc=0.0, size=(100, 2))
    test = rng.normal(loc=5.0, size=(100, 2))
    s = fit_standardizer(train, feature_names=("a", "b"))
    out = apply_standardizer(s, test)
    assert np.abs(out.mean(axis=0)).min() > 1.0  # test means far from 0


def test_pearson_self_and_anti_correlation(rng):
    x = rng.normal(size=40)
    m = np.column_stack([x, -x])
    c = pearson_correlation(m, feature_names=("x", "neg"))
    assert c.entries[0, 0] == 1.0
    assert c.entries[0, 1] == pytest.approx(-1.0, abs=1e-12)


def test_pearson_hand_example():
    m = np.column_stack([[1.0, 2.0, 3.0], [2.0, 4.0, 6.1]])
    c = pearson_correlation(m, feature_names=("x", "y"))
    assert c.entries[0, 1] == pytest.approx(0.9999, abs=1e-3)


def test_pearson_constant_column_zeroed():
    m = np.column_stack([[1.0, 2.0, 3.0], [7.0, 7.0, 7.0]])
    c = pearson_correlation(m, feature_names=("x", "const"))
    assert c.entries[1, 1] == 0.0
    assert c.entries[0, 1] == 0.0
    assert c.entries[0, 0] == 1.0


def test_pearson_requires_two_rows():
    with pytest.raises(EmptyInputError):
        pearson_correlation(np.ones((1, 2)))


def test_pearson_symmetric_and_bounded(small_noisy_dataset):
    c = pearson_correlation(small_noisy_dataset.features, FEATURE_NAMES)
    assert np.abs(c.entries - c.entries.T).max() <= 1e-12
    assert c.entries.min() >= -1.0 - 1e-12
    assert c.entries.max() <= 1.0 + 1e-12


def test_heatmap_cell_rects_and_determinism(tmp_path):
    m = np.column_stack([[1.0, 2.0, 3.0], [3.0, 1.0, 2.0]])
    c = pearson_correlation(m, feature_names=("a", "b"))
    p1, p2 = tmp_path / "a.svg", tmp_path / "b.svg"
    render_heatmap(c, p1)
    render_heatmap(c, p2)
    body = p1.read_text()
    assert body.count("<rect") == 4
    assert p1.read_bytes() == p2.read_bytes()


def test_heatmap_max_value_color(tmp_path):
    assert diverging_color(1.0) == POS_HEX
    m = np.column_stack([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]])
    c = pearson_correlation(m, feature_names=("a", "b"))
    render_heatmap(c, tmp_path / "c.svg")
    assert POS_HEX in (tmp_path / "c.svg").read_text()


def test_heatmap_unwritable_path(small_noisy_dataset):
    from frad.errors import DataFileError

    c = pearson_correlation(small_noisy_dataset.features, FEATURE_NAMES)
    with pytest.raises(DataFileError):
        render_heatmap(c, "/nonexistent-dir/x.svg")
