import numpy as np
import pytest

from frad.data import AttackClass, save_dataset
from frad.datagen import (
    GeneratorConfig,
    class_counts_for,
    generate_dataset,
    generate_instance,
    rule_classify,
)
from frad.errors import SchemaError
from frad.utils import child_rng


def test_paper_scale_counts_equal_proportions():
    # round(9798/3) per class, remainder to class 0
    assert class_counts_for(9798, (1 / 3, 1 / 3, 1 / 3)) == [3266, 3266, 3266]


def test_count_rounding_remainder_to_class_zero():
    assert sum(class_counts_for(10, (1 / 3, 1 / 3, 1 / 3))) == 10
    assert class_counts_for(10, (1 / 3, 1 / 3, 1 / 3))[0] == 4


def test_empty_dataset():
    d = generate_dataset(GeneratorConfig(n_total=0, seed=0))
    assert d.n_rows == 0
    assert d.provenance == "synthetic"


def test_config_validation():
    with pytest.raises(SchemaError):
        GeneratorConfig(n_total=10, class_proportions=(0.5, 0.5, 0.5))
    with pytest.raises(SchemaError):
        GeneratorConfig(n_total=10, noise_sigma=-0.1)
    with pytest.raises(SchemaError):
        GeneratorConfig(n_total=-1)


def test_insertion_instances_have_two_transactions():
    for i in range(50):
        inst = generate_instance(AttackClass.INSERTION, child_rng(7, "i", i))
        assert inst.attacker_tx_count == 2
        assert inst.same_block == 1
        assert inst.victim_failed == 0


def test_displacement_instances_single_tx_higher_fee():
    for i in range(50):
        inst = generate_instance(AttackClass.DISPLACEMENT, child_rng(7, "d", i))
        assert inst.attacker_tx_count == 1
        assert inst.gas_price_ratio > 1.0
        assert inst.interval_blocks == 1


def test_suppression_instances_structure():
    fees = {AttackClass.SUPPRESSION: [], AttackClass.DISPLACEMENT: []}
    for i in range(50):
        inst = generate_instance(AttackClass.SUPPRESSION, child_rng(7, "s", i))
        assert inst.attacker_tx_count >= 3
        assert inst.interval_blocks >= 2
        assert inst.gas_limit_utilization >= 0.9
        fees[AttackClass.SUPPRESSION].append(inst.cumulative_attacker_fee_eth)
        other = generate_instance(AttackClass.DISPLACEMENT, child_rng(7, "d", i))
        fees[AttackClass.DISPLACEMENT].append(other.cumulative_attacker_fee_eth)
    assert np.median(fees[AttackClass.SUPPRESSION]) > 10 * np.median(
        fees[AttackClass.DISPLACEMENT])


def test_instance_determinism_from_fresh_states():
    a = generate_instance(AttackClass.INSERTION, child_rng(99, "row", 5))
    b = generate_instance(AttackClass.INSERTION, child_rng(99, "row", 5))
    assert a == b


def test_dataset_determinism_byte_identical(tmp_path):
    cfg = GeneratorConfig(n_total=120, seed=77)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    save_dataset(generate_dataset(cfg), p1)
    save_dataset(generate_dataset(cfg), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_noise_free_class_structure(small_clean_dataset):
    d = small_clean_dataset
    tx = d.features[:, 0]
    assert (tx[d.labels == 0] == 1).all()
    assert (tx[d.labels == 1] == 2).all()
    assert (tx[d.labels == 2] >= 3).all()
    failed = d.features[:, 9]
    assert set(np.unique(failed)) <= {0.0, 1.0}


def test_noise_free_hand_rule_is_perfect(small_clean_dataset):
    pred = rule_classify(small_clean_dataset.features)
    assert (pred == small_clean_dataset.labels).mean() == 1.0


def test_default_noise_keeps_flags_binary(small_noisy_dataset):
    for col in (8, 9):
        assert set(np.unique(small_noisy_dataset.features[:, col])) <= {0.0, 1.0}


def test_default_noise_keeps_counts_integral(small_noisy_dataset):
    for col in (0, 7, 10):
        column = small_noisy_dataset.features[:, col]
        assert np.array_equal(column, np.round(column))
        assert (column >= 1).all()


def test_proportions_respected():
    d = generate_dataset(GeneratorConfig(n_total=100, seed=5,
                                         class_proportions=(0.5, 0.3, 0.2)))
    assert d.class_counts().tolist() == [50, 30, 20]


def test_custom_suppression_mean_shifts_counts():
    lo = generate_dataset(GeneratorConfig(n_total=90, seed=5, suppression_tx_mean=5.0))
    hi = generate_dataset(GeneratorConfig(n_total=90, seed=5, suppression_tx_mean=60.0))
    assert hi.features[hi.labels == 2, 0].mean() > lo.features[lo.labels == 2, 0].mean()
