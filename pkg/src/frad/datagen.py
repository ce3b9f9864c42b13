"""Synthetic labeled front-running scenarios.

Stands in for the (unavailable) production attack dataset. Each class is
generated with the structure that defines it on-chain:

* displacement: a single attacker transaction outbidding the victim's gas
  price inside one block; the victim's transaction usually fails.
* insertion: exactly two attacker transactions bracketing the victim in the
  same block (the recorded gas_price_ratio refers to the front transaction;
  the back transaction implicitly bids below the victim).
* suppression: a burst of gas-hungry attacker transactions across several
  blocks, driving block utilization toward the gas limit and a cumulative
  fee far above the other classes.

Continuous fields are drawn log-normally around the class medians in the
``PROFILES`` table, then everything except the provenance flags is jittered
multiplicatively by ``noise_sigma``. Count-valued columns are re-rounded
after jitter and flag columns flip with probability FLAG_FLIP_SCALE *
noise_sigma, so at noise_sigma = 0 the class structure is exact (a
one-line rule on attacker_tx_count separates the classes perfectly) while
at the default noise the classes overlap like a realistic sample.

Generation is deterministic: row i draws from an rng derived from
(seed, "row", i), so output is independent of scheduling and identical
configs produce byte-identical CSVs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import FEATURE_NAMES, AttackClass, Dataset, AttackInstance, decode_label
from .errors import SchemaError
from .features import featurize
from .utils import child_rng

# column groups for noise application (indices into FEATURE_NAMES)
_COUNT_COLS = (0, 7, 10)          # attacker_tx_count, block_position_delta, interval_blocks
_FLAG_COLS = (8, 9)               # same_block, victim_failed
_CONT_COLS = (1, 2, 3, 4, 5, 6, 11)
_UTIL_COL = 12                    # gas_limit_utilization, jittered then clamped to [0, 1]

# extra jitter applied on top of noise_sigma for count columns / flag flips;
# both vanish at noise_sigma = 0
COUNT_JITTER_SCALE = 2.5
FLAG_FLIP_SCALE = 0.5

# suppression tx counts are overdispersed (negative binomial = Poisson with
# gamma-mixed rate); keeps the stated mean but yields short bursts too
SUPPRESSION_NB_SHAPE = 3.0

# class-conditional constants: (median, log-sigma) pairs for log-normal draws,
# Bernoulli rates for flags, Poisson means for count offsets
PROFILES = {
    AttackClass.DISPLACEMENT: {
        "gas_price_excess": (0.50, 0.45),   # gas_price_ratio = 1 + excess
        "victim_gas_price_gwei": (40.0, 0.50),
        "attacker_gas_used": (150e3, 0.35),
        "victim_gas_used": (140e3, 0.45),
        "victim_value_eth": (0.45, 0.70),
        "attacker_value_eth": (0.45, 0.70),
        "gas_limit_utilization": (0.40, 0.35),
        "fee_sigma": 0.25,
        "same_block_rate": 0.80,
        "victim_failed_rate": 0.90,
        "delta_mean": 1.0,                  # block_position_delta = 1 + Poisson
        "interval_base": 1, "interval_mean": 0.0,
    },
    AttackClass.INSERTION: {
        "gas_price_excess": (0.30, 0.45),
        "victim_gas_price_gwei": (42.0, 0.50),
        "attacker_gas_used": (160e3, 0.35),
        "victim_gas_used": (150e3, 0.45),
        "victim_value_eth": (0.60, 0.70),
        "attacker_value_eth": (0.55, 0.70),
        "gas_limit_utilization": (0.45, 0.35),
        "fee_sigma": 0.25,
        "same_block_rate": 1.0,             # structural: bracket is intra-block
        "victim_failed_rate": 0.0,          # structural: victim executes, at a worse price
        "delta_mean": 0.0,                  # victim immediately behind the front tx
        "interval_base": 1, "interval_mean": 0.0,
    },
    AttackClass.SUPPRESSION: {
        "gas_price_excess": (0.40, 0.45),
        "victim_gas_price_gwei": (40.0, 0.50),
        "attacker_gas_used": (700e3, 0.70),
        "victim_gas_used": (130e3, 0.45),
        "victim_value_eth": (0.40, 0.70),
        "attacker_value_eth": (0.05, 0.80),
        "gas_limit_utilization": (0.94, 0.05),  # clamped to [0.9, 1.0] pre-noise
        "fee_sigma": 0.25,
        "same_block_rate": 0.05,
        "victim_failed_rate": 0.35,
        "delta_mean": 7.0,
        "interval_base": 2, "interval_mean": 3.0,
    },
}


@dataclass(frozen=True)
class GeneratorConfig:
    n_total: int
    class_proportions: tuple = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
    noise_sigma: float = 0.25
    seed: int = 0
    suppression_tx_mean: float = 20.0

    def __post_init__(self):
        if self.n_total < 0:
            raise SchemaError("n_total must be >= 0")
        props = tuple(float(p) for p in self.class_proportions)
        if len(props) != 3 or any(p < 0 for p in props):
            raise SchemaError("class_proportions must be three nonnegative reals")
        if abs(sum(props) - 1.0) > 1e-9:
            raise SchemaError("class_proportions must sum to 1")
        if self.noise_sigma < 0:
            raise SchemaError("noise_sigma must be >= 0")
        if self.suppression_tx_mean <= 0:
            raise SchemaError("suppression_tx_mean must be positive")
        object.__setattr__(self, "class_proportions", props)


def _lognormal(rng: np.random.Generator, median: float, sigma: float) -> float:
    return median * math.exp(sigma * rng.standard_normal())


def generate_instance(
    c: AttackClass, rng: np.random.Generator, suppression_tx_mean: float = 20.0
) -> AttackInstance:
    """Draw one pre-noise instance with the structural constraints of class c."""
    p = PROFILES[c]
    if c is AttackClass.DISPLACEMENT:
        tx_count = 1
    elif c is AttackClass.INSERTION:
        tx_count = 2
    else:
        nb_p = SUPPRESSION_NB_SHAPE / (SUPPRESSION_NB_SHAPE + suppression_tx_mean)
        tx_count = max(3, int(rng.negative_binomial(SUPPRESSION_NB_SHAPE, nb_p)))
    ratio = 1.0 + _lognormal(rng, *p["gas_price_excess"])
    victim_gas_price = _lognormal(rng, *p["victim_gas_price_gwei"])
    attacker_gas_used = _lognormal(rng, *p["attacker_gas_used"])
    victim_gas_used = _lognormal(rng, *p["victim_gas_used"])
    victim_value = _lognormal(rng, *p["victim_value_eth"])
    attacker_value = _lognormal(rng, *p["attacker_value_eth"])
    delta = 1 + int(rng.poisson(p["delta_mean"]))
    same_block = 1 if rng.random() < p["same_block_rate"] else 0
    victim_failed = 1 if rng.random() < p["victim_failed_rate"] else 0
    interval = p["interval_base"] + int(rng.poisson(p["interval_mean"]))
    util = _lognormal(rng, *p["gas_limit_utilization"])
    if c is AttackClass.SUPPRESSION:
        util = min(1.0, max(0.9, util))
    else:
        util = min(1.0, max(0.0, util))
    # cumulative fee follows from the attacker's own bids: count * gas * price
    fee = (
        tx_count
        * attacker_gas_used
        * (ratio * victim_gas_price)
        * 1e-9
        * _lognormal(rng, 1.0, p["fee_sigma"])
    )
    return AttackInstance(
        attacker_tx_count=tx_count,
        gas_price_ratio=ratio,
        victim_gas_price_gwei=victim_gas_price,
        attacker_gas_used=attacker_gas_used,
        victim_gas_used=victim_gas_used,
        victim_value_eth=victim_value,
        attacker_value_eth=attacker_value,
        block_position_delta=delta,
        same_block=same_block,
        victim_failed=victim_failed,
        interval_blocks=interval,
        cumulative_attacker_fee_eth=fee,
        gas_limit_utilization=util,
        label=c,
    )


def _apply_noise(row: np.ndarray, rng: np.random.Generator, sigma: float) -> np.ndarray:
    """Jitter one feature row in place; exact identity when sigma == 0."""
    for j in _CONT_COLS:
        row[j] *= math.exp(sigma * rng.standard_normal())
    row[_UTIL_COL] = min(
        1.0, max(0.0, row[_UTIL_COL] * math.exp(sigma * rng.standard_normal()))
    )
    for j in _COUNT_COLS:
        jittered = row[j] * math.exp(COUNT_JITTER_SCALE * sigma * rng.standard_normal())
        row[j] = max(1.0, float(math.floor(jittered + 0.5)))
    for j in _FLAG_COLS:
        if rng.random() < FLAG_FLIP_SCALE * sigma:
            row[j] = 1.0 - row[j]
    return row


def class_counts_for(n_total: int, proportions) -> list:
    """Per-class row counts: round(n * p), remainder folded into class 0."""
    counts = [int(math.floor(n_total * p + 0.5)) for p in proportions]
    counts[0] += n_total - sum(counts)
    if counts[0] < 0:
        raise SchemaError("class_proportions round to more rows than n_total")
    return counts


def generate_dataset(cfg: GeneratorConfig) -> Dataset:
    """Generate a labeled dataset; fully deterministic given cfg."""
    counts = class_counts_for(cfg.n_total, cfg.class_proportions)
    labels = np.repeat(np.arange(3, dtype=np.int64), counts)
    features = np.empty((cfg.n_total, len(FEATURE_NAMES)), dtype=np.float64)
    for i in range(cfg.n_total):
        rng = child_rng(cfg.seed, "row", i)
        inst = generate_instance(decode_label(int(labels[i])), rng, cfg.suppression_tx_mean)
        features[i] = _apply_noise(featurize(inst), rng, cfg.noise_sigma)
    return Dataset(
        features=features,
        labels=labels,
        feature_names=FEATURE_NAMES,
        provenance="synthetic",
    )


def rule_classify(features: np.ndarray) -> np.ndarray:
    """Hand rule on attacker_tx_count: 1 -> displacement, 2 -> insertion, 3+ -> suppression.

    Scores 100% on noise-free synthetic data; used as an independent oracle
    for the learned models.
    """
    tx = np.asarray(features)[:, 0]
    out = np.full(tx.shape[0], 2, dtype=np.int64)
    out[tx < 2.5] = 1
    out[tx < 1.5] = 0
    return out
