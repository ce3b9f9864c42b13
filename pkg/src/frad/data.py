"""Core domain types for front-running attack records.

An attack record is one front-running scenario reconstructed from public
chain data: what the attacker submitted, what happened to the victim, and
how the two relate inside the block(s). Records carry exactly one of three
attack classes:

    0  displacement  attacker copies/preempts the victim with a higher fee
    1  insertion     attacker brackets the victim (sandwich)
    2  suppression   attacker stuffs blocks to keep the victim out

The 13-column feature schema below is a documented stand-in: it captures the
quantities that are observable from public chain data and that discriminate
the three behaviours (fee bidding, bracketing, block stuffing, victim
failure). Datasets are exchanged as UTF-8 CSV with a fixed header and exact
round-trip float formatting, so save -> load reproduces a dataset bit for bit
and two saves of the same dataset are byte-identical.
"""
from __future__ import annotations

import csv
import math
import os
import tempfile
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import (
    DataFileError,
    InvalidLabelError,
    MalformedRowError,
    NanFieldError,
    SchemaError,
    UnknownLabelError,
)


class AttackClass(Enum):
    DISPLACEMENT = "displacement"
    INSERTION = "insertion"
    SUPPRESSION = "suppression"


_ENCODE = {
    AttackClass.DISPLACEMENT: 0,
    AttackClass.INSERTION: 1,
    AttackClass.SUPPRESSION: 2,
}
_DECODE = {v: k for k, v in _ENCODE.items()}

CLASS_NAMES = tuple(c.value for c in AttackClass)
N_CLASSES = 3

FEATURE_NAMES = (
    "attacker_tx_count",
    "gas_price_ratio",
    "victim_gas_price_gwei",
    "attacker_gas_used",
    "victim_gas_used",
    "victim_value_eth",
    "attacker_value_eth",
    "block_position_delta",
    "same_block",
    "victim_failed",
    "interval_blocks",
    "cumulative_attacker_fee_eth",
    "gas_limit_utilization",
)
N_FEATURES = len(FEATURE_NAMES)
CSV_HEADER = FEATURE_NAMES + ("label",)


def encode_label(c: AttackClass) -> int:
    """Fixed class -> {0, 1, 2} code."""
    return _ENCODE[c]


def decode_label(label_id: int) -> AttackClass:
    """Inverse of :func:`encode_label`; raises InvalidLabelError outside {0,1,2}."""
    try:
        return _DECODE[int(label_id)]
    except (KeyError, ValueError, TypeError):
        raise InvalidLabelError(f"label id {label_id!r} not in {{0, 1, 2}}") from None


@dataclass(frozen=True)
class AttackInstance:
    """One raw front-running scenario before featurization.

    Field order matches the dataset CSV column order. ``block_position_delta``
    is the victim's intra-block index minus the first attacker transaction's
    index, so a positive value means the attacker was ordered first.
    """

    attacker_tx_count: int
    gas_price_ratio: float
    victim_gas_price_gwei: float
    attacker_gas_used: float
    victim_gas_used: float
    victim_value_eth: float
    attacker_value_eth: float
    block_position_delta: int
    same_block: int
    victim_failed: int
    interval_blocks: int
    cumulative_attacker_fee_eth: float
    gas_limit_utilization: float
    label: AttackClass

    def __post_init__(self):
        if self.attacker_tx_count < 1:
            raise SchemaError("attacker_tx_count must be >= 1")
        for name in ("gas_price_ratio", "victim_gas_price_gwei",
                     "attacker_gas_used", "victim_gas_used"):
            if not getattr(self, name) > 0:
                raise SchemaError(f"{name} must be positive")
        for name in ("victim_value_eth", "attacker_value_eth",
                     "cumulative_attacker_fee_eth"):
            if getattr(self, name) < 0:
                raise SchemaError(f"{name} must be nonnegative")
        if self.same_block not in (0, 1) or self.victim_failed not in (0, 1):
            raise SchemaError("same_block and victim_failed must be 0/1 flags")
        if self.interval_blocks < 1:
            raise SchemaError("interval_blocks must be >= 1")
        if not 0.0 <= self.gas_limit_utilization <= 1.0:
            raise SchemaError("gas_limit_utilization must lie in [0, 1]")


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus ternary labels.

    ``features`` is (n_rows, 13) float64, ``labels`` is (n_rows,) int64 with
    values in {0, 1, 2}. Arrays are frozen after validation; instances are
    safe to share across threads.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple
    provenance: str

    def __post_init__(self):
        feats = np.ascontiguousarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if feats.ndim != 2:
            raise SchemaError("features must be a 2-D matrix")
        if labels.ndim != 1 or labels.shape[0] != feats.shape[0]:
            raise SchemaError("labels length must equal the number of feature rows")
        if len(self.feature_names) != feats.shape[1]:
            raise SchemaError("feature_names length must equal the feature arity")
        if feats.size and not np.isfinite(feats).all():
            raise SchemaError("features contain NaN/Inf")
        if labels.size and not np.isin(labels, (0, 1, 2)).all():
            raise InvalidLabelError("labels must lie in {0, 1, 2}")
        feats.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=N_CLASSES)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.feature_names == other.feature_names
            and self.provenance == other.provenance
            and self.features.shape == other.features.shape
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
        )


def _format_value(v: float) -> str:
    # repr gives the shortest decimal that round-trips to the same double
    return repr(float(v))


def save_dataset(dataset: Dataset, path) -> None:
    """Write a dataset as CSV, atomically (temp file + rename)."""
    path = Path(path)
    lines = [",".join(CSV_HEADER)]
    for row, label in zip(dataset.features, dataset.labels):
        lines.append(",".join([_format_value(v) for v in row] + [str(int(label))]))
    payload = "\n".join(lines) + "\n"
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(payload)
            os.replace(tmp, path)
        except BaseException:
            os.unlink(tmp)
            raise
    except OSError as exc:
        raise DataFileError(f"cannot write dataset to {path}: {exc}") from exc


def load_dataset(path) -> Dataset:
    """Read a dataset CSV, validating schema row by row.

    Errors name the 1-based data row they occur in. Row order is preserved
    exactly as stored.
    """
    path = Path(path)
    if not path.exists():
        raise DataFileError(f"dataset file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaError(f"{path}: empty file, expected a header row") from None
            if tuple(header) != CSV_HEADER:
                raise SchemaError(
                    f"{path}: header mismatch, expected {','.join(CSV_HEADER)!r}"
                )
            feats = []
            labels = []
            for i, row in enumerate(reader, start=1):
                if len(row) != len(CSV_HEADER):
                    raise MalformedRowError(i, f"expected {len(CSV_HEADER)} fields, got {len(row)}")
                try:
                    values = [float(v) for v in row[:-1]]
                except ValueError as exc:
                    raise MalformedRowError(i, str(exc)) from None
                for name, v in zip(FEATURE_NAMES, values):
                    if not math.isfinite(v):
                        raise NanFieldError(i, name)
                raw_label = row[-1].strip()
                try:
                    label = int(raw_label)
                except ValueError:
                    raise MalformedRowError(i, f"label {raw_label!r} is not an integer") from None
                if label not in (0, 1, 2):
                    raise UnknownLabelError(i, raw_label)
                feats.append(values)
                labels.append(label)
    except OSError as exc:
        raise DataFileError(f"cannot read dataset from {path}: {exc}") from exc
    features = np.array(feats, dtype=np.float64).reshape(len(feats), N_FEATURES)
    return Dataset(
        features=features,
        labels=np.array(labels, dtype=np.int64),
        feature_names=FEATURE_NAMES,
        provenance="ingested",
    )
