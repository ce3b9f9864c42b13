"""Featurization, standardization, and feature-correlation analysis.

Standardization uses population statistics fit on training rows only and is
applied unchanged to test rows. Constant columns are stored with std = 1 so
the transform maps them to zero instead of dividing by zero; correlations
involving a constant column are defined as 0 (including its own diagonal
entry), which keeps the matrix total and documented.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import FEATURE_NAMES, AttackInstance
from .errors import EmptyInputError, SchemaError, ShapeMismatchError
from .svgplot import diverging_color, render_grid_svg


def featurize(inst: AttackInstance) -> np.ndarray:
    """Map an instance to its 13-feature row in CSV column order."""
    return np.array(
        [
            inst.attacker_tx_count,
            inst.gas_price_ratio,
            inst.victim_gas_price_gwei,
            inst.attacker_gas_used,
            inst.victim_gas_used,
            inst.victim_value_eth,
            inst.attacker_value_eth,
            inst.block_position_delta,
            inst.same_block,
            inst.victim_failed,
            inst.interval_blocks,
            inst.cumulative_attacker_fee_eth,
            inst.gas_limit_utilization,
        ],
        dtype=np.float64,
    )


@dataclass(frozen=True)
class Standardizer:
    """Per-column center/scale parameters (population std, constant cols -> 1)."""

    means: np.ndarray
    stds: np.ndarray
    feature_names: tuple

    def as_dict(self) -> dict:
        return {
            "means": self.means.tolist(),
            "stds": self.stds.tolist(),
            "feature_names": list(self.feature_names),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(
            means=np.asarray(d["means"], dtype=np.float64),
            stds=np.asarray(d["stds"], dtype=np.float64),
            feature_names=tuple(d["feature_names"]),
        )


def fit_standardizer(train: np.ndarray, feature_names=FEATURE_NAMES) -> Standardizer:
    """Column means and population stds of the training matrix."""
    train = np.asarray(train, dtype=np.float64)
    if train.ndim != 2 or train.shape[0] == 0:
        raise EmptyInputError("standardizer needs a nonempty 2-D matrix")
    if np.isnan(train).any():
        raise SchemaError("standardizer input contains NaN")
    means = train.mean(axis=0)
    stds = train.std(axis=0)  # ddof=0, population formula
    stds = np.where(stds == 0.0, 1.0, stds)
    if len(feature_names) != train.shape[1]:
        raise ShapeMismatchError("feature_names length must match column count")
    return Standardizer(means=means, stds=stds, feature_names=tuple(feature_names))


def apply_standardizer(s: Standardizer, m: np.ndarray) -> np.ndarray:
    """(m - means) / stds, column-wise."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[1] != s.means.shape[0]:
        raise ShapeMismatchError(
            f"matrix has {m.shape[-1] if m.ndim == 2 else '?'} columns, "
            f"standardizer expects {s.means.shape[0]}"
        )
    return (m - s.means) / s.stds


def invert_standardizer(s: Standardizer, m: np.ndarray) -> np.ndarray:
    """Undo :func:`apply_standardizer`."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[1] != s.means.shape[0]:
        raise ShapeMismatchError("column count does not match the standardizer")
    return m * s.stds + s.means


@dataclass(frozen=True)
class CorrelationMatrix:
    """Symmetric Pearson correlation matrix with its column names."""

    entries: np.ndarray
    feature_names: tuple


def pearson_correlation(m: np.ndarray, feature_names=FEATURE_NAMES) -> CorrelationMatrix:
    """Pairwise Pearson coefficients; pairs with a constant column are 0."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 2:
        raise EmptyInputError("correlation needs at least 2 rows")
    n, k = m.shape
    centered = m - m.mean(axis=0)
    cov = centered.T @ centered / n
    std = np.sqrt(np.diag(cov))
    nonconst = std > 0.0
    denom = np.where(nonconst, std, 1.0)
    corr = cov / np.outer(denom, denom)
    corr = 0.5 * (corr + corr.T)  # exact symmetry
    corr = np.clip(corr, -1.0, 1.0)
    corr[~nonconst, :] = 0.0
    corr[:, ~nonconst] = 0.0
    idx = np.where(nonconst)[0]
    corr[idx, idx] = 1.0
    return CorrelationMatrix(entries=corr, feature_names=tuple(feature_names[:k]))


def render_heatmap(c: CorrelationMatrix, path, meta: str = "") -> None:
    """Write the correlation matrix as a self-contained SVG heatmap.

    Diverging palette anchored at -1 / 0 / +1; one rect per cell with the
    coefficient printed to 2 decimals. Output bytes are deterministic.
    """
    entries = np.asarray(c.entries, dtype=np.float64)
    labels = list(c.feature_names)
    colors = [[diverging_color(v) for v in row] for row in entries]
    texts = [[f"{v:.2f}" for v in row] for row in entries]
    render_grid_svg(
        path,
        colors=colors,
        texts=texts,
        row_labels=labels,
        col_labels=labels,
        title="Feature Correlation",
        meta=meta,
    )
