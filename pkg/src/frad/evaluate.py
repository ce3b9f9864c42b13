"""Train/test splitting, confusion matrices, metrics, and the model report.

Metrics follow the standard one-vs-rest definitions: accuracy is
trace / total computed in integer arithmetic, per-class precision TP/(TP+FP)
and recall TP/(TP+FN), F1 their harmonic mean, with empty denominators
mapped to 0 (documented in the report footer). Macro values are unweighted
means over the three classes, reflecting that all three attack types matter
equally.

``comparison_report`` also prints the published reference figures for this
detection pipeline next to the measured results; reference entries that were
never published are rendered as nulls / dashes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import CLASS_NAMES, N_CLASSES, Dataset
from .errors import EmptyInputError, InvalidLabelError, SchemaError, ShapeMismatchError
from .svgplot import render_grid_svg, sequential_color
from .utils import child_rng, dumps_canonical, to_jsonable

# published reference results (accuracy, macro F1, precision, recall and
# row-normalized per-class rates); None marks figures that were not published
PAPER_BASELINES = {
    "xgb": {
        "accuracy": None, "f1": None, "precision": None, "recall": None,
        "per_class_recall": [0.8375, 0.8492, 0.8101],
    },
    "gb": {
        "accuracy": 0.8413, "f1": 0.8415, "precision": 0.8427, "recall": 0.8414,
        "per_class_recall": [0.8538, 0.8651, 0.8055],
    },
    "rf": {
        "accuracy": None, "f1": None, "precision": None, "recall": None,
        "per_class_recall": [None, 0.8730, 0.7871],
    },
    "mlp": {
        "accuracy": 0.8459, "f1": 0.8460, "precision": 0.8466, "recall": 0.8459,
        "per_class_recall": [0.8597, 0.8635, 0.8147],
    },
}


@dataclass(frozen=True)
class ConfusionMatrix:
    """3x3 counts; rows are true classes, columns are predicted classes."""

    counts: np.ndarray
    class_names: tuple = CLASS_NAMES

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (N_CLASSES, N_CLASSES):
            raise ShapeMismatchError("confusion matrix must be 3x3")
        if (counts < 0).any():
            raise SchemaError("confusion counts must be nonnegative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class MetricsReport:
    model_name: str
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    per_class_precision: tuple
    per_class_recall: tuple
    per_class_f1: tuple
    confusion: ConfusionMatrix

    def as_dict(self) -> dict:
        return {
            "model_name": self.model_name,
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "per_class_precision": list(self.per_class_precision),
            "per_class_recall": list(self.per_class_recall),
            "per_class_f1": list(self.per_class_f1),
            "confusion": [[int(v) for v in row] for row in self.confusion.counts],
        }


def stratified_split(d: Dataset, train_fraction: float = 0.8, seed: int = 0):
    """Per-class seeded shuffle, floor(fraction * n_c) rows to train.

    Partitions are disjoint, cover every row, and keep the original row
    order inside each partition.
    """
    if not 0 < train_fraction < 1:
        raise SchemaError("train_fraction must lie strictly between 0 and 1")
    train_idx = []
    test_idx = []
    for c in range(N_CLASSES):
        rows = np.flatnonzero(d.labels == c)
        if rows.size < 2:
            raise SchemaError(f"class {c} has {rows.size} rows; need at least 2 to split")
        perm = child_rng(seed, "split", c).permutation(rows.size)
        n_train = int(math.floor(train_fraction * rows.size))
        train_idx.append(rows[perm[:n_train]])
        test_idx.append(rows[perm[n_train:]])
    train_rows = np.sort(np.concatenate(train_idx))
    test_rows = np.sort(np.concatenate(test_idx))

    def subset(rows: np.ndarray) -> Dataset:
        return Dataset(
            features=d.features[rows],
            labels=d.labels[rows],
            feature_names=d.feature_names,
            provenance=d.provenance,
        )

    return subset(train_rows), subset(test_rows)


def confusion_matrix(y_true, y_pred) -> ConfusionMatrix:
    """counts[i][j] = number of rows with true class i predicted as j."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise ShapeMismatchError("y_true and y_pred must be equal-length vectors")
    for arr, name in ((y_true, "y_true"), (y_pred, "y_pred")):
        if arr.size and (arr.min() < 0 or arr.max() >= N_CLASSES):
            raise InvalidLabelError(f"{name} contains labels outside {{0, 1, 2}}")
    counts = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(counts, (y_true, y_pred), 1)
    return ConfusionMatrix(counts=counts)


def per_class_recall(cm: ConfusionMatrix) -> np.ndarray:
    """Row-normalized diagonal; 0 for empty rows."""
    counts = cm.counts
    row_sums = counts.sum(axis=1)
    out = np.zeros(N_CLASSES, dtype=np.float64)
    for i in range(N_CLASSES):
        if row_sums[i] > 0:
            out[i] = counts[i, i] / row_sums[i]
    return out


def compute_metrics(cm: ConfusionMatrix, model_name: str = "") -> MetricsReport:
    """Accuracy, one-vs-rest precision/recall/F1 and their macro means."""
    counts = cm.counts
    total = int(counts.sum())
    if total < 1:
        raise EmptyInputError("cannot compute metrics for an empty confusion matrix")
    trace = int(np.trace(counts))
    accuracy = trace / total
    precision = np.zeros(N_CLASSES)
    recall = np.zeros(N_CLASSES)
    f1 = np.zeros(N_CLASSES)
    for i in range(N_CLASSES):
        tp = int(counts[i, i])
        fp = int(counts[:, i].sum()) - tp
        fn = int(counts[i, :].sum()) - tp
        if tp + fp > 0:
            precision[i] = tp / (tp + fp)
        if tp + fn > 0:
            recall[i] = tp / (tp + fn)
        if precision[i] + recall[i] > 0:
            f1[i] = 2.0 * precision[i] * recall[i] / (precision[i] + recall[i])
    return MetricsReport(
        model_name=model_name,
        accuracy=accuracy,
        macro_precision=float(precision.sum() / N_CLASSES),
        macro_recall=float(recall.sum() / N_CLASSES),
        macro_f1=float(f1.sum() / N_CLASSES),
        per_class_precision=tuple(float(v) for v in precision),
        per_class_recall=tuple(float(v) for v in recall),
        per_class_f1=tuple(float(v) for v in f1),
        confusion=cm,
    )


def _fmt(v, digits: int = 4) -> str:
    return "-" if v is None else f"{v:.{digits}f}"


def render_confusion_svg(cm: ConfusionMatrix, path, title: str, meta: str = "") -> None:
    """Counts heatmap with row percentages, deterministic bytes."""
    counts = cm.counts
    peak = max(1, int(counts.max()))
    row_sums = counts.sum(axis=1)
    colors, texts = [], []
    for i in range(N_CLASSES):
        crow, trow = [], []
        for j in range(N_CLASSES):
            crow.append(sequential_color(counts[i, j] / peak))
            pct = 100.0 * counts[i, j] / row_sums[i] if row_sums[i] else 0.0
            trow.append(f"{int(counts[i, j])} ({pct:.1f}%)")
        colors.append(crow)
        texts.append(trow)
    render_grid_svg(
        path, colors=colors, texts=texts,
        row_labels=[f"true {c}" for c in cm.class_names],
        col_labels=[f"pred {c}" for c in cm.class_names],
        title=title, meta=meta,
    )


def comparison_report(
    reports: list,
    out_dir,
    run_id: str = "run",
    seed: int = 0,
    dataset_provenance: str = "synthetic",
    model_params: dict | None = None,
    trials_files: dict | None = None,
) -> dict:
    """Emit comparison.json, comparison.md and one confusion SVG per model.

    Output bytes are a pure function of the inputs (no timestamps), so
    identical runs produce identical artifacts.
    """
    if not reports:
        raise EmptyInputError("comparison_report needs at least one model report")
    from pathlib import Path

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model_params = model_params or {}
    trials_files = trials_files or {}

    models_payload = []
    for rep in reports:
        models_payload.append({
            "name": rep.model_name,
            "params": to_jsonable(model_params.get(rep.model_name)),
            "metrics": {
                "accuracy": rep.accuracy,
                "macro_precision": rep.macro_precision,
                "macro_recall": rep.macro_recall,
                "macro_f1": rep.macro_f1,
                "per_class_precision": list(rep.per_class_precision),
                "per_class_recall": list(rep.per_class_recall),
                "per_class_f1": list(rep.per_class_f1),
            },
            "confusion": [[int(v) for v in row] for row in rep.confusion.counts],
            "trials_file": trials_files.get(rep.model_name),
        })
    payload = {
        "run_id": run_id,
        "seed": seed,
        "dataset_provenance": dataset_provenance,
        "models": models_payload,
        "paper_baselines": PAPER_BASELINES,
    }
    (out_dir / "comparison.json").write_text(
        dumps_canonical(to_jsonable(payload)) + "\n", encoding="utf-8")

    lines = [
        f"# Model comparison ({run_id})",
        "",
        f"Dataset provenance: {dataset_provenance}; seed: {seed}.",
        "",
        "| model | accuracy | macro F1 | macro precision | macro recall | "
        "published accuracy | published F1 | published precision | published recall |",
        "|---|---|---|---|---|---|---|---|---|",
    ]
    for rep in reports:
        base = PAPER_BASELINES.get(rep.model_name, {})
        lines.append(
            f"| {rep.model_name} | {_fmt(rep.accuracy)} | {_fmt(rep.macro_f1)} | "
            f"{_fmt(rep.macro_precision)} | {_fmt(rep.macro_recall)} | "
            f"{_fmt(base.get('accuracy'))} | {_fmt(base.get('f1'))} | "
            f"{_fmt(base.get('precision'))} | {_fmt(base.get('recall'))} |"
        )
    lines += [
        "",
        "Per-class recall (rows are models; published reference in parentheses, "
        "dash where never published):",
        "",
        "| model | " + " | ".join(CLASS_NAMES) + " |",
        "|---|---|---|---|",
    ]
    for rep in reports:
        base = PAPER_BASELINES.get(rep.model_name, {})
        ref = base.get("per_class_recall", [None] * N_CLASSES)
        cells = [
            f"{rep.per_class_recall[i]:.4f} ({_fmt(ref[i])})" for i in range(N_CLASSES)
        ]
        lines.append(f"| {rep.model_name} | " + " | ".join(cells) + " |")
    lines += [
        "",
        "Conventions: macro values are unweighted class means; precision/recall/F1 "
        "with an empty denominator are reported as 0.",
        "",
    ]
    (out_dir / "comparison.md").write_text("\n".join(lines), encoding="utf-8")

    meta = f"run_id={run_id} seed={seed}"
    for rep in reports:
        render_confusion_svg(
            rep.confusion, out_dir / f"confusion_{rep.model_name}.svg",
            title=f"{rep.model_name} confusion matrix", meta=meta,
        )
    return payload
