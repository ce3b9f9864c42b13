"""Tree ensembles: random forest and softmax gradient boosting.

Boosting handles the 3-class problem as K=3 regression trees per round fit
to the softmax gradients g_ik = p_ik - 1[y_i = k]. The ``first_order``
variant uses unit hessians; the ``second_order`` variant uses
h_ik = p_ik (1 - p_ik) together with the L2 leaf penalty, the gain gate and
column subsampling. Initial margins are the log class priors, so a 0-round
model predicts the priors.

All fits are deterministic given (data, params, seed): per-tree randomness
is derived from (seed, tree index) / (seed, round, class), and trees fit in
worker threads are combined in fixed index order, so results do not depend
on the thread count.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import SchemaError, ShapeMismatchError
from .tree import Tree, TreeParams, filter_presorted, fit_classification_tree, fit_regression_tree, presort_matrix
from .utils import child_rng, child_seed, thread_map

N_CLASSES = 3


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 200
    bootstrap: bool = True
    tree: TreeParams = field(default_factory=lambda: TreeParams(
        max_depth=12, min_samples_leaf=1, n_feature_candidates=4))

    def __post_init__(self):
        if self.n_trees < 1:
            raise SchemaError("n_trees must be >= 1")


@dataclass(frozen=True)
class BoostParams:
    n_rounds: int = 150
    learning_rate: float = 0.1
    tree: TreeParams = field(default_factory=lambda: TreeParams(
        max_depth=3, min_samples_leaf=5, n_feature_candidates=0))
    subsample_rows: float = 1.0
    subsample_cols: float = 1.0
    variant: str = "first_order"  # or "second_order"

    def __post_init__(self):
        if self.n_rounds < 0:
            raise SchemaError("n_rounds must be >= 0")
        if not self.learning_rate > 0:
            raise SchemaError("learning_rate must be positive")
        if not 0 < self.subsample_rows <= 1 or not 0 < self.subsample_cols <= 1:
            raise SchemaError("subsample fractions must lie in (0, 1]")
        if self.variant not in ("first_order", "second_order"):
            raise SchemaError(f"unknown boosting variant {self.variant!r}")


@dataclass
class ForestModel:
    trees: list
    params: ForestParams
    seed: int
    n_features: int

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ShapeMismatchError(
                f"model expects {self.n_features} features, got {X.shape}")
        acc = np.zeros((X.shape[0], N_CLASSES), dtype=np.float64)
        for t in self.trees:
            acc += t.predict_rows(X)
        return acc / len(self.trees)


@dataclass
class BoostModel:
    stage_trees: list           # [round][class] -> Tree
    base_score: np.ndarray      # (3,) prior log-odds
    params: BoostParams
    seed: int
    n_features: int
    train_loss: list = field(default_factory=list)  # cross-entropy, index 0 = before any round

    def decision_margins(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ShapeMismatchError(
                f"model expects {self.n_features} features, got {X.shape}")
        margins = np.tile(self.base_score, (X.shape[0], 1))
        for round_trees in self.stage_trees:
            for k, t in enumerate(round_trees):
                margins[:, k] += self.params.learning_rate * t.predict_rows(X)[:, 0]
        return margins

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return softmax_rows(self.decision_margins(X))


def softmax_rows(margins: np.ndarray) -> np.ndarray:
    z = margins - margins.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def predict_proba(model, X: np.ndarray) -> np.ndarray:
    """Class probabilities, one row per input row, rows summing to 1."""
    return model.predict_proba(X)


def predicted_class(probs: np.ndarray) -> np.ndarray:
    """Argmax with lowest-index tie-break."""
    return np.argmax(probs, axis=1).astype(np.int64)


def _check_xy(X, y):
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ShapeMismatchError("X rows and y length must match")
    if X.shape[0] == 0:
        raise SchemaError("cannot fit on an empty dataset")
    if (y < 0).any() or (y >= N_CLASSES).any():
        raise SchemaError("labels must lie in {0, 1, 2}")
    return X, y


def fit_random_forest(
    X: np.ndarray, y: np.ndarray, params: ForestParams, seed: int, n_threads: int = 1
) -> ForestModel:
    """Bagged gini trees; tree t draws its bootstrap and splits from (seed, t)."""
    X, y = _check_xy(X, y)
    n = X.shape[0]
    presorted = presort_matrix(X)

    def fit_one(t: int) -> Tree:
        if params.bootstrap:
            rng = child_rng(seed, "tree", t, "bootstrap")
            w = np.bincount(rng.integers(0, n, size=n), minlength=n)
        else:
            w = None
        return fit_classification_tree(
            X, y, params.tree, child_seed(seed, "tree", t, "splits"),
            sample_weight=w, presorted=presorted,
        )

    trees = thread_map(fit_one, range(params.n_trees), n_threads)
    return ForestModel(trees=trees, params=params, seed=seed, n_features=X.shape[1])


def _second_order_hessians(p: np.ndarray) -> np.ndarray:
    return p * (1.0 - p)


def fit_boosting(
    X: np.ndarray, y: np.ndarray, params: BoostParams, seed: int, n_threads: int = 1
) -> BoostModel:
    """Multiclass softmax boosting with per-round training loss trace."""
    X, y = _check_xy(X, y)
    n, k = X.shape
    presorted = presort_matrix(X)
    onehot = np.zeros((n, N_CLASSES), dtype=np.float64)
    onehot[np.arange(n), y] = 1.0
    priors = np.bincount(y, minlength=N_CLASSES) / n
    base_score = np.log(np.maximum(priors, 1e-12))
    margins = np.tile(base_score, (n, 1))

    def cross_entropy(m: np.ndarray) -> float:
        z = m - m.max(axis=1, keepdims=True)
        log_p = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
        return float(-log_p[np.arange(n), y].mean())

    train_loss = [cross_entropy(margins)]
    n_cols = max(1, int(round(params.subsample_cols * k)))
    stage_trees = []
    for r in range(params.n_rounds):
        p = softmax_rows(margins)
        g = p - onehot
        h = _second_order_hessians(p) if params.variant == "second_order" else np.ones_like(p)
        if params.subsample_rows < 1.0:
            rng = child_rng(seed, "round", r, "rows")
            m_rows = max(1, int(round(params.subsample_rows * n)))
            keep = np.zeros(n, dtype=bool)
            keep[rng.choice(n, size=m_rows, replace=False)] = True
            round_presorted = filter_presorted(*presorted, keep)
        else:
            round_presorted = presorted

        def fit_class_tree(c: int) -> Tree:
            if n_cols < k:
                rng_c = child_rng(seed, "round", r, "class", c, "cols")
                feats = np.sort(rng_c.choice(k, size=n_cols, replace=False))
            else:
                feats = None
            return fit_regression_tree(
                X, g[:, c], h[:, c], params.tree,
                child_seed(seed, "round", r, "class", c, "splits"),
                presorted=round_presorted, feats=feats,
            )

        round_trees = thread_map(fit_class_tree, range(N_CLASSES), n_threads)
        for c, t in enumerate(round_trees):
            margins[:, c] += params.learning_rate * t.predict_rows(X)[:, 0]
        stage_trees.append(round_trees)
        train_loss.append(cross_entropy(margins))
    return BoostModel(
        stage_trees=stage_trees, base_score=base_score, params=params,
        seed=seed, n_features=k, train_loss=train_loss,
    )
