"""CART-style trees: gini classification trees and second-order regression trees.

Split search is exact (no binning): candidate thresholds are the midpoints
between consecutive distinct sorted values of each candidate feature. Ties
between candidate splits are broken toward the lowest feature index, then
the lowest threshold. Routing is strict: ``x[feature] < threshold`` goes
left, equal values go right.

The builders keep one presorted index/value pair per feature and re-partition
them stably at every split, so no per-node sorting is needed. Hot loops are
numba-compiled (``nogil``), which lets callers fit many trees concurrently;
per-node feature subsampling uses an in-kernel splitmix64 stream seeded per
tree, making every tree a pure function of (data, params, seed).

Bootstrap resamples are expressed as integer per-row weights, which is
exactly equivalent to duplicating rows (duplicates are adjacent in sorted
order and never produce a threshold between themselves) but skips the
re-sort.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import EmptyInputError, SchemaError, ShapeMismatchError

NO_FEATURE = -1

_U64 = np.uint64
_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 12
    min_samples_leaf: int = 1
    n_feature_candidates: int = 0  # 0 means "all features"
    reg_lambda: float = 0.0        # L2 on leaf weights (regression mode)
    gamma: float = 0.0             # minimum split gain (regression mode)

    def __post_init__(self):
        if self.max_depth < 0:
            raise SchemaError("max_depth must be >= 0")
        if self.min_samples_leaf < 1:
            raise SchemaError("min_samples_leaf must be >= 1")
        if self.n_feature_candidates < 0:
            raise SchemaError("n_feature_candidates must be >= 1 (or 0 for all)")
        if self.reg_lambda < 0 or self.gamma < 0:
            raise SchemaError("reg_lambda and gamma must be nonnegative")


@njit(cache=True, nogil=True)
def _splitmix64(state):
    state = (state + _U64(0x9E3779B97F4A7C15)) & _MASK64
    z = state
    z = ((z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)) & _MASK64
    z = ((z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)) & _MASK64
    return state, z ^ (z >> _U64(31))


@njit(cache=True, nogil=True)
def _sample_features(state, feats, n_take, out):
    """Partial Fisher-Yates over ``feats``; result sorted ascending."""
    k = feats.shape[0]
    pool = feats.copy()
    for i in range(n_take):
        state, z = _splitmix64(state)
        j = i + np.int64(z % _U64(k - i))
        pool[i], pool[j] = pool[j], pool[i]
    sel = np.sort(pool[:n_take])
    for i in range(n_take):
        out[i] = sel[i]
    return state


@njit(cache=True, nogil=True)
def _build_classification(vals0, order0, y, w, feats, n_candidates, n_classes,
                          max_depth, min_leaf, seed,
                          feature, threshold, left, right, values):
    kf = feats.shape[0]
    n = order0.shape[1]
    order = order0.copy()
    vals = vals0.copy()
    bufi = np.empty(n, dtype=np.int32)
    bufv = np.empty(n, dtype=np.float64)
    go_left = np.empty(w.shape[0], dtype=np.uint8)
    cand = np.empty(n_candidates, dtype=np.int64)
    state = _U64(seed)

    stack = np.empty((2 * n + 2, 4), dtype=np.int64)
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n
    stack[0, 3] = 0
    top = 1
    n_nodes = 1
    counts = np.zeros(n_classes, dtype=np.int64)
    cl = np.zeros(n_classes, dtype=np.int64)

    while top > 0:
        top -= 1
        node = stack[top, 0]
        lo = stack[top, 1]
        hi = stack[top, 2]
        depth = stack[top, 3]
        for c in range(n_classes):
            counts[c] = 0
        mw = 0
        for i in range(lo, hi):
            r = order[0, i]
            counts[y[r]] += w[r]
            mw += w[r]
        # canonical shape 1 - sum(p^2): keeps float results bit-identical to
        # an independent enumeration oracle so ties break consistently
        ss = 0.0
        for c in range(n_classes):
            p = counts[c] / mw
            values[node, c] = p
            ss += p * p
        gini_parent = 1.0 - ss
        feature[node] = NO_FEATURE
        if depth >= max_depth or gini_parent <= 0.0 or mw < 2 * min_leaf:
            continue
        if n_candidates < kf:
            state = _sample_features(state, feats, n_candidates, cand)
            use = cand
        else:
            use = feats
        # impure nodes split at the best candidate even when the gini gain is
        # zero (the XOR case): a depth-2 tree can then still separate what a
        # single split cannot
        best_gain = -np.inf
        best_f = -1
        best_thr = 0.0
        best_pos = -1
        for ci in range(use.shape[0]):
            f = use[ci]
            for c in range(n_classes):
                cl[c] = 0
            nlw = 0
            for i in range(lo, hi - 1):
                r = order[f, i]
                cl[y[r]] += w[r]
                nlw += w[r]
                v0 = vals[f, i]
                v1 = vals[f, i + 1]
                if v0 == v1:
                    continue
                nrw = mw - nlw
                if nlw < min_leaf or nrw < min_leaf:
                    continue
                thr = 0.5 * (v0 + v1)
                if not (v0 < thr and thr <= v1):
                    continue
                ssl = 0.0
                ssr = 0.0
                for c in range(n_classes):
                    pl = cl[c] / nlw
                    pr = (counts[c] - cl[c]) / nrw
                    ssl += pl * pl
                    ssr += pr * pr
                gl = 1.0 - ssl
                gr = 1.0 - ssr
                gain = gini_parent - (nlw * gl + nrw * gr) / mw
                if gain > best_gain:
                    best_gain = gain
                    best_f = f
                    best_thr = thr
                    best_pos = i + 1
        if best_f < 0:
            continue
        n_left = best_pos - lo
        for i in range(lo, hi):
            go_left[order[best_f, i]] = 1 if i < best_pos else 0
        for fi in range(kf):
            f = feats[fi]
            a = lo
            b = 0
            for i in range(lo, hi):
                r = order[f, i]
                if go_left[r]:
                    order[f, a] = r
                    vals[f, a] = vals[f, i]
                    a += 1
                else:
                    bufi[b] = r
                    bufv[b] = vals[f, i]
                    b += 1
            for i in range(b):
                order[f, lo + n_left + i] = bufi[i]
                vals[f, lo + n_left + i] = bufv[i]
        lid = n_nodes
        rid = n_nodes + 1
        n_nodes += 2
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = lid
        right[node] = rid
        stack[top, 0] = lid
        stack[top, 1] = lo
        stack[top, 2] = lo + n_left
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = rid
        stack[top, 1] = lo + n_left
        stack[top, 2] = hi
        stack[top, 3] = depth + 1
        top += 1
    return n_nodes


@njit(cache=True, nogil=True)
def _build_regression(vals0, order0, g, h, feats, n_candidates,
                      max_depth, min_leaf, lam, gam, seed,
                      feature, threshold, left, right, values):
    kf = feats.shape[0]
    n = order0.shape[1]
    order = order0.copy()
    vals = vals0.copy()
    bufi = np.empty(n, dtype=np.int32)
    bufv = np.empty(n, dtype=np.float64)
    go_left = np.empty(g.shape[0], dtype=np.uint8)
    cand = np.empty(n_candidates, dtype=np.int64)
    state = _U64(seed)

    stack = np.empty((2 * n + 2, 4), dtype=np.int64)
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n
    stack[0, 3] = 0
    top = 1
    n_nodes = 1

    while top > 0:
        top -= 1
        node = stack[top, 0]
        lo = stack[top, 1]
        hi = stack[top, 2]
        depth = stack[top, 3]
        m = hi - lo
        G = 0.0
        H = 0.0
        for i in range(lo, hi):
            r = order[0, i]
            G += g[r]
            H += h[r]
        dp = H + lam
        values[node, 0] = -G / dp if dp > 0.0 else 0.0
        feature[node] = NO_FEATURE
        if depth >= max_depth or m < 2 * min_leaf:
            continue
        if n_candidates < kf:
            state = _sample_features(state, feats, n_candidates, cand)
            use = cand
        else:
            use = feats
        parent_score = G * G / dp if dp > 0.0 else 0.0
        best_gain = 0.0
        best_f = -1
        best_thr = 0.0
        best_pos = -1
        for ci in range(use.shape[0]):
            f = use[ci]
            GL = 0.0
            HL = 0.0
            for i in range(lo, hi - 1):
                r = order[f, i]
                GL += g[r]
                HL += h[r]
                v0 = vals[f, i]
                v1 = vals[f, i + 1]
                if v0 == v1:
                    continue
                nl = i - lo + 1
                if nl < min_leaf or m - nl < min_leaf:
                    continue
                thr = 0.5 * (v0 + v1)
                if not (v0 < thr and thr <= v1):
                    continue
                GR = G - GL
                HR = H - HL
                dl = HL + lam
                dr = HR + lam
                if dl <= 0.0 or dr <= 0.0:
                    continue
                gain = 0.5 * (GL * GL / dl + GR * GR / dr - parent_score) - gam
                if gain > best_gain:
                    best_gain = gain
                    best_f = f
                    best_thr = thr
                    best_pos = i + 1
        if best_f < 0:
            continue
        n_left = best_pos - lo
        for i in range(lo, hi):
            go_left[order[best_f, i]] = 1 if i < best_pos else 0
        for fi in range(kf):
            f = feats[fi]
            a = lo
            b = 0
            for i in range(lo, hi):
                r = order[f, i]
                if go_left[r]:
                    order[f, a] = r
                    vals[f, a] = vals[f, i]
                    a += 1
                else:
                    bufi[b] = r
                    bufv[b] = vals[f, i]
                    b += 1
            for i in range(b):
                order[f, lo + n_left + i] = bufi[i]
                vals[f, lo + n_left + i] = bufv[i]
        lid = n_nodes
        rid = n_nodes + 1
        n_nodes += 2
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = lid
        right[node] = rid
        stack[top, 0] = lid
        stack[top, 1] = lo
        stack[top, 2] = lo + n_left
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = rid
        stack[top, 1] = lo + n_left
        stack[top, 2] = hi
        stack[top, 3] = depth + 1
        top += 1
    return n_nodes


@njit(cache=True, nogil=True)
def _predict_leaves(X, feature, threshold, left, right, out):
    n = X.shape[0]
    for i in range(n):
        node = 0
        while feature[node] != NO_FEATURE:
            if X[i, feature[node]] < threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node


@dataclass
class Tree:
    """A fitted tree stored as flat node arrays.

    ``feature[i] == -1`` marks node i as a leaf; ``values[i]`` holds the leaf
    payload (a 3-class probability vector or a 1-element regression weight).
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    values: np.ndarray
    n_features: int
    mode: str  # "classification" | "regression"

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    def root_split(self):
        """(feature_index, threshold) of the root, or None for a leaf root."""
        if self.feature[0] == NO_FEATURE:
            return None
        return int(self.feature[0]), float(self.threshold[0])

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        out = 0
        for i in range(self.n_nodes):
            if self.feature[i] != NO_FEATURE:
                depths[self.left[i]] = depths[i] + 1
                depths[self.right[i]] = depths[i] + 1
            else:
                out = max(out, int(depths[i]))
        return out

    def predict_rows(self, X: np.ndarray) -> np.ndarray:
        """Leaf values for every row of X, shape (n, value_width)."""
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ShapeMismatchError(
                f"tree was fit on {self.n_features} features, got {X.shape}"
            )
        leaves = np.empty(X.shape[0], dtype=np.int64)
        _predict_leaves(X, self.feature, self.threshold, self.left, self.right, leaves)
        return self.values[leaves]

    def as_dict(self) -> dict:
        """Nested node dict (internal: feature_index/threshold/left/right)."""
        def node(i: int):
            out = {}
            todo = [(i, out)]
            while todo:
                j, slot = todo.pop()
                if self.feature[j] == NO_FEATURE:
                    slot["value"] = [float(v) for v in self.values[j]]
                else:
                    slot["feature_index"] = int(self.feature[j])
                    slot["threshold"] = float(self.threshold[j])
                    slot["left"] = {}
                    slot["right"] = {}
                    todo.append((int(self.left[j]), slot["left"]))
                    todo.append((int(self.right[j]), slot["right"]))
            return out

        return node(0)

    @classmethod
    def from_dict(cls, d: dict, n_features: int, mode: str, value_width: int) -> "Tree":
        feats, thrs, lefts, rights, vals = [], [], [], [], []
        nodes = [d]  # BFS order assigns node ids
        i = 0
        while i < len(nodes):
            nd = nodes[i]
            if "value" in nd:
                feats.append(NO_FEATURE)
                thrs.append(0.0)
                lefts.append(-1)
                rights.append(-1)
                vals.append(list(nd["value"]))
            else:
                feats.append(int(nd["feature_index"]))
                thrs.append(float(nd["threshold"]))
                for key, store in (("left", lefts), ("right", rights)):
                    child = nd[key]
                    nodes.append(child)
                    store.append(len(nodes) - 1)
                vals.append([0.0] * value_width)
            i += 1
        return cls(
            feature=np.array(feats, dtype=np.int64),
            threshold=np.array(thrs, dtype=np.float64),
            left=np.array(lefts, dtype=np.int64),
            right=np.array(rights, dtype=np.int64),
            values=np.array(vals, dtype=np.float64),
            n_features=n_features,
            mode=mode,
        )


def presort_matrix(X: np.ndarray):
    """Per-feature stable sort of X: (values, order) each shaped (k, n)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    n, k = X.shape
    order = np.empty((k, n), dtype=np.int32)
    vals = np.empty((k, n), dtype=np.float64)
    for f in range(k):
        o = np.argsort(X[:, f], kind="stable").astype(np.int32)
        order[f] = o
        vals[f] = X[o, f]
    return vals, order


def filter_presorted(vals, order, keep: np.ndarray):
    """Restrict presorted arrays to rows where ``keep`` is True, keeping order."""
    k = order.shape[0]
    m = int(keep.sum())
    order2 = np.empty((k, m), dtype=np.int32)
    vals2 = np.empty((k, m), dtype=np.float64)
    for f in range(k):
        sel = keep[order[f]]
        order2[f] = order[f][sel]
        vals2[f] = vals[f][sel]
    return vals2, order2


def _trim(tree_arrays, n_nodes, value_width):
    feature, threshold, left, right, values = tree_arrays
    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        values[:n_nodes, :value_width].copy(),
    )


def gini_impurity(labels) -> float:
    """1 - sum of squared class frequencies."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise EmptyInputError("gini_impurity needs at least one label")
    counts = np.bincount(labels)
    p = counts / labels.size
    return float(1.0 - np.sum(p * p))


def _resolve_candidates(params: TreeParams, k: int) -> int:
    m = params.n_feature_candidates
    return k if m == 0 else min(m, k)


def fit_classification_tree(
    X: np.ndarray,
    y: np.ndarray,
    params: TreeParams,
    seed: int,
    sample_weight: np.ndarray | None = None,
    presorted=None,
    n_classes: int = 3,
) -> Tree:
    """Greedy best-gini-gain tree; leaves hold class-frequency vectors.

    ``sample_weight`` takes nonnegative integer weights (bootstrap counts);
    rows with weight 0 are excluded from fitting entirely. ``presorted`` can
    pass a (values, order) pair from :func:`presort_matrix` to skip sorting.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ShapeMismatchError("X rows and y length must match")
    if X.shape[0] == 0:
        raise EmptyInputError("cannot fit a tree on zero rows")
    n, k = X.shape
    if sample_weight is None:
        w = np.ones(n, dtype=np.int64)
    else:
        w = np.asarray(sample_weight, dtype=np.int64)
        if w.shape != (n,):
            raise ShapeMismatchError("sample_weight length must match X rows")
        if (w < 0).any() or not w.any():
            raise SchemaError("sample_weight must be nonnegative with a positive total")
    if presorted is None:
        vals, order = presort_matrix(X)
    else:
        vals, order = presorted
    if sample_weight is not None and not (w > 0).all():
        vals, order = filter_presorted(vals, order, w > 0)
    n_kept = order.shape[1]
    cap = 2 * n_kept + 1
    feature = np.empty(cap, dtype=np.int64)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    values = np.zeros((cap, n_classes), dtype=np.float64)
    feats = np.arange(k, dtype=np.int64)
    n_nodes = _build_classification(
        vals, order, y, w, feats, _resolve_candidates(params, k), n_classes,
        params.max_depth, params.min_samples_leaf, np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
        feature, threshold, left, right, values,
    )
    return Tree(*_trim((feature, threshold, left, right, values), n_nodes, n_classes),
                n_features=k, mode="classification")


def fit_regression_tree(
    X: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    params: TreeParams,
    seed: int,
    presorted=None,
    feats: np.ndarray | None = None,
) -> Tree:
    """Second-order regression tree: leaf weight -G/(H+lambda), gain-gated splits.

    ``feats`` restricts the tree to a column subset (column subsampling);
    per-node candidate sampling then draws from that subset.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if X.ndim != 2 or g.shape != (X.shape[0],) or h.shape != (X.shape[0],):
        raise ShapeMismatchError("X rows, g and h lengths must match")
    if X.shape[0] == 0:
        raise EmptyInputError("cannot fit a tree on zero rows")
    if (h < 0).any():
        raise SchemaError("hessians must be nonnegative")
    n, k = X.shape
    if presorted is None:
        vals, order = presort_matrix(X)
    else:
        vals, order = presorted
    if feats is None:
        feats = np.arange(k, dtype=np.int64)
    else:
        feats = np.asarray(feats, dtype=np.int64)
    n_in_sort = order.shape[1]
    cap = 2 * n_in_sort + 1
    feature = np.empty(cap, dtype=np.int64)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    values = np.zeros((cap, 1), dtype=np.float64)
    n_cand = _resolve_candidates(params, feats.shape[0])
    n_nodes = _build_regression(
        vals, order, g, h, feats, n_cand,
        params.max_depth, params.min_samples_leaf,
        float(params.reg_lambda), float(params.gamma),
        np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
        feature, threshold, left, right, values,
    )
    return Tree(*_trim((feature, threshold, left, right, values), n_nodes, 1),
                n_features=k, mode="regression")


def predict_tree(t: Tree, x: np.ndarray) -> np.ndarray:
    """Route a single row to its leaf and return the leaf value vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (t.n_features,):
        raise ShapeMismatchError(f"expected a row of {t.n_features} features")
    return t.predict_rows(x.reshape(1, -1))[0]
