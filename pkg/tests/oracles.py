"""Independent reference implementations used to check the real code paths.

Everything here is deliberately written the slow, obvious way (python loops,
exhaustive enumeration, finite differences) and never imports the module it
checks beyond plain data types.
"""
import numpy as np

N_CLASSES = 3


def brute_force_metrics(y_true, y_pred):
    """Count-based metrics via plain loops; the canonical definitions."""
    n = len(y_true)
    correct = 0
    tp = [0] * N_CLASSES
    fp = [0] * N_CLASSES
    fn = [0] * N_CLASSES
    for t, p in zip(y_true, y_pred):
        if t == p:
            correct += 1
            tp[t] += 1
        else:
            fn[t] += 1
            fp[p] += 1
    precision, recall, f1 = [], [], []
    for c in range(N_CLASSES):
        prec = tp[c] / (tp[c] + fp[c]) if tp[c] + fp[c] > 0 else 0.0
        rec = tp[c] / (tp[c] + fn[c]) if tp[c] + fn[c] > 0 else 0.0
        precision.append(prec)
        recall.append(rec)
        f1.append(2.0 * prec * rec / (prec + rec) if prec + rec > 0 else 0.0)
    return {
        "accuracy": correct / n,
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "macro_precision": sum(precision) / N_CLASSES,
        "macro_recall": sum(recall) / N_CLASSES,
        "macro_f1": sum(f1) / N_CLASSES,
    }


def gini(labels):
    labels = np.asarray(labels)
    counts = np.bincount(labels, minlength=N_CLASSES)
    p = counts / labels.size
    return 1.0 - float(np.sum(p * p))


def enumerate_best_split(X, y, min_leaf=1):
    """Exhaustive search over all (feature, midpoint) pairs.

    Rule mirrored by the fitter: a pure node never splits; an impure node
    takes the candidate with maximal gini gain (zero-gain candidates
    included), ties broken toward the lowest feature index then the lowest
    threshold (guaranteed by scan order plus strictly-greater comparison).
    Returns None when the node is pure or no candidate is feasible.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    n, k = X.shape
    parent = gini(y)
    if parent <= 0.0:
        return None
    best = None
    for f in range(k):
        values = np.unique(X[:, f])
        for a, b in zip(values[:-1], values[1:]):
            thr = 0.5 * (a + b)
            if not (a < thr <= b):
                continue
            left = X[:, f] < thr
            nl = int(left.sum())
            nr = n - nl
            if nl < min_leaf or nr < min_leaf:
                continue
            gain = parent - (nl * gini(y[left]) + nr * gini(y[~left])) / n
            if best is None or gain > best[0]:
                best = (gain, f, float(thr))
    return None if best is None else (best[1], best[2])


def finite_diff_gradients(model, X, y, l2, loss_fn, step=1e-5):
    """Central-difference gradients for every tensor of a small MLP."""
    out = {}
    for name in ("W1", "b1", "W2", "b2"):
        arr = getattr(model, name)
        fd = np.zeros_like(arr)
        it = np.nditer(arr, flags=["multi_index"])
        while not it.finished:
            ix = it.multi_index
            orig = arr[ix]
            arr[ix] = orig + step
            lp = loss_fn(model, X, y, l2)
            arr[ix] = orig - step
            lm = loss_fn(model, X, y, l2)
            arr[ix] = orig
            fd[ix] = (lp - lm) / (2.0 * step)
            it.iternext()
        out[name] = fd
    return out


def grid_argmax(fn, low=0.0, high=1.0, resolution=1e-3):
    """1-D grid-search maximizer."""
    xs = np.arange(low, high + resolution / 2, resolution)
    vals = [fn(x) for x in xs]
    return float(xs[int(np.argmax(vals))])
