"""Bayesian hyperparameter search: GP surrogate + expected improvement.

The surrogate is an exact Gaussian process on the unit cube with a
Matern-5/2 kernel, fixed length scale per dimension (no marginal-likelihood
tuning) and a small diagonal jitter; duplicate observations are absorbed by
the jitter, escalating x10 up to three times before giving up. Acquisition
maximizes EI over a seeded batch of 1024 candidate points, which keeps the
whole search derivative-free and deterministic.

Search starts from a seeded Latin hypercube design of ``n_init`` points and
then alternates fit -> argmax EI -> evaluate until the trial budget is
spent. Objectives are maximized (validation accuracy in the pipeline).
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalFailure, SchemaError
from .utils import child_rng, dumps_canonical

SQRT5 = math.sqrt(5.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Dimension:
    name: str
    kind: str  # "real" | "log_real" | "integer"
    low: float
    high: float

    def __post_init__(self):
        if self.kind not in ("real", "log_real", "integer"):
            raise SchemaError(f"unknown dimension kind {self.kind!r}")
        if not self.low < self.high:
            raise SchemaError(f"dimension {self.name}: low must be < high")
        if self.kind == "log_real" and self.low <= 0:
            raise SchemaError(f"dimension {self.name}: log_real needs low > 0")

    def from_unit(self, u: float):
        u = min(1.0, max(0.0, float(u)))
        if self.kind == "real":
            return self.low + u * (self.high - self.low)
        if self.kind == "log_real":
            return math.exp(math.log(self.low) + u * (math.log(self.high) - math.log(self.low)))
        v = int(math.floor(self.low + u * (self.high - self.low) + 0.5))
        return min(int(self.high), max(int(self.low), v))


@dataclass(frozen=True)
class SearchSpace:
    dimensions: tuple

    def __post_init__(self):
        object.__setattr__(self, "dimensions", tuple(self.dimensions))
        if not self.dimensions:
            raise SchemaError("search space needs at least one dimension")

    @property
    def n_dims(self) -> int:
        return len(self.dimensions)

    def decode(self, u: np.ndarray) -> dict:
        return {d.name: d.from_unit(u[i]) for i, d in enumerate(self.dimensions)}


# per-model presets; the pipeline maps names onto model parameter records
MODEL_SPACES = {
    "rf": SearchSpace((
        Dimension("n_trees", "integer", 50, 500),
        Dimension("max_depth", "integer", 2, 20),
        Dimension("n_feature_candidates", "integer", 1, 13),
    )),
    "gb": SearchSpace((
        Dimension("n_rounds", "integer", 50, 500),
        Dimension("learning_rate", "log_real", 0.01, 0.3),
        Dimension("max_depth", "integer", 2, 8),
        Dimension("subsample", "real", 0.5, 1.0),
    )),
    "xgb": SearchSpace((
        Dimension("n_rounds", "integer", 50, 500),
        Dimension("learning_rate", "log_real", 0.01, 0.3),
        Dimension("max_depth", "integer", 2, 8),
        Dimension("reg_lambda", "real", 0.0, 10.0),
        Dimension("subsample", "real", 0.5, 1.0),
    )),
    "mlp": SearchSpace((
        Dimension("n_hidden", "integer", 16, 512),
        Dimension("learning_rate", "log_real", 1e-4, 1e-2),
        Dimension("batch_size", "integer", 16, 256),
    )),
}


@dataclass(frozen=True)
class KernelConfig:
    length_scale: float = 0.3
    signal_variance: float = 1.0
    noise_jitter: float = 1e-6


@dataclass
class GpSurrogate:
    points: np.ndarray        # (n, d) in the unit cube
    values: np.ndarray        # (n,)
    kernel: KernelConfig
    value_mean: float
    chol: np.ndarray          # lower Cholesky of K + jitter*I
    alpha: np.ndarray         # (K + jitter*I)^-1 (values - mean)
    jitter_used: float

    def log_marginal_likelihood(self) -> float:
        n = self.points.shape[0]
        centered = self.values - self.value_mean
        return float(
            -0.5 * centered @ self.alpha
            - np.log(np.diag(self.chol)).sum()
            - 0.5 * n * math.log(2.0 * math.pi)
        )


@dataclass(frozen=True)
class Trial:
    index: int
    params: dict
    objective: float
    duration: float

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "params": self.params,
            "objective": self.objective,
            "duration": self.duration,
        }


class ObjectiveFailure(NumericalFailure):
    """The objective evaluator raised; names the failing trial."""

    def __init__(self, index: int, params: dict, cause: BaseException):
        super().__init__(f"objective failed at trial {index} with params {params!r}: {cause}")
        self.index = index
        self.params = params


def _matern52(sq_dists: np.ndarray, signal_variance: float) -> np.ndarray:
    d = np.sqrt(np.maximum(sq_dists, 0.0))
    return signal_variance * (1.0 + SQRT5 * d + (5.0 / 3.0) * sq_dists) * np.exp(-SQRT5 * d)


def _scaled_sq_dists(a: np.ndarray, b: np.ndarray, length_scale: float) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.sum((diff / length_scale) ** 2, axis=2)


def gp_fit(points: np.ndarray, values: np.ndarray, kernel: KernelConfig = KernelConfig()) -> GpSurrogate:
    """Exact GP regression on mean-centered values."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    values = np.asarray(values, dtype=np.float64).ravel()
    if points.shape[0] < 1 or points.shape[0] != values.shape[0]:
        raise SchemaError("gp_fit needs >= 1 point with matching values")
    if (points < -1e-12).any() or (points > 1 + 1e-12).any():
        raise SchemaError("gp_fit points must lie in the unit cube")
    n = points.shape[0]
    K = _matern52(_scaled_sq_dists(points, points, kernel.length_scale), kernel.signal_variance)
    value_mean = float(values.mean())
    centered = values - value_mean
    jitter = kernel.noise_jitter
    for _ in range(4):
        try:
            chol = np.linalg.cholesky(K + jitter * np.eye(n))
            break
        except np.linalg.LinAlgError:
            jitter *= 10.0
    else:
        raise NumericalFailure(
            f"kernel matrix not positive definite after jitter escalation to {jitter:g}")
    alpha = np.linalg.solve(chol.T, np.linalg.solve(chol, centered))
    return GpSurrogate(
        points=points, values=values, kernel=kernel, value_mean=value_mean,
        chol=chol, alpha=alpha, jitter_used=jitter,
    )


def _posterior_batch(gp: GpSurrogate, X: np.ndarray):
    ks = _matern52(
        _scaled_sq_dists(gp.points, X, gp.kernel.length_scale), gp.kernel.signal_variance
    )  # (n_obs, n_query)
    mean = gp.value_mean + ks.T @ gp.alpha
    v = np.linalg.solve(gp.chol, ks)
    var = gp.kernel.signal_variance - np.sum(v * v, axis=0)
    return mean, np.sqrt(np.maximum(var, 0.0))


def gp_posterior(gp: GpSurrogate, x: np.ndarray):
    """(mean, std) of the posterior at one unit-cube point; std clamped at 0."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape[0] != gp.points.shape[1]:
        raise SchemaError("query dimension does not match the surrogate")
    if (x < -1e-12).any() or (x > 1 + 1e-12).any():
        raise SchemaError("query point must lie in the unit cube")
    mean, std = _posterior_batch(gp, x.reshape(1, -1))
    return float(mean[0]), float(std[0])


def expected_improvement(mean: float, std: float, best_so_far: float) -> float:
    """EI for maximization; reduces to max(mean - best, 0) at std = 0."""
    improve = mean - best_so_far
    if std <= 0.0:
        return max(improve, 0.0)
    z = improve / std
    cdf = 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))
    pdf = INV_SQRT_2PI * math.exp(-0.5 * z * z)
    return max(improve * cdf + std * pdf, 0.0)


def _ei_batch(mean: np.ndarray, std: np.ndarray, best: float) -> np.ndarray:
    improve = mean - best
    out = np.maximum(improve, 0.0)
    pos = std > 0.0
    z = improve[pos] / std[pos]
    erf = np.array([math.erf(v) for v in z / math.sqrt(2.0)])
    cdf = 0.5 * (1.0 + erf)
    pdf = INV_SQRT_2PI * np.exp(-0.5 * z * z)
    out[pos] = np.maximum(improve[pos] * cdf + std[pos] * pdf, 0.0)
    return out


def latin_hypercube(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """n stratified samples in [0,1]^d, one per stratum per dimension."""
    u = np.empty((n, d), dtype=np.float64)
    for j in range(d):
        u[:, j] = (rng.permutation(n) + rng.random(n)) / n
    return u


def bayes_optimize(
    objective,
    space: SearchSpace,
    budget: int = 25,
    n_init: int = 8,
    seed: int = 0,
    kernel: KernelConfig = KernelConfig(),
    n_candidates: int = 1024,
):
    """Maximize ``objective(params dict)``; returns (best trial, all trials)."""
    if not 1 <= n_init <= budget:
        raise SchemaError("need budget >= n_init >= 1")
    d = space.n_dims

    def evaluate(index: int, u: np.ndarray) -> Trial:
        params = space.decode(u)
        t0 = time.perf_counter()
        try:
            value = float(objective(params))
        except Exception as exc:
            raise ObjectiveFailure(index, params, exc) from exc
        return Trial(index=index, params=params, objective=value,
                     duration=time.perf_counter() - t0)

    init_rng = child_rng(seed, "hpo-init")
    unit_points = list(latin_hypercube(n_init, d, init_rng))
    trials = [evaluate(i, u) for i, u in enumerate(unit_points)]

    for t in range(n_init, budget):
        X = np.array(unit_points)
        y = np.array([tr.objective for tr in trials])
        gp = gp_fit(X, y, kernel)
        cand = child_rng(seed, "hpo-cand", t).random((n_candidates, d))
        mean, std = _posterior_batch(gp, cand)
        ei = _ei_batch(mean, std, float(y.max()))
        pick = int(np.argmax(ei))  # lowest index wins ties
        unit_points.append(cand[pick])
        trials.append(evaluate(t, cand[pick]))

    best = trials[0]
    for tr in trials[1:]:
        if tr.objective > best.objective:
            best = tr
    return best, trials


def write_trials_jsonl(trials, path) -> None:
    """One Trial per line, machine-readable audit log."""
    with open(path, "w", encoding="utf-8") as fh:
        for tr in trials:
            fh.write(dumps_canonical(tr.as_dict()) + "\n")
