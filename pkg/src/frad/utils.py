"""Seed derivation, deterministic JSON, and a small thread-pool helper.

All randomness in the package flows through ``child_seed``/``child_rng`` so
that every component gets an independent, reproducible stream addressed by a
(seed, *path) tuple. Paths mix through SHA-256, which is stable across
platforms and Python versions (unlike the builtin ``hash``).
"""
from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable, Sequence

import numpy as np


def child_seed(seed: int, *path: object) -> int:
    """Derive a 64-bit seed from a master seed and a component path."""
    key = "/".join(str(p) for p in (seed, *path))
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def child_rng(seed: int, *path: object) -> np.random.Generator:
    """A fresh PCG64 generator for the given (seed, *path)."""
    return np.random.default_rng(child_seed(seed, *path))


def dumps_canonical(obj: Any) -> str:
    """Serialize to JSON with sorted keys and stable float formatting."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(obj: Any) -> str:
    """Short stable hash identifying a run configuration."""
    return hashlib.sha256(dumps_canonical(obj).encode("utf-8")).hexdigest()[:16]


def to_jsonable(obj: Any) -> Any:
    """Recursively convert numpy scalars/arrays to plain Python types."""
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()] if obj.ndim > 1 else obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj


def thread_map(fn: Callable, items: Sequence, n_threads: int) -> list:
    """Map ``fn`` over ``items``, preserving order.

    With ``n_threads`` <= 1 this is a plain loop. Callers must only submit
    tasks whose results are independent of scheduling (independent inputs,
    pre-derived seeds), so the output is identical for any thread count.
    """
    if n_threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n_threads) as pool:
        return list(pool.map(fn, items))
