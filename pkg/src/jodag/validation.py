"""Input validation helpers shared by the estimator and the CLI."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .ordering import Ordering
from .scoring import Dataset

__all__ = ["as_datasets", "check_ordering", "as_rng", "spawn_seeds"]


def as_datasets(X) -> list[Dataset]:
    """Coerce estimator input into a list of datasets sharing one column count.

    Accepts a single 2-D array (one source), a sequence of 2-D arrays, or
    ready-made :class:`Dataset` objects.
    """
    if isinstance(X, Dataset):
        return [X]
    if isinstance(X, np.ndarray):
        if X.ndim == 2:
            return [Dataset(X)]
        if X.ndim == 3:
            return [Dataset(mat) for mat in X]
        raise ValueError("array input must be 2-D (one source) or 3-D (stacked)")
    if isinstance(X, Sequence):
        if len(X) == 0:
            raise ValueError("need at least one dataset")
        datasets = [item if isinstance(item, Dataset) else Dataset(np.asarray(item)) for item in X]
        p = datasets[0].p
        if any(ds.p != p for ds in datasets):
            raise ValueError("all datasets must have the same number of columns")
        return datasets
    raise TypeError(f"cannot interpret {type(X).__name__} as a dataset collection")


def check_ordering(value, p: int) -> Ordering:
    """Coerce a permutation given as an Ordering, string, or label sequence."""
    if isinstance(value, Ordering):
        sigma = value
    elif isinstance(value, str):
        sigma = Ordering.from_string(value)
    else:
        sigma = Ordering(tuple(int(v) for v in value))
    if sigma.p != p:
        raise ValueError(f"ordering has length {sigma.p}, expected {p}")
    return sigma


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def spawn_seeds(seed: int, count: int) -> list[int]:
    """Derive reproducible child seeds (used for per-chain and per-source RNGs)."""
    seq = np.random.SeedSequence(seed)
    return [int(s.generate_state(1)[0]) for s in seq.spawn(count)]
