"""Deterministic partitioned reductions.

The thread count selects a fixed partition of the index range; partial sums
are folded in a fixed order, so results are bitwise-reproducible for a given
partition and agree across partitions to floating-point reassociation error.
"""
from __future__ import annotations

import numpy as np


def part_sum(a: np.ndarray, parts: int = 1, axis: int = 0) -> np.ndarray | float:
    if parts <= 1:
        return a.sum(axis=axis)
    chunks = np.array_split(a, parts, axis=axis)
    partials = np.stack([c.sum(axis=axis) for c in chunks])
    return np.add.reduce(partials, axis=0)


def part_matvec(m: np.ndarray, v: np.ndarray, parts: int = 1) -> np.ndarray:
    """m.T @ v over row chunks of m (m is points-by-dims, v weights points)."""
    if parts <= 1:
        return m.T @ v
    edges = np.array_split(np.arange(m.shape[0]), parts)
    partials = np.stack([m[idx].T @ v[idx] for idx in edges])
    return np.add.reduce(partials, axis=0)
