"""Elementary statistics shared by the whole pipeline.

One set of conventions, used everywhere: sample standard deviations with the
n-1 denominator, and linear-interpolation quantiles at index h = (n-1)*q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SummaryStats:
    """Per-column descriptive summary."""

    n: int
    mean: float
    sd: float
    min: float
    max: float


def _as_vector(x, name: str = "x") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    return arr


def sample_sd(x) -> float:
    """Sample standard deviation (n-1 denominator)."""
    arr = _as_vector(x)
    if arr.size < 2:
        raise ValueError("sample sd needs at least 2 values")
    return float(np.std(arr, ddof=1))


def summarize(x) -> SummaryStats:
    arr = _as_vector(x)
    if arr.size == 0:
        raise ValueError("cannot summarize an empty vector")
    sd = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    return SummaryStats(
        n=int(arr.size),
        mean=float(np.mean(arr)),
        sd=sd,
        min=float(np.min(arr)),
        max=float(np.max(arr)),
    )


def pearson_corr(x, y) -> float:
    """Sample Pearson correlation of two equally long vectors."""
    xa = _as_vector(x, "x")
    ya = _as_vector(y, "y")
    if xa.size != ya.size:
        raise ValueError(f"length mismatch: {xa.size} vs {ya.size}")
    if xa.size < 2:
        raise ValueError("correlation needs at least 2 observations")
    xd = xa - xa.mean()
    yd = ya - ya.mean()
    sxx = float(xd @ xd)
    syy = float(yd @ yd)
    if sxx == 0.0:
        raise ValueError("x has zero variance")
    if syy == 0.0:
        raise ValueError("y has zero variance")
    r = float(xd @ yd) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def standardize(x) -> np.ndarray:
    """Z-scores with sample mean 0 and sample sd 1 (n-1 denominator)."""
    arr = _as_vector(x)
    if arr.size < 2:
        raise ValueError("standardize needs at least 2 values")
    sd = float(np.std(arr, ddof=1))
    if sd == 0.0:
        raise ValueError("cannot standardize a zero-variance vector")
    return (arr - arr.mean()) / sd


def quantile(x, q: float) -> float:
    """Linear-interpolation quantile: index h = (n-1)*q between order stats."""
    arr = _as_vector(x)
    if arr.size == 0:
        raise ValueError("quantile of an empty vector is undefined")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    srt = np.sort(arr)
    h = (arr.size - 1) * q
    lo = math.floor(h)
    hi = math.ceil(h)
    if lo == hi:
        return float(srt[lo])
    return float(srt[lo] + (h - lo) * (srt[hi] - srt[lo]))
