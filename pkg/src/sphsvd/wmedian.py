"""Weighted l1 location: argmin_d sum_i w_i |x_i - d|.

The solver is a weighted quickselect. Each round picks the median of the live
values as pivot via ``np.partition`` (numpy's introselect, which falls back to
median-of-medians, so every round is worst-case linear), keeps the half that
must contain the answer, and carries the discarded weight along. The live set
halves every round, so the whole solve is O(m).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, ParameterError

_SMALL = 32


@dataclass(frozen=True)
class WeightedSample:
    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.values, dtype=np.float64).ravel()
        w = np.asarray(self.weights, dtype=np.float64).ravel()
        if x.shape != w.shape:
            raise ParameterError(f"values/weights length mismatch: {x.size} vs {w.size}")
        if x.size == 0:
            raise DegenerateInputError("empty sample")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(w))):
            raise ParameterError("non-finite values or weights")
        if np.any(w < 0):
            raise ParameterError("weights must be nonnegative")
        if not w.sum() > 0:
            raise DegenerateInputError("all weights are zero")
        object.__setattr__(self, "values", x)
        object.__setattr__(self, "weights", w)


def _coerce(s, weights):
    if weights is not None:
        s = WeightedSample(s, weights)
    elif isinstance(s, tuple) and len(s) == 2:
        s = WeightedSample(*s)
    elif not isinstance(s, WeightedSample):
        raise ParameterError("pass a WeightedSample or (values, weights)")
    return s.values, s.weights


def weighted_median(s, weights=None) -> float:
    """Lower weighted median: smallest x_i with W(x <= x_i) >= W/2.

    This is the left endpoint of the minimizer set of ``sum w_i |x_i - d|``.
    Accepts a :class:`WeightedSample` or ``(values, weights)``.
    """
    x, w = _coerce(s, weights)
    keep = w > 0
    if not keep.all():
        x, w = x[keep], w[keep]
    return _select(x, w, 0.5 * w.sum())


def _select(x, w, target):
    below = 0.0  # weight already known to lie strictly left of the live set
    while x.size > _SMALL:
        k = x.size // 2
        pivot = np.partition(x, k)[k]
        lo = x < pivot
        w_lo = below + w[lo].sum()
        if w_lo >= target:
            x, w = x[lo], w[lo]
            continue
        eq = x == pivot
        w_eq = w[eq].sum()
        if w_lo + w_eq >= target:
            return float(pivot)
        hi = ~(lo | eq)
        below = w_lo + w_eq
        x, w = x[hi], w[hi]
    return _select_sorted(x, w, target, below)


def _select_sorted(x, w, target, below=0.0):
    order = np.argsort(x, kind="stable")
    cum = below + np.cumsum(w[order])
    i = int(np.searchsorted(cum, target, side="left"))
    i = min(i, x.size - 1)  # guard the target == total rounding edge
    return float(x[order[i]])


def weighted_median_sorted(s, weights=None) -> float:
    """O(m log m) reference path: one sort and a cumulative scan."""
    x, w = _coerce(s, weights)
    keep = w > 0
    return _select_sorted(x[keep], w[keep], 0.5 * w[keep].sum())


def weighted_l1_objective(s, d: float) -> float:
    x, w = _coerce(s, None)
    return math.fsum(w * np.abs(x - d))
