"""Shared numeric types and the probability-simplex projection.

The wrappers below validate their contents once, on construction, and are
never mutated afterwards; every operation in the package returns fresh
objects.  Tolerances live here as module constants so all layers agree on
what counts as "stochastic".
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidInput, NotColumnStochastic

#: column sums of affiliation / stochastic matrices must match 1 this closely
COLUMN_SUM_TOL = 1e-8
#: entries this far below 0 (or above 1) are numerical noise and get clipped
ENTRY_TOL = 1e-10
#: landmark columns closer than this (Euclidean) count as duplicates
DUPLICATE_LANDMARK_TOL = 1e-12

# Inputs already this close to the simplex are returned unchanged by
# project_to_simplex.  The window is far below COLUMN_SUM_TOL, and it makes
# the projection bitwise idempotent: one pass always lands inside it.
_FAST_PATH_TOL = 1e-12


def _as_float_matrix(data, name: str) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2:
        raise InvalidInput(f"{name} must be a 2-d array, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidInput(f"{name} must be non-empty")
    if not np.isfinite(arr).all():
        raise InvalidInput(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class TimeSeriesMatrix:
    """A D x T block of observations, one column per time step.

    Rows are state-space components, columns are ordered by time.  Optional
    ``labels`` name the rows.
    """

    data: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        arr = _as_float_matrix(self.data, "data")
        object.__setattr__(self, "data", arr)
        if self.labels is not None:
            labels = tuple(str(l) for l in self.labels)
            if len(labels) != arr.shape[0]:
                raise InvalidInput(
                    f"{len(labels)} labels for {arr.shape[0]} rows"
                )
            object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def length(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class LandmarkSet:
    """D x K matrix whose columns are landmark points.

    Columns must be pairwise distinct; two coincident landmarks make the
    affiliation problem degenerate without changing its optimum.
    """

    points: np.ndarray

    def __post_init__(self):
        arr = _as_float_matrix(self.points, "points")
        object.__setattr__(self, "points", arr)
        k = arr.shape[1]
        if k > 1:
            diff = arr[:, :, None] - arr[:, None, :]
            dist = np.sqrt((diff ** 2).sum(axis=0))
            dist[np.diag_indices(k)] = np.inf
            if dist.min() <= DUPLICATE_LANDMARK_TOL:
                i, j = np.unravel_index(np.argmin(dist), dist.shape)
                raise InvalidInput(f"landmark columns {i} and {j} coincide")

    @property
    def dim(self) -> int:
        return self.points.shape[0]

    @property
    def k(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class AffiliationSeries:
    """K x T matrix whose columns are stochastic weight vectors.

    Entries slightly below zero (within ``ENTRY_TOL``) are clipped to zero on
    construction; columns must sum to one within ``COLUMN_SUM_TOL``.
    """

    weights: np.ndarray

    def __post_init__(self):
        arr = _as_float_matrix(self.weights, "weights")
        if arr.min() < -ENTRY_TOL:
            raise InvalidInput(
                f"affiliation entry {arr.min():.3e} below -{ENTRY_TOL:.0e}"
            )
        arr = np.clip(arr, 0.0, None)
        sums = arr.sum(axis=0)
        dev = np.abs(sums - 1.0).max()
        if dev > COLUMN_SUM_TOL:
            raise InvalidInput(
                f"affiliation column sums deviate from 1 by {dev:.3e}"
            )
        object.__setattr__(self, "weights", arr)

    @property
    def k(self) -> int:
        return self.weights.shape[0]

    @property
    def length(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class StochasticMatrix:
    """A column-stochastic matrix: non-negative, every column sums to one.

    Construction clips entries within ``ENTRY_TOL`` of [0, 1] back into the
    interval and renormalizes columns whose sums are within
    ``COLUMN_SUM_TOL`` of one.  Anything further off raises
    :class:`NotColumnStochastic`.
    """

    values: np.ndarray

    def __post_init__(self):
        arr = _as_float_matrix(self.values, "values")
        if arr.min() < -ENTRY_TOL or arr.max() > 1.0 + ENTRY_TOL:
            raise NotColumnStochastic(
                f"entries outside [0, 1]: min {arr.min():.3e}, max {arr.max():.3e}"
            )
        arr = np.clip(arr, 0.0, 1.0)
        sums = arr.sum(axis=0)
        dev = np.abs(sums - 1.0).max()
        if dev > COLUMN_SUM_TOL:
            j = int(np.argmax(np.abs(sums - 1.0)))
            raise NotColumnStochastic(
                f"column {j} sums to {sums[j]:.10f}"
            )
        arr = arr / sums
        object.__setattr__(self, "values", arr)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]


def validate_stochastic(m) -> StochasticMatrix:
    """Validate a matrix as column-stochastic and return the typed wrapper."""
    if isinstance(m, StochasticMatrix):
        return m
    return StochasticMatrix(np.asarray(m, dtype=float))


@dataclass(frozen=True)
class SegmentedAffiliationPair:
    """Aligned affiliation segments for a source/target pair plus a lag.

    Each segment pairs a source series with a target series of equal length.
    Segments shorter than ``tau + 1`` are legal here but contribute no
    training pairs when fitting (lagged pairs never straddle segments).
    """

    segments: tuple[tuple[AffiliationSeries, AffiliationSeries], ...]
    tau: int

    def __post_init__(self):
        if int(self.tau) != self.tau or self.tau < 0:
            raise InvalidInput(f"tau must be a non-negative integer, got {self.tau}")
        object.__setattr__(self, "tau", int(self.tau))
        segments = tuple((s, t) for s, t in self.segments)
        if not segments:
            raise InvalidInput("at least one segment required")
        k_src = segments[0][0].k
        k_tgt = segments[0][1].k
        for i, (src, tgt) in enumerate(segments):
            if src.length != tgt.length:
                raise DimensionMismatch(
                    f"segment {i}: source length {src.length} != target length {tgt.length}"
                )
            if src.k != k_src or tgt.k != k_tgt:
                raise DimensionMismatch(f"segment {i}: inconsistent affiliation size")
        object.__setattr__(self, "segments", segments)


def project_to_simplex(v) -> np.ndarray:
    """Euclidean projection of a vector onto the probability simplex.

    Uses the sort-and-shift algorithm: sort descending, locate the last index
    whose running average keeps the shifted entry positive, subtract that
    threshold and clip.  O(K log K), exact up to rounding.  Vectors already
    on the simplex (within 1e-12) are returned unchanged, which makes the
    projection idempotent bit for bit.
    """
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInput(f"expected a non-empty vector, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise InvalidInput("input contains non-finite entries")
    if arr.min() >= 0.0 and abs(arr.sum() - 1.0) <= _FAST_PATH_TOL:
        return arr.copy()
    u = np.sort(arr)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, arr.size + 1)
    rho = int(np.nonzero(u * j > css - 1.0)[0][-1])
    theta = (css[rho] - 1.0) / (rho + 1.0)
    w = np.maximum(arr - theta, 0.0)
    return w / w.sum()


def project_columns_to_simplex(m: np.ndarray) -> np.ndarray:
    """Project every column of a K x T matrix onto the probability simplex.

    Batched form of :func:`project_to_simplex` without its fast path; solver
    inner loops call this every iteration.
    """
    u = -np.sort(-m, axis=0)
    css = np.cumsum(u, axis=0)
    j = np.arange(1, m.shape[0] + 1)[:, None]
    mask = u * j > css - 1.0
    rho = m.shape[0] - 1 - np.argmax(mask[::-1, :], axis=0)
    cols = np.arange(m.shape[1])
    theta = (css[rho, cols] - 1.0) / (rho + 1.0)
    w = np.maximum(m - theta, 0.0)
    return w / w.sum(axis=0)
