"""Lagged column-stochastic mappings between affiliation series.

Given affiliation series for a source and a target variable, fit the
column-stochastic matrix M minimizing ``||W_tgt[:, tau:] - M W_src[:, :-tau]||_F``.
Because M is column-stochastic and affiliation columns are stochastic
vectors, ``M @ w`` is again a stochastic vector: the mapping sends
affiliations to affiliations.  Self-dynamics is the special case
source == target.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    AffiliationSeries,
    SegmentedAffiliationPair,
    StochasticMatrix,
    COLUMN_SUM_TOL,
    ENTRY_TOL,
    project_columns_to_simplex,
)
from .errors import DimensionMismatch, InsufficientData, InvalidInput

_REL_TOL = 1e-10
_MAX_ITER = 20_000


@dataclass(frozen=True)
class MappingFit:
    """A fitted lagged mapping.

    ``residual`` is the Frobenius norm of the training mismatch,
    ``pairs_used`` the number of (t - tau, t) training pairs, and
    ``objective_trace`` the (non-increasing) solver objective per iteration.
    """

    matrix: StochasticMatrix
    residual: float
    tau: int
    pairs_used: int
    objective_trace: tuple[float, ...]


def _check_tau(tau) -> int:
    if int(tau) != tau or tau < 0:
        raise InvalidInput(f"tau must be a non-negative integer, got {tau}")
    return int(tau)


def _lagged_blocks(source: AffiliationSeries, target: AffiliationSeries,
                   tau: int) -> tuple[np.ndarray, np.ndarray]:
    if source.length != target.length:
        raise DimensionMismatch(
            f"source length {source.length} != target length {target.length}"
        )
    if source.length <= tau:
        raise InsufficientData(
            f"need more than tau={tau} time steps, got {source.length}"
        )
    if tau == 0:
        return source.weights, target.weights
    return source.weights[:, :-tau], target.weights[:, tau:]


def _fit_from_blocks(src: np.ndarray, tgt: np.ndarray, tau: int) -> MappingFit:
    """Projected gradient descent on the mapping, from the uniform matrix.

    Step size 1/L with L the largest eigenvalue of the source Gram matrix;
    each iteration projects every column back onto the simplex.  Stops when
    the relative objective change drops below 1e-10 or after 20 000
    iterations.  Source coordinates that never receive weight leave their
    mapping column untouched (the gradient there is identically zero).
    """
    k_src = src.shape[0]
    k_tgt = tgt.shape[0]
    gram = src @ src.T
    cross = tgt @ src.T
    const = 0.5 * float((tgt * tgt).sum())
    lipschitz = float(np.linalg.eigvalsh(gram)[-1])
    step = 1.0 / max(lipschitz, 1e-30)

    m = np.full((k_tgt, k_src), 1.0 / k_tgt)
    obj = const - float((m * cross).sum()) + 0.5 * float(((m @ gram) * m).sum())
    trace = [obj]
    for _ in range(_MAX_ITER):
        grad = m @ gram - cross
        m = project_columns_to_simplex(m - step * grad)
        new_obj = const - float((m * cross).sum()) \
            + 0.5 * float(((m @ gram) * m).sum())
        trace.append(new_obj)
        if obj - new_obj <= _REL_TOL * max(obj, 1e-300):
            obj = new_obj
            break
        obj = new_obj
    residual = float(np.linalg.norm(tgt - m @ src))
    return MappingFit(
        matrix=StochasticMatrix(m),
        residual=residual,
        tau=tau,
        pairs_used=src.shape[1],
        objective_trace=tuple(trace),
    )


def fit_mapping(source: AffiliationSeries, target: AffiliationSeries,
                tau: int) -> MappingFit:
    """Fit the lag-``tau`` column-stochastic mapping from source to target."""
    tau = _check_tau(tau)
    src, tgt = _lagged_blocks(source, target, tau)
    return _fit_from_blocks(src, tgt, tau)


def fit_mapping_segmented(pair: SegmentedAffiliationPair) -> MappingFit:
    """Fit one mapping from several segments, never pairing across a boundary.

    Segments shorter than ``tau + 1`` are dropped; the lagged pairs of the
    remaining segments are concatenated and fitted jointly, so
    ``pairs_used`` is the sum of (length - tau) over retained segments.
    """
    tau = pair.tau
    src_parts = []
    tgt_parts = []
    for src, tgt in pair.segments:
        if src.length <= tau:
            continue
        s, t = _lagged_blocks(src, tgt, tau)
        src_parts.append(s)
        tgt_parts.append(t)
    if not src_parts:
        raise InsufficientData(
            f"no segment longer than tau={tau} time steps"
        )
    return _fit_from_blocks(np.hstack(src_parts), np.hstack(tgt_parts), tau)


def predict(fit: MappingFit, source_state) -> np.ndarray:
    """Apply the mapping to one source affiliation vector.

    The result is the weighted average of the mapping's columns, weights
    given by the source state, hence itself a stochastic vector.
    """
    state = np.asarray(source_state, dtype=float).ravel()
    if state.shape[0] != fit.matrix.n_cols:
        raise DimensionMismatch(
            f"state has length {state.shape[0]}, mapping expects {fit.matrix.n_cols}"
        )
    if not np.isfinite(state).all():
        raise InvalidInput("state contains non-finite entries")
    if state.min() < -ENTRY_TOL or abs(state.sum() - 1.0) > COLUMN_SUM_TOL:
        raise InvalidInput("state is not a stochastic vector")
    return fit.matrix.values @ state
