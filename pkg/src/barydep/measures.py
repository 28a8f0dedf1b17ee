"""Dependency measures on column-stochastic mappings.

Two scalar measures quantify how much a mapping's columns differ from each
other.  Identical columns mean the source state carries no information
about the target; strongly differing columns mean it pins the target down.

* :func:`schatten1`: the sum of singular values, a continuous surrogate
  for rank.  For a column-stochastic K_tgt x K_src matrix it ranges from
  sqrt(K_src / K_tgt) (all entries equal) up to K_src (permutation matrix,
  possibly padded with zero rows).
* :func:`avg_row_variance`: the mean over rows of the sample variance of
  the row's entries.  Zero iff all columns are equal; at most 1/K_tgt for
  square matrices (attained by permutations).

:func:`build_report` assembles both measures for every ordered variable
pair into matrices M and the antisymmetric relative differences
``delta_ij = (M_ij - M_ji) / max(M_ij, M_ji)`` whose sign says which
direction of influence dominates.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import StochasticMatrix, validate_stochastic
from .errors import DegenerateShape, DimensionMismatch, InvalidInput
from .mapping import MappingFit

_ANTISYM_TOL = 1e-12


def schatten1(m: StochasticMatrix | np.ndarray) -> float:
    """Sum of all singular values of a column-stochastic matrix."""
    values = validate_stochastic(m).values
    return float(np.linalg.svd(values, compute_uv=False).sum())


def avg_row_variance(m: StochasticMatrix | np.ndarray) -> float:
    """Mean over rows of the sample variance (divisor K_src - 1) of row entries."""
    values = validate_stochastic(m).values
    if values.shape[1] < 2:
        raise DegenerateShape(
            "row variance needs at least two columns"
        )
    return float(np.var(values, axis=1, ddof=1).mean())


@dataclass(frozen=True)
class DependencyReport:
    """Pairwise dependency measures for N variables at one lag.

    ``m_schatten[i, j]`` and ``m_rowvar[i, j]`` hold the measures of the
    mapping from variable i to variable j; the delta matrices hold the
    relative differences between the (i, j) and (j, i) entries.  Deltas are
    antisymmetric with zero diagonal and entries in [-1, 1].
    """

    variable_names: tuple[str, ...]
    m_schatten: np.ndarray
    m_rowvar: np.ndarray
    delta_schatten: np.ndarray
    delta_rowvar: np.ndarray
    tau: int

    def __post_init__(self):
        n = len(self.variable_names)
        object.__setattr__(self, "variable_names",
                           tuple(str(v) for v in self.variable_names))
        for name in ("m_schatten", "m_rowvar", "delta_schatten", "delta_rowvar"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (n, n):
                raise DimensionMismatch(f"{name} must be {n} x {n}")
            object.__setattr__(self, name, arr)
        for name in ("delta_schatten", "delta_rowvar"):
            delta = getattr(self, name)
            if np.abs(delta + delta.T).max() > _ANTISYM_TOL:
                raise InvalidInput(f"{name} is not antisymmetric")
            if np.abs(np.diag(delta)).max() > 0.0:
                raise InvalidInput(f"{name} has a non-zero diagonal")
            if np.abs(delta).max() > 1.0:
                raise InvalidInput(f"{name} has entries outside [-1, 1]")


def _relative_differences(m: np.ndarray) -> np.ndarray:
    """Antisymmetric (M_ij - M_ji) / max(M_ij, M_ji); 0 when both are 0."""
    n = m.shape[0]
    delta = np.zeros_like(m)
    for i in range(n):
        for j in range(i + 1, n):
            top = max(m[i, j], m[j, i])
            if top > 0.0:
                d = (m[i, j] - m[j, i]) / top
                delta[i, j] = d
                delta[j, i] = -d
    return delta


def build_report(fits: Sequence[Sequence[MappingFit | None]],
                 names: Sequence[str]) -> DependencyReport:
    """Assemble a :class:`DependencyReport` from an N x N table of fits.

    ``fits[i][j]`` maps variable i to variable j; diagonal entries may be
    None, in which case the measure matrices record 0 there.  All fits must
    share one lag.
    """
    n = len(names)
    if len(fits) != n or any(len(row) != n for row in fits):
        raise DimensionMismatch(f"fit table must be {n} x {n}")
    taus = {fit.tau for row in fits for fit in row if fit is not None}
    if len(taus) != 1:
        raise InvalidInput(f"fits disagree on tau: {sorted(taus)}")
    m_schatten = np.zeros((n, n))
    m_rowvar = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            fit = fits[i][j]
            if fit is None:
                if i != j:
                    raise InvalidInput(
                        f"missing fit for pair ({names[i]}, {names[j]})"
                    )
                continue
            m_schatten[i, j] = schatten1(fit.matrix)
            m_rowvar[i, j] = avg_row_variance(fit.matrix)
    return DependencyReport(
        variable_names=tuple(names),
        m_schatten=m_schatten,
        m_rowvar=m_rowvar,
        delta_schatten=_relative_differences(m_schatten),
        delta_rowvar=_relative_differences(m_rowvar),
        tau=int(taus.pop()),
    )
