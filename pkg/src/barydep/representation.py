"""Landmark placement and barycentric affiliation fitting.

Data points are expressed as convex combinations of landmark points: a
D x T series ``X`` is approximated by ``P @ W`` where the columns of the
D x K matrix ``P`` are landmarks and every column of the K x T matrix ``W``
is a stochastic weight vector.  :func:`fit_landmarks` solves for both by
alternating minimization; :func:`solve_affiliations` solves for the weights
alone, given landmarks; :func:`anchored_affiliation` picks, among all
weight vectors representing a point equally well, the one closest to a
reference vector.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .core import (
    AffiliationSeries,
    LandmarkSet,
    TimeSeriesMatrix,
    COLUMN_SUM_TOL,
    ENTRY_TOL,
    project_columns_to_simplex,
)
from .errors import DimensionMismatch, InvalidInput

#: regularization added to the Gram matrix in the landmark update; guards
#: singularity when an affiliation row is unused
LANDMARK_RIDGE = 1e-10

#: weight on the distance-to-reference term in anchored_affiliation
ANCHOR_WEIGHT = 1e-6

_INNER_TOL = 1e-10
_INNER_MAX_ITER = 10_000


def _fista_columns(sts, stx, start, lipschitz, tol, max_iter,
                   ridge=0.0, reference=None):
    """Accelerated projected gradient on per-column simplex least squares.

    Minimizes 0.5 * ||x_t - P w||^2 (plus an optional ridge pull toward a
    reference column) independently for every column, with step 1/L and
    per-column adaptive momentum restart.  A column is frozen once its
    iterate moves less than ``tol`` in one step; the loop ends when every
    column is frozen or ``max_iter`` is reached.

    Returns the weight matrix and the number of iterations run.
    """
    n = stx.shape[1]
    step_size = 1.0 / max(lipschitz, 1e-30)
    out = start.copy()
    idx = np.arange(n)
    g = start.copy()
    y = start.copy()
    t = np.ones(n)
    ref = reference
    iterations = 0
    for it in range(max_iter):
        grad = sts @ y - stx
        if ridge:
            grad += ridge * (y - ref)
        g_new = project_columns_to_simplex(y - step_size * grad)
        step = g_new - g
        delta = np.abs(step).max(axis=0)
        # restart momentum for columns whose update reversed direction
        t = np.where(((y - g_new) * step).sum(axis=0) > 0.0, 1.0, t)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = g_new + ((t - 1.0) / t_next) * step
        t = t_next
        g = g_new
        iterations = it + 1
        done = delta < tol
        if done.any():
            out[:, idx[done]] = g[:, done]
            keep = ~done
            if not keep.any():
                return out, iterations
            idx = idx[keep]
            g = g[:, keep]
            y = y[:, keep]
            t = t[keep]
            stx = stx[:, keep]
            if ridge:
                ref = ref[:, keep]
    out[:, idx] = g
    return out, iterations


def _gram_lipschitz(points: np.ndarray, extra: float = 0.0) -> tuple[np.ndarray, float]:
    sts = points.T @ points
    lipschitz = float(np.linalg.eigvalsh(sts)[-1]) + extra
    return sts, lipschitz


def _simplex_qp(q: np.ndarray, c: np.ndarray, start: np.ndarray) -> np.ndarray:
    """Exact minimizer of 0.5 g'Qg - c'g over the probability simplex.

    Primal active-set method for strictly positive definite Q: repeatedly
    solve the equality-constrained problem on the currently free variables,
    take the longest feasible step toward its solution, and exchange bound
    constraints until the KKT conditions hold.  Finite and deterministic;
    K stays small here, so each KKT system is tiny.
    """
    k = q.shape[0]
    g = np.asarray(start, dtype=float).copy()
    free = g > 0.0
    if not free.any():
        free[int(np.argmax(c))] = True
        g[:] = 0.0
        g[free] = 1.0
    for _ in range(50 * k + 50):
        nf = int(free.sum())
        kkt = np.empty((nf + 1, nf + 1))
        kkt[:nf, :nf] = q[np.ix_(free, free)]
        kkt[:nf, nf] = 1.0
        kkt[nf, :nf] = 1.0
        kkt[nf, nf] = 0.0
        rhs = np.append(c[free], 1.0)
        sol = np.linalg.solve(kkt, rhs)
        candidate = np.zeros(k)
        candidate[free] = sol[:nf]
        lam = sol[nf]
        if candidate[free].min() >= -1e-13:
            candidate[candidate < 0.0] = 0.0
            # multipliers of the active bounds decide optimality
            if not free.all():
                mu = (q @ candidate - c)[~free] + lam
                if mu.min() < -1e-11:
                    idx = np.nonzero(~free)[0]
                    free[idx[int(np.argmin(mu))]] = True
                    g = candidate
                    continue
            return candidate
        # blocked: step as far as feasibility allows, fix the blocker at 0
        direction = candidate - g
        shrinking = free & (direction < 0.0)
        ratios = -g[shrinking] / direction[shrinking]
        alpha = ratios.min()
        g = g + min(alpha, 1.0) * direction
        blocked = np.nonzero(shrinking)[0][np.argmin(ratios)]
        g[blocked] = 0.0
        free[blocked] = False
        if not free.any():
            free[int(np.argmax(c))] = True
    return g


def solve_affiliations(data: TimeSeriesMatrix, landmarks: LandmarkSet,
                       ) -> AffiliationSeries:
    """Best stochastic weights for every column of ``data``.

    Each column w_t minimizes ||x_t - P w||_2 over the probability simplex,
    solved by accelerated projected gradient with step 1/L, where L is the
    largest eigenvalue of the landmark Gram matrix.  Iteration stops when
    the iterate changes by less than 1e-10 or after 10 000 steps.
    """
    if landmarks.dim != data.dim:
        raise DimensionMismatch(
            f"landmarks have dimension {landmarks.dim}, data {data.dim}"
        )
    sts, lipschitz = _gram_lipschitz(landmarks.points)
    stx = landmarks.points.T @ data.data
    start = np.full((landmarks.k, data.length), 1.0 / landmarks.k)
    weights, _ = _fista_columns(sts, stx, start, lipschitz,
                                _INNER_TOL, _INNER_MAX_ITER)
    return AffiliationSeries(weights)


def anchored_affiliation(point, landmarks: LandmarkSet, reference) -> np.ndarray:
    """Weights representing ``point`` that lie closest to ``reference``.

    When more landmarks than dimensions are used, many weight vectors
    reproduce the same point; this resolves the tie by minimizing
    ``||x - P w||^2 + eps * ||w - reference||^2`` with a small eps
    (``ANCHOR_WEIGHT``), an epsilon-regularized stand-in for the exact
    lexicographic rule.
    """
    x = np.asarray(point, dtype=float).reshape(-1, 1)
    if x.shape[0] != landmarks.dim:
        raise DimensionMismatch(
            f"point has dimension {x.shape[0]}, landmarks {landmarks.dim}"
        )
    if not np.isfinite(x).all():
        raise InvalidInput("point contains non-finite entries")
    ref = np.asarray(reference, dtype=float).reshape(-1, 1)
    if ref.shape[0] != landmarks.k:
        raise DimensionMismatch(
            f"reference has length {ref.shape[0]}, expected {landmarks.k}"
        )
    if not np.isfinite(ref).all():
        raise InvalidInput("reference contains non-finite entries")
    if ref.min() < -ENTRY_TOL or abs(ref.sum() - 1.0) > COLUMN_SUM_TOL:
        raise InvalidInput("reference is not a stochastic vector")
    ref = np.clip(ref[:, 0], 0.0, None)
    ref = ref / ref.sum()
    q = landmarks.points.T @ landmarks.points \
        + ANCHOR_WEIGHT * np.eye(landmarks.k)
    c = landmarks.points.T @ x[:, 0] + ANCHOR_WEIGHT * ref
    return _simplex_qp(q, c, ref)


def anchored_affiliation_series(data: TimeSeriesMatrix, landmarks: LandmarkSet,
                                initial_reference=None) -> AffiliationSeries:
    """Anchored weights for a whole series, each step referencing the last.

    This is the dynamical-systems representation: w_t is the anchored
    solution for x_t with reference w_{t-1}, so consecutive weight vectors
    move as little as the data allows.  The first step references the
    uniform vector unless ``initial_reference`` is given.
    """
    if landmarks.dim != data.dim:
        raise DimensionMismatch(
            f"landmarks have dimension {landmarks.dim}, data {data.dim}"
        )
    k = landmarks.k
    if initial_reference is None:
        ref = np.full(k, 1.0 / k)
    else:
        ref = np.asarray(initial_reference, dtype=float).ravel()
        if ref.shape[0] != k:
            raise DimensionMismatch(
                f"initial reference has length {ref.shape[0]}, expected {k}"
            )
    q = landmarks.points.T @ landmarks.points + ANCHOR_WEIGHT * np.eye(k)
    ptx = landmarks.points.T @ data.data
    weights = np.empty((k, data.length))
    for t in range(data.length):
        ref = _simplex_qp(q, ptx[:, t] + ANCHOR_WEIGHT * ref, ref)
        weights[:, t] = ref
    return AffiliationSeries(weights)


def reconstruct(landmarks: LandmarkSet, affiliations: AffiliationSeries,
                ) -> TimeSeriesMatrix:
    """Map affiliations back to state space: columns of ``P @ W``."""
    if landmarks.k != affiliations.k:
        raise DimensionMismatch(
            f"{landmarks.k} landmarks vs affiliation size {affiliations.k}"
        )
    return TimeSeriesMatrix(landmarks.points @ affiliations.weights)


@dataclass(frozen=True)
class LandmarkFitConfig:
    """Settings for :func:`fit_landmarks`.

    ``restarts`` independent runs are performed (each with its own seeded
    initialization) and the best objective wins.  With ``fixed_landmarks``
    set, only the affiliations are optimized and restarts collapse to one.
    """

    k: int
    max_iters: int = 500
    rel_tol: float = 1e-8
    restarts: int = 5
    seed: int = 0
    fixed_landmarks: LandmarkSet | None = None

    def __post_init__(self):
        if self.k < 1:
            raise InvalidInput(f"k must be >= 1, got {self.k}")
        if self.max_iters < 1:
            raise InvalidInput("max_iters must be >= 1")
        if not self.rel_tol > 0:
            raise InvalidInput("rel_tol must be positive")
        if self.restarts < 1:
            raise InvalidInput("restarts must be >= 1")
        if self.fixed_landmarks is not None and self.fixed_landmarks.k != self.k:
            raise InvalidInput(
                f"fixed landmarks have k={self.fixed_landmarks.k}, config k={self.k}"
            )


@dataclass(frozen=True)
class LandmarkFitResult:
    """Outcome of one landmark fit: the model plus its training residual.

    ``objective`` is the Frobenius norm of the reconstruction error;
    ``objective_trace`` records it after every alternation of the winning
    run and is non-increasing.
    """

    landmarks: LandmarkSet
    affiliations: AffiliationSeries
    objective: float
    iterations_used: int
    objective_trace: tuple[float, ...]


def fit_landmarks(data: TimeSeriesMatrix, cfg: LandmarkFitConfig,
                  ) -> LandmarkFitResult:
    """Fit landmarks and affiliations by alternating minimization.

    Each run alternates a weight step (per-column simplex least squares,
    warm-started from the previous weights) with a landmark step
    (ridge-stabilized unconstrained least squares, skipped when landmarks
    are fixed).  A run stops when the relative objective decrease falls
    below ``rel_tol`` or after ``max_iters`` alternations; the recorded
    objective never increases.  The best of ``restarts`` runs is returned,
    deterministically for a fixed (data, config) pair.
    """
    if cfg.fixed_landmarks is not None and cfg.fixed_landmarks.dim != data.dim:
        raise DimensionMismatch(
            f"fixed landmarks have dimension {cfg.fixed_landmarks.dim}, data {data.dim}"
        )
    restarts = 1 if cfg.fixed_landmarks is not None else cfg.restarts
    best: LandmarkFitResult | None = None
    for restart in range(restarts):
        result = _fit_single_run(data.data, cfg, restart)
        if best is None or result.objective < best.objective:
            best = result
    return best


_INIT_CENTROID_STEPS = 25


def _initial_landmarks(x: np.ndarray, k: int, seed: int, restart: int) -> np.ndarray:
    """Seeded initial landmark placement inside the data cloud.

    K data columns are drawn uniformly and jittered (scale 1e-3 of the
    per-row standard deviation; constant rows get a fixed tiny scale), then
    refined by a few centroid iterations.  The refinement keeps every
    landmark at the mean of the points nearest to it, which spreads the
    initial placement over the data density instead of leaving it at the
    luck of the draw; the alternating fit afterwards works the actual
    objective.
    """
    gen = rng.generator(seed, rng.LANDMARK_INIT, restart)
    d, t = x.shape
    idx = gen.choice(t, size=k, replace=t < k)
    scale = 1e-3 * x.std(axis=1)
    scale[scale == 0.0] = 1e-9
    points = x[:, idx] + gen.normal(size=(d, k)) * scale[:, None]
    for _ in range(_INIT_CENTROID_STEPS):
        d2 = ((x[:, None, :] - points[:, :, None]) ** 2).sum(axis=0)
        nearest = d2.argmin(axis=0)
        for j in range(k):
            members = nearest == j
            if members.any():
                points[:, j] = x[:, members].mean(axis=1)
    # coincident centroids would make the landmark set degenerate
    for j in range(1, k):
        while ((points[:, :j] - points[:, j:j + 1]) ** 2).sum(axis=0).min() <= 1e-18:
            points[:, j] += gen.normal(size=d) * np.maximum(scale, 1e-9)
    return points


def _fit_single_run(x: np.ndarray, cfg: LandmarkFitConfig, restart: int,
                    ) -> LandmarkFitResult:
    d, t = x.shape
    k = cfg.k
    fixed = cfg.fixed_landmarks is not None
    points = cfg.fixed_landmarks.points.copy() if fixed \
        else _initial_landmarks(x, k, cfg.seed, restart)
    weights = np.full((k, t), 1.0 / k)
    eye = np.eye(k)
    trace: list[float] = []
    prev_obj: float | None = None
    iterations = 0
    for it in range(1, cfg.max_iters + 1):
        sts, lipschitz = _gram_lipschitz(points)
        new_weights, _ = _fista_columns(sts, points.T @ x, weights.copy(),
                                        lipschitz, _INNER_TOL, _INNER_MAX_ITER)
        # the inner solver is iterative; never let a column regress
        res_new = ((x - points @ new_weights) ** 2).sum(axis=0)
        res_old = ((x - points @ weights) ** 2).sum(axis=0)
        worse = res_new > res_old
        if worse.any():
            new_weights[:, worse] = weights[:, worse]

        if fixed:
            new_points = points
        else:
            gram = new_weights @ new_weights.T + LANDMARK_RIDGE * eye
            new_points = np.linalg.solve(gram, new_weights @ x.T).T
            # rows with no weight anywhere leave the objective unchanged;
            # keep those landmarks where they are instead of collapsing to 0
            unused = new_weights.max(axis=1) == 0.0
            if unused.any():
                new_points[:, unused] = points[:, unused]

        obj = float(np.linalg.norm(x - new_points @ new_weights))
        if prev_obj is not None and obj > prev_obj:
            break
        points, weights = new_points, new_weights
        trace.append(obj)
        iterations = it
        if obj == 0.0:
            break
        if prev_obj is not None and prev_obj - obj <= cfg.rel_tol * prev_obj:
            break
        prev_obj = obj
    return LandmarkFitResult(
        landmarks=LandmarkSet(points),
        affiliations=AffiliationSeries(weights),
        objective=trace[-1],
        iterations_used=iterations,
        objective_trace=tuple(trace),
    )
