"""Synthetic systems with built-in directional couplings.

Three generators, each planting a known influence structure so that a
dependency analysis has a ground truth to recover:

* :func:`gen_coupled_logistic`: two logistic maps, each damped by the
  other, with asymmetric coupling strengths (the first variable pushes the
  second harder than vice versa).
* :func:`gen_hierarchical_sde`: three planar diffusions integrated by
  Euler-Maruyama; C runs autonomously and metastably, B is pulled toward
  C, A toward both B and C.
* :func:`gen_block_ar`: a lagged linear system stacked from two blocks
  where the second block feeds the first but never the reverse (the
  cross-coefficient block in the other direction is identically zero).

All randomness comes from a counter-based generator keyed by the config
seed, so identical configs reproduce identical trajectories bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .core import TimeSeriesMatrix
from .errors import DivergenceDetected, InvalidInput

_LOGISTIC_RANGE = 10.0
_AR_RANGE = 1e6


@dataclass(frozen=True)
class LogisticConfig:
    """Coupled two-species logistic map parameters.

    ``c_xy`` scales how strongly X enters Y's update; ``c_yx`` how strongly
    Y enters X's.  Defaults plant a stronger X-to-Y influence.
    """

    length: int
    r_x: float = 3.8
    r_y: float = 3.5
    c_xy: float = 0.1
    c_yx: float = 0.02
    x0: float = 0.8
    y0: float = 0.8

    def __post_init__(self):
        if self.length < 1:
            raise InvalidInput("length must be >= 1")
        if not (0.0 <= self.x0 <= 1.0 and 0.0 <= self.y0 <= 1.0):
            raise InvalidInput("initial values must lie in [0, 1]")


def gen_coupled_logistic(cfg: LogisticConfig) -> TimeSeriesMatrix:
    """Iterate the coupled logistic recurrence; column 0 is the initial state.

    x' = r_x x (1 - x) - c_yx y x
    y' = r_y y (1 - y) - c_xy x y
    """
    out = np.empty((2, cfg.length))
    x, y = cfg.x0, cfg.y0
    out[:, 0] = (x, y)
    for t in range(1, cfg.length):
        x, y = (cfg.r_x * x * (1.0 - x) - cfg.c_yx * y * x,
                cfg.r_y * y * (1.0 - y) - cfg.c_xy * x * y)
        if abs(x) > _LOGISTIC_RANGE or abs(y) > _LOGISTIC_RANGE:
            raise DivergenceDetected(
                f"trajectory left [-{_LOGISTIC_RANGE}, {_LOGISTIC_RANGE}] at step {t}"
            )
        out[:, t] = (x, y)
    return TimeSeriesMatrix(out, labels=("X", "Y"))


@dataclass(frozen=True)
class SdeConfig:
    """Parameters of the three-process diffusion hierarchy.

    ``sigma_c`` holds the diagonal of C's noise matrix; ``sigma_ab`` is the
    shared scalar noise level of A and B.  ``alpha`` scales the autonomous
    double-well drift of A and B, i.e. how much they resist following C.
    """

    sigma_ab: float
    alpha: float = 5.0
    sigma_c: tuple[float, float] = (0.01, 0.05)
    dt: float = 0.1
    steps: int = 1000
    seed: int = 0
    initial_a: tuple[float, float] = (1.0, 1.0)
    initial_b: tuple[float, float] = (1.0, 1.0)
    initial_c: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidInput("dt must be positive")
        if self.steps < 1:
            raise InvalidInput("steps must be >= 1")


def _well_drift(x: np.ndarray) -> np.ndarray:
    """Double-well drift in the first coordinate, constant pull in the second."""
    return np.array([-(x[0] ** 3 - x[0]), -1.0])


def gen_hierarchical_sde(cfg: SdeConfig,
                         ) -> tuple[TimeSeriesMatrix, TimeSeriesMatrix, TimeSeriesMatrix]:
    """Euler-Maruyama realization of the A, B, C hierarchy.

    dC = (0, -10 (C2^3 - C2)) dt                         + diag(sigma_c) dW
    dB = (alpha * well(B) - 10 (B - C)) dt               + sigma_ab dW
    dA = (alpha * well(A) - 5 (A - B) - 5 (A - C)) dt    + sigma_ab dW

    Gaussian increments are scaled by sqrt(dt).  Column 0 of each output is
    the initial state; each output has ``steps`` columns.
    """
    gen = rng.generator(cfg.seed, rng.SDE_NOISE)
    dt = cfg.dt
    sqrt_dt = np.sqrt(dt)
    sigma_c = np.asarray(cfg.sigma_c, dtype=float)
    a = np.asarray(cfg.initial_a, dtype=float).copy()
    b = np.asarray(cfg.initial_b, dtype=float).copy()
    c = np.asarray(cfg.initial_c, dtype=float).copy()
    out_a = np.empty((2, cfg.steps))
    out_b = np.empty((2, cfg.steps))
    out_c = np.empty((2, cfg.steps))
    out_a[:, 0], out_b[:, 0], out_c[:, 0] = a, b, c
    for t in range(1, cfg.steps):
        noise = gen.normal(size=(3, 2)) * sqrt_dt
        drift_c = np.array([0.0, -10.0 * (c[1] ** 3 - c[1])])
        drift_b = cfg.alpha * _well_drift(b) - 10.0 * (b - c)
        drift_a = cfg.alpha * _well_drift(a) - 5.0 * (a - b) - 5.0 * (a - c)
        c = c + drift_c * dt + sigma_c * noise[0]
        b = b + drift_b * dt + cfg.sigma_ab * noise[1]
        a = a + drift_a * dt + cfg.sigma_ab * noise[2]
        if not (np.isfinite(a).all() and np.isfinite(b).all() and np.isfinite(c).all()):
            raise DivergenceDetected(f"non-finite state at step {t}")
        out_a[:, t], out_b[:, t], out_c[:, t] = a, b, c
    labels_xy = ("x1", "x2")
    return (TimeSeriesMatrix(out_a, labels=labels_xy),
            TimeSeriesMatrix(out_b, labels=labels_xy),
            TimeSeriesMatrix(out_c, labels=labels_xy))


@dataclass(frozen=True)
class ArConfig:
    """Parameters of the block-triangular lagged linear system.

    The full state stacks two blocks of ``block_dim`` components; the
    coefficient matrix at every lag has a zero lower-left block, so the
    second block evolves autonomously while feeding the first.
    ``coeff_stds[i]`` is the standard deviation used to draw lag-(i+1)
    coefficients.
    """

    block_dim: int = 4
    p: int = 3
    coeff_stds: tuple[float, ...] = (0.1, 0.05, 0.03)
    noise_cov_scale: float = 0.01
    length: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.p < 1:
            raise InvalidInput("p must be >= 1")
        if self.block_dim < 1:
            raise InvalidInput("block_dim must be >= 1")
        if len(self.coeff_stds) != self.p:
            raise InvalidInput(
                f"need {self.p} coefficient stds, got {len(self.coeff_stds)}"
            )
        if any(not s >= 0 for s in self.coeff_stds):
            raise InvalidInput("coefficient stds must be non-negative")
        if self.length < 1:
            raise InvalidInput("length must be >= 1")

    @property
    def dim(self) -> int:
        return 2 * self.block_dim


def draw_ar_coefficients(cfg: ArConfig) -> list[np.ndarray]:
    """Draw the lag coefficient matrices, zero lower-left block enforced.

    The three non-zero blocks come from separate random streams, so the
    draws for the autonomous block do not depend on the others.
    """
    m = cfg.block_dim
    upper = rng.generator(cfg.seed, rng.AR_COEFF_UPPER)
    cross = rng.generator(cfg.seed, rng.AR_COEFF_CROSS)
    lower = rng.generator(cfg.seed, rng.AR_COEFF_LOWER)
    phis = []
    for std in cfg.coeff_stds:
        phi = np.zeros((cfg.dim, cfg.dim))
        phi[:m, :m] = upper.normal(0.0, std, size=(m, m))
        phi[:m, m:] = cross.normal(0.0, std, size=(m, m))
        phi[m:, m:] = lower.normal(0.0, std, size=(m, m))
        phis.append(phi)
    return phis


def simulate_ar(cfg: ArConfig, phis: list[np.ndarray] | None = None,
                initial: np.ndarray | None = None) -> TimeSeriesMatrix:
    """Run the lagged recursion with given (or freshly drawn) coefficients.

    The noise stream is keyed only by the seed, not by the coefficient
    values, so altering coefficients replays identical innovations.
    ``initial`` optionally fills the first ``p`` columns (default zeros).
    """
    if phis is None:
        phis = draw_ar_coefficients(cfg)
    n = cfg.dim
    if len(phis) != cfg.p or any(phi.shape != (n, n) for phi in phis):
        raise InvalidInput(f"need {cfg.p} coefficient matrices of shape {(n, n)}")
    gen = rng.generator(cfg.seed, rng.AR_NOISE)
    noise_std = np.sqrt(cfg.noise_cov_scale)
    out = np.zeros((n, cfg.length))
    if initial is not None:
        initial = np.asarray(initial, dtype=float)
        head = min(cfg.p, cfg.length)
        if initial.shape != (n, head):
            raise InvalidInput(f"initial must have shape {(n, head)}")
        out[:, :head] = initial
    for t in range(cfg.p, cfg.length):
        acc = gen.normal(0.0, noise_std, size=n)
        for i, phi in enumerate(phis, start=1):
            acc = acc + phi @ out[:, t - i]
        if np.abs(acc).max() > _AR_RANGE:
            raise DivergenceDetected(
                f"trajectory magnitude exceeded {_AR_RANGE:.0e} at step {t}"
            )
        out[:, t] = acc
    labels = tuple(f"X{i + 1}" for i in range(cfg.block_dim)) \
        + tuple(f"Y{i + 1}" for i in range(cfg.block_dim))
    return TimeSeriesMatrix(out, labels=labels)


def gen_block_ar(cfg: ArConfig) -> TimeSeriesMatrix:
    """Draw coefficients and simulate; first block rows stacked above second."""
    return simulate_ar(cfg, draw_ar_coefficients(cfg))
