"""Fusion of the ANFIS and RBF prediction streams.

Two fusers are provided: a fixed-weight convex combination (OWA) whose weight
is searched by a small real-valued genetic algorithm, and a scalar Kalman
filter that applies the two streams as sequential measurement updates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from lolfusion import estimators
from lolfusion.errors import EmptyInputError, InvalidInputError, ShapeError

WEIGHT_SUM_TOL = 1e-12
NOISE_FLOOR = 1e-18


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidInputError(f"{name} must be finite, got {value!r}")
    return value


def _series(*arrays):
    out = [np.asarray(a, dtype=float).ravel() for a in arrays]
    n = len(out[0])
    if n == 0:
        raise EmptyInputError("empty series")
    if any(len(a) != n for a in out):
        raise ShapeError(f"series lengths differ: {[len(a) for a in out]}")
    if not all(np.all(np.isfinite(a)) for a in out):
        raise InvalidInputError("series must be finite")
    return out


# ---------------------------------------------------------------------------
# OWA


@dataclass(frozen=True)
class OwaWeights:
    """Weights of the ANFIS (``c1``) and RBF (``c2``) streams; ``c1 + c2 = 1``."""

    c1: float
    c2: float

    def __post_init__(self):
        c1, c2 = _finite("c1", self.c1), _finite("c2", self.c2)
        if not (0.0 <= c1 <= 1.0 and 0.0 <= c2 <= 1.0):
            raise InvalidInputError(f"weights must lie in [0, 1], got ({c1}, {c2})")
        if abs(c1 + c2 - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidInputError(f"weights must sum to 1, got {c1 + c2!r}")

    @classmethod
    def from_c1(cls, c1: float) -> "OwaWeights":
        return cls(float(c1), 1.0 - float(c1))


def owa_fuse(weights: OwaWeights, yhat, ohat):
    """``c1 * yhat + c2 * ohat``, elementwise for arrays."""
    if np.ndim(yhat) == 0 and np.ndim(ohat) == 0:
        return weights.c1 * _finite("yhat", yhat) + weights.c2 * _finite("ohat", ohat)
    y, o = _series(yhat, ohat)
    return weights.c1 * y + weights.c2 * o


def owa_objective(weights: OwaWeights, yhat_series, ohat_series, targets) -> float:
    """Mean squared error of the fused stream against ``targets``."""
    y, o, t = _series(yhat_series, ohat_series, targets)
    return float(np.mean((weights.c1 * y + weights.c2 * o - t) ** 2))


@dataclass(frozen=True)
class GaConfig:
    population: int = 40
    generations: int = 60
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    mutation_scale: float = 0.05
    blend_alpha: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.population < 2:
            raise InvalidInputError("population must be >= 2")
        if self.generations < 0:
            raise InvalidInputError("generations must be >= 0")
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidInputError(f"{name} must lie in [0, 1]")
        if self.mutation_scale < 0 or self.blend_alpha < 0:
            raise InvalidInputError("mutation_scale and blend_alpha must be >= 0")


@dataclass(frozen=True)
class GaResult:
    weights: OwaWeights
    objective: float
    best_per_generation: tuple[float, ...]


def _objective_batch(c1: np.ndarray, y, o, t) -> np.ndarray:
    # (pop, S) residuals; every individual scored in one shot
    fused = c1[:, None] * y[None, :] + (1.0 - c1[:, None]) * o[None, :]
    return np.mean((fused - t[None, :]) ** 2, axis=1)


def run_owa_ga(yhat_series, ohat_series, targets, ga: GaConfig = GaConfig()) -> GaResult:
    """Search ``c1`` in [0, 1] minimising the fused MSE.

    Tournament selection (size 2), BLX-alpha blend crossover, Gaussian
    mutation clipped to [0, 1], one elite. Both corners ``c1 = 0`` and
    ``c1 = 1`` are in the initial population, so the result is never worse
    than the better single stream.
    """
    y, o, t = _series(yhat_series, ohat_series, targets)
    rng = np.random.default_rng(ga.seed)
    pop = rng.uniform(0.0, 1.0, ga.population)
    pop[0], pop[1] = 1.0, 0.0
    fitness = _objective_batch(pop, y, o, t)
    best = int(np.argmin(fitness))
    history = [float(fitness[best])]
    for _ in range(ga.generations):
        elite = pop[best]
        children = np.empty(ga.population)
        children[0] = elite
        for slot in range(1, ga.population):
            a, b = rng.integers(ga.population, size=2)
            p1 = pop[a] if fitness[a] <= fitness[b] else pop[b]
            a, b = rng.integers(ga.population, size=2)
            p2 = pop[a] if fitness[a] <= fitness[b] else pop[b]
            child = p1
            if rng.random() < ga.crossover_rate:
                lo, hi = min(p1, p2), max(p1, p2)
                spread = ga.blend_alpha * (hi - lo)
                child = rng.uniform(lo - spread, hi + spread)
            if rng.random() < ga.mutation_rate:
                child = child + rng.normal(0.0, ga.mutation_scale)
            children[slot] = min(1.0, max(0.0, child))
        pop = children
        fitness = _objective_batch(pop, y, o, t)
        best = int(np.argmin(fitness))
        history.append(float(fitness[best]))
    c1 = float(pop[best])
    weights = OwaWeights.from_c1(c1)
    return GaResult(weights, owa_objective(weights, y, o, t), tuple(history))


def optimize_owa_weights(yhat_series, ohat_series, targets, ga: GaConfig = GaConfig()) -> OwaWeights:
    return run_owa_ga(yhat_series, ohat_series, targets, ga).weights


# ---------------------------------------------------------------------------
# Kalman


@dataclass(frozen=True)
class KalmanConfig:
    """Scalar filter: ``x' = a x + b u + w``, ``z = h x + v``.

    ``q`` is the process noise variance and ``e_anfis``/``e_rbf`` the
    measurement noise variances of the two streams.
    """

    e_anfis: float
    e_rbf: float
    q: float
    x0: float
    p0: float
    a: float = 1.0
    b: float = 0.0
    h: float = 1.0

    def __post_init__(self):
        for name in ("e_anfis", "e_rbf", "q", "x0", "p0", "a", "b", "h"):
            _finite(name, getattr(self, name))
        if self.q < 0:
            raise InvalidInputError("q must be >= 0")
        if self.e_anfis <= 0 or self.e_rbf <= 0:
            raise InvalidInputError("measurement noises must be > 0")
        if self.p0 <= 0:
            raise InvalidInputError("p0 must be > 0")

    @classmethod
    def self_scaled(cls, x0: float, e_anfis: float, e_rbf: float, q_ratio: float = 1e-2) -> "KalmanConfig":
        """Random-walk defaults: ``p0 = e_anfis``, ``q = q_ratio * min(e)``."""
        return cls(e_anfis=e_anfis, e_rbf=e_rbf, q=q_ratio * min(e_anfis, e_rbf), x0=x0, p0=e_anfis)


@dataclass(frozen=True)
class KalmanTrack:
    x_hat: float
    p: float

    def __post_init__(self):
        _finite("x_hat", self.x_hat)
        if not _finite("p", self.p) > 0:
            raise InvalidInputError(f"covariance must stay > 0, got {self.p!r}")


def kalman_predict(track: KalmanTrack, cfg: KalmanConfig, u: float = 0.0) -> KalmanTrack:
    u = _finite("u", u)
    return KalmanTrack(cfg.a * track.x_hat + cfg.b * u, cfg.a * track.p * cfg.a + cfg.q)


def kalman_update(track: KalmanTrack, cfg: KalmanConfig, z: float, e: float) -> KalmanTrack:
    z, e = _finite("z", z), _finite("e", e)
    if e <= 0:
        raise InvalidInputError(f"measurement noise must be > 0, got {e!r}")
    innovation_var = cfg.h * track.p * cfg.h + e
    gain = track.p * cfg.h / innovation_var
    x = track.x_hat + gain * (z - cfg.h * track.x_hat)
    # equals (1 - gain*h) * p, without the cancellation when gain*h is near 1
    return KalmanTrack(x, track.p * e / innovation_var)


def sequential_kalman_fuse(yhat_series, ohat_series, cfg: KalmanConfig, anfis_first: bool = True) -> np.ndarray:
    """Per sample: predict once, update with the ANFIS value, then the RBF value."""
    y, o = _series(yhat_series, ohat_series)
    track = KalmanTrack(cfg.x0, cfg.p0)
    fused = np.empty(len(y))
    for s in range(len(y)):
        track = kalman_predict(track, cfg, 0.0)
        if anfis_first:
            track = kalman_update(track, cfg, y[s], cfg.e_anfis)
            track = kalman_update(track, cfg, o[s], cfg.e_rbf)
        else:
            track = kalman_update(track, cfg, o[s], cfg.e_rbf)
            track = kalman_update(track, cfg, y[s], cfg.e_anfis)
        fused[s] = track.x_hat
    return fused


def residual_variance(predictions, targets) -> float:
    """Population variance of ``predictions - targets``, floored at 1e-18."""
    p, t = _series(predictions, targets)
    return max(float(np.var(p - t)), NOISE_FLOOR)


def estimate_measurement_noise(model, split) -> float:
    """Measurement noise of an estimator from its residuals on ``split``.

    ``split`` is a :class:`~lolfusion.synthesis.Dataset` (normally the train
    rows) or a ``(features, targets)`` pair.
    """
    features, targets = (split.features, split.targets) if hasattr(split, "features") else split
    if len(targets) == 0:
        raise EmptyInputError("cannot estimate noise from an empty split")
    return residual_variance(estimators.predict(model, features), targets)


def estimate_process_noise(targets, hours, mask=None) -> float:
    """Random-walk process noise: variance of one-hour target increments.

    Only pairs of consecutive hours that are both selected by ``mask`` are
    used, so the estimate can be restricted to training rows.
    """
    t, h = _series(targets, hours)
    keep = np.ones(len(t), dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    pairs = keep[1:] & keep[:-1] & (np.diff(h) == 1.0)
    if not pairs.any():
        raise EmptyInputError("no consecutive hourly pairs to estimate process noise from")
    return max(float(np.var(np.diff(t)[pairs])), NOISE_FLOOR)
