"""Gaussian RBF network: k-means centers, nearest-center widths, ridge output layer."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from lolfusion.errors import DegenerateDataError, InvalidInputError

WIDTH_FLOOR = 1e-6


@dataclass(frozen=True)
class RbfConfig:
    centers: int = 25
    ridge: float = 1e-8
    kmeans_iterations: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.centers < 1 or self.kmeans_iterations < 1:
            raise InvalidInputError("centers and kmeans_iterations must be >= 1")
        if self.ridge < 0:
            raise InvalidInputError("ridge must be >= 0")


@dataclass(frozen=True, eq=False)
class RbfParams:
    centers: np.ndarray  # (k, d)
    widths: np.ndarray  # (k,)
    weights: np.ndarray  # (k + 1,), bias last

    def __post_init__(self):
        object.__setattr__(self, "centers", np.atleast_2d(np.asarray(self.centers, dtype=float)))
        object.__setattr__(self, "widths", np.atleast_1d(np.asarray(self.widths, dtype=float)))
        object.__setattr__(self, "weights", np.atleast_1d(np.asarray(self.weights, dtype=float)))
        k = self.centers.shape[0]
        if self.widths.shape != (k,) or self.weights.shape != (k + 1,):
            raise InvalidInputError("RBF parameter shapes are inconsistent")
        if np.any(self.widths <= 0):
            raise InvalidInputError("RBF widths must be > 0")

    def to_dict(self) -> dict:
        return {"centers": self.centers.tolist(), "widths": self.widths.tolist(), "weights": self.weights.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "RbfParams":
        return cls(d["centers"], d["widths"], d["weights"])


def _sq_distances(x, centers):
    diff = x[:, None, :] - centers[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def kmeans(x: np.ndarray, k: int, rng: np.random.Generator, iterations: int = 100) -> np.ndarray:
    """Lloyd's algorithm with k-means++ seeding.

    Equidistant points go to the lowest center index; an empty cluster is
    re-seeded at the point farthest from its current center.
    """
    n = x.shape[0]
    if n < k:
        raise InvalidInputError(f"need at least {k} rows for {k} centers, got {n}")
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    closest = _sq_distances(x, centers[:1])[:, 0]
    for j in range(1, k):
        total = closest.sum()
        if total <= 0:
            raise DegenerateDataError(f"only {j} distinct rows available for {k} centers")
        idx = rng.choice(n, p=closest / total)
        centers[j] = x[idx]
        closest = np.minimum(closest, _sq_distances(x, centers[j:j + 1])[:, 0])

    labels = None
    for _ in range(iterations):
        d2 = _sq_distances(x, centers)
        new_labels = np.argmin(d2, axis=1)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        own = d2[np.arange(n), labels]
        for j in range(k):
            members = labels == j
            if members.any():
                centers[j] = x[members].mean(axis=0)
            else:
                far = int(np.argmax(own))
                centers[j] = x[far]
                labels[far] = j
                own[far] = 0.0
    return centers


def nearest_center_widths(centers: np.ndarray) -> np.ndarray:
    k = centers.shape[0]
    if k == 1:
        return np.ones(1)
    d2 = _sq_distances(centers, centers)
    np.fill_diagonal(d2, np.inf)
    return np.maximum(np.sqrt(d2.min(axis=1)), WIDTH_FLOOR)


def activations(x: np.ndarray, centers: np.ndarray, widths: np.ndarray) -> np.ndarray:
    return np.exp(-_sq_distances(x, centers) / (2.0 * widths ** 2))


def design_matrix(x: np.ndarray, params: RbfParams) -> np.ndarray:
    phi = activations(x, params.centers, params.widths)
    return np.hstack([phi, np.ones((x.shape[0], 1))])


def solve_output_weights(phi: np.ndarray, y: np.ndarray, ridge: float) -> np.ndarray:
    """Ridge least squares on ``[phi | 1]``; the bias column is not penalised."""
    n, k = phi.shape
    a = np.hstack([phi, np.ones((n, 1))])
    b = y
    if ridge > 0:
        penalty = np.hstack([np.sqrt(ridge) * np.eye(k), np.zeros((k, 1))])
        a = np.vstack([a, penalty])
        b = np.concatenate([y, np.zeros(k)])
    weights, *_ = np.linalg.lstsq(a, b, rcond=None)
    return weights


def fit(x: np.ndarray, y: np.ndarray, config: RbfConfig) -> RbfParams:
    """Fit on already-scaled features ``x`` (n, d) and targets ``y`` (n,)."""
    if x.shape[0] < config.centers:
        raise InvalidInputError(f"{x.shape[0]} rows is fewer than {config.centers} centers")
    if np.all(x == x[0]):
        raise DegenerateDataError("all training rows are identical")
    rng = np.random.default_rng(config.seed)
    centers = kmeans(x, config.centers, rng, config.kmeans_iterations)
    widths = nearest_center_widths(centers)
    weights = solve_output_weights(activations(x, centers, widths), y, config.ridge)
    return RbfParams(centers, widths, weights)


def forward(x: np.ndarray, params: RbfParams) -> np.ndarray:
    return design_matrix(x, params) @ params.weights
