"""Single-hidden-layer tanh MLP trained by mini-batch gradient descent on MSE."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from lolfusion.errors import DivergenceError, InvalidInputError


@dataclass(frozen=True)
class MlpConfig:
    hidden_units: int = 16
    epochs: int = 500
    learning_rate: float = 1e-2
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.hidden_units < 1 or self.batch_size < 1:
            raise InvalidInputError("hidden_units and batch_size must be >= 1")
        if self.epochs < 0:
            raise InvalidInputError("epochs must be >= 0")
        if not self.learning_rate > 0:
            raise InvalidInputError("learning_rate must be > 0")


@dataclass(frozen=True, eq=False)
class MlpParams:
    w_hidden: np.ndarray  # (d, h)
    b_hidden: np.ndarray  # (h,)
    w_out: np.ndarray  # (h,)
    b_out: float

    def __post_init__(self):
        object.__setattr__(self, "w_hidden", np.atleast_2d(np.asarray(self.w_hidden, dtype=float)))
        object.__setattr__(self, "b_hidden", np.atleast_1d(np.asarray(self.b_hidden, dtype=float)))
        object.__setattr__(self, "w_out", np.atleast_1d(np.asarray(self.w_out, dtype=float)))
        object.__setattr__(self, "b_out", float(self.b_out))
        h = self.w_hidden.shape[1]
        if self.b_hidden.shape != (h,) or self.w_out.shape != (h,):
            raise InvalidInputError("MLP parameter shapes are inconsistent")
        for arr in (self.w_hidden, self.b_hidden, self.w_out, np.array([self.b_out])):
            if not np.all(np.isfinite(arr)):
                raise InvalidInputError("MLP weights must be finite")

    def to_dict(self) -> dict:
        return {
            "w_hidden": self.w_hidden.tolist(),
            "b_hidden": self.b_hidden.tolist(),
            "w_out": self.w_out.tolist(),
            "b_out": self.b_out,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MlpParams":
        return cls(d["w_hidden"], d["b_hidden"], d["w_out"], d["b_out"])


def init_params(n_inputs: int, hidden: int, rng: np.random.Generator) -> MlpParams:
    lim_in = 1.0 / math.sqrt(n_inputs)
    lim_h = 1.0 / math.sqrt(hidden)
    return MlpParams(
        rng.uniform(-lim_in, lim_in, (n_inputs, hidden)),
        rng.uniform(-lim_in, lim_in, hidden),
        rng.uniform(-lim_h, lim_h, hidden),
        float(rng.uniform(-lim_h, lim_h)),
    )


def forward(x: np.ndarray, params: MlpParams) -> np.ndarray:
    return np.tanh(x @ params.w_hidden + params.b_hidden) @ params.w_out + params.b_out


def loss_and_gradients(x, y, w1, b1, w2, b2):
    """Batch MSE and its gradients, by backpropagation."""
    n = x.shape[0]
    hidden = np.tanh(x @ w1 + b1)
    resid = hidden @ w2 + b2 - y
    loss = float(np.mean(resid ** 2))
    d_out = (2.0 / n) * resid
    g_w2 = hidden.T @ d_out
    g_b2 = float(d_out.sum())
    d_pre = np.outer(d_out, w2) * (1.0 - hidden ** 2)
    g_w1 = x.T @ d_pre
    g_b1 = d_pre.sum(axis=0)
    return loss, g_w1, g_b1, g_w2, g_b2


def fit(x: np.ndarray, y: np.ndarray, config: MlpConfig) -> tuple[MlpParams, list[float]]:
    """Train on scaled data; returns the parameters and the per-epoch train MSE."""
    rng = np.random.default_rng(config.seed)
    p = init_params(x.shape[1], config.hidden_units, rng)
    w1, b1, w2, b2 = p.w_hidden.copy(), p.b_hidden.copy(), p.w_out.copy(), p.b_out
    lr = config.learning_rate
    n = x.shape[0]
    history = []
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(1, config.epochs + 1):
            order = rng.permutation(n)
            for start in range(0, n, config.batch_size):
                idx = order[start:start + config.batch_size]
                _, g_w1, g_b1, g_w2, g_b2 = loss_and_gradients(x[idx], y[idx], w1, b1, w2, b2)
                w1 -= lr * g_w1
                b1 -= lr * g_b1
                w2 -= lr * g_w2
                b2 -= lr * g_b2
            loss = float(np.mean((np.tanh(x @ w1 + b1) @ w2 + b2 - y) ** 2))
            if not math.isfinite(loss):
                raise DivergenceError("non-finite training loss", epoch=epoch)
            history.append(loss)
    return MlpParams(w1, b1, w2, b2), history
