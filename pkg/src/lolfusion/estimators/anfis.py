"""First-order Takagi-Sugeno ANFIS with grid-partitioned Gaussian memberships.

Rule ``r`` fires with strength ``prod_i mu_i,r_i(x_i)`` where
``mu(x) = exp(-(x - c)^2 / (2 s^2))``; its output is ``a_r . x + b_r``.
Training alternates a least-squares solve for all consequents with one
gradient step on the membership centers and widths.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from lolfusion.errors import ConfigError, InvalidInputError

log = logging.getLogger(__name__)

MONOTONE_TOL = 1e-12
MAX_HALVINGS = 40
# width giving 0.5 membership halfway between neighbouring centers
_HALF_CROSSING = 2.0 * math.sqrt(2.0 * math.log(2.0))


@dataclass(frozen=True)
class AnfisConfig:
    mfs_per_input: int = 3
    epochs: int = 50
    learning_rate: float = 1e-2
    seed: int = 0

    def __post_init__(self):
        if self.mfs_per_input < 2:
            raise InvalidInputError("ANFIS needs at least 2 membership functions per input")
        if self.epochs < 0:
            raise InvalidInputError("epochs must be >= 0")
        if not self.learning_rate > 0:
            raise InvalidInputError("learning_rate must be > 0")


@dataclass(frozen=True, eq=False)
class AnfisParams:
    centers: np.ndarray  # (d, m)
    widths: np.ndarray  # (d, m)
    consequents: np.ndarray  # (rules, d + 1), constant term last

    def __post_init__(self):
        for name in ("centers", "widths", "consequents"):
            object.__setattr__(self, name, np.atleast_2d(np.asarray(getattr(self, name), dtype=float)))
        d, m = self.centers.shape
        if self.widths.shape != (d, m):
            raise InvalidInputError("membership centers and widths differ in shape")
        if self.consequents.shape != (m ** d, d + 1):
            raise InvalidInputError(f"expected {m ** d} rules with {d + 1} coefficients each")
        if np.any(self.widths <= 0):
            raise InvalidInputError("membership widths must be > 0")

    @property
    def rule_index(self) -> np.ndarray:
        return rule_grid(*self.centers.shape)

    def to_dict(self) -> dict:
        return {
            "centers": self.centers.tolist(),
            "widths": self.widths.tolist(),
            "consequents": self.consequents.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnfisParams":
        return cls(d["centers"], d["widths"], d["consequents"])


def rule_grid(n_inputs: int, mfs: int) -> np.ndarray:
    """(rules, n_inputs) table of membership indices, last input varying fastest."""
    return np.array(list(itertools.product(range(mfs), repeat=n_inputs)), dtype=int)


def initial_premises(x: np.ndarray, mfs: int) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = x.min(axis=0), x.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    steps = np.linspace(0.0, 1.0, mfs)
    centers = lo[:, None] + span[:, None] * steps[None, :]
    widths = np.repeat((span / (mfs - 1) / _HALF_CROSSING)[:, None], mfs, axis=1)
    return centers, widths


def normalized_firing(x, centers, widths, rules):
    """Normalised firing strengths (n, rules), computed in log space."""
    d = x.shape[1]
    log_mu = -((x[:, :, None] - centers[None]) ** 2) / (2.0 * widths[None] ** 2)  # (n, d, m)
    log_w = sum(log_mu[:, i, rules[:, i]] for i in range(d))  # (n, rules)
    log_w = log_w - log_w.max(axis=1, keepdims=True)
    w = np.exp(log_w)
    return w / w.sum(axis=1, keepdims=True)


def _consequent_design(x, wbar):
    xe = np.hstack([x, np.ones((x.shape[0], 1))])  # (n, d + 1)
    return (wbar[:, :, None] * xe[:, None, :]).reshape(x.shape[0], -1)


def solve_consequents(x, y, centers, widths, rules) -> np.ndarray:
    wbar = normalized_firing(x, centers, widths, rules)
    coef, *_ = np.linalg.lstsq(_consequent_design(x, wbar), y, rcond=None)
    return coef.reshape(rules.shape[0], x.shape[1] + 1)


def forward(x: np.ndarray, params: AnfisParams) -> np.ndarray:
    wbar = normalized_firing(x, params.centers, params.widths, params.rule_index)
    xe = np.hstack([x, np.ones((x.shape[0], 1))])
    return np.einsum("nr,nr->n", wbar, xe @ params.consequents.T)


def mse_and_premise_gradient(x, y, centers, widths, consequents, rules):
    """Train MSE and its gradient w.r.t. membership centers and widths.

    Consequents are held fixed.
    """
    n, d = x.shape
    wbar = normalized_firing(x, centers, widths, rules)
    xe = np.hstack([x, np.ones((n, 1))])
    g = xe @ consequents.T  # (n, rules)
    f = np.einsum("nr,nr->n", wbar, g)
    resid = f - y
    mse = float(np.mean(resid ** 2))
    # dE/dlog w_r for each sample
    dlogw = (2.0 / n) * resid[:, None] * wbar * (g - f[:, None])  # (n, rules)
    grad_c = np.zeros_like(centers)
    grad_s = np.zeros_like(widths)
    m = centers.shape[1]
    for i in range(d):
        diff = x[:, i, None] - centers[i][None, :]  # (n, m)
        for j in range(m):
            sel = rules[:, i] == j
            weight = dlogw[:, sel].sum(axis=1)
            grad_c[i, j] = np.sum(weight * diff[:, j]) / widths[i, j] ** 2
            grad_s[i, j] = np.sum(weight * diff[:, j] ** 2) / widths[i, j] ** 3
    return mse, grad_c, grad_s


def premise_mse(x, y, centers, widths, consequents, rules) -> float:
    wbar = normalized_firing(x, centers, widths, rules)
    xe = np.hstack([x, np.ones((x.shape[0], 1))])
    f = np.einsum("nr,nr->n", wbar, xe @ consequents.T)
    return float(np.mean((f - y) ** 2))


def fit(x: np.ndarray, y: np.ndarray, config: AnfisConfig) -> tuple[AnfisParams, list[float]]:
    """Hybrid training on scaled data; returns the parameters and per-epoch train MSE.

    After each premise step the consequents are re-solved; a step that raises
    the train MSE by more than 1e-12 is retried with the learning rate halved.
    """
    n, d = x.shape
    m = config.mfs_per_input
    n_rules = m ** d
    if n_rules > n / 2:
        raise ConfigError(f"{n_rules} rules is too many for {n} training rows")
    rules = rule_grid(d, m)
    centers, widths = initial_premises(x, m)
    consequents = solve_consequents(x, y, centers, widths, rules)
    mse = premise_mse(x, y, centers, widths, consequents, rules)
    history = [mse]
    lr = config.learning_rate
    for epoch in range(config.epochs):
        _, grad_c, grad_s = mse_and_premise_gradient(x, y, centers, widths, consequents, rules)
        for _ in range(MAX_HALVINGS):
            new_c = centers - lr * grad_c
            new_s = widths - lr * grad_s
            if np.all(new_s > 0):
                new_q = solve_consequents(x, y, new_c, new_s, rules)
                new_mse = premise_mse(x, y, new_c, new_s, new_q, rules)
                if new_mse <= mse + MONOTONE_TOL:
                    centers, widths, consequents, mse = new_c, new_s, new_q, new_mse
                    break
            lr *= 0.5
        else:
            log.debug("ANFIS epoch %d: no improving premise step, keeping parameters", epoch)
        history.append(mse)
    return AnfisParams(centers, widths, consequents), history
