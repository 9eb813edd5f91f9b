"""ANFIS, RBF and MLP regressors behind a common train/predict contract.

Every trainer fits min/max scalers on the training rows, trains in the scaled
space and returns an immutable :class:`EstimatorModel`. :func:`predict`
always answers in original target units.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass
from typing import Any

import numpy as np

from lolfusion.errors import InvalidInputError, SchemaError, ShapeError
from lolfusion.estimators import anfis, mlp, rbf
from lolfusion.estimators.anfis import AnfisConfig, AnfisParams
from lolfusion.estimators.mlp import MlpConfig, MlpParams
from lolfusion.estimators.rbf import RbfConfig, RbfParams
from lolfusion.estimators.scaling import AffineScaler

FORMAT_VERSION = 1

ANFIS = "ANFIS"
RBF = "RBF"
MLP = "MLP"
KINDS = (ANFIS, RBF, MLP)

_CONFIG_TYPES = {ANFIS: AnfisConfig, RBF: RbfConfig, MLP: MlpConfig}
_PARAM_TYPES = {ANFIS: AnfisParams, RBF: RbfParams, MLP: MlpParams}
_FORWARD = {ANFIS: anfis.forward, RBF: rbf.forward, MLP: mlp.forward}


@dataclass(frozen=True, eq=False)
class EstimatorModel:
    kind: str
    config: Any
    params: Any
    feature_scaler: AffineScaler
    target_scaler: AffineScaler
    train_history: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown estimator kind {self.kind!r}")
        if not isinstance(self.params, _PARAM_TYPES[self.kind]):
            raise InvalidInputError(f"{self.kind} model needs {_PARAM_TYPES[self.kind].__name__}")

    @property
    def n_features(self) -> int:
        return int(np.atleast_1d(self.feature_scaler.offset).shape[0])

    def predict(self, features) -> np.ndarray | float:
        return predict(self, features)

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "kind": self.kind,
            "config": dataclasses.asdict(self.config),
            "feature_scaler": self.feature_scaler.to_dict(),
            "target_scaler": self.target_scaler.to_dict(),
            "parameters": self.params.to_dict(),
            "train_history": list(self.train_history),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EstimatorModel":
        for key in ("format_version", "kind", "config", "feature_scaler", "target_scaler", "parameters"):
            if key not in doc:
                raise SchemaError(f"model document is missing {key!r}")
        if doc["format_version"] != FORMAT_VERSION:
            raise SchemaError(f"unsupported model format_version {doc['format_version']!r}")
        kind = doc["kind"]
        if kind not in KINDS:
            raise SchemaError(f"unknown estimator kind {kind!r}")
        return cls(
            kind,
            _CONFIG_TYPES[kind](**doc["config"]),
            _PARAM_TYPES[kind].from_dict(doc["parameters"]),
            AffineScaler.from_dict(doc["feature_scaler"]),
            AffineScaler.from_dict(doc["target_scaler"], scalar=True),
            tuple(doc.get("train_history", ())),
        )


def _xy(features, targets) -> tuple[np.ndarray, np.ndarray]:
    x = np.atleast_2d(np.asarray(features, dtype=float))
    y = np.asarray(targets, dtype=float).ravel()
    if x.shape[0] != y.shape[0]:
        raise ShapeError(f"{x.shape[0]} feature rows vs {y.shape[0]} targets")
    if x.shape[0] == 0:
        raise InvalidInputError("no training rows")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InvalidInputError("training data must be finite")
    return x, y


def _scalers(x, y):
    return AffineScaler.fit(x), AffineScaler.fit(y)


def train_rbf(features, targets, config: RbfConfig = RbfConfig()) -> EstimatorModel:
    x, y = _xy(features, targets)
    fs, ts = _scalers(x, y)
    params = rbf.fit(fs.transform(x), ts.transform(y), config)
    return EstimatorModel(RBF, config, params, fs, ts)


def train_anfis(features, targets, config: AnfisConfig = AnfisConfig()) -> EstimatorModel:
    x, y = _xy(features, targets)
    fs, ts = _scalers(x, y)
    params, history = anfis.fit(fs.transform(x), ts.transform(y), config)
    return EstimatorModel(ANFIS, config, params, fs, ts, tuple(history))


def train_mlp(features, targets, config: MlpConfig = MlpConfig()) -> EstimatorModel:
    x, y = _xy(features, targets)
    fs, ts = _scalers(x, y)
    params, history = mlp.fit(fs.transform(x), ts.transform(y), config)
    return EstimatorModel(MLP, config, params, fs, ts, tuple(history))


def train(kind: str, features, targets, config=None) -> EstimatorModel:
    kind = kind.upper()
    trainer = {ANFIS: train_anfis, RBF: train_rbf, MLP: train_mlp}.get(kind)
    if trainer is None:
        raise InvalidInputError(f"unknown estimator kind {kind!r}")
    return trainer(features, targets, config if config is not None else _CONFIG_TYPES[kind]())


def predict(model: EstimatorModel, features) -> np.ndarray | float:
    """Predict LOL for one feature row (returns a float) or a matrix of rows."""
    arr = np.asarray(features, dtype=float)
    single = arr.ndim == 1
    x = np.atleast_2d(arr)
    if x.shape[1] != model.n_features:
        raise ShapeError(f"model expects {model.n_features} features, got {x.shape[1]}")
    scaled = _FORWARD[model.kind](model.feature_scaler.transform(x), model.params)
    out = model.target_scaler.inverse(scaled)
    return float(out[0]) if single else out


def save_model(model: EstimatorModel, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path: str | os.PathLike) -> EstimatorModel:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    return EstimatorModel.from_dict(doc)


__all__ = [
    "ANFIS",
    "MLP",
    "RBF",
    "KINDS",
    "AffineScaler",
    "AnfisConfig",
    "AnfisParams",
    "EstimatorModel",
    "MlpConfig",
    "MlpParams",
    "RbfConfig",
    "RbfParams",
    "load_model",
    "predict",
    "save_model",
    "train",
    "train_anfis",
    "train_mlp",
    "train_rbf",
]
