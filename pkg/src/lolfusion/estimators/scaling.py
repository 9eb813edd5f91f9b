"""Affine min/max scaling onto [0, 1]."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from lolfusion.errors import InvalidInputError


@dataclass(frozen=True, eq=False)
class AffineScaler:
    """``scaled = (x - offset) / scale``.

    A column with zero range is scaled by its own magnitude (or 1 if it is
    zero), which keeps the scaled problem independent of the data's units.
    """

    offset: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "offset", np.asarray(self.offset, dtype=float))
        object.__setattr__(self, "scale", np.asarray(self.scale, dtype=float))
        if np.any(self.scale == 0) or not np.all(np.isfinite(self.scale)):
            raise InvalidInputError("scaler needs finite, nonzero scale")

    @classmethod
    def fit(cls, data) -> "AffineScaler":
        data = np.asarray(data, dtype=float)
        lo = data.min(axis=0)
        span = data.max(axis=0) - lo
        fallback = np.where(np.abs(lo) > 0, np.abs(lo), 1.0)
        return cls(lo, np.where(span > 0, span, fallback))

    def transform(self, data):
        return (np.asarray(data, dtype=float) - self.offset) / self.scale

    def inverse(self, data):
        return np.asarray(data, dtype=float) * self.scale + self.offset

    def to_dict(self) -> dict:
        return {"offset": np.atleast_1d(self.offset).tolist(), "scale": np.atleast_1d(self.scale).tolist()}

    @classmethod
    def from_dict(cls, d: dict, scalar: bool = False) -> "AffineScaler":
        offset, scale = np.asarray(d["offset"], dtype=float), np.asarray(d["scale"], dtype=float)
        if scalar:
            offset, scale = offset.reshape(()), scale.reshape(())
        return cls(offset, scale)
