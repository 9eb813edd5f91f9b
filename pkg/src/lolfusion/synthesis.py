"""Hourly load/ambient profiles and loss-of-life target synthesis."""

from __future__ import annotations

import csv
import dataclasses
import math
import os
from dataclasses import dataclass

import numpy as np

from lolfusion import thermal
from lolfusion.errors import InvalidInputError, ParseError, SchemaError, ShapeError

HOURS_PER_DAY = 24
HOURS_PER_WEEK = 168
HOURS_PER_YEAR = 8760

PROFILE_COLUMNS = ("hour", "load_pu", "ambient_c")
DATASET_COLUMNS = ("hour", "load_pu", "ambient_c", "lol_percent", "split")

TRAIN = "train"
TEST = "test"


@dataclass(frozen=True)
class ProfileConfig:
    """Shape of the synthetic year.

    Phases are the hour of the peak (daily, in hours of the day; seasonal, in
    hours of the year). Noise terms are uniform on ``[-amp, amp]``.
    """

    load_base: float = 0.8
    load_daily_amp: float = 0.25
    load_daily_peak_hour: float = 18.0
    load_weekly_amp: float = 0.08
    load_noise: float = 0.05
    ambient_mean: float = 15.0
    ambient_seasonal_amp: float = 12.0
    ambient_seasonal_peak_hour: float = 4800.0
    ambient_daily_amp: float = 5.0
    ambient_daily_peak_hour: float = 15.0
    ambient_noise: float = 1.5

    def __post_init__(self):
        for f in dataclasses.fields(self):
            if not math.isfinite(getattr(self, f.name)):
                raise InvalidInputError(f"{f.name} must be finite")
        for name in ("load_base", "load_noise", "ambient_noise", "load_daily_amp",
                     "load_weekly_amp", "ambient_seasonal_amp", "ambient_daily_amp"):
            if getattr(self, name) < 0:
                raise InvalidInputError(f"{name} must be >= 0")


@dataclass(frozen=True, eq=False)
class HourlyProfile:
    hours: np.ndarray
    load_pu: np.ndarray
    ambient_c: np.ndarray

    def __post_init__(self):
        for name in ("hours", "load_pu", "ambient_c"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n = len(self.hours)
        if len(self.load_pu) != n or len(self.ambient_c) != n:
            raise ShapeError("hours, load_pu and ambient_c must have equal lengths")
        if n < 2:
            raise InvalidInputError("a profile needs at least 2 hours")
        if not np.all(np.isfinite(self.load_pu)) or np.any(self.load_pu < 0):
            raise InvalidInputError("loads must be finite and >= 0")
        if not np.all(np.isfinite(self.ambient_c)):
            raise InvalidInputError("ambient temperatures must be finite")

    def __len__(self):
        return len(self.hours)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Aligned features, LOL targets (percent per hour) and split tags.

    ``features`` always starts with ``(load_pu, ambient_c)``; lagged columns,
    when requested, follow as ``(load_prev, ambient_prev)``.
    """

    hours: np.ndarray
    features: np.ndarray
    targets: np.ndarray
    split: np.ndarray | None = None
    feature_names: tuple[str, ...] = ("load_pu", "ambient_c")

    def __post_init__(self):
        object.__setattr__(self, "hours", np.asarray(self.hours, dtype=float))
        object.__setattr__(self, "features", np.atleast_2d(np.asarray(self.features, dtype=float)))
        object.__setattr__(self, "targets", np.asarray(self.targets, dtype=float))
        n = len(self.targets)
        if self.features.shape[0] != n or len(self.hours) != n:
            raise ShapeError("features, targets and hours must be aligned")
        if self.features.shape[1] != len(self.feature_names):
            raise ShapeError("feature_names does not match the feature columns")
        if self.split is not None:
            split = np.asarray(self.split, dtype=object)
            if len(split) != n:
                raise ShapeError("split tags must align with rows")
            if not set(split.tolist()) <= {TRAIN, TEST}:
                raise InvalidInputError("split tags must be 'train' or 'test'")
            object.__setattr__(self, "split", split)

    def __len__(self):
        return len(self.targets)

    def _mask(self, tag: str) -> np.ndarray:
        if self.split is None:
            raise InvalidInputError("dataset has not been split")
        return self.split == tag

    @property
    def train_mask(self) -> np.ndarray:
        return self._mask(TRAIN)

    @property
    def test_mask(self) -> np.ndarray:
        return self._mask(TEST)

    def subset(self, mask: np.ndarray) -> "Dataset":
        return Dataset(
            self.hours[mask],
            self.features[mask],
            self.targets[mask],
            None if self.split is None else self.split[mask],
            self.feature_names,
        )

    def train(self) -> "Dataset":
        return self.subset(self.train_mask)

    def test(self) -> "Dataset":
        return self.subset(self.test_mask)


def generate_profile(hours: int = HOURS_PER_YEAR, config: ProfileConfig = ProfileConfig(), seed: int = 0) -> HourlyProfile:
    """Deterministic synthetic load and ambient series.

    load    = base + daily sinusoid + weekly sinusoid + noise, clipped at 0
    ambient = mean + seasonal sinusoid + daily sinusoid + noise
    """
    if int(hours) != hours or hours < HOURS_PER_DAY:
        raise InvalidInputError(f"hours must be an integer >= {HOURS_PER_DAY}, got {hours!r}")
    hours = int(hours)
    rng = np.random.default_rng(seed)
    h = np.arange(hours, dtype=float)
    two_pi = 2.0 * math.pi
    load = (
        config.load_base
        + config.load_daily_amp * np.cos(two_pi * (h - config.load_daily_peak_hour) / HOURS_PER_DAY)
        + config.load_weekly_amp * np.sin(two_pi * h / HOURS_PER_WEEK)
        + rng.uniform(-config.load_noise, config.load_noise, hours)
    )
    ambient = (
        config.ambient_mean
        + config.ambient_seasonal_amp * np.cos(two_pi * (h - config.ambient_seasonal_peak_hour) / HOURS_PER_YEAR)
        + config.ambient_daily_amp * np.cos(two_pi * (h - config.ambient_daily_peak_hour) / HOURS_PER_DAY)
        + rng.uniform(-config.ambient_noise, config.ambient_noise, hours)
    )
    return HourlyProfile(h, np.clip(load, 0.0, None), ambient)


def synthesize_targets(
    profile: HourlyProfile,
    params: thermal.TransformerParams = thermal.TransformerParams(),
    lagged_features: bool = False,
) -> Dataset:
    """Hourly LOL percent for every hour of ``profile`` (unsplit)."""
    trace = thermal.simulate(profile.load_pu.tolist(), profile.ambient_c.tolist(), params, dt_hours=1.0)
    targets = np.array([thermal.percent_loss_of_life(f, 1.0, params) for f in trace.faa])
    features = np.column_stack([profile.load_pu, profile.ambient_c])
    names: tuple[str, ...] = ("load_pu", "ambient_c")
    if lagged_features:
        prev_load = np.concatenate([profile.load_pu[:1], profile.load_pu[:-1]])
        prev_amb = np.concatenate([profile.ambient_c[:1], profile.ambient_c[:-1]])
        features = np.column_stack([features, prev_load, prev_amb])
        names = names + ("load_prev", "ambient_prev")
    return Dataset(profile.hours.copy(), features, targets, None, names)


def split_dataset(ds: Dataset, train_fraction: float = 0.7, seed: int = 0) -> Dataset:
    """Tag a random ``round(train_fraction * n)`` rows as train, the rest as test."""
    if not 0.0 < train_fraction < 1.0:
        raise InvalidInputError(f"train_fraction must be in (0, 1), got {train_fraction!r}")
    n = len(ds)
    n_train = int(round(train_fraction * n))
    order = np.random.default_rng(seed).permutation(n)
    split = np.full(n, TEST, dtype=object)
    split[order[:n_train]] = TRAIN
    return dataclasses.replace(ds, split=split)


def _fmt(value: float) -> str:
    return repr(float(value))


def _read_rows(path, required):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
        index = {name: header.index(name) for name in required}
        for row in reader:
            lineno = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", line=lineno)
            yield lineno, {name: row[i].strip() for name, i in index.items()}


def _parse_float(text: str, name: str, lineno: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"{name}: not a number: {text!r}", line=lineno) from None
    if not math.isfinite(value):
        raise ParseError(f"{name}: non-finite value {text!r}", line=lineno)
    return value


def read_profile_csv(path: str | os.PathLike) -> HourlyProfile:
    hours, loads, ambients = [], [], []
    for lineno, row in _read_rows(path, PROFILE_COLUMNS):
        hour = _parse_float(row["hour"], "hour", lineno)
        load = _parse_float(row["load_pu"], "load_pu", lineno)
        if load < 0:
            raise ParseError(f"load_pu must be >= 0, got {load!r}", line=lineno)
        hours.append(hour)
        loads.append(load)
        ambients.append(_parse_float(row["ambient_c"], "ambient_c", lineno))
    return HourlyProfile(np.array(hours), np.array(loads), np.array(ambients))


def write_profile_csv(profile: HourlyProfile, path: str | os.PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PROFILE_COLUMNS)
        for h, k, a in zip(profile.hours, profile.load_pu, profile.ambient_c):
            writer.writerow([_fmt(h), _fmt(k), _fmt(a)])


def write_dataset_csv(ds: Dataset, path: str | os.PathLike) -> None:
    """Write ``hour,load_pu,ambient_c,lol_percent,split``.

    Floats use ``repr`` so a read-back is exact. Unsplit datasets get an empty
    split column.
    """
    split = ds.split if ds.split is not None else [""] * len(ds)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DATASET_COLUMNS)
        for h, row, y, tag in zip(ds.hours, ds.features, ds.targets, split):
            writer.writerow([_fmt(h), _fmt(row[0]), _fmt(row[1]), _fmt(y), tag])


def read_dataset_csv(path: str | os.PathLike, lagged_features: bool = False) -> Dataset:
    hours, loads, ambients, targets, tags = [], [], [], [], []
    for lineno, row in _read_rows(path, DATASET_COLUMNS):
        load = _parse_float(row["load_pu"], "load_pu", lineno)
        if load < 0:
            raise ParseError(f"load_pu must be >= 0, got {load!r}", line=lineno)
        tag = row["split"]
        if tag not in (TRAIN, TEST, ""):
            raise ParseError(f"split must be 'train' or 'test', got {tag!r}", line=lineno)
        hours.append(_parse_float(row["hour"], "hour", lineno))
        loads.append(load)
        ambients.append(_parse_float(row["ambient_c"], "ambient_c", lineno))
        targets.append(_parse_float(row["lol_percent"], "lol_percent", lineno))
        tags.append(tag)
    if not hours:
        raise SchemaError(f"{path}: no data rows")
    if any(tags) and not all(tags):
        raise SchemaError(f"{path}: split column is only partially filled")
    loads_arr = np.array(loads)
    amb_arr = np.array(ambients)
    features = np.column_stack([loads_arr, amb_arr])
    names: tuple[str, ...] = ("load_pu", "ambient_c")
    if lagged_features:
        features = np.column_stack([
            features,
            np.concatenate([loads_arr[:1], loads_arr[:-1]]),
            np.concatenate([amb_arr[:1], amb_arr[:-1]]),
        ])
        names = names + ("load_prev", "ambient_prev")
    split = np.array(tags, dtype=object) if all(tags) else None
    return Dataset(np.array(hours), features, np.array(targets), split, names)
