"""IEEE C57.91-2011 hottest-spot and insulation aging model.

All temperatures are in °C and are converted to kelvin only inside the
Arrhenius terms (per-unit life and aging acceleration). Every function here is
pure; the hourly simulation threads a :class:`ThermalState` through
:func:`step_thermal`.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass
from typing import Sequence

from lolfusion import kvconfig
from lolfusion.errors import EmptyInputError, InvalidInputError, ShapeError

CELSIUS_TO_KELVIN = 273.0


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidInputError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class TransformerParams:
    """Rated thermal characteristics and insulation-life constants.

    Defaults put the rated point (K=1, 30 °C ambient) exactly at the 110 °C
    reference hottest-spot temperature.
    """

    delta_theta_to_rated: float = 55.0
    delta_theta_h_rated: float = 25.0
    loss_ratio_r: float = 4.5
    exp_n: float = 0.8
    exp_m: float = 0.8
    tau_to: float = 3.0
    tau_w: float = 0.08
    life_const_a: float = 9.8e-18
    life_const_b: float = 15000.0
    ref_hotspot_kelvin: float = 383.0
    aging_rate_kelvin: float = 15000.0
    normal_insulation_life: float = 180000.0
    enforce_exponent_range: bool = True

    def __post_init__(self):
        positive = (
            "delta_theta_to_rated",
            "delta_theta_h_rated",
            "loss_ratio_r",
            "tau_to",
            "tau_w",
            "life_const_a",
            "life_const_b",
            "ref_hotspot_kelvin",
            "aging_rate_kelvin",
            "normal_insulation_life",
            "exp_n",
            "exp_m",
        )
        for name in positive:
            value = _finite(name, getattr(self, name))
            if value <= 0:
                raise InvalidInputError(f"{name} must be > 0, got {value!r}")
        if self.enforce_exponent_range:
            for name in ("exp_n", "exp_m"):
                if getattr(self, name) > 1:
                    raise InvalidInputError(
                        f"{name} outside the standard range (0, 1]; "
                        "set enforce_exponent_range = false to allow it"
                    )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_mapping(cls, values) -> "TransformerParams":
        """Build from raw ``key -> str`` pairs (as read from a config file)."""
        return kvconfig.dataclass_from_kv(cls, values)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "TransformerParams":
        return cls.from_mapping(kvconfig.read_kv(path))

    def dumps(self) -> str:
        return kvconfig.format_kv(
            self.to_dict(),
            header="Transformer thermal parameters (IEEE C57.91-2011).\n"
            "Rises in degC, time constants in hours, life in hours.",
        )


@dataclass(frozen=True)
class ThermalState:
    """Top-oil rise over ambient and hottest-spot rise over top oil (°C)."""

    delta_theta_to: float
    delta_theta_h: float

    def __post_init__(self):
        for name in ("delta_theta_to", "delta_theta_h"):
            value = _finite(name, getattr(self, name))
            if value < 0:
                raise InvalidInputError(f"{name} must be >= 0, got {value!r}")


@dataclass(frozen=True)
class ThermalStepInput:
    load_prev_pu: float
    load_now_pu: float
    ambient_c: float
    dt_hours: float = 1.0

    def __post_init__(self):
        for name in ("load_prev_pu", "load_now_pu"):
            if _finite(name, getattr(self, name)) < 0:
                raise InvalidInputError(f"{name} must be >= 0")
        _finite("ambient_c", self.ambient_c)
        if _finite("dt_hours", self.dt_hours) <= 0:
            raise InvalidInputError("dt_hours must be > 0")


def _check_hotspot(theta_h: float) -> float:
    theta_h = _finite("theta_h", theta_h)
    if theta_h <= -CELSIUS_TO_KELVIN:
        raise InvalidInputError(f"theta_h must be above absolute zero, got {theta_h!r}")
    return theta_h


def aging_acceleration_factor(theta_h: float, params: TransformerParams = TransformerParams()) -> float:
    """F_AA relative to the reference hottest-spot temperature (1.0 at 110 °C)."""
    theta_h = _check_hotspot(theta_h)
    rate = params.aging_rate_kelvin
    return math.exp(rate / params.ref_hotspot_kelvin - rate / (theta_h + CELSIUS_TO_KELVIN))


def per_unit_life(theta_h: float, params: TransformerParams = TransformerParams()) -> float:
    theta_h = _check_hotspot(theta_h)
    return params.life_const_a * math.exp(params.life_const_b / (theta_h + CELSIUS_TO_KELVIN))


def equivalent_aging_factor(faa_series: Sequence[float], dt_series: Sequence[float]) -> float:
    """Time-weighted mean of aging acceleration factors."""
    if len(faa_series) == 0:
        raise EmptyInputError("faa_series is empty")
    if len(faa_series) != len(dt_series):
        raise ShapeError(f"length mismatch: {len(faa_series)} factors vs {len(dt_series)} intervals")
    weighted = 0.0
    total = 0.0
    for faa, dt in zip(faa_series, dt_series):
        faa = _finite("faa", faa)
        dt = _finite("dt", dt)
        if faa < 0:
            raise InvalidInputError("aging factors must be >= 0")
        if dt <= 0:
            raise InvalidInputError("intervals must be > 0")
        weighted += faa * dt
        total += dt
    return weighted / total


def percent_loss_of_life(
    feqa: float, elapsed_hours: float, params: TransformerParams = TransformerParams()
) -> float:
    feqa = _finite("feqa", feqa)
    elapsed_hours = _finite("elapsed_hours", elapsed_hours)
    if feqa < 0 or elapsed_hours < 0:
        raise InvalidInputError("feqa and elapsed_hours must be >= 0")
    return feqa * elapsed_hours * 100.0 / params.normal_insulation_life


def _check_load(load_pu: float) -> float:
    load_pu = _finite("load_pu", load_pu)
    if load_pu < 0:
        raise InvalidInputError(f"load must be >= 0, got {load_pu!r}")
    return load_pu


def ultimate_top_oil_rise(load_pu: float, params: TransformerParams = TransformerParams()) -> float:
    k = _check_load(load_pu)
    r = params.loss_ratio_r
    return params.delta_theta_to_rated * ((k * k * r + 1.0) / (r + 1.0)) ** params.exp_n


def ultimate_hotspot_rise(load_pu: float, params: TransformerParams = TransformerParams()) -> float:
    k = _check_load(load_pu)
    return params.delta_theta_h_rated * k ** (2.0 * params.exp_m)


def exponential_rise(initial: float, ultimate: float, tau: float, t: float) -> float:
    """First-order response from ``initial`` towards ``ultimate`` after ``t`` hours."""
    initial = _finite("initial", initial)
    ultimate = _finite("ultimate", ultimate)
    tau = _finite("tau", tau)
    t = _finite("t", t)
    if tau <= 0:
        raise InvalidInputError(f"tau must be > 0, got {tau!r}")
    if t < 0:
        raise InvalidInputError(f"t must be >= 0, got {t!r}")
    # -expm1(-x) == 1 - exp(-x) without cancellation for small x
    return (ultimate - initial) * -math.expm1(-t / tau) + initial


def hotspot_temperature(ambient_c: float, dto: float, dh: float) -> float:
    return _finite("ambient_c", ambient_c) + _finite("dto", dto) + _finite("dh", dh)


def steady_state(load_pu: float, params: TransformerParams = TransformerParams()) -> ThermalState:
    """State reached after holding ``load_pu`` indefinitely."""
    return ThermalState(
        ultimate_top_oil_rise(load_pu, params),
        ultimate_hotspot_rise(load_pu, params),
    )


def step_thermal(
    state: ThermalState, step: ThermalStepInput, params: TransformerParams = TransformerParams()
) -> tuple[ThermalState, float, float]:
    """Advance one interval.

    The incoming state supplies the initial rises; ``step.load_now_pu`` sets the
    ultimate rises. Returns ``(new_state, theta_h, faa)`` evaluated at the end of
    the interval.
    """
    dto = exponential_rise(
        state.delta_theta_to,
        ultimate_top_oil_rise(step.load_now_pu, params),
        params.tau_to,
        step.dt_hours,
    )
    dh = exponential_rise(
        state.delta_theta_h,
        ultimate_hotspot_rise(step.load_now_pu, params),
        params.tau_w,
        step.dt_hours,
    )
    new_state = ThermalState(dto, dh)
    theta_h = hotspot_temperature(step.ambient_c, dto, dh)
    return new_state, theta_h, aging_acceleration_factor(theta_h, params)


@dataclass(frozen=True)
class ThermalTrace:
    """Per-interval outputs of :func:`simulate`."""

    theta_h: tuple[float, ...]
    faa: tuple[float, ...]
    states: tuple[ThermalState, ...]


def simulate(
    loads: Sequence[float],
    ambients: Sequence[float],
    params: TransformerParams = TransformerParams(),
    dt_hours: float = 1.0,
    initial: ThermalState | None = None,
) -> ThermalTrace:
    """Run :func:`step_thermal` over a load/ambient series in time order.

    Without an explicit ``initial`` state the simulation starts at the steady
    state of the first load, and the first interval's previous load is the
    first load itself.
    """
    if len(loads) == 0:
        raise EmptyInputError("empty load series")
    if len(loads) != len(ambients):
        raise ShapeError(f"{len(loads)} loads vs {len(ambients)} ambient values")
    state = initial if initial is not None else steady_state(loads[0], params)
    prev = loads[0]
    theta_h, faa, states = [], [], []
    for load, ambient in zip(loads, ambients):
        state, th, f = step_thermal(state, ThermalStepInput(prev, load, ambient, dt_hours), params)
        theta_h.append(th)
        faa.append(f)
        states.append(state)
        prev = load
    return ThermalTrace(tuple(theta_h), tuple(faa), tuple(states))
