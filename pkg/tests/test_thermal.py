import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lolfusion.errors import EmptyInputError, InvalidInputError, ShapeError
from lolfusion.thermal import (
    ThermalState,
    ThermalStepInput,
    TransformerParams,
    aging_acceleration_factor,
    equivalent_aging_factor,
    exponential_rise,
    hotspot_temperature,
    per_unit_life,
    percent_loss_of_life,
    simulate,
    steady_state,
    step_thermal,
    ultimate_hotspot_rise,
    ultimate_top_oil_rise,
)

from oracles import hourly_lol_straight_line

P = TransformerParams()

# Frozen from a 40-digit mpmath evaluation of the closed forms.
FAA_120 = 2.708925143828163701983494369061313676378
FAA_80 = 0.03584945245027522332302750551176080591016
PUL_110 = 1.000341631745340125652294518116148359963
DTO_K0 = 14.06282388387635167483919553331323309454
DTO_K12 = 70.33861558068923894317938068023812618743
DH_K12 = 33.46801865189482575078631829073826653951
RISE_10_20 = 16.32120558828557678404476229838539132554
STEP_DTO = 25.66723154632389854538169186349527863477
STEP_DH = 24.99990683367069803322517687871310123935
STEP_THETA_H = 80.66713837999459657860686874220837987411
STEP_FAA = 0.03884131942930252694741610908744508946153


class TestParams:
    def test_defaults_rated_point(self):
        assert P.delta_theta_to_rated + P.delta_theta_h_rated + 30 == 110

    @pytest.mark.parametrize("field", ["tau_to", "tau_w", "loss_ratio_r", "life_const_b"])
    def test_nonpositive_rejected(self, field):
        with pytest.raises(InvalidInputError):
            TransformerParams(**{field: 0.0})

    def test_exponent_range(self):
        with pytest.raises(InvalidInputError):
            TransformerParams(exp_n=1.2)
        assert TransformerParams(exp_n=1.2, enforce_exponent_range=False).exp_n == 1.2

    def test_kv_round_trip(self, tmp_path):
        path = tmp_path / "params.cfg"
        path.write_text(P.dumps())
        assert TransformerParams.load(path) == P

    def test_kv_override(self):
        params = TransformerParams.from_mapping({"tau_to": "2.5", "enforce_exponent_range": "false"})
        assert params.tau_to == 2.5
        assert params.enforce_exponent_range is False


class TestAgingAcceleration:
    def test_reference_is_exactly_one(self):
        assert aging_acceleration_factor(110.0, P) == 1.0

    def test_120(self):
        assert aging_acceleration_factor(120.0, P) == pytest.approx(FAA_120, rel=1e-14)

    def test_80(self):
        assert aging_acceleration_factor(80.0, P) == pytest.approx(FAA_80, rel=1e-14)

    @pytest.mark.parametrize("bad", [math.nan, math.inf, -273.0, -300.0])
    def test_invalid(self, bad):
        with pytest.raises(InvalidInputError):
            aging_acceleration_factor(bad, P)

    @given(
        st.floats(-200, 300, allow_nan=False),
        st.floats(-200, 300, allow_nan=False),
    )
    def test_strictly_increasing(self, a, b):
        if a == b:
            return
        lo, hi = sorted((a, b))
        if hi - lo < 1e-9:
            return
        assert aging_acceleration_factor(lo, P) < aging_acceleration_factor(hi, P)


class TestPerUnitLife:
    def test_reference(self):
        assert per_unit_life(110.0, P) == pytest.approx(PUL_110, rel=1e-14)
        assert per_unit_life(110.0, P) == pytest.approx(1.0, abs=1e-3)

    def test_linear_in_a(self):
        doubled = TransformerParams(life_const_a=2 * P.life_const_a)
        assert per_unit_life(110.0, doubled) == 2 * per_unit_life(110.0, P)

    @given(st.floats(-200, 300), st.floats(-200, 300))
    def test_decreasing(self, a, b):
        lo, hi = sorted((a, b))
        if hi - lo < 1e-6:
            return
        assert per_unit_life(lo, P) > per_unit_life(hi, P)


class TestEquivalentAging:
    @pytest.mark.parametrize("c", [0.0, 0.3, 1.0, 17.5])
    def test_constant(self, c):
        assert equivalent_aging_factor([c, c, c], [1, 1, 1]) == pytest.approx(c, rel=1e-15)

    def test_mean(self):
        assert equivalent_aging_factor([1, 3], [1, 1]) == 2

    def test_weighted(self):
        assert equivalent_aging_factor([1, 4], [3, 1]) == 1.75

    def test_errors(self):
        with pytest.raises(EmptyInputError):
            equivalent_aging_factor([], [])
        with pytest.raises(ShapeError):
            equivalent_aging_factor([1, 2], [1])
        with pytest.raises(InvalidInputError):
            equivalent_aging_factor([1, 2], [1, 0])
        with pytest.raises(InvalidInputError):
            equivalent_aging_factor([-1, 2], [1, 1])

    @given(
        st.lists(st.tuples(st.floats(0, 100), st.floats(0.01, 10)), min_size=1, max_size=30),
        st.floats(1e-3, 1e3),
    )
    def test_bounds_and_scale_invariance(self, rows, scale):
        faa = [r[0] for r in rows]
        dt = [r[1] for r in rows]
        base = equivalent_aging_factor(faa, dt)
        assert min(faa) - 1e-12 <= base <= max(faa) + 1e-12
        scaled = equivalent_aging_factor(faa, [d * scale for d in dt])
        assert scaled == pytest.approx(base, rel=1e-12, abs=1e-300)


class TestPercentLossOfLife:
    def test_full_life(self):
        assert percent_loss_of_life(1.0, 180000.0, P) == 100.0

    def test_one_hour(self):
        assert percent_loss_of_life(1.0, 1.0, P) == pytest.approx(100 / 180000, rel=1e-15)

    def test_product(self):
        assert percent_loss_of_life(2.708, 1.0, P) == pytest.approx(1.504444444444444e-3, rel=1e-14)

    def test_negative(self):
        with pytest.raises(InvalidInputError):
            percent_loss_of_life(-1.0, 1.0, P)
        with pytest.raises(InvalidInputError):
            percent_loss_of_life(1.0, -1.0, P)


class TestUltimateRises:
    def test_top_oil_rated(self):
        assert ultimate_top_oil_rise(1.0, P) == P.delta_theta_to_rated

    def test_top_oil_no_load(self):
        assert ultimate_top_oil_rise(0.0, P) == pytest.approx(DTO_K0, rel=1e-14)

    def test_top_oil_overload(self):
        assert ultimate_top_oil_rise(1.2, P) == pytest.approx(DTO_K12, rel=1e-14)

    def test_hotspot(self):
        assert ultimate_hotspot_rise(1.0, P) == P.delta_theta_h_rated
        assert ultimate_hotspot_rise(0.0, P) == 0.0
        assert ultimate_hotspot_rise(1.2, P) == pytest.approx(DH_K12, rel=1e-14)

    def test_negative_load(self):
        with pytest.raises(InvalidInputError):
            ultimate_top_oil_rise(-0.1, P)
        with pytest.raises(InvalidInputError):
            ultimate_hotspot_rise(-0.1, P)

    @given(st.floats(0, 3), st.floats(0, 3))
    def test_monotone(self, a, b):
        lo, hi = sorted((a, b))
        assert ultimate_top_oil_rise(lo, P) <= ultimate_top_oil_rise(hi, P)
        assert ultimate_hotspot_rise(lo, P) <= ultimate_hotspot_rise(hi, P)


class TestExponentialRise:
    def test_t0(self):
        assert exponential_rise(12.5, 40.0, 3.0, 0.0) == 12.5

    def test_long_time(self):
        assert exponential_rise(12.5, 40.0, 3.0, 150.0) == pytest.approx(40.0, abs=1e-12)

    def test_one_tau(self):
        assert exponential_rise(10.0, 20.0, 3.0, 3.0) == pytest.approx(RISE_10_20, rel=1e-14)

    def test_bad_tau(self):
        with pytest.raises(InvalidInputError):
            exponential_rise(0.0, 1.0, 0.0, 1.0)

    @given(st.floats(-100, 100), st.floats(-100, 100), st.floats(0.01, 10), st.floats(0, 100))
    def test_convex_combination(self, initial, ultimate, tau, t):
        value = exponential_rise(initial, ultimate, tau, t)
        lo, hi = sorted((initial, ultimate))
        assert lo - 1e-12 <= value <= hi + 1e-12


class TestHotspot:
    def test_rated(self):
        assert hotspot_temperature(30, 55, 25) == 110

    def test_zero(self):
        assert hotspot_temperature(0, 0, 0) == 0

    def test_no_load(self):
        assert hotspot_temperature(25, 14.07, 0) == pytest.approx(39.07, abs=1e-12)

    def test_nonfinite(self):
        with pytest.raises(InvalidInputError):
            hotspot_temperature(math.nan, 0, 0)


class TestStepThermal:
    def test_fixed_point(self):
        state = steady_state(0.9, P)
        new, theta_h, _ = step_thermal(state, ThermalStepInput(0.9, 0.9, 21.0), P)
        assert new.delta_theta_to == pytest.approx(state.delta_theta_to, abs=1e-12)
        assert new.delta_theta_h == pytest.approx(state.delta_theta_h, abs=1e-12)
        assert theta_h == pytest.approx(21.0 + state.delta_theta_to + state.delta_theta_h, abs=1e-12)

    def test_rated_day(self):
        trace = simulate([1.0] * 24, [30.0] * 24, P)
        assert all(f == pytest.approx(1.0, abs=1e-15) for f in trace.faa)
        assert all(t == pytest.approx(110.0, abs=1e-9) for t in trace.theta_h)

    def test_load_step(self):
        state = ThermalState(DTO_K0, 0.0)
        new, theta_h, faa = step_thermal(state, ThermalStepInput(0.0, 1.0, 30.0, 1.0), P)
        assert new.delta_theta_to == pytest.approx(STEP_DTO, rel=1e-9)
        assert new.delta_theta_h == pytest.approx(STEP_DH, rel=1e-9)
        assert theta_h == pytest.approx(STEP_THETA_H, rel=1e-9)
        assert faa == pytest.approx(STEP_FAA, rel=1e-9)

    def test_invalid_inputs(self):
        with pytest.raises(InvalidInputError):
            ThermalStepInput(-1.0, 1.0, 20.0)
        with pytest.raises(InvalidInputError):
            ThermalStepInput(1.0, 1.0, 20.0, 0.0)
        with pytest.raises(InvalidInputError):
            ThermalState(-1.0, 0.0)

    @pytest.mark.parametrize("load,ambient", [(0.3, 10.0), (1.4, 35.0)])
    def test_converges_from_cold(self, load, ambient):
        state = ThermalState(0.0, 0.0)
        step = ThermalStepInput(load, load, ambient, 1.0)
        diffs = []
        for _ in range(int(50 * max(P.tau_to, P.tau_w) / step.dt_hours)):
            new, _, _ = step_thermal(state, step, P)
            diffs.append(abs(new.delta_theta_to - state.delta_theta_to) + abs(new.delta_theta_h - state.delta_theta_h))
            state = new
        assert diffs[-1] < 1e-9
        nonzero = [d for d in diffs if d > 0]
        assert all(b <= a for a, b in zip(nonzero, nonzero[1:]))


class TestOracleEquivalence:
    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(st.floats(0, 1.6), min_size=24, max_size=24),
        st.lists(st.floats(-20, 45), min_size=24, max_size=24),
    )
    def test_random_24h_profiles(self, loads, ambients):
        trace = simulate(loads, ambients, P)
        lol = [percent_loss_of_life(f, 1.0, P) for f in trace.faa]
        expected = hourly_lol_straight_line(loads, ambients)
        for got, want in zip(lol, expected):
            assert got == pytest.approx(want, rel=1e-9)

    def test_fixed_profile(self):
        rng = random.Random(3)
        loads = [max(0.0, 0.8 + 0.4 * math.sin(h / 24 * 2 * math.pi) + rng.uniform(-0.1, 0.1)) for h in range(24)]
        ambients = [20 + 8 * math.sin((h - 9) / 24 * 2 * math.pi) for h in range(24)]
        trace = simulate(loads, ambients, P)
        lol = [percent_loss_of_life(f, 1.0, P) for f in trace.faa]
        assert lol == pytest.approx(hourly_lol_straight_line(loads, ambients), rel=1e-9)
