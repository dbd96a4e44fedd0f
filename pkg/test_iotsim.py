"""
Test script for the IoT deployment simulator
Mode hysteresis, sample grid, bounded-capacity capture and energy accounting
"""

import math
import sys

import numpy as np

from modules.aidc import DevicePlacement, SensingOpportunity
from modules.engine import run_abss
from modules.errors import ModelValidationError
from modules.iotsim import (CRITICAL, NORMAL, ArchitectureModel, Configuration, EnergyModel, ModeConfig,
                            ModeInterval, SampleGrid, mode_timeline, simulate, simulate_device, window_count)
from modules.population import load_scenario, sample_population
from modules.space import load_floor_plan

PLAN = "data/uffizi_like.plan"


def _opportunity(i, start, dwell):
    return SensingOpportunity(device_id="dev", agent_id=f"a{i}", start=start, dwell=dwell, event_index=i)


def _brute_force_capture(opportunities, times, capacity):
    """Scan every sample time, taking the earliest-ending eligible opportunities"""
    captured = set()
    for t in times:
        eligible = [o for o in opportunities
                    if o.event_index not in captured and o.start <= t <= o.start + o.dwell]
        eligible.sort(key=lambda o: (o.start + o.dwell, o.start, o.event_index))
        captured.update(o.event_index for o in eligible[:capacity])
    return captured


def _brute_force_modes(series, theta, hysteresis):
    mode, modes = NORMAL, []
    for value in series:
        if mode == NORMAL and value > theta:
            mode = CRITICAL
        elif mode == CRITICAL and value < theta - hysteresis:
            mode = NORMAL
        modes.append(mode)
    return modes


def _mode_at(timeline, t):
    for interval in timeline:
        if interval.start <= t < interval.end:
            return interval.mode
    return timeline[-1].mode


def _shipped_trace(horizon=1800, scenario="data/scenario1_congestion.json"):
    plan = load_floor_plan(PLAN)
    spec = load_scenario(scenario)
    agents, groups = sample_population(spec, plan)
    return plan, run_abss(plan, agents, groups, dt=0.5, horizon=horizon, seed=spec.seed)


def _uniform_configuration(name, f, theta=30.0, hysteresis=5.0):
    return Configuration(name, {t: ModeConfig(f, f) for t in ("camera", "rfid", "counter", "qr")},
                         theta=theta, hysteresis=hysteresis)


MODEL = ArchitectureModel("entry_exit", (
    DevicePlacement("cam_entry", "camera", "p_entry"),
    DevicePlacement("rfid_mid", "rfid", "p_s2_w1"),
    DevicePlacement("counter_exit", "counter", "p_exit_a"),
    DevicePlacement("qr_exit", "qr", "p_exit_b"),
))


def test_quiet_series_stays_normal():
    timeline = mode_timeline(np.zeros(100), 1.0, 100.0, theta=50, hysteresis=10)
    assert timeline == [ModeInterval(0.0, 100.0, NORMAL)]


def test_crowded_series_starts_critical():
    timeline = mode_timeline(np.full(100, 51.0), 1.0, 100.0, theta=50, hysteresis=10)
    assert timeline == [ModeInterval(0.0, 100.0, CRITICAL)]


def test_hysteresis_ramp():
    series = list(range(0, 61)) + list(range(59, 29, -1))
    timeline = mode_timeline(series, 1.0, float(len(series)), theta=50, hysteresis=10)
    assert timeline == [
        ModeInterval(0.0, 51.0, NORMAL),
        ModeInterval(51.0, 81.0, CRITICAL),
        ModeInterval(81.0, 91.0, NORMAL),
    ]


def test_timeline_matches_automaton():
    rng = np.random.default_rng(7)
    for _ in range(200):
        series = rng.integers(0, 12, size=80)
        dt = float(rng.choice([0.25, 0.5, 1.0]))
        horizon = len(series) * dt
        timeline = mode_timeline(series, dt, horizon, theta=6, hysteresis=2)
        assert timeline[0].start == 0.0 and timeline[-1].end == horizon
        assert all(a.end == b.start and a.mode != b.mode for a, b in zip(timeline, timeline[1:]))
        expected = _brute_force_modes(series, 6, 2)
        assert [_mode_at(timeline, i * dt) for i in range(len(series))] == expected


def test_sample_grid_counts():
    one_hz = SampleGrid([ModeInterval(0.0, 600.0, NORMAL)], ModeConfig(1.0, 4.0))
    assert one_hz.total == 600
    mixed = SampleGrid([ModeInterval(0.0, 10.0, NORMAL), ModeInterval(10.0, 12.5, CRITICAL)], ModeConfig(1.0, 4.0))
    assert mixed.total == 10 + 10
    assert mixed.times() == [mixed.time(i) for i in range(mixed.total)]
    assert mixed.first_at_or_after(10.1) == 11
    assert mixed.last_at_or_before(9.99) == 9
    assert mixed.first_at_or_after(13.0) == mixed.total


def test_short_opportunity_between_samples_is_missed():
    timeline = [ModeInterval(0.0, 600.0, NORMAL)]
    placement = DevicePlacement("cam", "camera", "p_entry")
    result = simulate_device(placement, [_opportunity(0, 10.02, 0.05)], timeline,
                             ModeConfig(10.0, 10.0), EnergyModel.default())
    assert result.captures == 0
    hit = simulate_device(placement, [_opportunity(0, 10.02, 0.09)], timeline,
                          ModeConfig(10.0, 10.0), EnergyModel.default())
    assert hit.captures == 1


def test_capture_matches_brute_force():
    rng = np.random.default_rng(2024)
    placement = DevicePlacement("dev", "camera", "p_entry")
    for case in range(1000):
        series = rng.integers(0, 10, size=int(rng.integers(5, 40)))
        dt = float(rng.choice([0.3, 0.5, 1.0]))
        horizon = len(series) * dt
        timeline = mode_timeline(series, dt, horizon, theta=5, hysteresis=2)
        f_normal = float(rng.uniform(0.2, 3.0))
        mode_config = ModeConfig(f_normal, f_normal * float(rng.uniform(1.0, 4.0)))
        capacity = int(rng.integers(1, 4))
        energy_model = EnergyModel(EnergyModel.default().costs, {"camera": capacity})
        grid = SampleGrid(timeline, mode_config)
        times = grid.times()

        opportunities = []
        for i in range(int(rng.integers(0, 30))):
            if times and rng.random() < 0.3:
                start = times[int(rng.integers(len(times)))]
            else:
                start = float(rng.uniform(0, horizon))
            opportunities.append(_opportunity(i, start, float(rng.uniform(0.0, 3.0))))

        result = simulate_device(placement, opportunities, timeline, mode_config, energy_model)
        expected = _brute_force_capture(opportunities, times, capacity)
        assert result.captured_events == frozenset(expected), f"case {case}"
        assert result.samples == len(times)


def test_doubling_frequency_on_sparse_stream():
    timeline = [ModeInterval(0.0, 300.0, NORMAL)]
    placement = DevicePlacement("cam", "camera", "p_entry")
    rng = np.random.default_rng(11)
    opportunities = [_opportunity(i, float(s), 0.4) for i, s in enumerate(np.sort(rng.uniform(0, 290, 40)))]
    previous = None
    for f in (0.5, 1.0, 2.0, 4.0):
        result = simulate_device(placement, opportunities, timeline, ModeConfig(f, f), EnergyModel.default())
        if previous is not None:
            assert result.energy > previous.energy
            assert result.captures >= previous.captures
        previous = result
    assert previous.captures == len(opportunities)


def test_raising_frequency_on_shipped_trace():
    plan, trace = _shipped_trace()
    model = ArchitectureModel("cams_and_tags", (
        DevicePlacement("cam_entry", "camera", "p_entry"),
        DevicePlacement("cam_mid", "camera", "p_e3_s1"),
        DevicePlacement("rfid_mid", "rfid", "p_s2_w1"),
        DevicePlacement("rfid_exit", "rfid", "p_exit_a"),
    ))
    rng = np.random.default_rng(31)
    for _ in range(20):
        base = {t: float(rng.uniform(0.2, 2.0)) for t in ("camera", "rfid", "counter", "qr")}
        boost = str(rng.choice(["camera", "rfid"]))
        factor = int(rng.integers(2, 5))
        before = Configuration("before", {t: ModeConfig(f, 2 * f) for t, f in base.items()},
                               theta=float(rng.uniform(5, 60)), hysteresis=2.0)
        raised = Configuration("raised", {**before.modes,
                                          boost: ModeConfig(factor * base[boost], 2 * factor * base[boost])},
                               theta=before.theta, hysteresis=before.hysteresis)
        low = simulate(trace, model, before, EnergyModel.default(), plan=plan)
        high = simulate(trace, model, raised, EnergyModel.default(), plan=plan)
        assert high.total_energy > low.total_energy
        assert all(h >= l for h, l in zip(high.captures_per_window, low.captures_per_window))


def test_raising_saturated_counter_keeps_total_captures():
    plan, trace = _shipped_trace()
    model = ArchitectureModel("counters", (
        DevicePlacement("counter_entry", "counter", "p_entry"),
        DevicePlacement("counter_mid", "counter", "p_e1_e2"),
        DevicePlacement("counter_exit", "counter", "p_exit_a"),
    ))
    rng = np.random.default_rng(5)
    for _ in range(20):
        f = float(rng.uniform(0.2, 2.0))
        factor = int(rng.integers(2, 5))
        theta = float(rng.uniform(5, 60))
        low = simulate(trace, model, _uniform_configuration("low", f, theta=theta), EnergyModel.default(), plan=plan)
        high = simulate(trace, model, _uniform_configuration("high", factor * f, theta=theta),
                        EnergyModel.default(), plan=plan)
        for device_id, device in high.devices.items():
            assert device.captures >= low.devices[device_id].captures, (device_id, f, factor)


def test_sample_grid_keeps_phase_across_equal_frequencies():
    split = SampleGrid([ModeInterval(0.0, 10.1, NORMAL), ModeInterval(10.1, 20.0, CRITICAL)], ModeConfig(3.0, 3.0))
    whole = SampleGrid([ModeInterval(0.0, 20.0, NORMAL)], ModeConfig(3.0, 3.0))
    assert split.total == whole.total == 60
    assert split.times() == whole.times()


def test_equal_frequencies_ignore_threshold():
    plan, trace = _shipped_trace()
    for f in (2.0, 3.0):
        low = simulate(trace, MODEL, _uniform_configuration("low", f, theta=5, hysteresis=1),
                       EnergyModel.default(), plan=plan)
        high = simulate(trace, MODEL, _uniform_configuration("high", f, theta=500, hysteresis=100),
                        EnergyModel.default(), plan=plan)
        assert low.total_energy == high.total_energy
        assert low.captures_per_window == high.captures_per_window
        assert {d: r.samples for d, r in low.devices.items()} == {d: r.samples for d, r in high.devices.items()}


def test_energy_accounting():
    plan, trace = _shipped_trace()
    configuration = Configuration("mixed", {
        "camera": ModeConfig(1.0, 5.0), "rfid": ModeConfig(2.0, 8.0),
        "counter": ModeConfig(1.0, 10.0), "qr": ModeConfig(0.5, 2.0)}, theta=10, hysteresis=3)
    energy_model = EnergyModel.default()
    result = simulate(trace, MODEL, configuration, energy_model, plan=plan)
    assert math.isclose(result.total_energy, sum(d.energy for d in result.devices.values()))
    for device in result.devices.values():
        assert device.packets == device.samples
        assert math.isclose(device.energy, device.samples * energy_model.sample_cost(device.device_type))
    assert result.devices["cam_entry"].critical_seconds > 0
    assert len(result.captures_per_window) == window_count(trace.horizon, result.window)


def test_colocated_devices_count_once():
    plan, trace = _shipped_trace(horizon=900)
    model = ArchitectureModel("twins", (
        DevicePlacement("cam", "camera", "p_entry"),
        DevicePlacement("rfid", "rfid", "p_entry"),
    ))
    result = simulate(trace, model, _uniform_configuration("fast", 2.0), EnergyModel.default())
    # a crossing at the horizon itself has no sample left to catch it
    entries = sum(1 for c in trace.crossings_at("p_entry") if c.time < trace.horizon)
    assert result.devices["cam"].captures == entries
    assert result.devices["rfid"].captures == entries
    assert sum(result.captures_per_window) == entries


def test_empty_trace_costs_baseline():
    plan = load_floor_plan(PLAN)
    trace = run_abss(plan, [], [], dt=0.5, horizon=600)
    configuration = _uniform_configuration("idle", 1.0)
    result = simulate(trace, MODEL, configuration, EnergyModel.default(), plan=plan)
    assert sum(result.captures_per_window) == 0
    expected = sum(600 * EnergyModel.default().sample_cost(p.device_type) for p in MODEL.placements)
    assert math.isclose(result.total_energy, expected)


def test_window_count():
    assert window_count(7200, 900) == 8
    assert window_count(100, 900) == 1
    assert window_count(1000, 900) == 2


def test_invalid_inputs():
    cases = [
        lambda: ModeConfig(2.0, 1.0).validate(),
        lambda: ModeConfig(0.0, 1.0).validate(),
        lambda: _uniform_configuration("bad", 1.0, theta=10, hysteresis=10).validate(),
        lambda: Configuration("partial", {"camera": ModeConfig(1, 2)}).validate(["camera", "rfid"]),
        lambda: ArchitectureModel("empty", ()).validate(),
        lambda: ArchitectureModel("dup", (DevicePlacement("a", "camera", "p_entry"),
                                          DevicePlacement("a", "rfid", "p_entry"))).validate(),
        lambda: ArchitectureModel("no_exit", (DevicePlacement("a", "camera", "p_entry"),)).validate(
            load_floor_plan(PLAN)),
        lambda: EnergyModel(EnergyModel.default().costs, {"camera": 0, "rfid": 1, "counter": 1, "qr": 1}).validate(),
    ]
    for i, case in enumerate(cases):
        try:
            case()
        except ModelValidationError:
            continue
        raise AssertionError(f"case {i} should fail validation")


def main():
    """Run all IoT simulator tests"""
    print("🔋 IoT Simulator Tests")
    print("=" * 50)
    tests = [(name, fn) for name, fn in globals().items() if name.startswith("test_") and callable(fn)]
    results = []
    for name, fn in tests:
        try:
            fn()
            results.append((name, True))
        except Exception as e:
            print(f"   ❌ {name}: {e}")
            results.append((name, False))
    passed = sum(1 for _, ok in results if ok)
    for name, ok in results:
        print(f"{'✅ PASS' if ok else '❌ FAIL'} {name}")
    print(f"\nOverall Result: {passed}/{len(results)} tests passed")
    return passed == len(results)


if __name__ == "__main__":
    sys.exit(0 if main() else 1)
