"""
IoT deployment simulation
Devices sample crossings at mode-dependent frequencies; the server counts captured movements per window
"""

import heapq
import logging
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from config import Config
from modules.aidc import DEVICE_TYPES, DevicePlacement, SensingOpportunity, compose
from modules.engine import Trace
from modules.errors import ModelValidationError
from modules.space import FloorPlan

logger = logging.getLogger(__name__)

NORMAL = 'normal'
CRITICAL = 'critical'


@dataclass(frozen=True)
class ModeConfig:
    f_normal: float
    f_critical: float

    def frequency(self, mode: str) -> float:
        return self.f_critical if mode == CRITICAL else self.f_normal

    def validate(self) -> None:
        if not self.f_normal > 0:
            raise ModelValidationError('ModeConfig', 'f_normal', f'must be > 0, got {self.f_normal}')
        if self.f_critical < self.f_normal:
            raise ModelValidationError('ModeConfig', 'f_critical',
                                       f'{self.f_critical} is below f_normal {self.f_normal}')


@dataclass(frozen=True)
class Configuration:
    name: str
    modes: Dict[str, ModeConfig] = field(hash=False)
    theta: float = Config.MODE_THRESHOLD
    hysteresis: float = Config.MODE_HYSTERESIS

    def validate(self, device_types: Sequence[str] = ()) -> None:
        if not self.name:
            raise ModelValidationError('Configuration', 'name', 'must be non-empty')
        for device_type, mode in self.modes.items():
            if device_type not in DEVICE_TYPES:
                raise ModelValidationError('Configuration', 'modes', f'unknown device type {device_type!r}')
            mode.validate()
        if not self.theta > 0:
            raise ModelValidationError('Configuration', 'theta', f'must be > 0, got {self.theta}')
        if not 0 <= self.hysteresis < self.theta:
            raise ModelValidationError('Configuration', 'hysteresis',
                                       f'must satisfy 0 <= h < theta, got h={self.hysteresis}')
        missing = sorted(set(device_types) - set(self.modes))
        if missing:
            raise ModelValidationError('Configuration', 'modes',
                                       f'{self.name} has no frequencies for {", ".join(missing)}')


@dataclass(frozen=True)
class ArchitectureModel:
    name: str
    placements: Tuple[DevicePlacement, ...]

    def device_types(self) -> List[str]:
        return sorted({p.device_type for p in self.placements})

    def validate(self, plan: Optional[FloorPlan] = None) -> None:
        if not self.name:
            raise ModelValidationError('ArchitectureModel', 'name', 'must be non-empty')
        if not self.placements:
            raise ModelValidationError('ArchitectureModel', 'placements', f'{self.name} places no devices')
        seen = set()
        for placement in self.placements:
            if placement.device_id in seen:
                raise ModelValidationError('ArchitectureModel', 'placements',
                                           f'device id {placement.device_id} used twice')
            seen.add(placement.device_id)
            placement.validate()
        if plan is None:
            return
        for placement in self.placements:
            if not plan.has_portal(placement.site):
                raise ModelValidationError('ArchitectureModel', 'placements',
                                           f'{placement.device_id} sits on unknown portal {placement.site}')
        sites = {p.site for p in self.placements}
        if not sites & {p.id for p in plan.entrance_portals()}:
            raise ModelValidationError('ArchitectureModel', 'placements',
                                       f'{self.name} has no device at an entrance portal')
        if not sites & {p.id for p in plan.exit_portals()}:
            raise ModelValidationError('ArchitectureModel', 'placements',
                                       f'{self.name} has no device at an exit portal')


@dataclass(frozen=True)
class DeviceCost:
    e_read: float  # J per sample
    e_tx: float  # J per packet


@dataclass(frozen=True)
class EnergyModel:
    costs: Dict[str, DeviceCost] = field(hash=False)
    c_max: Dict[str, int] = field(hash=False)

    @classmethod
    def default(cls) -> 'EnergyModel':
        return cls(
            costs={
                'camera': DeviceCost(100e-6, 50e-6),
                'rfid': DeviceCost(20e-6, 50e-6),
                'counter': DeviceCost(5e-6, 50e-6),
                'qr': DeviceCost(10e-6, 50e-6),
            },
            c_max={'camera': 20, 'rfid': 50, 'counter': 1, 'qr': 1},
        )

    def sample_cost(self, device_type: str) -> float:
        cost = self.costs[device_type]
        return cost.e_read + cost.e_tx

    def validate(self, device_types: Sequence[str] = DEVICE_TYPES) -> None:
        for device_type in device_types:
            if device_type not in self.costs:
                raise ModelValidationError('EnergyModel', 'costs', f'no costs for {device_type}')
            if device_type not in self.c_max:
                raise ModelValidationError('EnergyModel', 'c_max', f'no capacity for {device_type}')
        for device_type, cost in self.costs.items():
            if cost.e_read < 0 or cost.e_tx < 0:
                raise ModelValidationError('EnergyModel', 'costs', f'{device_type} energies must be >= 0')
        for device_type, capacity in self.c_max.items():
            if int(capacity) != capacity or capacity < 1:
                raise ModelValidationError('EnergyModel', 'c_max', f'{device_type} capacity must be an integer >= 1')


@dataclass(frozen=True)
class ModeInterval:
    start: float
    end: float
    mode: str


@dataclass(frozen=True)
class DeviceResult:
    device_id: str
    device_type: str
    samples: int
    packets: int
    captures: int
    energy: float
    critical_seconds: float
    captured_events: FrozenSet[int] = field(default_factory=frozenset, repr=False)


@dataclass
class IoTResult:
    total_energy: float
    captures_per_window: List[int]
    devices: Dict[str, DeviceResult]
    window: float
    covered_crossings: int = 0

    def to_dict(self) -> Dict:
        return {
            'total_energy': self.total_energy,
            'captures_per_window': list(self.captures_per_window),
            'window': self.window,
            'covered_crossings': self.covered_crossings,
            'devices': {
                d.device_id: {
                    'type': d.device_type, 'samples': d.samples, 'packets': d.packets,
                    'captures': d.captures, 'energy': d.energy, 'critical_seconds': d.critical_seconds,
                }
                for d in sorted(self.devices.values(), key=lambda d: d.device_id)
            },
        }


def mode_timeline(series: Sequence[float], dt: float, horizon: float,
                  theta: float, hysteresis: float) -> List[ModeInterval]:
    """
    Hysteresis automaton over an occupancy series sampled every dt

    Starts normal, goes critical at the first sample above theta and returns to
    normal at the first later sample below theta - hysteresis. Switches happen at
    the sample time; the intervals partition [0, horizon].
    """
    series = np.asarray(series, dtype=float)
    above = np.flatnonzero(series > theta)
    below = np.flatnonzero(series < theta - hysteresis)

    intervals: List[ModeInterval] = []
    mode, start, cursor = NORMAL, 0.0, 0
    while True:
        candidates = above if mode == NORMAL else below
        j = np.searchsorted(candidates, cursor)
        if j >= len(candidates):
            break
        index = int(candidates[j])
        switch = min(index * dt, horizon)
        if switch > start:
            intervals.append(ModeInterval(start, switch, mode))
        start = switch
        mode = CRITICAL if mode == NORMAL else NORMAL
        cursor = index + 1
    if horizon > start or not intervals:
        intervals.append(ModeInterval(start, horizon, mode))
    return intervals


class SampleGrid:
    """
    The device's sample times, indexed globally across mode intervals

    Interval [a, b) at frequency f samples at a + k/f for every k with a + k/f < b.
    Adjacent intervals sampled at the same frequency form one run, so the
    phase only restarts where the frequency changes.
    """

    def __init__(self, timeline: Sequence[ModeInterval], mode_config: ModeConfig):
        runs: List[List[float]] = []
        for interval in timeline:
            a, b = interval.start, interval.end
            if not b > a:
                continue
            f = mode_config.frequency(interval.mode)
            if runs and runs[-1][2] == f and runs[-1][1] == a:
                runs[-1][1] = b
            else:
                runs.append([a, b, f])

        self.starts: List[float] = []
        self.frequencies: List[float] = []
        self.counts: List[int] = []
        self.offsets: List[int] = []
        total = 0
        for a, b, f in runs:
            n = max(1, math.ceil((b - a) * f))
            while n > 1 and a + (n - 1) / f >= b:
                n -= 1
            while a + n / f < b:
                n += 1
            self.starts.append(a)
            self.frequencies.append(f)
            self.counts.append(n)
            self.offsets.append(total)
            total += n
        self.total = total

    def time(self, index: int) -> float:
        i = bisect_right(self.offsets, index) - 1
        return self.starts[i] + (index - self.offsets[i]) / self.frequencies[i]

    def times(self) -> List[float]:
        return [a + k / f for a, f, n in zip(self.starts, self.frequencies, self.counts) for k in range(n)]

    def _interval_of(self, t: float) -> int:
        return max(0, bisect_right(self.starts, t) - 1)

    def first_at_or_after(self, t: float) -> int:
        """Global index of the first sample >= t; total when none"""
        if not self.total:
            return 0
        if t <= self.starts[0]:
            return 0
        i = self._interval_of(t)
        a, f, n = self.starts[i], self.frequencies[i], self.counts[i]
        k = max(0, math.ceil((t - a) * f))
        while k > 0 and a + (k - 1) / f >= t:
            k -= 1
        while a + k / f < t:
            k += 1
        if k < n:
            return self.offsets[i] + k
        return self.offsets[i + 1] if i + 1 < len(self.offsets) else self.total

    def last_at_or_before(self, t: float) -> int:
        """Global index of the last sample <= t; -1 when none"""
        if not self.total or t < self.starts[0]:
            return -1
        i = self._interval_of(t)
        a, f, n = self.starts[i], self.frequencies[i], self.counts[i]
        k = min(n - 1, max(0, math.floor((t - a) * f)))
        while k > 0 and a + k / f > t:
            k -= 1
        while k + 1 < n and a + (k + 1) / f <= t:
            k += 1
        return self.offsets[i] + k


def simulate_device(placement: DevicePlacement, opportunities: Sequence[SensingOpportunity],
                    timeline: Sequence[ModeInterval], mode_config: ModeConfig,
                    energy_model: EnergyModel) -> DeviceResult:
    """
    Sample the device's opportunities over its mode timeline

    An opportunity (s, d) is eligible at every sample inside [s, s + d]. Each
    sample captures at most c_max eligible, not yet captured opportunities,
    earliest-ending first (ties by start, then event index). One packet per sample.
    """
    grid = SampleGrid(timeline, mode_config)
    capacity = int(energy_model.c_max[placement.device_type])

    spans = []
    for o in opportunities:
        end = o.start + o.dwell
        lo = grid.first_at_or_after(o.start)
        hi = grid.last_at_or_before(end)
        if lo <= hi:
            spans.append((lo, hi, end, o.start, o.event_index))
    spans.sort()

    captured = set()
    heap: List[Tuple[float, float, int, int]] = []
    ptr = 0
    sample = 0
    while ptr < len(spans) or heap:
        if not heap:
            sample = max(sample, spans[ptr][0])
        while ptr < len(spans) and spans[ptr][0] <= sample:
            lo, hi, end, start, event_index = spans[ptr]
            heapq.heappush(heap, (end, start, event_index, hi))
            ptr += 1
        taken = 0
        while heap and taken < capacity:
            end, start, event_index, hi = heapq.heappop(heap)
            if hi < sample:
                continue
            captured.add(event_index)
            taken += 1
        sample += 1

    critical_seconds = sum(i.end - i.start for i in timeline if i.mode == CRITICAL)
    energy = grid.total * energy_model.sample_cost(placement.device_type)
    return DeviceResult(
        device_id=placement.device_id,
        device_type=placement.device_type,
        samples=grid.total,
        packets=grid.total,
        captures=len(captured),
        energy=energy,
        critical_seconds=critical_seconds,
        captured_events=frozenset(captured),
    )


def window_count(horizon: float, window: float) -> int:
    return max(1, math.ceil(horizon / window - 1e-9))


def simulate(trace: Trace, model: ArchitectureModel, configuration: Configuration,
             energy_model: EnergyModel, window: float = Config.CAPTURE_WINDOW_S,
             plan: Optional[FloorPlan] = None) -> IoTResult:
    """
    Run every device of the model against one crowd trace

    A movement counts once per window however many co-located devices capture it.
    """
    model.validate(plan)
    configuration.validate(model.device_types())
    energy_model.validate(model.device_types())
    if not window > 0:
        raise ModelValidationError('IoTResult', 'window', f'must be > 0, got {window}')

    streams = compose(trace, model.placements, plan)
    timelines: Dict[str, List[ModeInterval]] = {}
    devices: Dict[str, DeviceResult] = {}
    captured_events = set()
    for placement in sorted(model.placements, key=lambda p: p.device_id):
        upstream = trace.portal_upstream[placement.site]
        if upstream not in timelines:
            timelines[upstream] = mode_timeline(trace.zone_occupancy(upstream), trace.dt, trace.horizon,
                                                configuration.theta, configuration.hysteresis)
        result = simulate_device(placement, streams[placement.device_id], timelines[upstream],
                                 configuration.modes[placement.device_type], energy_model)
        devices[placement.device_id] = result
        captured_events |= result.captured_events
        logger.debug(f"{placement.device_id}: {result.samples} samples, {result.captures} captures, "
                     f"{result.energy:.3f} J")

    n_windows = window_count(trace.horizon, window)
    counts = [0] * n_windows
    for event_index in captured_events:
        idx = min(int(trace.crossings[event_index].time // window), n_windows - 1)
        counts[idx] += 1

    covered_sites = {p.site for p in model.placements}
    covered = sum(1 for c in trace.crossings if c.portal_id in covered_sites)
    total_energy = sum(devices[d].energy for d in sorted(devices))
    logger.info(f"{model.name} x {configuration.name}: {total_energy:.2f} J, "
                f"{len(captured_events)}/{covered} covered movements captured")
    return IoTResult(
        total_energy=total_energy,
        captures_per_window=counts,
        devices=devices,
        window=window,
        covered_crossings=covered,
    )
