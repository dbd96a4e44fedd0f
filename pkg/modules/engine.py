"""
Agent-based crowd simulation over the zone graph
Time-stepped movement with a linear density-speed relation and FIFO portal queues
"""

import json
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import Config
from modules.errors import InvalidSpecError
from modules.population import AgentProfile, Group
from modules.space import FloorPlan, tour_route
from utils.performance_optimizer import time_it
from utils.rng import substream

logger = logging.getLogger(__name__)

PENDING, WALKING, DWELLING, WAITING, EXITED = 0, 1, 2, 3, 4
_EPS = 1e-9


@dataclass(frozen=True)
class CrossingEvent:
    time: float
    agent_id: str
    portal_id: str
    speed_at_crossing: float


@dataclass(frozen=True)
class WaitStats:
    mean: float
    max: float
    count: int


@dataclass
class Trace:
    """Everything one crowd run produced"""

    crossings: List[CrossingEvent]
    occupancy: np.ndarray  # steps x zones, headcount at time i*dt
    zone_ids: Tuple[str, ...]
    portal_ids: Tuple[str, ...]
    portal_upstream: Dict[str, str]  # portal id -> zone it leaves
    dt: float
    horizon: float
    wait_stats: Dict[str, WaitStats]
    entered: int
    exited: int
    remaining: int
    entered_series: np.ndarray = field(repr=False)
    exited_series: np.ndarray = field(repr=False)

    @property
    def steps(self) -> int:
        return self.occupancy.shape[0]

    def zone_occupancy(self, zone_id: str) -> np.ndarray:
        return self.occupancy[:, self.zone_ids.index(zone_id)]

    def inside_series(self) -> np.ndarray:
        return self.occupancy.sum(axis=1)

    def conservation_holds(self) -> bool:
        """entered = inside + exited at every recorded step"""
        return bool(np.array_equal(self.entered_series, self.inside_series() + self.exited_series))

    def crossings_at(self, portal_id: str) -> List[CrossingEvent]:
        return [c for c in self.crossings if c.portal_id == portal_id]

    def crossing_counts(self) -> Dict[str, int]:
        counts = {p: 0 for p in self.portal_ids}
        for c in self.crossings:
            counts[c.portal_id] += 1
        return counts

    def crossings_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(c.time, c.agent_id, c.portal_id, c.speed_at_crossing) for c in self.crossings],
            columns=['time', 'agent_id', 'portal_id', 'speed'],
        )

    def occupancy_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.occupancy, columns=list(self.zone_ids))
        frame.insert(0, 'time', np.arange(self.steps) * self.dt)
        return frame

    def summary(self) -> Dict:
        return {
            'entered': self.entered,
            'exited': self.exited,
            'remaining': self.remaining,
            'crossings': len(self.crossings),
            'wait_stats': {p: {'mean': w.mean, 'max': w.max, 'count': w.count}
                           for p, w in self.wait_stats.items()},
        }

    def export(self, out_dir: Path, fmt: str = 'csv') -> List[Path]:
        """Write crossings (CSV or JSON) and the occupancy series (CSV)"""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        if fmt == 'json':
            path = out_dir / 'trace.json'
            payload = {
                'dt': self.dt,
                'horizon': self.horizon,
                'totals': self.summary(),
                'crossings': [
                    {'time': c.time, 'agent_id': c.agent_id, 'portal_id': c.portal_id,
                     'speed': c.speed_at_crossing}
                    for c in self.crossings
                ],
            }
            path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding='utf-8')
        else:
            path = out_dir / 'crossings.csv'
            self.crossings_frame().to_csv(path, index=False)
        written.append(path)
        occupancy_path = out_dir / 'occupancy.csv'
        self.occupancy_frame().to_csv(occupancy_path, index=False)
        written.append(occupancy_path)
        return written


def _check_inputs(population: Sequence[AgentProfile], groups: Sequence[Group], dt: float, horizon: float) -> int:
    if not 0 < dt <= 2:
        raise InvalidSpecError('dt', f'must lie in (0, 2], got {dt}')
    if not horizon > 0:
        raise InvalidSpecError('horizon', f'must be > 0, got {horizon}')
    steps = round(horizon / dt)
    if abs(steps * dt - horizon) > 1e-6:
        raise InvalidSpecError('horizon', f'{horizon} is not a multiple of dt={dt}')
    ids = {a.id for a in population}
    if len(ids) != len(population):
        raise InvalidSpecError('population', 'duplicate agent ids')
    for group in groups:
        if len(group.member_ids) < 2:
            raise InvalidSpecError(f'groups.{group.id}', 'needs at least two members')
        for member in group.member_ids:
            if member not in ids:
                raise InvalidSpecError(f'groups.{group.id}', f'unknown member {member}')
    return steps


@time_it
def run_abss(plan: FloorPlan, population: Sequence[AgentProfile], groups: Sequence[Group],
             dt: float = Config.SIM_DT, horizon: float = Config.SIM_HORIZON_S, seed: int = 0,
             rho_max: float = Config.RHO_MAX, speed_floor: float = Config.SPEED_FLOOR) -> Trace:
    """
    Simulate visitors walking the canonical tour

    Each step: admit arrivals, record occupancy, advance walkers at
    desired_speed * max(floor, 1 - rho/rho_max), count down dwell, queue
    finishers at the next portal, and let every portal release whole units
    (singletons or complete groups) up to its service credit.
    """
    steps = _check_inputs(population, groups, dt, horizon)
    route = tour_route(plan, plan.entrances[0], plan.exits[0])
    zone_pos = {z.id: i for i, z in enumerate(plan.zones)}
    portal_pos = {p.id: i for i, p in enumerate(plan.portals)}
    route_zone = np.array([zone_pos[z] for z in route])
    lengths = np.array([z.length for z in plan.zones])
    areas = np.array([z.area for z in plan.zones])
    leg_portals = [[portal_pos[p.id] for p in plan.portals_between(a, b)] for a, b in zip(route, route[1:])]
    rates = np.array([p.service_rate for p in plan.portals])
    last_leg = len(route) - 1

    agents = sorted(population, key=lambda a: (a.arrival_time, a.id))
    n = len(agents)
    agent_index = {a.id: i for i, a in enumerate(agents)}
    arrival = np.array([a.arrival_time for a in agents], dtype=float)
    desired = np.array([a.desired_speed for a in agents], dtype=float)
    dwell = np.array([[a.zone_dwell.get(z, 0.0) for z in route] for a in agents], dtype=float).reshape(n, len(route))
    group_of = np.full(n, -1, dtype=int)
    group_members = []
    for g, group in enumerate(groups):
        members = [agent_index[m] for m in group.member_ids]
        group_members.append(members)
        group_of[members] = g

    state = np.zeros(n, dtype=np.int8)
    pos = np.zeros(n, dtype=int)
    remaining = np.zeros(n)
    dwell_left = np.zeros(n)
    join_time = np.zeros(n)

    queues = [deque() for _ in plan.portals]
    queued_persons = np.zeros(len(plan.portals), dtype=int)
    # credit an idle portal keeps: one person, or one step of service, passes on the next step
    idle_credit = np.maximum(1.0, rates * dt) - rates * dt
    credit = idle_credit.copy()
    holding: Dict[Tuple[int, int], List[int]] = {}
    waits: List[List[float]] = [[] for _ in plan.portals]
    tie_rng = substream(seed, 'engine.portal_choice')

    occupancy = np.zeros((steps, len(plan.zones)), dtype=np.int32)
    entered_series = np.zeros(steps, dtype=np.int64)
    exited_series = np.zeros(steps, dtype=np.int64)
    crossings: List[CrossingEvent] = []
    entered = exited = 0
    next_arrival = 0

    def enqueue(unit: List[int], leg: int):
        candidates = leg_portals[leg]
        loads = queued_persons[candidates]
        best = [c for c, load in zip(candidates, loads) if load == loads.min()]
        chosen = best[0] if len(best) == 1 else best[int(tie_rng.integers(len(best)))]
        queues[chosen].append(unit)
        queued_persons[chosen] += len(unit)

    for k in range(steps):
        t = k * dt

        while next_arrival < n and arrival[next_arrival] < t + dt - _EPS:
            i = next_arrival
            state[i] = WALKING
            pos[i] = 0
            remaining[i] = lengths[route_zone[0]]
            entered += 1
            next_arrival += 1

        inside = (state == WALKING) | (state == DWELLING) | (state == WAITING)
        zone_now = route_zone[pos]
        occ = np.bincount(zone_now[inside], minlength=len(plan.zones))
        occupancy[k] = occ
        entered_series[k] = entered
        exited_series[k] = exited
        factor = np.maximum(speed_floor, 1.0 - (occ / areas) / rho_max)

        was_dwelling = state == DWELLING
        dwell_left[was_dwelling] -= dt
        walking = state == WALKING
        remaining[walking] -= desired[walking] * factor[zone_now[walking]] * dt
        arrived = walking & (remaining <= _EPS)
        if arrived.any():
            state[arrived] = DWELLING
            dwell_left[arrived] = dwell[arrived, pos[arrived]]

        for i in np.flatnonzero((state == DWELLING) & (dwell_left <= _EPS)):
            if pos[i] == last_leg:
                state[i] = EXITED
                exited += 1
                continue
            state[i] = WAITING
            join_time[i] = t
            g = group_of[i]
            if g < 0:
                enqueue([i], pos[i])
                continue
            key = (g, int(pos[i]))
            holding.setdefault(key, []).append(i)
            if len(holding[key]) == len(group_members[g]):
                enqueue(holding.pop(key), pos[i])

        for p, queue in enumerate(queues):
            credit[p] += rates[p] * dt
            while queue and credit[p] >= len(queue[0]) - _EPS:
                unit = queue.popleft()
                credit[p] -= len(unit)
                queued_persons[p] -= len(unit)
                portal_id = plan.portals[p].id
                for i in unit:
                    from_zone = route_zone[pos[i]]
                    crossings.append(CrossingEvent(
                        time=(k + 1) * dt,
                        agent_id=agents[i].id,
                        portal_id=portal_id,
                        speed_at_crossing=float(desired[i] * factor[from_zone]),
                    ))
                    waits[p].append(t - join_time[i])
                    pos[i] += 1
                    state[i] = WALKING
                    remaining[i] = lengths[route_zone[pos[i]]]
            if not queue:
                credit[p] = min(credit[p], idle_credit[p])

    wait_stats = {
        portal.id: WaitStats(
            mean=float(np.mean(waits[p])) if waits[p] else 0.0,
            max=float(np.max(waits[p])) if waits[p] else 0.0,
            count=len(waits[p]),
        )
        for p, portal in enumerate(plan.portals)
    }
    left_inside = entered - exited
    if left_inside:
        logger.warning(f"{left_inside} agents still inside at horizon {horizon}s")
    logger.info(f"Crowd run finished: {entered} entered, {exited} exited, {len(crossings)} crossings")

    return Trace(
        crossings=crossings,
        occupancy=occupancy,
        zone_ids=tuple(plan.zone_ids),
        portal_ids=tuple(plan.portal_ids),
        portal_upstream={p.id: p.from_zone for p in plan.portals},
        dt=dt,
        horizon=steps * dt,
        wait_stats=wait_stats,
        entered=entered,
        exited=exited,
        remaining=left_inside,
        entered_series=entered_series,
        exited_series=exited_series,
    )
