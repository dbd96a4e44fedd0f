"""
Population synthesis for the crowd simulator
Heterogeneous visitors and social groups drawn from a scenario specification
"""

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from config import Config
from modules.errors import InvalidSpecError
from modules.space import FloorPlan
from utils.rng import substream

logger = logging.getLogger(__name__)

AGE_CLASSES = ('child', 'adult', 'senior')
PHYSICAL_CONDITIONS = ('unimpaired', 'impaired')
GENDERS = ('female', 'male', 'other')
MAX_GROUP_SIZE = 6
PROBABILITY_TOLERANCE = 1e-9

# Free-flow walking speeds, m/s
BASE_SPEED = {'child': 0.9, 'adult': 1.34, 'senior': 1.0}
CONDITION_MODIFIER = {'unimpaired': 1.0, 'impaired': 0.6}


@dataclass(frozen=True)
class AgentProfile:
    id: str
    age_class: str
    gender: str
    origin: str
    physical_condition: str
    desired_speed: float
    arrival_time: float
    group_id: Optional[str] = None
    zone_dwell: Dict[str, float] = field(default_factory=dict, compare=True, hash=False)


@dataclass(frozen=True)
class Group:
    id: str
    member_ids: Tuple[str, ...]
    attachment_rule: str = 'regroup-at-portal'


@dataclass(frozen=True)
class RateSegment:
    start: float
    end: float
    rate: float


@dataclass(frozen=True)
class DwellParams:
    """Lognormal dwell: median * exp(sigma * N(0, 1)); median 0 means no stop"""
    median: float = 0.0
    sigma: float = 0.0


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    demographics: Dict[str, Dict[str, float]]
    arrival_rates: Tuple[RateSegment, ...]
    group_sizes: Dict[int, float]
    dwell: Dict[str, DwellParams]
    horizon: float
    seed: int

    def rate_at(self, t: np.ndarray) -> np.ndarray:
        """Piecewise-constant arrival rate lambda(t); zero outside every segment"""
        t = np.asarray(t, dtype=float)
        rates = np.zeros_like(t)
        for segment in self.arrival_rates:
            mask = (t >= segment.start) & (t < segment.end)
            rates[mask] = segment.rate
        return rates

    def with_seed(self, seed: int) -> 'ScenarioSpec':
        return replace(self, seed=seed)

    def validate(self) -> None:
        if not self.name:
            raise InvalidSpecError('name', 'must be non-empty')
        if not self.horizon > 0:
            raise InvalidSpecError('horizon', f'must be > 0, got {self.horizon}')
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidSpecError('seed', 'must be an unsigned 64-bit integer')

        for attribute in ('age_class', 'gender', 'origin', 'physical_condition'):
            if attribute not in self.demographics:
                raise InvalidSpecError(f'demographics.{attribute}', 'missing distribution')
            _check_distribution(f'demographics.{attribute}', self.demographics[attribute])
        for label in self.demographics['age_class']:
            if label not in AGE_CLASSES:
                raise InvalidSpecError('demographics.age_class', f'unknown class {label!r}')
        for label in self.demographics['physical_condition']:
            if label not in PHYSICAL_CONDITIONS:
                raise InvalidSpecError('demographics.physical_condition', f'unknown condition {label!r}')
        for label in self.demographics['gender']:
            if label not in GENDERS:
                raise InvalidSpecError('demographics.gender', f'unknown gender {label!r}')

        for i, segment in enumerate(self.arrival_rates):
            if segment.rate < 0:
                raise InvalidSpecError(f'arrival_rates[{i}].rate', 'must be >= 0')
            if not segment.start < segment.end:
                raise InvalidSpecError(f'arrival_rates[{i}]', 'start must precede end')
            if segment.start < 0:
                raise InvalidSpecError(f'arrival_rates[{i}].start', 'must be >= 0')

        for size in self.group_sizes:
            if not 1 <= size <= MAX_GROUP_SIZE:
                raise InvalidSpecError('group_sizes', f'size {size} outside 1..{MAX_GROUP_SIZE}')
        _check_distribution('group_sizes', self.group_sizes)

        for kind, params in self.dwell.items():
            if params.median < 0 or params.sigma < 0:
                raise InvalidSpecError(f'dwell.{kind}', 'median and sigma must be >= 0')


def _check_distribution(name: str, probabilities: Dict) -> None:
    if not probabilities:
        raise InvalidSpecError(name, 'empty distribution')
    if any(p < 0 for p in probabilities.values()):
        raise InvalidSpecError(name, 'negative probability')
    total = sum(probabilities.values())
    if abs(total - 1.0) > PROBABILITY_TOLERANCE:
        raise InvalidSpecError(name, f'probabilities sum to {total}, expected 1')


def scenario_from_dict(data: dict) -> ScenarioSpec:
    allowed = {'name', 'description', 'demographics', 'arrival_rates', 'group_sizes', 'dwell', 'horizon', 'seed'}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise InvalidSpecError(unknown[0], 'unknown key')
    try:
        spec = ScenarioSpec(
            name=str(data['name']),
            demographics={k: {str(c): float(p) for c, p in v.items()} for k, v in data['demographics'].items()},
            arrival_rates=tuple(
                RateSegment(float(s['start']), float(s['end']), float(s['rate'])) for s in data['arrival_rates']
            ),
            group_sizes={int(k): float(v) for k, v in data.get('group_sizes', {'1': 1.0}).items()},
            dwell={k: DwellParams(float(v.get('median', 0.0)), float(v.get('sigma', 0.0)))
                   for k, v in data.get('dwell', {}).items()},
            horizon=float(data.get('horizon', Config.SIM_HORIZON_S)),
            seed=int(data.get('seed', Config.ROOT_SEED)),
        )
    except KeyError as e:
        raise InvalidSpecError(str(e.args[0]), 'missing field') from e
    except (TypeError, ValueError, AttributeError) as e:
        raise InvalidSpecError('document', str(e)) from e
    spec.validate()
    return spec


def load_scenario(source: Union[str, Path]) -> ScenarioSpec:
    """Load a scenario from a JSON file path or JSON text"""
    if isinstance(source, Path) or not str(source).lstrip().startswith('{'):
        source = Path(source).read_text(encoding='utf-8')
    try:
        data = json.loads(source)
    except json.JSONDecodeError as e:
        raise InvalidSpecError('document', f'line {e.lineno}, column {e.colno}: {e.msg}') from e
    return scenario_from_dict(data)


def desired_speed(age_class: str, physical_condition: str) -> float:
    """Free-flow speed in m/s: base speed by age class times condition modifier"""
    return BASE_SPEED[age_class] * CONDITION_MODIFIER[physical_condition]


def sample_arrival_times(spec: ScenarioSpec) -> np.ndarray:
    # Thinning against a constant envelope at the peak rate
    rng = substream(spec.seed, 'arrivals')
    lambda_max = max((s.rate for s in spec.arrival_rates), default=0.0)
    if lambda_max <= 0:
        return np.empty(0)
    n_candidates = rng.poisson(lambda_max * spec.horizon)
    candidates = np.sort(rng.uniform(0.0, spec.horizon, size=n_candidates))
    keep = rng.uniform(0.0, lambda_max, size=n_candidates) < spec.rate_at(candidates)
    return candidates[keep]


def _draw_category(spec: ScenarioSpec, attribute: str, n: int) -> List[str]:
    distribution = spec.demographics[attribute]
    labels = list(distribution)
    rng = substream(spec.seed, f'demographics.{attribute}')
    idx = rng.choice(len(labels), size=n, p=np.array([distribution[k] for k in labels]))
    return [labels[i] for i in idx]


def _draw_group_sizes(spec: ScenarioSpec, n: int) -> List[int]:
    rng = substream(spec.seed, 'groups')
    sizes = sorted(spec.group_sizes)
    probs = np.array([spec.group_sizes[s] for s in sizes])
    result = []
    remaining = n
    while remaining > 0:
        size = min(int(sizes[rng.choice(len(sizes), p=probs)]), remaining)
        result.append(size)
        remaining -= size
    return result


def _draw_dwell(spec: ScenarioSpec, plan: Optional[FloorPlan], n_units: int) -> List[Dict[str, float]]:
    if plan is None:
        return [{} for _ in range(n_units)]
    rng = substream(spec.seed, 'dwell')
    normals = rng.standard_normal(size=(n_units, len(plan.zones)))
    dwell_maps = []
    for row in normals:
        dwell = {}
        for j, zone in enumerate(plan.zones):
            params = spec.dwell.get(zone.kind, DwellParams())
            dwell[zone.id] = float(params.median * np.exp(params.sigma * row[j])) if params.median > 0 else 0.0
        dwell_maps.append(dwell)
    return dwell_maps


def sample_population(spec: ScenarioSpec, plan: Optional[FloorPlan] = None) -> Tuple[List[AgentProfile], List[Group]]:
    """
    Draw visitors and their social groups

    Arrival times follow a non-homogeneous Poisson process (thinning); consecutive
    arrivals are partitioned into groups that adopt the first member's arrival time,
    itinerary and dwell plan. The result depends only on the spec (seed included)
    and, for dwell times, the plan's zones.
    """
    spec.validate()
    arrivals = sample_arrival_times(spec)
    n = len(arrivals)
    if n == 0:
        logger.info(f"Scenario {spec.name}: empty population")
        return [], []

    ages = _draw_category(spec, 'age_class', n)
    genders = _draw_category(spec, 'gender', n)
    origins = _draw_category(spec, 'origin', n)
    conditions = _draw_category(spec, 'physical_condition', n)
    unit_sizes = _draw_group_sizes(spec, n)
    dwell_maps = _draw_dwell(spec, plan, len(unit_sizes))

    agents: List[AgentProfile] = []
    groups: List[Group] = []
    i = 0
    for unit, size in enumerate(unit_sizes):
        group_id = f"g{len(groups):05d}" if size > 1 else None
        member_ids = []
        arrival = float(arrivals[i])
        for _ in range(size):
            agent_id = f"a{i:06d}"
            agents.append(AgentProfile(
                id=agent_id,
                age_class=ages[i],
                gender=genders[i],
                origin=origins[i],
                physical_condition=conditions[i],
                desired_speed=desired_speed(ages[i], conditions[i]),
                arrival_time=arrival,
                group_id=group_id,
                zone_dwell=dict(dwell_maps[unit]),
            ))
            member_ids.append(agent_id)
            i += 1
        if group_id is not None:
            groups.append(Group(id=group_id, member_ids=tuple(member_ids)))

    logger.info(f"Scenario {spec.name}: sampled {len(agents)} agents in {len(groups)} groups")
    return agents, groups
