"""
Physical space for the crowd simulator
Zone graph (entrance, corridors, rooms, exits) joined by portals, with tour routing
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import networkx as nx

from modules.errors import FloorPlanParseError, FloorPlanValidationError, NoPathError

logger = logging.getLogger(__name__)

ZONE_KINDS = ('entrance', 'corridor', 'room', 'exit')

_ZONE_KEYS = {'id', 'kind', 'length', 'area', 'visit_order'}
_PORTAL_KEYS = {'id', 'from_zone', 'to_zone', 'width', 'service_rate'}
_PLAN_KEYS = {'zones', 'portals', 'entrances', 'exits'}


@dataclass(frozen=True)
class Zone:
    id: str
    kind: str
    length: float
    area: float
    visit_order: Optional[int] = None


@dataclass(frozen=True)
class Portal:
    id: str
    from_zone: str
    to_zone: str
    width: float
    service_rate: float


@dataclass(frozen=True)
class FloorPlan:
    """Immutable zone graph; safe to share between concurrent runs"""

    zones: Tuple[Zone, ...]
    portals: Tuple[Portal, ...]
    entrances: Tuple[str, ...]
    exits: Tuple[str, ...]
    _zone_index: Dict[str, Zone] = field(default_factory=dict, repr=False, compare=False)
    _portal_index: Dict[str, Portal] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self._zone_index.update({z.id: z for z in self.zones})
        self._portal_index.update({p.id: p for p in self.portals})

    def zone(self, zone_id: str) -> Zone:
        return self._zone_index[zone_id]

    def portal(self, portal_id: str) -> Portal:
        return self._portal_index[portal_id]

    def has_zone(self, zone_id: str) -> bool:
        return zone_id in self._zone_index

    def has_portal(self, portal_id: str) -> bool:
        return portal_id in self._portal_index

    @property
    def zone_ids(self) -> List[str]:
        return [z.id for z in self.zones]

    @property
    def portal_ids(self) -> List[str]:
        return [p.id for p in self.portals]

    def portals_between(self, from_zone: str, to_zone: str) -> List[Portal]:
        return [p for p in self.portals if p.from_zone == from_zone and p.to_zone == to_zone]

    def entrance_portals(self) -> List[Portal]:
        return [p for p in self.portals if p.from_zone in self.entrances]

    def exit_portals(self) -> List[Portal]:
        return [p for p in self.portals if p.to_zone in self.exits]

    def to_networkx(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        for zone in sorted(self.zones, key=lambda z: z.id):
            graph.add_node(zone.id, kind=zone.kind)
        for portal in sorted(self.portals, key=lambda p: p.id):
            graph.add_edge(portal.from_zone, portal.to_zone)
        return graph

    def validate(self) -> None:
        """Raise FloorPlanValidationError naming the first violated invariant"""
        seen = set()
        for zone in self.zones:
            if zone.id in seen:
                raise FloorPlanValidationError("unique zone ids", f"zone {zone.id} declared twice")
            seen.add(zone.id)
            if zone.kind not in ZONE_KINDS:
                raise FloorPlanValidationError("zone kind", f"zone {zone.id} has kind {zone.kind!r}")
            if not zone.length > 0:
                raise FloorPlanValidationError("zone length > 0", f"zone {zone.id} length {zone.length}")
            if not zone.area > 0:
                raise FloorPlanValidationError("zone area > 0", f"zone {zone.id} area {zone.area}")
            if zone.visit_order is not None and zone.visit_order < 0:
                raise FloorPlanValidationError("visit_order >= 0", f"zone {zone.id}")

        portal_ids = set()
        for portal in self.portals:
            if portal.id in portal_ids:
                raise FloorPlanValidationError("unique portal ids", f"portal {portal.id} declared twice")
            portal_ids.add(portal.id)
            for end in (portal.from_zone, portal.to_zone):
                if end not in seen:
                    raise FloorPlanValidationError("portal endpoints exist",
                                                   f"portal {portal.id} references unknown zone {end}")
            if portal.from_zone == portal.to_zone:
                raise FloorPlanValidationError("from_zone != to_zone", f"portal {portal.id}")
            if not portal.width > 0:
                raise FloorPlanValidationError("portal width > 0", f"portal {portal.id}")
            if not portal.service_rate > 0:
                raise FloorPlanValidationError("service_rate > 0", f"portal {portal.id}")

        if not self.entrances:
            raise FloorPlanValidationError("at least one entrance", "no entrances declared")
        if not self.exits:
            raise FloorPlanValidationError("at least one exit", "no exits declared")
        for zone_id in self.entrances:
            if zone_id not in seen or self.zone(zone_id).kind != 'entrance':
                raise FloorPlanValidationError("entrance kind", f"{zone_id} is not an entrance zone")
        for zone_id in self.exits:
            if zone_id not in seen or self.zone(zone_id).kind != 'exit':
                raise FloorPlanValidationError("exit kind", f"{zone_id} is not an exit zone")

        graph = self.to_networkx()
        reachable = set()
        for entrance in self.entrances:
            reachable |= nx.descendants(graph, entrance) | {entrance}
            for exit_id in self.exits:
                if not nx.has_path(graph, entrance, exit_id):
                    raise FloorPlanValidationError("entrance connects to exit",
                                                   f"no portal path from {entrance} to {exit_id}")
        unreachable = sorted(seen - reachable)
        if unreachable:
            raise FloorPlanValidationError("unreachable zone", ", ".join(unreachable))


def _check_keys(obj, allowed, required, where: str):
    if not isinstance(obj, dict):
        raise FloorPlanValidationError("document schema", f"{where} must be an object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise FloorPlanValidationError("unknown keys rejected", f"{where}: {', '.join(unknown)}")
    missing = sorted(required - set(obj))
    if missing:
        raise FloorPlanValidationError("document schema", f"{where} missing {', '.join(missing)}")


def _number(raw: dict, key: str, where: str, cast=float):
    try:
        return cast(raw[key])
    except (TypeError, ValueError) as e:
        raise FloorPlanValidationError("document schema", f"{where}.{key} must be a number, got {raw[key]!r}") from e


def _list(data: dict, key: str) -> list:
    if not isinstance(data[key], list):
        raise FloorPlanValidationError("document schema", f"{key} must be a list")
    return data[key]


def _plan_from_dict(data: dict) -> FloorPlan:
    _check_keys(data, _PLAN_KEYS, _PLAN_KEYS, "floor plan")
    zones = []
    for i, raw in enumerate(_list(data, 'zones')):
        where = f"zones[{i}]"
        _check_keys(raw, _ZONE_KEYS, {'id', 'kind', 'length', 'area'}, where)
        zones.append(Zone(
            id=str(raw['id']),
            kind=raw['kind'],
            length=_number(raw, 'length', where),
            area=_number(raw, 'area', where),
            visit_order=None if raw.get('visit_order') is None else _number(raw, 'visit_order', where, int),
        ))
    portals = []
    for i, raw in enumerate(_list(data, 'portals')):
        where = f"portals[{i}]"
        _check_keys(raw, _PORTAL_KEYS, _PORTAL_KEYS, where)
        portals.append(Portal(
            id=str(raw['id']),
            from_zone=str(raw['from_zone']),
            to_zone=str(raw['to_zone']),
            width=_number(raw, 'width', where),
            service_rate=_number(raw, 'service_rate', where),
        ))
    return FloorPlan(
        zones=tuple(zones),
        portals=tuple(portals),
        entrances=tuple(str(z) for z in _list(data, 'entrances')),
        exits=tuple(str(z) for z in _list(data, 'exits')),
    )


def _is_file(text: str) -> bool:
    if '\n' in text or text.lstrip().startswith(('{', '[')):
        return False
    try:
        return Path(text).is_file()
    except OSError:
        return False


def load_floor_plan(document: Union[str, Path]) -> FloorPlan:
    """
    Parse and validate a floor-plan document

    Args:
        document: JSON text, or a path to a file holding it

    Returns:
        A FloorPlan satisfying every structural invariant
    """
    if isinstance(document, Path) or _is_file(document):
        document = Path(document).read_text(encoding='utf-8')
    try:
        data = json.loads(document)
    except json.JSONDecodeError as e:
        raise FloorPlanParseError(e.msg, e.lineno, e.colno) from e

    plan = _plan_from_dict(data)
    plan.validate()
    logger.info(f"Loaded floor plan: {len(plan.zones)} zones, {len(plan.portals)} portals")
    return plan


def serialize_floor_plan(plan: FloorPlan) -> str:
    """Inverse of load_floor_plan"""
    zones = []
    for zone in plan.zones:
        entry = {'id': zone.id, 'kind': zone.kind, 'length': zone.length, 'area': zone.area}
        if zone.visit_order is not None:
            entry['visit_order'] = zone.visit_order
        zones.append(entry)
    data = {
        'zones': zones,
        'portals': [
            {'id': p.id, 'from_zone': p.from_zone, 'to_zone': p.to_zone,
             'width': p.width, 'service_rate': p.service_rate}
            for p in plan.portals
        ],
        'entrances': list(plan.entrances),
        'exits': list(plan.exits),
    }
    return json.dumps(data, indent=2)


def tour_route(plan: FloorPlan, entrance: str, exit: str) -> List[str]:
    """
    Canonical museum tour from entrance to exit

    Visits every zone carrying a visit_order in ascending order, joining
    consecutive waypoints with shortest portal paths.
    """
    if not plan.has_zone(entrance) or plan.zone(entrance).kind != 'entrance':
        raise NoPathError(f"{entrance} is not an entrance zone", field='entrance')
    if not plan.has_zone(exit) or plan.zone(exit).kind != 'exit':
        raise NoPathError(f"{exit} is not an exit zone", field='exit')

    ordered = sorted(
        (z for z in plan.zones if z.visit_order is not None and z.id not in (entrance, exit)),
        key=lambda z: (z.visit_order, z.id),
    )
    waypoints = [entrance] + [z.id for z in ordered] + [exit]

    graph = plan.to_networkx()
    route = [entrance]
    for src, dst in zip(waypoints, waypoints[1:]):
        try:
            leg = nx.shortest_path(graph, src, dst)
        except nx.NetworkXNoPath as e:
            raise NoPathError(f"tour order not realizable: no portal path from {src} to {dst}") from e
        route.extend(leg[1:])
    return route
