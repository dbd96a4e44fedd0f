"""
Agent-IoT data composition
Turns crowd crossings into per-device sensing opportunities
"""

import json
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional

from config import Config
from modules.engine import Trace
from modules.errors import ModelValidationError, UnknownPortalError
from modules.space import FloorPlan

logger = logging.getLogger(__name__)

DEVICE_TYPES = ('camera', 'rfid', 'counter', 'qr')


@dataclass(frozen=True)
class DevicePlacement:
    device_id: str
    device_type: str
    site: str  # portal id
    coverage_length: Optional[float] = None

    def coverage(self) -> float:
        if self.coverage_length is not None:
            return self.coverage_length
        return Config.get_coverage_defaults()[self.device_type]

    def validate(self) -> None:
        if self.device_type not in DEVICE_TYPES:
            raise ModelValidationError('DevicePlacement', 'device_type',
                                       f'{self.device_id} has unknown type {self.device_type!r}')
        if not self.coverage() > 0:
            raise ModelValidationError('DevicePlacement', 'coverage_length',
                                       f'{self.device_id} coverage must be > 0')


@dataclass(frozen=True)
class SensingOpportunity:
    device_id: str
    agent_id: str
    start: float
    dwell: float
    event_index: int  # position of the generating crossing in the trace


def opportunity_dwell(placement: DevicePlacement, speed: float) -> float:
    dwell = placement.coverage() / speed
    if placement.device_type == 'qr':
        # A QR scan makes the visitor stop
        dwell = max(dwell, Config.QR_MIN_DWELL_S)
    return dwell


def compose(trace: Trace, placements: Iterable[DevicePlacement],
            plan: Optional[FloorPlan] = None) -> Dict[str, List[SensingOpportunity]]:
    """
    One opportunity per (crossing, device on the crossed portal)

    Devices on portals nobody crossed get empty streams. The result does not
    depend on the order of placements.
    """
    placements = list(placements)
    known = set(plan.portal_ids) if plan is not None else set(trace.portal_ids)
    by_portal: Dict[str, List[DevicePlacement]] = {}
    for placement in placements:
        placement.validate()
        if placement.site not in known:
            raise UnknownPortalError(placement.device_id, placement.site)
        by_portal.setdefault(placement.site, []).append(placement)

    streams: Dict[str, List[SensingOpportunity]] = {p.device_id: [] for p in placements}
    for index, event in enumerate(trace.crossings):
        for placement in by_portal.get(event.portal_id, ()):
            streams[placement.device_id].append(SensingOpportunity(
                device_id=placement.device_id,
                agent_id=event.agent_id,
                start=event.time,
                dwell=opportunity_dwell(placement, event.speed_at_crossing),
                event_index=index,
            ))

    logger.debug(f"Composed {sum(len(s) for s in streams.values())} opportunities for {len(streams)} devices")
    return streams


def streams_to_json(streams: Dict[str, List[SensingOpportunity]]) -> str:
    """Debug export of composed streams"""
    return json.dumps({
        device: [{'agent_id': o.agent_id, 'start': o.start, 'dwell': o.dwell, 'event_index': o.event_index}
                 for o in stream]
        for device, stream in sorted(streams.items())
    }, indent=2)
