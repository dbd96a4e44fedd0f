"""
Test script for the floor-plan model
Parsing, structural validation, serialization and tour routing
"""

import copy
import json
import sys
from collections import deque

from modules.errors import FloorPlanParseError, FloorPlanValidationError, NoPathError
from modules.space import load_floor_plan, serialize_floor_plan, tour_route

PLAN_PATH = "data/uffizi_like.plan"

LINEAR = {
    "zones": [
        {"id": "hall", "kind": "entrance", "length": 10, "area": 50, "visit_order": 0},
        {"id": "gallery", "kind": "room", "length": 20, "area": 80, "visit_order": 1},
        {"id": "out", "kind": "exit", "length": 5, "area": 30, "visit_order": 2},
    ],
    "portals": [
        {"id": "p1", "from_zone": "hall", "to_zone": "gallery", "width": 2, "service_rate": 1.0},
        {"id": "p2", "from_zone": "gallery", "to_zone": "out", "width": 2, "service_rate": 1.0},
    ],
    "entrances": ["hall"],
    "exits": ["out"],
}


def _doc(**changes) -> str:
    data = copy.deepcopy(LINEAR)
    data.update(changes)
    return json.dumps(data)


def _invariant_of(document: str) -> str:
    try:
        load_floor_plan(document)
    except FloorPlanValidationError as e:
        return e.invariant
    raise AssertionError("plan unexpectedly valid")


def _bfs_path(plan, src, dst):
    """Independent shortest path for cross-checking the router"""
    graph = {z: [] for z in plan.zone_ids}
    for p in sorted(plan.portals, key=lambda p: p.id):
        graph[p.from_zone].append(p.to_zone)
    previous = {src: None}
    queue = deque([src])
    while queue:
        node = queue.popleft()
        for nxt in graph[node]:
            if nxt not in previous:
                previous[nxt] = node
                queue.append(nxt)
    path, node = [], dst
    while node is not None:
        path.append(node)
        node = previous[node]
    return path[::-1]


def test_shipped_plan_loads():
    plan = load_floor_plan(PLAN_PATH)
    assert len(plan.zones) == 11
    assert len(plan.portals) == 12
    assert plan.entrances == ("forecourt",)
    assert [p.id for p in plan.exit_portals()] == ["p_exit_a", "p_exit_b", "p_exit_c"]


def test_tour_visits_every_ordered_zone():
    plan = load_floor_plan(PLAN_PATH)
    route = tour_route(plan, "forecourt", "exit_hall")
    ordered = [z.id for z in sorted(plan.zones, key=lambda z: z.visit_order)]
    assert route == ordered


def test_tour_legs_match_bfs():
    plan = load_floor_plan(PLAN_PATH)
    route = tour_route(plan, "forecourt", "exit_hall")
    for a, b in zip(route, route[1:]):
        assert _bfs_path(plan, a, b) == [a, b]


def test_tour_without_visit_orders_is_shortest_path():
    data = copy.deepcopy(LINEAR)
    for zone in data["zones"]:
        zone.pop("visit_order")
    plan = load_floor_plan(json.dumps(data))
    assert tour_route(plan, "hall", "out") == _bfs_path(plan, "hall", "out")


def test_unrealizable_tour_order():
    data = {
        "zones": [
            {"id": "e", "kind": "entrance", "length": 5, "area": 20, "visit_order": 0},
            {"id": "d", "kind": "room", "length": 5, "area": 20, "visit_order": 1},
            {"id": "b", "kind": "room", "length": 5, "area": 20, "visit_order": 2},
            {"id": "x", "kind": "exit", "length": 5, "area": 20, "visit_order": 3},
        ],
        "portals": [
            {"id": "e_b", "from_zone": "e", "to_zone": "b", "width": 1, "service_rate": 1},
            {"id": "e_d", "from_zone": "e", "to_zone": "d", "width": 1, "service_rate": 1},
            {"id": "b_x", "from_zone": "b", "to_zone": "x", "width": 1, "service_rate": 1},
            {"id": "d_x", "from_zone": "d", "to_zone": "x", "width": 1, "service_rate": 1},
        ],
        "entrances": ["e"],
        "exits": ["x"],
    }
    plan = load_floor_plan(json.dumps(data))
    try:
        tour_route(plan, "e", "x")
    except NoPathError as e:
        assert "d" in str(e) and "b" in str(e)
    else:
        raise AssertionError("expected NoPathError")


def test_tour_rejects_non_entrance():
    plan = load_floor_plan(_doc())
    try:
        tour_route(plan, "gallery", "out")
    except NoPathError:
        return
    raise AssertionError("expected NoPathError")


def test_parse_error_has_position():
    try:
        load_floor_plan('{"zones": [\n  {"id": "a",,}\n]}')
    except FloorPlanParseError as e:
        assert e.line == 2
        assert e.column > 0
    else:
        raise AssertionError("expected FloorPlanParseError")


def test_unknown_keys_rejected():
    data = copy.deepcopy(LINEAR)
    data["zones"][0]["colour"] = "red"
    assert _invariant_of(json.dumps(data)) == "unknown keys rejected"
    assert _invariant_of(_doc(levels=2)) == "unknown keys rejected"


def test_malformed_fields_rejected():
    for zone_field in ("length", "area"):
        data = copy.deepcopy(LINEAR)
        data["zones"][1][zone_field] = "long"
        assert _invariant_of(json.dumps(data)) == "document schema"
    for portal_field in ("width", "service_rate"):
        data = copy.deepcopy(LINEAR)
        data["portals"][0][portal_field] = [1]
        assert _invariant_of(json.dumps(data)) == "document schema"
    assert _invariant_of(_doc(zones={"hall": {}})) == "document schema"
    assert _invariant_of(_doc(exits="out")) == "document schema"


def test_non_object_text_is_parsed_not_opened():
    assert _invariant_of("[1, 2]") == "document schema"
    try:
        load_floor_plan("not a plan")
    except FloorPlanParseError as e:
        assert (e.line, e.column) == (1, 1)
    else:
        raise AssertionError("expected FloorPlanParseError")


def test_portal_id_may_match_zone_id():
    data = copy.deepcopy(LINEAR)
    data["portals"][0]["id"] = "gallery"
    plan = load_floor_plan(json.dumps(data))
    assert [p.id for p in plan.portals_between("hall", "gallery")] == ["gallery"]


def test_structural_invariants():
    data = copy.deepcopy(LINEAR)
    data["zones"][1]["id"] = "hall"
    assert _invariant_of(json.dumps(data)) == "unique zone ids"

    data = copy.deepcopy(LINEAR)
    data["portals"][0]["to_zone"] = "nowhere"
    assert _invariant_of(json.dumps(data)) == "portal endpoints exist"

    data = copy.deepcopy(LINEAR)
    data["portals"][0]["to_zone"] = "hall"
    assert _invariant_of(json.dumps(data)) == "from_zone != to_zone"

    data = copy.deepcopy(LINEAR)
    data["portals"][1]["width"] = 0
    assert _invariant_of(json.dumps(data)) == "portal width > 0"

    data = copy.deepcopy(LINEAR)
    data["zones"][1]["area"] = -1
    assert _invariant_of(json.dumps(data)) == "zone area > 0"

    assert _invariant_of(_doc(exits=[])) == "at least one exit"
    assert _invariant_of(_doc(entrances=["gallery"])) == "entrance kind"


def test_exit_unreachable():
    data = copy.deepcopy(LINEAR)
    data["portals"] = data["portals"][:1]
    assert _invariant_of(json.dumps(data)) == "entrance connects to exit"


def test_unreachable_zone():
    data = copy.deepcopy(LINEAR)
    data["zones"].append({"id": "attic", "kind": "room", "length": 3, "area": 9})
    data["portals"].append({"id": "p3", "from_zone": "attic", "to_zone": "out", "width": 1, "service_rate": 1})
    assert _invariant_of(json.dumps(data)) == "unreachable zone"


def test_serialize_round_trip():
    plan = load_floor_plan(PLAN_PATH)
    again = load_floor_plan(serialize_floor_plan(plan))
    assert again == plan
    assert serialize_floor_plan(again) == serialize_floor_plan(plan)


def test_parallel_portals_reported():
    plan = load_floor_plan(PLAN_PATH)
    assert [p.id for p in plan.portals_between("stair_hall", "exit_hall")] == ["p_exit_a", "p_exit_b", "p_exit_c"]


def main():
    """Run all floor-plan tests"""
    print("🗺️ Floor Plan Tests")
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
