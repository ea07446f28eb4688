"""Task scenario model and its on-disk format.

One scenario per JSON file: instruction, DNF goal conditions, initial scene
graph, the asset pool it draws from, and the seed that reproduces it. Field
names follow the generation reply schema (obj1/obj1_uid/position/...); the
engine's relation vocabulary is canonical on disk, with "top" and "behind"
accepted as input spellings.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path

from .catalog import AssetRecord
from .errors import (
    ScenarioParseError,
    ScenarioSchemaError,
    ScenarioSemanticError,
)
from .scenegraph import (
    GoalAtom,
    GoalConditionSet,
    RelationLabel,
    SceneGraph,
    SceneGraphEdge,
    SceneGraphNode,
    parse_relation,
    validate_scene_graph,
)

MAX_SEED = 2**64 - 1


class TaskType(str, enum.Enum):
    SPATIAL = "spatial"
    APPEARANCE = "appearance"
    COMMON_SENSE = "common_sense"
    LONG_HORIZON = "long_horizon"


@dataclass(frozen=True)
class TaskScenario:
    id: str
    task_type: TaskType
    instruction: str
    scene_graph: SceneGraph
    goals: GoalConditionSet
    asset_pool: tuple[AssetRecord, ...]
    seed: int

    def pool_map(self) -> dict[str, AssetRecord]:
        return {a.uid: a for a in self.asset_pool}

    def placed_uids(self) -> tuple[str, ...]:
        return self.scene_graph.node_uids()


def validate_scenario(scenario: TaskScenario) -> None:
    """Raise ScenarioSemanticError on any invariant violation."""
    if not (0 <= scenario.seed <= MAX_SEED):
        raise ScenarioSemanticError("seed must fit in 64 unsigned bits", "seed")
    report = validate_scene_graph(scenario.scene_graph, list(scenario.asset_pool))
    if not report.ok:
        first = report.violations[0]
        raise ScenarioSemanticError(first.message, first.path)
    node_uids = set(scenario.scene_graph.node_uids())
    for d, disjunct in enumerate(scenario.goals.disjuncts):
        for a, atom in enumerate(disjunct):
            path = f"goal_conditions[{d}][{a}]"
            for uid in (atom.obj1_uid, *atom.anchor_uids()):
                if uid not in node_uids:
                    raise ScenarioSemanticError(f"dangling uid {uid}", path)
            if atom.obj1_state is not None:
                asset = scenario.pool_map()[atom.obj1_uid]
                if atom.obj1_state not in asset.states:
                    raise ScenarioSemanticError(
                        f"unknown state {atom.obj1_state!r} for {atom.obj1_uid}", path
                    )
    if scenario.goals.satisfied_by_graph(scenario.scene_graph):
        raise ScenarioSemanticError(
            "goal satisfied initially: the goal conditions restate the initial "
            "scene graph (circular transformation)",
            "goal_conditions",
        )


# ---------------------------------------------------------------------------
# Dict <-> domain conversion
# ---------------------------------------------------------------------------

_NONE = "none"


def _req(data: dict, key: str, kind: type, path: str):
    if key not in data:
        raise ScenarioSchemaError(f"missing field {key!r}", path)
    value = data[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise ScenarioSchemaError(
            f"field {key!r} must be {kind.__name__}, got {type(value).__name__}",
            path,
        )
    return value


def _opt_str(data: dict, key: str, path: str) -> str | None:
    value = data.get(key, _NONE)
    if value is None:
        return None
    if not isinstance(value, str):
        raise ScenarioSchemaError(f"field {key!r} must be a string or 'none'", path)
    return None if value.strip().lower() == _NONE else value


def _parse_goal_atom(data: dict, path: str) -> GoalAtom:
    if not isinstance(data, dict):
        raise ScenarioSchemaError("goal atom must be an object", path)
    obj1_uid = _req(data, "obj1_uid", str, path)
    obj1_state = _opt_str(data, "obj1_state", path)
    position = _opt_str(data, "position", path)
    relation = None
    if position is not None:
        try:
            relation = parse_relation(position)
        except ScenarioSemanticError as exc:
            raise ScenarioSemanticError(exc.reason, path) from None

    raw_obj2 = data.get("obj2_uid", _NONE)
    obj2_uid: str | tuple[str, str] | None
    if isinstance(raw_obj2, list):
        if len(raw_obj2) != 2 or not all(isinstance(u, str) for u in raw_obj2):
            raise ScenarioSchemaError("obj2_uid list must hold exactly two uids", path)
        obj2_uid = (raw_obj2[0], raw_obj2[1])
    elif raw_obj2 is None or (isinstance(raw_obj2, str) and raw_obj2.strip().lower() == _NONE):
        obj2_uid = None
    elif isinstance(raw_obj2, str):
        obj2_uid = raw_obj2
    else:
        raise ScenarioSchemaError("obj2_uid must be a string, a two-uid list, or 'none'", path)

    try:
        return GoalAtom(obj1_uid=obj1_uid, obj1_state=obj1_state, obj2_uid=obj2_uid, relation=relation)
    except ScenarioSemanticError as exc:
        raise ScenarioSemanticError(exc.reason, path) from None


def _parse_edge(data: dict, path: str) -> SceneGraphEdge:
    if not isinstance(data, dict):
        raise ScenarioSchemaError("edge must be an object", path)
    obj1_uid = _req(data, "obj1_uid", str, path)
    obj2_uid = _req(data, "obj2_uid", str, path)
    position = _req(data, "position", str, path)
    try:
        relation = parse_relation(position)
        edge = SceneGraphEdge(obj1_uid, relation, obj2_uid)
    except ScenarioSemanticError as exc:
        raise ScenarioSemanticError(exc.reason, path) from None
    # beneath/out_of are inverse spellings of a support edge; store the
    # canonical direction so topology only ever deals with on/in.
    if edge.relation in (RelationLabel.BENEATH, RelationLabel.OUT_OF):
        edge = edge.flipped()
    return edge


def parse_scenario_dict(data: dict, path: str = "") -> TaskScenario:
    """Build and fully validate a scenario from parsed JSON."""
    if not isinstance(data, dict):
        raise ScenarioSchemaError("scenario must be a JSON object", path)
    scenario_id = _req(data, "id", str, "id")
    raw_type = _req(data, "task_type", str, "task_type")
    try:
        task_type = TaskType(raw_type)
    except ValueError:
        raise ScenarioSchemaError(f"unknown task_type {raw_type!r}", "task_type") from None
    seed = _req(data, "seed", int, "seed")
    instruction = _req(data, "instruction", str, "instruction")

    graph_data = _req(data, "scene_graph", dict, "scene_graph")
    description = _req(graph_data, "description", str, "scene_graph.description")
    raw_nodes = _req(graph_data, "nodes", list, "scene_graph.nodes")
    raw_edges = _req(graph_data, "edges", list, "scene_graph.edges")

    nodes = []
    for i, nd in enumerate(raw_nodes):
        npath = f"scene_graph.nodes[{i}]"
        if not isinstance(nd, dict):
            raise ScenarioSchemaError("node must be an object", npath)
        nodes.append(SceneGraphNode(_req(nd, "obj_uid", str, npath), _opt_str(nd, "state", npath)))
    edges = [_parse_edge(ed, f"scene_graph.edges[{i}]") for i, ed in enumerate(raw_edges)]
    graph = SceneGraph(description=description, nodes=tuple(nodes), edges=tuple(edges))

    raw_goals = _req(data, "goal_conditions", list, "goal_conditions")
    disjuncts = []
    for d, raw_disjunct in enumerate(raw_goals):
        if not isinstance(raw_disjunct, list) or not raw_disjunct:
            raise ScenarioSchemaError(
                "each disjunct must be a non-empty list of atoms", f"goal_conditions[{d}]"
            )
        disjuncts.append(
            tuple(
                _parse_goal_atom(atom, f"goal_conditions[{d}][{a}]")
                for a, atom in enumerate(raw_disjunct)
            )
        )
    try:
        goals = GoalConditionSet(tuple(disjuncts))
    except ScenarioSemanticError as exc:
        raise ScenarioSemanticError(exc.reason, "goal_conditions") from None

    raw_pool = _req(data, "asset_pool", list, "asset_pool")
    pool = []
    for i, entry in enumerate(raw_pool):
        try:
            pool.append(AssetRecord.from_dict(entry))
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioSchemaError(f"bad asset record: {exc}", f"asset_pool[{i}]") from None

    scenario = TaskScenario(
        id=scenario_id,
        task_type=task_type,
        instruction=instruction,
        scene_graph=graph,
        goals=goals,
        asset_pool=tuple(pool),
        seed=seed,
    )
    validate_scenario(scenario)
    return scenario


def scenario_to_dict(scenario: TaskScenario) -> dict:
    names = {a.uid: a.name for a in scenario.asset_pool}

    def atom_dict(atom: GoalAtom) -> dict:
        anchors = atom.anchor_uids()
        if atom.relation is RelationLabel.BETWEEN:
            obj2_name: object = [names.get(u, u) for u in anchors]
            obj2_uid: object = list(anchors)
        elif anchors:
            obj2_name = names.get(anchors[0], anchors[0])
            obj2_uid = anchors[0]
        else:
            obj2_name = _NONE
            obj2_uid = _NONE
        return {
            "obj1": names.get(atom.obj1_uid, atom.obj1_uid),
            "obj1_uid": atom.obj1_uid,
            "obj1_state": atom.obj1_state if atom.obj1_state is not None else _NONE,
            "obj2": obj2_name,
            "obj2_uid": obj2_uid,
            "position": atom.relation.value if atom.relation is not None else _NONE,
        }

    return {
        "id": scenario.id,
        "task_type": scenario.task_type.value,
        "seed": scenario.seed,
        "instruction": scenario.instruction,
        "goal_conditions": [
            [atom_dict(a) for a in disjunct] for disjunct in scenario.goals.disjuncts
        ],
        "scene_graph": {
            "description": scenario.scene_graph.description,
            "edges": [
                {
                    "obj1": names.get(e.object_uid, e.object_uid),
                    "obj1_uid": e.object_uid,
                    "position": e.relation.value,
                    "obj2": names.get(e.anchor_uid, e.anchor_uid),
                    "obj2_uid": e.anchor_uid,
                }
                for e in scenario.scene_graph.edges
            ],
            "nodes": [
                {"obj_uid": n.object_uid, "state": n.state if n.state is not None else _NONE}
                for n in scenario.scene_graph.nodes
            ],
        },
        "asset_pool": [a.to_dict() for a in scenario.asset_pool],
    }


def load_scenario(path: str | Path) -> TaskScenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioParseError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"{path}: malformed JSON: {exc}") from exc
    return parse_scenario_dict(data)


def save_scenario(scenario: TaskScenario, path: str | Path) -> None:
    path = Path(path)
    path.write_text(
        json.dumps(scenario_to_dict(scenario), indent=2) + "\n", encoding="utf-8"
    )
