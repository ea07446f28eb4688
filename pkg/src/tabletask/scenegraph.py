"""Scene graph domain types: relation labels, nodes, edges, goal conditions.

The scene graph is both the generation target and the evaluation ground
truth: layouts are constructed from it and final scenes are converted back
into the same relation vocabulary for goal checking.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .catalog import AssetRecord
from .errors import ScenarioSemanticError


class RelationLabel(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"
    FRONT = "front"
    BACK = "back"
    NEAR = "near"
    ON = "on"
    BENEATH = "beneath"
    IN = "in"
    OUT_OF = "out_of"
    BETWEEN = "between"

    @property
    def inverse(self) -> "RelationLabel":
        return _INVERSE[self]


_INVERSE = {
    RelationLabel.LEFT: RelationLabel.RIGHT,
    RelationLabel.RIGHT: RelationLabel.LEFT,
    RelationLabel.FRONT: RelationLabel.BACK,
    RelationLabel.BACK: RelationLabel.FRONT,
    RelationLabel.NEAR: RelationLabel.NEAR,
    RelationLabel.ON: RelationLabel.BENEATH,
    RelationLabel.BENEATH: RelationLabel.ON,
    RelationLabel.IN: RelationLabel.OUT_OF,
    RelationLabel.OUT_OF: RelationLabel.IN,
    RelationLabel.BETWEEN: RelationLabel.BETWEEN,
}

# Spellings accepted on input. "top" and "behind" appear in generated replies;
# the engine vocabulary is canonical everywhere else.
_ALIASES = {
    "top": RelationLabel.ON,
    "behind": RelationLabel.BACK,
    "out of": RelationLabel.OUT_OF,
}

SUPPORT_RELATIONS = (RelationLabel.ON, RelationLabel.IN)
PLANAR_RELATIONS = (
    RelationLabel.LEFT,
    RelationLabel.RIGHT,
    RelationLabel.FRONT,
    RelationLabel.BACK,
    RelationLabel.NEAR,
)


def parse_relation(value: str) -> RelationLabel:
    """Parse a relation label, accepting the alternate spellings."""
    value = value.strip().lower()
    if value in _ALIASES:
        return _ALIASES[value]
    try:
        return RelationLabel(value)
    except ValueError:
        raise ScenarioSemanticError(f"unknown relation {value!r}") from None


@dataclass(frozen=True)
class SceneGraphNode:
    object_uid: str
    state: str | None = None


@dataclass(frozen=True)
class SceneGraphEdge:
    """(object, relation, anchor): the object is placed relative to the anchor."""

    object_uid: str
    relation: RelationLabel
    anchor_uid: str

    def __post_init__(self):
        if self.object_uid == self.anchor_uid:
            raise ScenarioSemanticError(f"self edge on {self.object_uid}")

    def flipped(self) -> "SceneGraphEdge":
        return SceneGraphEdge(self.anchor_uid, self.relation.inverse, self.object_uid)


@dataclass(frozen=True)
class SceneGraph:
    description: str
    nodes: tuple[SceneGraphNode, ...]
    edges: tuple[SceneGraphEdge, ...]

    def node_uids(self) -> tuple[str, ...]:
        return tuple(n.object_uid for n in self.nodes)

    def node_map(self) -> dict[str, SceneGraphNode]:
        return {n.object_uid: n for n in self.nodes}

    def relation_set(self) -> set[tuple[str, RelationLabel, str]]:
        """Edges plus their inverses, as directed triples."""
        out: set[tuple[str, RelationLabel, str]] = set()
        for e in self.edges:
            out.add((e.object_uid, e.relation, e.anchor_uid))
            out.add((e.anchor_uid, e.relation.inverse, e.object_uid))
        return out


@dataclass(frozen=True)
class GoalAtom:
    """One checkable fact: a goal state for obj1 and/or a relation to obj2.

    ``between`` atoms name two anchors; everything else names at most one.
    """

    obj1_uid: str
    obj1_state: str | None = None
    obj2_uid: str | tuple[str, str] | None = None
    relation: RelationLabel | None = None

    def __post_init__(self):
        if self.obj1_state is None and self.relation is None:
            raise ScenarioSemanticError(
                f"goal atom for {self.obj1_uid} has neither state nor relation"
            )
        if self.relation is not None and self.obj2_uid is None:
            raise ScenarioSemanticError(
                f"goal atom for {self.obj1_uid}: relation {self.relation.value} needs an anchor"
            )
        if self.relation is RelationLabel.BETWEEN:
            if not (isinstance(self.obj2_uid, tuple) and len(self.obj2_uid) == 2):
                raise ScenarioSemanticError(
                    f"goal atom for {self.obj1_uid}: between needs exactly two anchors"
                )
        elif isinstance(self.obj2_uid, tuple):
            raise ScenarioSemanticError(
                f"goal atom for {self.obj1_uid}: only between takes two anchors"
            )

    def anchor_uids(self) -> tuple[str, ...]:
        if self.obj2_uid is None:
            return ()
        if isinstance(self.obj2_uid, tuple):
            return self.obj2_uid
        return (self.obj2_uid,)


@dataclass(frozen=True)
class GoalConditionSet:
    """Goals in disjunctive normal form: a list of conjunctions of atoms."""

    disjuncts: tuple[tuple[GoalAtom, ...], ...]

    def __post_init__(self):
        if not self.disjuncts or any(not d for d in self.disjuncts):
            raise ScenarioSemanticError("goal conditions must be a non-empty DNF")

    def referenced_uids(self) -> set[str]:
        uids: set[str] = set()
        for disjunct in self.disjuncts:
            for atom in disjunct:
                uids.add(atom.obj1_uid)
                uids.update(atom.anchor_uids())
        return uids

    def atom_satisfied_by_graph(self, atom: GoalAtom, graph: SceneGraph) -> bool:
        """Whether the initial scene graph already states this atom.

        Relation atoms match an edge directly or through its inverse; between
        atoms are never expressible as edges.
        """
        nodes = graph.node_map()
        if atom.obj1_state is not None:
            node = nodes.get(atom.obj1_uid)
            if node is None or node.state != atom.obj1_state:
                return False
        if atom.relation is not None:
            if atom.relation is RelationLabel.BETWEEN:
                return False
            triple = (atom.obj1_uid, atom.relation, atom.obj2_uid)
            if triple not in graph.relation_set():
                return False
        return True

    def satisfied_by_graph(self, graph: SceneGraph) -> bool:
        return any(
            all(self.atom_satisfied_by_graph(a, graph) for a in disjunct)
            for disjunct in self.disjuncts
        )


@dataclass(frozen=True)
class Violation:
    path: str
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, path: str, message: str) -> None:
        self.violations.append(Violation(path, message))

    def summary(self) -> str:
        return "; ".join(f"{v.path}: {v.message}" for v in self.violations) or "ok"


def validate_scene_graph(graph: SceneGraph, pool: list[AssetRecord]) -> ValidationReport:
    """Collect every violation instead of raising: dangling uids, unknown
    states, self edges, between edges, multiple supports, support cycles."""
    report = ValidationReport()
    assets = {a.uid: a for a in pool}
    node_uids = set()
    for i, node in enumerate(graph.nodes):
        path = f"scene_graph.nodes[{i}]"
        if node.object_uid in node_uids:
            report.add(path, f"duplicate node {node.object_uid}")
        node_uids.add(node.object_uid)
        asset = assets.get(node.object_uid)
        if asset is None:
            report.add(path, f"dangling uid {node.object_uid}")
        elif node.state is not None and node.state not in asset.states:
            report.add(path, f"unknown state {node.state!r} for {node.object_uid}")

    support_count: dict[str, int] = {}
    support_edges: list[tuple[str, str]] = []
    for i, edge in enumerate(graph.edges):
        path = f"scene_graph.edges[{i}]"
        for uid in (edge.object_uid, edge.anchor_uid):
            if uid not in node_uids:
                report.add(path, f"dangling uid {uid}")
        if edge.relation is RelationLabel.BETWEEN:
            report.add(path, "between is not expressible as a two-object edge")
        if edge.relation in SUPPORT_RELATIONS:
            support_count[edge.object_uid] = support_count.get(edge.object_uid, 0) + 1
            support_edges.append((edge.object_uid, edge.anchor_uid))

    for uid, count in sorted(support_count.items()):
        if count > 1:
            report.add("scene_graph.edges", f"{uid} has {count} support edges")

    cycle = _find_support_cycle(support_edges)
    if cycle:
        report.add("scene_graph.edges", "support cycle: " + " -> ".join(cycle))
    return report


def _find_support_cycle(edges: list[tuple[str, str]]) -> list[str] | None:
    """Iterative DFS over object -> anchor support dependencies."""
    children: dict[str, list[str]] = {}
    for obj, anchor in edges:
        children.setdefault(obj, []).append(anchor)
    WHITE, GRAY, BLACK = 0, 1, 2
    color: dict[str, int] = {}
    for start in sorted(children):
        if color.get(start, WHITE) != WHITE:
            continue
        stack: list[tuple[str, int]] = [(start, 0)]
        trail = [start]
        color[start] = GRAY
        while stack:
            node, idx = stack[-1]
            kids = children.get(node, ())
            if idx < len(kids):
                stack[-1] = (node, idx + 1)
                kid = kids[idx]
                state = color.get(kid, WHITE)
                if state == GRAY:
                    return trail[trail.index(kid):] + [kid] if kid in trail else [node, kid, node]
                if state == WHITE:
                    color[kid] = GRAY
                    stack.append((kid, 0))
                    trail.append(kid)
            else:
                color[node] = BLACK
                stack.pop()
                trail.pop()
    return None
