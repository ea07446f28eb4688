"""Relation labels, scene graph types, goal conditions, graph validation."""

import pytest

from tabletask.errors import ScenarioSemanticError
from tabletask.scenegraph import (
    GoalAtom,
    GoalConditionSet,
    RelationLabel,
    SceneGraph,
    SceneGraphEdge,
    SceneGraphNode,
    parse_relation,
    validate_scene_graph,
)
from tabletask.taskgen import mock_generate

from conftest import make_request


class TestRelationLabel:
    def test_inverse_is_involution(self):
        for label in RelationLabel:
            assert label.inverse.inverse is label

    def test_inverse_pairs(self):
        assert RelationLabel.LEFT.inverse is RelationLabel.RIGHT
        assert RelationLabel.FRONT.inverse is RelationLabel.BACK
        assert RelationLabel.ON.inverse is RelationLabel.BENEATH
        assert RelationLabel.IN.inverse is RelationLabel.OUT_OF
        assert RelationLabel.NEAR.inverse is RelationLabel.NEAR
        assert RelationLabel.BETWEEN.inverse is RelationLabel.BETWEEN

    def test_parse_aliases(self):
        assert parse_relation("top") is RelationLabel.ON
        assert parse_relation("behind") is RelationLabel.BACK
        assert parse_relation("out of") is RelationLabel.OUT_OF
        assert parse_relation(" Left ") is RelationLabel.LEFT

    def test_parse_unknown(self):
        with pytest.raises(ScenarioSemanticError, match="unknown relation"):
            parse_relation("above-ish")


class TestEdgesAndNodes:
    def test_self_edge_rejected(self):
        with pytest.raises(ScenarioSemanticError, match="self edge"):
            SceneGraphEdge("a", RelationLabel.LEFT, "a")

    def test_flipped(self):
        edge = SceneGraphEdge("a", RelationLabel.ON, "b")
        assert edge.flipped() == SceneGraphEdge("b", RelationLabel.BENEATH, "a")


class TestGoalAtoms:
    def test_needs_state_or_relation(self):
        with pytest.raises(ScenarioSemanticError):
            GoalAtom("a")

    def test_relation_needs_anchor(self):
        with pytest.raises(ScenarioSemanticError):
            GoalAtom("a", relation=RelationLabel.LEFT)

    def test_between_needs_two_anchors(self):
        with pytest.raises(ScenarioSemanticError):
            GoalAtom("a", relation=RelationLabel.BETWEEN, obj2_uid="b")
        atom = GoalAtom("a", relation=RelationLabel.BETWEEN, obj2_uid=("b", "c"))
        assert atom.anchor_uids() == ("b", "c")

    def test_pair_anchor_rejected_outside_between(self):
        with pytest.raises(ScenarioSemanticError):
            GoalAtom("a", relation=RelationLabel.LEFT, obj2_uid=("b", "c"))


def _graph(nodes, edges, description="test scene"):
    return SceneGraph(
        description=description,
        nodes=tuple(SceneGraphNode(u, s) for u, s in nodes),
        edges=tuple(SceneGraphEdge(o, r, a) for o, r, a in edges),
    )


class TestGoalConditionSet:
    def test_must_be_nonempty_dnf(self):
        with pytest.raises(ScenarioSemanticError):
            GoalConditionSet(())
        with pytest.raises(ScenarioSemanticError):
            GoalConditionSet(((),))

    def test_satisfied_by_direct_edge(self):
        graph = _graph([("a", None), ("b", None)], [("a", RelationLabel.LEFT, "b")])
        goals = GoalConditionSet(
            ((GoalAtom("a", relation=RelationLabel.LEFT, obj2_uid="b"),),)
        )
        assert goals.satisfied_by_graph(graph)

    def test_satisfied_by_inverse_edge(self):
        # The circular-transformation case: "a left of b" restated as
        # "b right of a" still counts as already satisfied.
        graph = _graph([("a", None), ("b", None)], [("b", RelationLabel.RIGHT, "a")])
        goals = GoalConditionSet(
            ((GoalAtom("a", relation=RelationLabel.LEFT, obj2_uid="b"),),)
        )
        assert goals.satisfied_by_graph(graph)

    def test_unsatisfied_perpendicular(self):
        graph = _graph([("a", None), ("b", None)], [("a", RelationLabel.RIGHT, "b")])
        goals = GoalConditionSet(
            ((GoalAtom("a", relation=RelationLabel.FRONT, obj2_uid="b"),),)
        )
        assert not goals.satisfied_by_graph(graph)

    def test_state_atom_against_nodes(self):
        graph = _graph([("laptop", "open")], [])
        satisfied = GoalConditionSet(((GoalAtom("laptop", obj1_state="open"),),))
        unsatisfied = GoalConditionSet(((GoalAtom("laptop", obj1_state="closed"),),))
        assert satisfied.satisfied_by_graph(graph)
        assert not unsatisfied.satisfied_by_graph(graph)


def _mini_pool():
    from tabletask.catalog import AssetRecord

    def rec(uid, states=()):
        return AssetRecord(
            uid=uid, name=uid, description="", category="thing", color="red",
            shape="round", material="wood", footprint=(0.1, 0.1, 0.1), mass=0.2,
            states=tuple(states), tags=("thing",),
        )

    return [rec("a", states=("open", "closed")), rec("b"), rec("c")]


class TestValidateSceneGraph:
    def test_two_cycle(self):
        graph = _graph(
            [("a", None), ("b", None)],
            [("a", RelationLabel.ON, "b"), ("b", RelationLabel.ON, "a")],
        )
        report = validate_scene_graph(graph, _mini_pool())
        assert any("cycle" in v.message for v in report.violations)

    def test_dangling_uid(self):
        graph = _graph([("a", None)], [("a", RelationLabel.LEFT, "zzz")])
        report = validate_scene_graph(graph, _mini_pool())
        assert any("dangling uid zzz" in v.message for v in report.violations)

    def test_unknown_state(self):
        graph = _graph([("b", "open")], [])
        report = validate_scene_graph(graph, _mini_pool())
        assert any("unknown state" in v.message for v in report.violations)

    def test_between_edge_rejected(self):
        graph = _graph(
            [("a", None), ("b", None)], [("a", RelationLabel.BETWEEN, "b")]
        )
        report = validate_scene_graph(graph, _mini_pool())
        assert any("between" in v.message for v in report.violations)

    def test_multiple_supports_flagged(self):
        graph = _graph(
            [("a", None), ("b", None), ("c", None)],
            [("a", RelationLabel.ON, "b"), ("a", RelationLabel.IN, "c")],
        )
        report = validate_scene_graph(graph, _mini_pool())
        assert any("support edges" in v.message for v in report.violations)

    def test_mock_graphs_valid_with_independent_cycle_check(self, catalog):
        # Cross-check the cycle detector with a plain recursive DFS oracle.
        def has_cycle_dfs(edges):
            children = {}
            for obj, anchor in edges:
                children.setdefault(obj, []).append(anchor)

            def visit(node, stack, seen):
                if node in stack:
                    return True
                if node in seen:
                    return False
                seen.add(node)
                return any(visit(k, stack | {node}, seen) for k in children.get(node, ()))

            seen: set = set()
            return any(visit(n, frozenset(), seen) for n in list(children))

        from tabletask.scenario import TaskType

        for seed in range(12):
            for task_type in TaskType:
                scenario = mock_generate(make_request(catalog, task_type, seed=seed))
                report = validate_scene_graph(
                    scenario.scene_graph, list(scenario.asset_pool)
                )
                assert report.ok, report.summary()
                support_edges = [
                    (e.object_uid, e.anchor_uid)
                    for e in scenario.scene_graph.edges
                    if e.relation in (RelationLabel.ON, RelationLabel.IN)
                ]
                assert not has_cycle_dfs(support_edges)
