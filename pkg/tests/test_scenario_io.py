"""Scenario file schema: parsing, validation diagnostics, round-tripping."""

import json

import pytest

from tabletask.errors import (
    ScenarioParseError,
    ScenarioSchemaError,
    ScenarioSemanticError,
)
from tabletask.scenario import (
    load_scenario,
    parse_scenario_dict,
    save_scenario,
    scenario_to_dict,
)
from tabletask.scenegraph import RelationLabel
from tabletask.taskgen import mock_generate

from conftest import make_request


def asset_dict(uid, states=()):
    return {
        "uid": uid,
        "name": f"Test {uid}",
        "description": f"A test object {uid}.",
        "category": "thing",
        "color": "red",
        "shape": "round",
        "material": "wood",
        "footprint": [0.1, 0.1, 0.1],
        "mass": 0.25,
        "states": list(states),
        "tags": ["thing"],
    }


def minimal_scenario_dict():
    return {
        "id": "test-0001",
        "task_type": "spatial",
        "seed": 11,
        "instruction": "Move the first thing to the left of the second thing.",
        "goal_conditions": [
            [
                {
                    "obj1": "Test a",
                    "obj1_uid": "a",
                    "obj1_state": "none",
                    "obj2": "Test b",
                    "obj2_uid": "b",
                    "position": "left",
                }
            ]
        ],
        "scene_graph": {
            "description": "Two things side by side.",
            "edges": [
                {
                    "obj1": "Test a",
                    "obj1_uid": "a",
                    "position": "right",
                    "obj2": "Test b",
                    "obj2_uid": "b",
                }
            ],
            "nodes": [
                {"obj_uid": "a", "state": "none"},
                {"obj_uid": "b", "state": "none"},
            ],
        },
        "asset_pool": [asset_dict("a"), asset_dict("b")],
    }


class TestLoadScenario:
    def test_minimal_file(self, tmp_path):
        path = tmp_path / "s.scenario.json"
        path.write_text(json.dumps(minimal_scenario_dict()), encoding="utf-8")
        scenario = load_scenario(path)
        assert len(scenario.scene_graph.nodes) == 2
        assert scenario.goals.disjuncts[0][0].relation is RelationLabel.LEFT

    def test_goal_duplicating_edge_rejected(self, tmp_path):
        data = minimal_scenario_dict()
        data["goal_conditions"][0][0]["position"] = "right"
        path = tmp_path / "s.scenario.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        with pytest.raises(ScenarioSemanticError, match="goal satisfied initially"):
            load_scenario(path)

    def test_reversed_edge_goal_rejected(self):
        # "a left of b" as a goal while the graph says "b right of a".
        data = minimal_scenario_dict()
        data["scene_graph"]["edges"][0] = {
            "obj1": "Test b",
            "obj1_uid": "b",
            "position": "right",
            "obj2": "Test a",
            "obj2_uid": "a",
        }
        data["goal_conditions"][0][0]["position"] = "left"
        with pytest.raises(ScenarioSemanticError, match="circular"):
            parse_scenario_dict(data)

    def test_top_alias_normalized(self):
        data = minimal_scenario_dict()
        data["scene_graph"]["edges"][0]["position"] = "top"
        scenario = parse_scenario_dict(data)
        assert scenario.scene_graph.edges[0].relation is RelationLabel.ON

    def test_beneath_edge_canonicalized_by_flip(self):
        data = minimal_scenario_dict()
        data["scene_graph"]["edges"][0]["position"] = "beneath"
        scenario = parse_scenario_dict(data)
        edge = scenario.scene_graph.edges[0]
        assert edge.relation is RelationLabel.ON
        assert (edge.object_uid, edge.anchor_uid) == ("b", "a")

    def test_malformed_text(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ScenarioParseError):
            load_scenario(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ScenarioParseError):
            load_scenario(tmp_path / "absent.json")

    def test_missing_field_has_path(self):
        data = minimal_scenario_dict()
        del data["scene_graph"]["nodes"]
        with pytest.raises(ScenarioSchemaError) as err:
            parse_scenario_dict(data)
        assert "scene_graph.nodes" in str(err.value)

    def test_dangling_goal_uid_has_path(self):
        data = minimal_scenario_dict()
        data["goal_conditions"][0][0]["obj2_uid"] = "ghost"
        with pytest.raises(ScenarioSemanticError) as err:
            parse_scenario_dict(data)
        assert "goal_conditions[0][0]" in str(err.value)

    def test_unknown_relation_is_semantic_error(self):
        data = minimal_scenario_dict()
        data["scene_graph"]["edges"][0]["position"] = "diagonal"
        with pytest.raises(ScenarioSemanticError, match="unknown relation"):
            parse_scenario_dict(data)

    def test_seed_must_fit_uint64(self):
        data = minimal_scenario_dict()
        data["seed"] = 2**64
        with pytest.raises(ScenarioSemanticError, match="64"):
            parse_scenario_dict(data)

    def test_between_goal_with_two_anchors(self):
        data = minimal_scenario_dict()
        data["asset_pool"].append(asset_dict("c"))
        data["scene_graph"]["nodes"].append({"obj_uid": "c", "state": "none"})
        data["goal_conditions"][0][0].update(
            {"obj2": ["Test b", "Test c"], "obj2_uid": ["b", "c"], "position": "between"}
        )
        scenario = parse_scenario_dict(data)
        atom = scenario.goals.disjuncts[0][0]
        assert atom.relation is RelationLabel.BETWEEN
        assert atom.anchor_uids() == ("b", "c")

    def test_state_goal_with_no_anchor(self):
        data = minimal_scenario_dict()
        data["asset_pool"][0]["states"] = ["open", "closed"]
        data["scene_graph"]["nodes"][0]["state"] = "closed"
        data["goal_conditions"][0][0].update(
            {"obj1_state": "open", "obj2": "none", "obj2_uid": "none", "position": "none"}
        )
        scenario = parse_scenario_dict(data)
        atom = scenario.goals.disjuncts[0][0]
        assert atom.obj1_state == "open" and atom.relation is None


class TestRoundTrip:
    def test_save_load_identity(self, tmp_path, catalog):
        from tabletask.scenario import TaskType

        for task_type in TaskType:
            scenario = mock_generate(make_request(catalog, task_type, seed=3))
            path = tmp_path / f"{scenario.id}.scenario.json"
            save_scenario(scenario, path)
            assert load_scenario(path) == scenario

    def test_serialization_stable(self, mock_scenario, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        save_scenario(mock_scenario, a)
        save_scenario(mock_scenario, b)
        assert a.read_bytes() == b.read_bytes()

    def test_dict_mirrors_reply_schema(self, mock_scenario):
        data = scenario_to_dict(mock_scenario)
        atom = data["goal_conditions"][0][0]
        assert set(atom) == {"obj1", "obj1_uid", "obj1_state", "obj2", "obj2_uid", "position"}
        edge = data["scene_graph"]["edges"][0]
        assert set(edge) == {"obj1", "obj1_uid", "position", "obj2", "obj2_uid"}
        node = data["scene_graph"]["nodes"][0]
        assert set(node) == {"obj_uid", "state"}
