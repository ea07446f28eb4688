"""Curation HTTP API: live relation inference, versioned edits, accept gate."""

import json
import threading
import urllib.error
import urllib.request

import pytest

from tabletask.config import EngineConfig
from tabletask.layout import load_layout
from tabletask.relations import scene_relations
from tabletask.service import make_server
from tabletask.stages import stage_generate, stage_solve


@pytest.fixture(scope="module")
def service(tmp_path_factory):
    store = tmp_path_factory.mktemp("store")
    config = EngineConfig(seed=400)
    stage_generate(config, 3, store)
    _add_stacked_scenario(store, config)
    stage_solve(config, store)
    server = make_server(store, config, port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    yield base, store, config
    server.shutdown()
    server.server_close()


def _add_stacked_scenario(store, config):
    """Guarantee the store holds one scenario with an initial on-edge."""
    from tabletask.scenario import TaskType, save_scenario
    from tabletask.scenegraph import RelationLabel
    from tabletask.taskgen import GenerationRequest, mock_generate, sample_pool

    catalog = config.load_assets()
    for seed in range(120):
        pool = sample_pool(catalog, TaskType.SPATIAL, seed=seed)
        scenario = mock_generate(
            GenerationRequest(task_type=TaskType.SPATIAL, pool=tuple(pool), seed=seed)
        )
        if any(e.relation is RelationLabel.ON for e in scenario.scene_graph.edges):
            save_scenario(scenario, store / f"{scenario.id}.scenario.json")
            return
    raise AssertionError("no stacked mock scenario found in the seed range")


def get(base, path):
    with urllib.request.urlopen(base + path) as resp:
        return resp.status, json.loads(resp.read().decode("utf-8"))


def post(base, path, body):
    request = urllib.request.Request(
        base + path,
        data=json.dumps(body).encode("utf-8"),
        headers={"Content-Type": "application/json"},
        method="POST",
    )
    try:
        with urllib.request.urlopen(request) as resp:
            return resp.status, json.loads(resp.read().decode("utf-8"))
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read().decode("utf-8"))


class TestReads:
    def test_list_scenarios(self, service):
        base, _, _ = service
        status, rows = get(base, "/scenarios")
        assert status == 200 and len(rows) == 4
        assert all(row["status"] == "draft" for row in rows)
        assert all(row["has_layout"] for row in rows)

    def test_filter_by_task_type(self, service):
        base, _, _ = service
        _, rows = get(base, "/scenarios")
        wanted = rows[0]["task_type"]
        _, filtered = get(base, f"/scenarios?task_type={wanted}")
        assert filtered and all(r["task_type"] == wanted for r in filtered)

    def test_detail_carries_live_relations(self, service):
        base, store, config = service
        _, rows = get(base, "/scenarios")
        sid = rows[0]["id"]
        _, detail = get(base, f"/scenarios/{sid}")
        layout = load_layout(store / f"{sid}.layout.json")
        expected = sorted(
            [a, rel.value, b] for a, rel, b in scene_relations(layout, config.thresholds)
        )
        assert detail["relations"] == expected
        assert detail["version"] == 1
        assert detail["goal_status"]

    def test_unknown_scenario_404(self, service):
        base, _, _ = service
        request = urllib.request.Request(base + "/scenarios/ghost")
        with pytest.raises(urllib.error.HTTPError) as err:
            urllib.request.urlopen(request)
        assert err.value.code == 404

    def test_catalog_and_report(self, service):
        base, _, _ = service
        status, assets = get(base, "/catalog")
        assert status == 200 and len(assets) >= 200
        status, rep = get(base, "/report")
        assert status == 200 and "curation" in rep


class TestLayoutEdits:
    def test_move_recomputes_relations(self, service):
        base, store, config = service
        _, rows = get(base, "/scenarios")
        sid = rows[1]["id"]
        _, detail = get(base, f"/scenarios/{sid}")
        uid = detail["layout"]["objects"][0]["uid"]
        # Nudge the object 1 cm; the server must answer with relations
        # recomputed from the edited layout.
        x, y = detail["layout"]["objects"][0]["center"][:2]
        status, view = post(
            base,
            f"/scenarios/{sid}/layout",
            {"version": detail["version"], "moves": [{"uid": uid, "x": x + 0.01, "y": y}]},
        )
        assert status == 200
        assert view["version"] == detail["version"] + 1
        edited = load_layout(store / f"{sid}.layout.json")
        expected = sorted(
            [a, rel.value, b] for a, rel, b in scene_relations(edited, config.thresholds)
        )
        assert view["relations"] == expected

    def test_stale_version_conflicts(self, service):
        base, _, _ = service
        _, rows = get(base, "/scenarios")
        sid = rows[1]["id"]
        status, body = post(
            base, f"/scenarios/{sid}/layout",
            {"version": 999, "moves": []},
        )
        assert status == 409 and "version" in body["error"]

    def test_collision_move_rejected(self, service):
        base, store, _ = service
        _, rows = get(base, "/scenarios")
        sid = rows[2]["id"]
        _, detail = get(base, f"/scenarios/{sid}")
        objs = detail["layout"]["objects"]
        a, b = objs[0], objs[1]
        status, body = post(
            base,
            f"/scenarios/{sid}/layout",
            {
                "version": detail["version"],
                "moves": [{"uid": a["uid"], "x": b["center"][0], "y": b["center"][1]}],
            },
        )
        assert status == 422 and "rejected" in body["error"]
        # Store unchanged on rejection.
        unchanged = load_layout(store / f"{sid}.layout.json")
        assert [o.uid for o in unchanged.objects] == [o["uid"] for o in objs]
        _, after = get(base, f"/scenarios/{sid}")
        assert after["version"] == detail["version"]

    def test_move_resyncs_graph_edges(self, service):
        # Moving an object far from its edge partner drops that edge from
        # the persisted scene graph: the graph follows the scene.
        base, store, _ = service
        _, rows = get(base, "/scenarios")
        sid = rows[2]["id"]
        _, detail = get(base, f"/scenarios/{sid}")
        edges = detail["scenario"]["scene_graph"]["edges"]
        objs = {o["uid"]: o for o in detail["layout"]["objects"]}
        target_edge = next(
            e for e in edges if objs[e["obj1_uid"]]["support_uid"] == "table"
        )
        moved_uid = target_edge["obj1_uid"]
        view = None
        for x in (0.5, -0.5, 0.45, -0.45):
            for y in (0.3, -0.3, 0.0):
                status, body = post(
                    base, f"/scenarios/{sid}/layout",
                    {"version": detail["version"], "moves": [{"uid": moved_uid, "x": x, "y": y}]},
                )
                if status == 200:
                    view = body
                    break
            if view:
                break
        assert view is not None
        new_edges = view["scenario"]["scene_graph"]["edges"]
        assert not any(
            e["obj1_uid"] == target_edge["obj1_uid"]
            and e["obj2_uid"] == target_edge["obj2_uid"]
            and e["position"] == target_edge["position"]
            for e in new_edges
        )
        from tabletask.scenario import load_scenario

        persisted = load_scenario(store / f"{sid}.scenario.json")
        assert len(persisted.scene_graph.edges) == len(new_edges)

    def test_move_of_loaded_support_rejected(self, service):
        # A support carrying another object cannot be dragged out from
        # under it.
        base, _, _ = service
        _, rows = get(base, "/scenarios")
        for row in rows:
            _, detail = get(base, f"/scenarios/{row['id']}")
            stacked = [
                o for o in detail["layout"]["objects"] if o["support_uid"] != "table"
            ]
            if not stacked:
                continue
            support_uid = stacked[0]["support_uid"]
            status, body = post(
                base, f"/scenarios/{row['id']}/layout",
                {"version": detail["version"], "moves": [{"uid": support_uid, "x": 0.0, "y": 0.0}]},
            )
            assert status == 422 and "supports" in body["error"]
            return
        pytest.skip("no stacked object in this store")


class TestGraphAndResolve:
    def test_graph_edit_validated(self, service):
        base, _, _ = service
        _, rows = get(base, "/scenarios")
        sid = rows[0]["id"]
        _, detail = get(base, f"/scenarios/{sid}")
        goals = detail["scenario"]["goal_conditions"]
        edges = detail["scenario"]["scene_graph"]["edges"]
        # Make the first goal restate the first edge: must be rejected.
        bad_goal = [[{
            "obj1": edges[0]["obj1"],
            "obj1_uid": edges[0]["obj1_uid"],
            "obj1_state": "none",
            "obj2": edges[0]["obj2"],
            "obj2_uid": edges[0]["obj2_uid"],
            "position": edges[0]["position"],
        }]]
        status, body = post(
            base, f"/scenarios/{sid}/graph",
            {"version": detail["version"], "goal_conditions": bad_goal},
        )
        assert status == 422 and "satisfied initially" in body["error"]

    def test_instruction_edit_persists(self, service):
        base, store, _ = service
        _, rows = get(base, "/scenarios")
        sid = rows[0]["id"]
        _, detail = get(base, f"/scenarios/{sid}")
        status, view = post(
            base, f"/scenarios/{sid}/graph",
            {"version": detail["version"], "instruction": "Refined wording for clarity."},
        )
        assert status == 200
        from tabletask.scenario import load_scenario

        assert load_scenario(store / f"{sid}.scenario.json").instruction == (
            "Refined wording for clarity."
        )

    def test_resolve_rebuilds_layout(self, service):
        base, _, _ = service
        _, rows = get(base, "/scenarios")
        sid = rows[2]["id"]
        _, detail = get(base, f"/scenarios/{sid}")
        status, view = post(
            base, f"/scenarios/{sid}/resolve",
            {"version": detail["version"], "seed": 123456},
        )
        assert status == 200
        assert view["layout"]["seed"] == 123456


class TestCuration:
    def test_accept_feasible(self, service):
        base, store, _ = service
        _, rows = get(base, "/scenarios")
        sid = rows[1]["id"]
        _, detail = get(base, f"/scenarios/{sid}")
        status, view = post(
            base, f"/scenarios/{sid}/status",
            {"version": detail["version"], "status": "accepted", "note": "looks right"},
        )
        assert status == 200 and view["status"] == "accepted"
        record = json.loads((store / f"{sid}.curation.json").read_text(encoding="utf-8"))
        assert record["status"] == "accepted" and record["note"] == "looks right"

    def test_accepted_to_rejected_requires_reopen(self, service):
        base, _, _ = service
        _, rows = get(base, "/scenarios")
        sid = next(r["id"] for r in rows if r["status"] == "accepted")
        _, detail = get(base, f"/scenarios/{sid}")
        status, body = post(
            base, f"/scenarios/{sid}/status",
            {"version": detail["version"], "status": "rejected"},
        )
        assert status == 409 and "reopen" in body["error"]
        status, view = post(
            base, f"/scenarios/{sid}/status",
            {"version": detail["version"], "status": "draft"},
        )
        assert status == 200 and view["status"] == "draft"

    def test_accept_mismatched_graph_rejected(self, service):
        # A graph edit that contradicts the current layout persists in draft,
        # but the accept gate refuses until the mismatch is fixed.
        base, store, config = service
        _, rows = get(base, "/scenarios")
        sid = rows[0]["id"]
        _, detail = get(base, f"/scenarios/{sid}")
        edges = [dict(e) for e in detail["scenario"]["scene_graph"]["edges"]]
        goal_pairs = {
            (a["obj1_uid"], a["obj2_uid"])
            for d in detail["scenario"]["goal_conditions"]
            for a in d
        }
        inverse = {
            "left": "right", "right": "left", "front": "back", "back": "front",
        }
        idx = next(
            i for i, e in enumerate(edges)
            if e["position"] in inverse
            and (e["obj1_uid"], e["obj2_uid"]) not in goal_pairs
            and (e["obj2_uid"], e["obj1_uid"]) not in goal_pairs
        )
        edges[idx]["position"] = inverse[edges[idx]["position"]]
        status, view = post(
            base, f"/scenarios/{sid}/graph",
            {"version": detail["version"], "edges": edges},
        )
        assert status == 200  # drafts may hold a mismatched graph
        status, body = post(
            base, f"/scenarios/{sid}/status",
            {"version": view["version"], "status": "accepted"},
        )
        assert status == 422
        assert "no longer matches" in body["error"]
        # Restore the original edge so later tests see a consistent store.
        edges[idx]["position"] = inverse[edges[idx]["position"]]
        status, view = post(
            base, f"/scenarios/{sid}/graph",
            {"version": body.get("version", view["version"]), "edges": edges},
        )
        assert status == 200
