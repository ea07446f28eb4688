"""Pool sampling, prompt assembly, reply parsing, backends, the generate loop."""

import json
import re
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from tabletask.catalog import build_catalog
from tabletask.errors import (
    BackendTransportError,
    CatalogError,
    GenerationRetriesExhausted,
    ScenarioParseError,
    ScenarioSemanticError,
)
from tabletask.layout import construct_layout
from tabletask.scenario import TaskType, scenario_to_dict
from tabletask.scenegraph import RelationLabel
from tabletask.taskgen import (
    GenerationRequest,
    HttpBackend,
    MockBackend,
    RecordingBackend,
    TranscriptBackend,
    build_prompt,
    extract_structured_block,
    generate,
    mock_generate,
    parse_reply,
    sample_pool,
    try_parse_reply,
)

from conftest import make_request


class TestSamplePool:
    def test_deterministic(self, catalog):
        a = sample_pool(catalog, TaskType.SPATIAL, seed=5)
        b = sample_pool(catalog, TaskType.SPATIAL, seed=5)
        assert a == b
        assert len(a) == 50

    def test_appearance_pool_has_color_pair(self, catalog):
        for seed in range(20):
            pool = sample_pool(catalog, TaskType.APPEARANCE, seed=seed)
            by_category = {}
            for asset in pool:
                by_category.setdefault(asset.category, set()).add(asset.color)
            assert any(len(colors) > 1 for colors in by_category.values()), seed

    def test_catalog_too_small(self):
        small = build_catalog(count=40)
        with pytest.raises(CatalogError):
            sample_pool(small, TaskType.SPATIAL, seed=1, size=50)

    def test_tag_retrieval_prefers_shared_tags(self, catalog):
        pool = sample_pool(catalog, TaskType.COMMON_SENSE, seed=3)
        seeds = pool[:5]
        seed_tags = set()
        for a in seeds:
            seed_tags.update(a.tags)
        retrieved = pool[5:]
        overlaps = [len(seed_tags.intersection(a.tags)) for a in retrieved]
        assert overlaps == sorted(overlaps, reverse=True) or min(overlaps) > 0


class TestBuildPrompt:
    def test_spatial_fragment_present(self, catalog):
        prompt = build_prompt(make_request(catalog, TaskType.SPATIAL, seed=1))
        assert "spatial reasoning ability" in prompt

    def test_long_horizon_omits_fragments(self, catalog):
        prompt = build_prompt(make_request(catalog, TaskType.LONG_HORIZON, seed=1))
        assert "spatial reasoning ability" not in prompt
        assert "visual attributes" not in prompt
        assert "common sense reasoning" not in prompt

    def test_each_pool_uid_exactly_once(self, catalog):
        request = make_request(catalog, TaskType.APPEARANCE, seed=2)
        prompt = build_prompt(request)
        for asset in request.pool:
            assert prompt.count(f"UID: {asset.uid}\n") == 1

    def test_small_pool_block_count(self, catalog):
        pool = tuple(sample_pool(catalog, TaskType.SPATIAL, seed=1)[:3])
        request = GenerationRequest(
            task_type=TaskType.SPATIAL, pool=pool, num_objects_min=2, seed=1
        )
        prompt = build_prompt(request)
        assert len(re.findall(r"^- Name: ", prompt, re.MULTILINE)) == 3


class TestParseReply:
    def reply_for(self, catalog, seed=5):
        scenario = mock_generate(make_request(catalog, TaskType.SPATIAL, seed=seed))
        data = scenario_to_dict(scenario)
        body = {
            "instruction": data["instruction"],
            "goal_conditions": data["goal_conditions"],
            "scene_graph": data["scene_graph"],
        }
        return scenario, json.dumps(body, indent=1)

    def test_plain_json_reply(self, catalog):
        scenario, reply = self.reply_for(catalog)
        parsed = parse_reply(
            reply, list(scenario.asset_pool), TaskType.SPATIAL, "x-1", 5
        )
        assert parsed.scene_graph == scenario.scene_graph
        assert parsed.goals == scenario.goals

    def test_prose_and_fences_tolerated(self, catalog):
        scenario, reply = self.reply_for(catalog)
        wrapped = "Sure! Here is the design you asked for.\n```json\n" + reply + "\n```\nHope this helps."
        parsed = parse_reply(
            wrapped, list(scenario.asset_pool), TaskType.SPATIAL, "x-2", 5
        )
        assert parsed.scene_graph == scenario.scene_graph

    def test_no_block_found(self, catalog):
        scenario, _ = self.reply_for(catalog)
        with pytest.raises(ScenarioParseError, match="no structured block"):
            parse_reply("I cannot help with that.", list(scenario.asset_pool), TaskType.SPATIAL, "x", 1)

    def test_circular_transformation_rejected(self, catalog):
        scenario, reply = self.reply_for(catalog)
        data = json.loads(reply)
        goal = data["goal_conditions"][0][0]
        edge = data["scene_graph"]["edges"][0]
        # Restate the first initial edge, reversed, as the goal.
        goal["obj1_uid"], goal["obj2_uid"] = edge["obj2_uid"], edge["obj1_uid"]
        goal["position"] = {
            "left": "right", "right": "left", "front": "back", "back": "front",
            "near": "near", "on": "beneath", "in": "out_of",
        }[edge["position"]]
        goal["obj1_state"] = "none"
        with pytest.raises(ScenarioSemanticError, match="circular"):
            parse_reply(json.dumps(data), list(scenario.asset_pool), TaskType.SPATIAL, "x", 1)

    def test_try_parse_is_total(self, catalog):
        scenario, _ = self.reply_for(catalog)
        for text in ("", "garbage", '{"instruction": 42}', "{}"):
            reply = try_parse_reply(text, list(scenario.asset_pool), TaskType.SPATIAL, "x", 1)
            assert reply.scenario is None
            assert reply.error

    def test_extract_balanced_block_without_fences(self):
        text = 'leading {"a": {"b": [1, 2]}, "c": "x{y}"} trailing'
        assert extract_structured_block(text) == {"a": {"b": [1, 2]}, "c": "x{y}"}


class TestMockGenerate:
    def test_long_horizon_has_chained_atoms(self, catalog):
        scenario = mock_generate(make_request(catalog, TaskType.LONG_HORIZON, seed=4))
        assert len(scenario.goals.disjuncts[0]) >= 2

    def test_spatial_instruction_references_anchor_by_relation(self, catalog):
        scenario = mock_generate(make_request(catalog, TaskType.SPATIAL, seed=4))
        assert " that is " in scenario.instruction

    def test_appearance_instruction_uses_attributes(self, catalog):
        scenario = mock_generate(make_request(catalog, TaskType.APPEARANCE, seed=4))
        target_uid = scenario.goals.disjuncts[0][0].obj1_uid
        target = scenario.pool_map()[target_uid]
        assert target.color in scenario.instruction
        assert target.material in scenario.instruction

    def test_all_types_validate(self, catalog):
        for task_type in TaskType:
            for seed in range(6):
                scenario = mock_generate(make_request(catalog, task_type, seed=seed))
                assert scenario.task_type is task_type  # validated at build time

    def test_deterministic(self, catalog):
        a = mock_generate(make_request(catalog, TaskType.COMMON_SENSE, seed=9))
        b = mock_generate(make_request(catalog, TaskType.COMMON_SENSE, seed=9))
        assert a == b

    def test_horizon_override(self, catalog):
        for horizon in (1, 2, 3):
            scenario = mock_generate(
                make_request(catalog, TaskType.LONG_HORIZON, seed=30), horizon=horizon
            )
            assert len(scenario.goals.disjuncts[0]) == horizon


class _GarbageBackend:
    def __init__(self):
        self.calls = 0

    def complete(self, prompt):
        self.calls += 1
        return "no structured content here at all"


class TestGenerate:
    def test_mock_backend_end_to_end(self, catalog):
        request = make_request(catalog, TaskType.SPATIAL, seed=21)
        backend = MockBackend(catalog)
        scenario = generate(request, backend)
        again = generate(request, backend)
        assert scenario == again
        construct_layout(scenario)

    def test_mock_backend_reply_uses_top_spelling(self, catalog):
        # The offline backend spells support edges "top"; parsing must
        # normalize them, which the round trip below exercises.
        request = make_request(catalog, TaskType.COMMON_SENSE, seed=2)
        backend = MockBackend(catalog)
        reply = backend.complete(build_prompt(request))
        scenario = generate(request, backend)
        if '"top"' in reply:
            assert any(
                e.relation is RelationLabel.ON for e in scenario.scene_graph.edges
            ) or any(
                a.relation is RelationLabel.ON
                for d in scenario.goals.disjuncts for a in d
            )

    def test_retries_exhausted_carries_all_diagnostics(self, catalog):
        request = make_request(catalog, TaskType.SPATIAL, seed=3)
        backend = _GarbageBackend()
        with pytest.raises(GenerationRetriesExhausted) as err:
            generate(request, backend, retries=2)
        assert backend.calls == 3
        assert len(err.value.diagnostics) == 3

    def test_repair_prompt_appends_diagnostic(self, catalog):
        request = make_request(catalog, TaskType.SPATIAL, seed=3)
        prompts = []

        class Spy:
            def complete(self, prompt):
                prompts.append(prompt)
                return "nothing useful"

        with pytest.raises(GenerationRetriesExhausted):
            generate(request, Spy(), retries=1)
        assert len(prompts) == 2
        assert "rejected" in prompts[1] and prompts[1] != prompts[0]


class TestTranscripts:
    def test_record_then_replay(self, catalog, tmp_path):
        request = make_request(catalog, TaskType.APPEARANCE, seed=8)
        recorder = RecordingBackend(MockBackend(catalog), tmp_path)
        recorded = generate(request, recorder)
        replayed = generate(request, TranscriptBackend(tmp_path))
        assert recorded == replayed

    def test_missing_transcript(self, catalog, tmp_path):
        request = make_request(catalog, TaskType.APPEARANCE, seed=9)
        with pytest.raises(BackendTransportError, match="no recorded reply"):
            generate(request, TranscriptBackend(tmp_path))


class TestHttpBackend:
    def test_against_local_stub(self):
        received = {}

        class Stub(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers["Content-Length"])
                received.update(json.loads(self.rfile.read(length)))
                received["auth"] = self.headers.get("Authorization")
                body = json.dumps(
                    {"choices": [{"message": {"content": "stubbed reply"}}]}
                ).encode()
                self.send_response(200)
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def log_message(self, *args):
                pass

        server = HTTPServer(("127.0.0.1", 0), Stub)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            port = server.server_address[1]
            backend = HttpBackend(f"http://127.0.0.1:{port}", model="test-model", api_key="k")
            reply = backend.complete("hello")
            assert reply == "stubbed reply"
            assert received["model"] == "test-model"
            assert received["messages"][0]["content"] == "hello"
            assert received["auth"] == "Bearer k"
        finally:
            server.shutdown()
            server.server_close()

    def test_unreachable_backend(self):
        backend = HttpBackend("http://127.0.0.1:9", model="m", transport_retries=0, timeout=0.2)
        with pytest.raises(BackendTransportError):
            backend.complete("hello")
