"""Curation HTTP service.

Serves the scenario store to the inspector client: live relation inference
and per-atom goal status on every read, optimistic concurrency through a
per-scenario version token, and an accept gate that re-runs round-trip
validation plus an oracle feasibility check. Nothing that fails validation
is ever persisted.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .config import EngineConfig
from .errors import (
    EngineError,
    LayoutInfeasibleError,
    PolicyFault,
    ScenarioError,
    ServiceConflictError,
)
from .evaluation import EvalContext, episode_score
from .geometry import Box3
from .layout import (
    TABLE_UID,
    Layout,
    PlacedObject,
    construct_layout,
    load_layout,
    missing_edges,
    save_layout,
    validate_placement,
)
from .policies import OraclePolicy
from .relations import RelationLabel
from .scenario import (
    TaskScenario,
    load_scenario,
    parse_scenario_dict,
    save_scenario,
    scenario_to_dict,
)
from .sim import run_episode
from .stages import LAYOUT_SUFFIX, RESULTS_NAME, SCENARIO_SUFFIX

CURATION_SUFFIX = ".curation.json"

_STATUSES = ("draft", "accepted", "rejected")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class CurationRecord:
    status: str = "draft"
    note: str = ""
    version: int = 1
    history: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "note": self.note,
            "version": self.version,
            "history": self.history,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CurationRecord":
        return cls(
            status=data.get("status", "draft"),
            note=data.get("note", ""),
            version=int(data.get("version", 1)),
            history=list(data.get("history", [])),
        )


@dataclass
class _Entry:
    scenario: TaskScenario
    layout: Layout | None
    curation: CurationRecord
    lock: threading.Lock = field(default_factory=threading.Lock)


class ScenarioStore:
    """In-memory view of the store directory; every mutation persists first."""

    def __init__(self, directory: str | Path, config: EngineConfig):
        self.directory = Path(directory)
        self.config = config
        self.entries: dict[str, _Entry] = {}
        self._load()

    def _load(self) -> None:
        for path in sorted(self.directory.glob(f"*{SCENARIO_SUFFIX}")):
            scenario = load_scenario(path)
            layout_path = self.directory / f"{scenario.id}{LAYOUT_SUFFIX}"
            layout = load_layout(layout_path) if layout_path.exists() else None
            curation_path = self.directory / f"{scenario.id}{CURATION_SUFFIX}"
            curation = (
                CurationRecord.from_dict(json.loads(curation_path.read_text(encoding="utf-8")))
                if curation_path.exists()
                else CurationRecord()
            )
            self.entries[scenario.id] = _Entry(scenario, layout, curation)

    def get(self, scenario_id: str) -> _Entry:
        entry = self.entries.get(scenario_id)
        if entry is None:
            raise KeyError(scenario_id)
        return entry

    def _persist(self, entry: _Entry) -> None:
        sid = entry.scenario.id
        save_scenario(entry.scenario, self.directory / f"{sid}{SCENARIO_SUFFIX}")
        if entry.layout is not None:
            save_layout(entry.layout, self.directory / f"{sid}{LAYOUT_SUFFIX}")
        path = self.directory / f"{sid}{CURATION_SUFFIX}"
        path.write_text(json.dumps(entry.curation.to_dict(), indent=2) + "\n", encoding="utf-8")

    # -- views ------------------------------------------------------------

    def list_view(self, task_type: str | None = None, status: str | None = None) -> list[dict]:
        rows = []
        for sid in sorted(self.entries):
            entry = self.entries[sid]
            if task_type and entry.scenario.task_type.value != task_type:
                continue
            if status and entry.curation.status != status:
                continue
            rows.append(
                {
                    "id": sid,
                    "task_type": entry.scenario.task_type.value,
                    "status": entry.curation.status,
                    "instruction": entry.scenario.instruction,
                    "note": entry.curation.note,
                    "version": entry.curation.version,
                    "has_layout": entry.layout is not None,
                    "horizon": max(len(d) for d in entry.scenario.goals.disjuncts),
                }
            )
        return rows

    def detail_view(self, entry: _Entry) -> dict:
        scenario = entry.scenario
        relations: list[list[str]] = []
        goal_status: list[list[bool]] = []
        if entry.layout is not None:
            stats = {o.uid: o.stats() for o in entry.layout.objects}
            ctx = EvalContext.build(
                stats=stats,
                states={o.uid: o.state for o in entry.layout.objects},
                known_uids=scenario.scene_graph.node_uids(),
                thresholds=self.config.thresholds,
            )
            relations = sorted([a, rel.value, b] for a, rel, b in ctx.relations)
            _, _, atom_results = episode_score(scenario.goals, ctx)
            goal_status = [list(r) for r in atom_results]
        return {
            "scenario": scenario_to_dict(scenario),
            "layout": entry.layout.to_dict() if entry.layout else None,
            "relations": relations,
            "goal_status": goal_status,
            "status": entry.curation.status,
            "note": entry.curation.note,
            "version": entry.curation.version,
            "history": entry.curation.history,
        }

    # -- mutations ---------------------------------------------------------

    def _check_version(self, entry: _Entry, version: int) -> None:
        if version != entry.curation.version:
            raise ServiceConflictError(
                f"version mismatch: expected {entry.curation.version}, got {version}"
            )

    def move_objects(self, scenario_id: str, version: int, moves: list[dict]) -> dict:
        entry = self.get(scenario_id)
        with entry.lock:
            self._check_version(entry, version)
            if entry.layout is None:
                raise ScenarioError("scenario has no layout yet; resolve it first")
            objects = {o.uid: o for o in entry.layout.objects}
            moved: set[str] = set()
            for move in moves:
                uid = str(move["uid"])
                if uid not in objects:
                    raise ScenarioError(f"unknown object {uid}")
                loaded = sorted(o.uid for o in objects.values() if o.support_uid == uid)
                if loaded:
                    raise ScenarioError(
                        f"move of {uid} rejected: it supports {', '.join(loaded)}; "
                        "move those first"
                    )
                current = objects[uid]
                x = float(move.get("x", current.box.center[0]))
                y = float(move.get("y", current.box.center[1]))
                yaw = float(move.get("yaw", current.box.yaw))
                support_uid, bottom, constraints = self._resupport(
                    entry.layout, objects, current, x, y, yaw
                )
                half = current.box.half_extents
                candidate = Box3((x, y, bottom + half[2]), half, yaw)
                others = {u: o for u, o in objects.items() if u != uid}
                ok = validate_placement(
                    candidate, uid, constraints, others,
                    self.config.thresholds, entry.layout.table, workspace=None,
                )
                if not ok:
                    raise ScenarioError(
                        f"move of {uid} rejected: collision, out of bounds, or support misfit"
                    )
                objects[uid] = PlacedObject(uid, candidate, support_uid, current.state)
                moved.add(uid)
            new_layout = Layout(
                table=entry.layout.table,
                objects=[objects[o.uid] for o in entry.layout.objects],
                seed=entry.layout.seed,
            )
            # The scene graph describes the initial scene, so edits to the
            # scene re-sync its edges: every edge touching a moved object is
            # re-inferred on the new layout (and dropped when the pair no
            # longer relates). Validation then has the last word: an edit
            # that would make a goal trivially satisfied is rejected whole.
            new_scenario = self._resync_edges(entry.scenario, new_layout, moved)
            entry.scenario = new_scenario
            entry.layout = new_layout
            entry.curation.version += 1
            entry.curation.history.append(
                {"ts": _now(), "kind": "layout", "detail": f"moved {len(moves)} object(s)"}
            )
            self._persist(entry)
            return self.detail_view(entry)

    def _resync_edges(self, scenario: TaskScenario, layout: Layout, moved: set[str]) -> TaskScenario:
        if not moved:
            return scenario
        from .relations import classify

        stats = {o.uid: o.stats() for o in layout.objects}
        triples = []
        for edge in scenario.scene_graph.edges:
            if edge.object_uid in moved or edge.anchor_uid in moved:
                pair = classify(
                    stats[edge.object_uid], stats[edge.anchor_uid], self.config.thresholds
                )
                if pair.forward is None:
                    continue  # the pair no longer relates; the edge goes away
                triples.append((edge.object_uid, pair.forward, edge.anchor_uid))
            else:
                triples.append((edge.object_uid, edge.relation, edge.anchor_uid))
        names = {a.uid: a.name for a in scenario.asset_pool}
        data = scenario_to_dict(scenario)
        data["scene_graph"]["edges"] = [
            {
                "obj1": names.get(obj, obj),
                "obj1_uid": obj,
                "position": relation.value,
                "obj2": names.get(anchor, anchor),
                "obj2_uid": anchor,
            }
            for obj, relation, anchor in triples
        ]
        return parse_scenario_dict(data)  # raises ScenarioError on bad outcomes

    def _resupport(self, layout: Layout, objects, current: PlacedObject, x, y, yaw):
        """Dragging keeps the current support while the footprint still fits it,
        otherwise the object drops to the table."""
        half = current.box.half_extents
        probe = Box3((x, y, layout.table.surface_z + half[2]), half, yaw)
        if current.support_uid != TABLE_UID and current.support_uid in objects:
            support = objects[current.support_uid]
            s_min_x, s_min_y, s_max_x, s_max_y = support.box.footprint()
            p_min_x, p_min_y, p_max_x, p_max_y = probe.footprint()
            if (
                p_min_x >= s_min_x and p_min_y >= s_min_y
                and p_max_x <= s_max_x and p_max_y <= s_max_y
            ):
                return (
                    current.support_uid,
                    support.box.top_z,
                    [(RelationLabel.ON, current.support_uid)],
                )
        return (TABLE_UID, layout.table.surface_z, [])

    def edit_graph(self, scenario_id: str, version: int, body: dict) -> dict:
        entry = self.get(scenario_id)
        with entry.lock:
            self._check_version(entry, version)
            data = scenario_to_dict(entry.scenario)
            for key in ("instruction", "goal_conditions"):
                if key in body:
                    data[key] = body[key]
            graph = dict(data["scene_graph"])
            for key in ("description", "edges", "nodes"):
                if key in body:
                    graph[key] = body[key]
            data["scene_graph"] = graph
            entry.scenario = parse_scenario_dict(data)  # raises ScenarioError on bad edits
            entry.curation.version += 1
            entry.curation.history.append({"ts": _now(), "kind": "graph", "detail": "graph edited"})
            self._persist(entry)
            return self.detail_view(entry)

    def resolve(self, scenario_id: str, version: int, seed: int | None = None) -> dict:
        entry = self.get(scenario_id)
        with entry.lock:
            self._check_version(entry, version)
            layout_seed = entry.scenario.seed if seed is None else seed
            entry.layout = construct_layout(
                entry.scenario,
                table=self.config.table,
                seed=layout_seed,
                thresholds=self.config.thresholds,
                options=self.config.layout,
            )
            entry.curation.version += 1
            entry.curation.history.append(
                {"ts": _now(), "kind": "layout", "detail": f"resolved with seed {layout_seed}"}
            )
            self._persist(entry)
            return self.detail_view(entry)

    def set_status(self, scenario_id: str, version: int, status: str, note: str | None) -> dict:
        entry = self.get(scenario_id)
        with entry.lock:
            self._check_version(entry, version)
            if status not in _STATUSES:
                raise ScenarioError(f"unknown status {status!r}")
            current = entry.curation.status
            legal = (
                (current == "draft" and status in ("accepted", "rejected"))
                or (current in ("accepted", "rejected") and status == "draft")
                or current == status
            )
            if not legal:
                raise ServiceConflictError(
                    f"illegal transition {current} -> {status}; reopen as draft first"
                )
            if status == "accepted":
                self._check_acceptable(entry)
            entry.curation.status = status
            if note is not None:
                entry.curation.note = note
            entry.curation.version += 1
            entry.curation.history.append(
                {"ts": _now(), "kind": "status", "detail": f"{current} -> {status}"}
            )
            self._persist(entry)
            return self.detail_view(entry)

    def _check_acceptable(self, entry: _Entry) -> None:
        """Accepted scenarios must round-trip their graph and admit an oracle run."""
        if entry.layout is None:
            raise LayoutInfeasibleError("cannot accept: no layout; resolve first")
        missing = missing_edges(entry.layout, entry.scenario.scene_graph, self.config.thresholds)
        if missing:
            raise LayoutInfeasibleError(
                "cannot accept: layout no longer matches the scene graph",
                missing,
            )
        policy = OraclePolicy(options=self.config.sim, thresholds=self.config.thresholds)
        try:
            log = run_episode(
                entry.scenario, entry.layout, policy,
                budget=self.config.sim.budget,
                options=self.config.sim,
                thresholds=self.config.thresholds,
            )
        except PolicyFault as exc:
            raise LayoutInfeasibleError("cannot accept: oracle planning failed", [str(exc)])
        from .evaluation import evaluate_episode

        result = evaluate_episode(entry.scenario, log, self.config.thresholds)
        if not result.success:
            raise LayoutInfeasibleError(
                "cannot accept: oracle could not reach the goal",
                [f"termination={log.termination}", f"score={result.score:.3f}"],
            )

    def report_view(self) -> dict:
        counts: dict[str, dict[str, int]] = {}
        for entry in self.entries.values():
            row = counts.setdefault(entry.scenario.task_type.value, {s: 0 for s in _STATUSES})
            row[entry.curation.status] += 1
        view: dict = {"curation": counts}
        results_path = self.directory / RESULTS_NAME
        if results_path.exists():
            from .evaluation import load_results, report

            try:
                results = load_results(results_path)
                scenarios = [e.scenario for e in self.entries.values()]
                view["metrics"] = report(results, scenarios).to_dict()
            except EngineError as exc:
                view["metrics_error"] = str(exc)
        return view


class _Handler(BaseHTTPRequestHandler):
    store: ScenarioStore = None  # set by serve()
    catalog: list = None

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send(self, code: int, payload: dict | list) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()
        self.wfile.write(body)

    def _body(self) -> dict:
        length = int(self.headers.get("Content-Length", 0))
        if length == 0:
            return {}
        try:
            return json.loads(self.rfile.read(length).decode("utf-8"))
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"request body is not valid JSON: {exc}") from exc

    def do_OPTIONS(self):
        self._send(204, {})

    def do_GET(self):
        try:
            path, _, query = self.path.partition("?")
            params = _parse_query(query)
            if path == "/scenarios":
                self._send(200, self.store.list_view(params.get("task_type"), params.get("status")))
            elif path.startswith("/scenarios/"):
                sid = path.split("/", 2)[2]
                self._send(200, self.store.detail_view(self.store.get(sid)))
            elif path == "/catalog":
                self._send(200, [a.to_dict() for a in self.catalog])
            elif path == "/report":
                self._send(200, self.store.report_view())
            else:
                self._send(404, {"error": f"no such resource {path}"})
        except KeyError as exc:
            self._send(404, {"error": f"unknown scenario {exc}"})
        except EngineError as exc:
            self._send(422, {"error": str(exc)})

    def do_POST(self):
        try:
            parts = self.path.strip("/").split("/")
            if len(parts) != 3 or parts[0] != "scenarios":
                self._send(404, {"error": f"no such resource {self.path}"})
                return
            sid, action = parts[1], parts[2]
            body = self._body()
            version = int(body.get("version", -1))
            if action == "layout":
                view = self.store.move_objects(sid, version, body.get("moves", []))
            elif action == "graph":
                view = self.store.edit_graph(sid, version, body)
            elif action == "resolve":
                view = self.store.resolve(sid, version, body.get("seed"))
            elif action == "status":
                view = self.store.set_status(sid, version, body.get("status", ""), body.get("note"))
            else:
                self._send(404, {"error": f"unknown action {action}"})
                return
            self._send(200, view)
        except KeyError as exc:
            self._send(404, {"error": f"unknown scenario {exc}"})
        except ServiceConflictError as exc:
            self._send(409, {"error": str(exc)})
        except LayoutInfeasibleError as exc:
            self._send(422, {"error": str(exc), "diagnostics": exc.diagnostics})
        except EngineError as exc:
            self._send(422, {"error": str(exc)})


def _parse_query(query: str) -> dict[str, str]:
    params = {}
    for pair in query.split("&"):
        if "=" in pair:
            key, _, value = pair.partition("=")
            params[key] = value
    return params


def make_server(
    store_dir: str | Path,
    config: EngineConfig,
    host: str = "127.0.0.1",
    port: int = 0,
) -> ThreadingHTTPServer:
    """Build the HTTP server; port 0 picks a free port."""
    store = ScenarioStore(store_dir, config)
    catalog = config.load_assets()
    handler = type("BoundHandler", (_Handler,), {"store": store, "catalog": catalog})
    try:
        return ThreadingHTTPServer((host, port), handler)
    except OSError as exc:
        raise EngineError(f"cannot bind {host}:{port}: {exc}") from exc


def serve(store_dir: str | Path, config: EngineConfig, host: str, port: int) -> None:
    server = make_server(store_dir, config, host, port)
    actual_port = server.server_address[1]
    print(f"serving curation API on http://{host}:{actual_port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
