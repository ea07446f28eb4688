"""Kinematic tabletop episode runner.

Picks and places teleport along recorded waypoint polylines with feasibility
checks; there are no forces. The effector lifts over everything standing in
the motion corridor, so executed paths are never shorter than the straight
chained segments that define the idealized path length.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Union

import numpy as np

from .errors import (
    BlockedObjectFault,
    EmptyHandFault,
    InvalidTargetFault,
    LayoutInfeasibleError,
    OccupiedHandFault,
    OutOfReachFault,
    PolicyFault,
    SkillFault,
    UnknownObjectFault,
)
from .geometry import Box3
from .layout import (
    DEFAULT_REACH_RADIUS,
    TABLE_UID,
    Layout,
    LayoutOptions,
    PlacedObject,
    TableSpec,
    find_placement,
    interior_floor_z,
    validate_placement,
)
from .relations import CloudStats, RelationThresholds, relations_from_stats
from .scenario import TaskScenario
from .scenegraph import GoalAtom, RelationLabel

Point = tuple[float, float, float]


@dataclass(frozen=True)
class SimOptions:
    budget: int = 60
    reach_radius: float = DEFAULT_REACH_RADIUS
    clearance: float = 0.15
    home_height: float = 0.3
    hand_radius: float = 0.03

    def arm_base(self, table: TableSpec) -> tuple[float, float]:
        return (0.0, -table.extent_y / 2)

    def home(self, table: TableSpec) -> Point:
        bx, by = self.arm_base(table)
        return (bx, by, table.surface_z + self.home_height)


# ---------------------------------------------------------------------------
# Skills
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Pick:
    uid: str


@dataclass(frozen=True)
class Place:
    """Either explicit table coordinates or a support to rest on."""

    x: float | None = None
    y: float | None = None
    support_uid: str = TABLE_UID
    inside: bool = False
    yaw: float | None = None


@dataclass(frozen=True)
class SetState:
    uid: str
    state: str


@dataclass(frozen=True)
class Done:
    pass


SkillCall = Union[Pick, Place, SetState, Done]


def skill_to_dict(skill: SkillCall) -> dict:
    if isinstance(skill, Pick):
        return {"skill": "pick", "uid": skill.uid}
    if isinstance(skill, Place):
        return {
            "skill": "place",
            "x": skill.x,
            "y": skill.y,
            "support_uid": skill.support_uid,
            "inside": skill.inside,
            "yaw": skill.yaw,
        }
    if isinstance(skill, SetState):
        return {"skill": "set_state", "uid": skill.uid, "state": skill.state}
    return {"skill": "done"}


def skill_from_dict(data: dict) -> SkillCall:
    kind = data.get("skill")
    if kind == "pick":
        return Pick(uid=str(data["uid"]))
    if kind == "place":
        return Place(
            x=None if data.get("x") is None else float(data["x"]),
            y=None if data.get("y") is None else float(data["y"]),
            support_uid=str(data.get("support_uid", TABLE_UID)),
            inside=bool(data.get("inside", False)),
            yaw=None if data.get("yaw") is None else float(data["yaw"]),
        )
    if kind == "set_state":
        return SetState(uid=str(data["uid"]), state=str(data["state"]))
    if kind == "done":
        return Done()
    raise PolicyFault(f"unknown skill {kind!r}")


# ---------------------------------------------------------------------------
# World state
# ---------------------------------------------------------------------------


@dataclass
class WorldState:
    table: TableSpec
    objects: dict[str, PlacedObject]
    valid_states: dict[str, tuple[str, ...]]
    effector: Point
    held: str | None = None
    held_box: Box3 | None = None
    held_state: str | None = None
    steps_used: int = 0
    path: list[Point] = field(default_factory=list)

    @classmethod
    def from_layout(cls, layout: Layout, scenario: TaskScenario, options: SimOptions) -> "WorldState":
        home = options.home(layout.table)
        return cls(
            table=layout.table,
            objects={o.uid: o for o in layout.objects},
            valid_states={a.uid: a.states for a in scenario.asset_pool},
            effector=home,
            path=[home],
        )

    def states(self) -> dict[str, str | None]:
        out = {uid: obj.state for uid, obj in self.objects.items()}
        if self.held is not None:
            out[self.held] = self.held_state
        return out

    def stats(self) -> dict[str, CloudStats]:
        return {uid: obj.stats() for uid, obj in self.objects.items()}

    def path_length(self) -> float:
        return polyline_length(self.path)

    def _extend(self, *points: Point) -> None:
        self.path.extend(points)
        self.effector = points[-1]


def polyline_length(points: list[Point]) -> float:
    return sum(
        math.dist(points[i], points[i + 1]) for i in range(len(points) - 1)
    )


def _corridor_top(
    state: WorldState, p_from: tuple[float, float], p_to: tuple[float, float], radius: float
) -> float:
    """Highest top among objects whose inflated footprint meets the 2D segment."""
    top = state.table.surface_z
    for obj in state.objects.values():
        min_x, min_y, max_x, max_y = obj.box.footprint()
        if _segment_hits_rect(
            p_from, p_to, (min_x - radius, min_y - radius, max_x + radius, max_y + radius)
        ):
            top = max(top, obj.box.top_z)
    return top


def _segment_hits_rect(p, q, rect) -> bool:
    min_x, min_y, max_x, max_y = rect
    # Coarse but conservative: sample along the segment at sub-radius spacing.
    length = math.hypot(q[0] - p[0], q[1] - p[1])
    steps = max(2, int(length / 0.02) + 1)
    for i in range(steps + 1):
        t = i / steps
        x = p[0] + t * (q[0] - p[0])
        y = p[1] + t * (q[1] - p[1])
        if min_x <= x <= max_x and min_y <= y <= max_y:
            return True
    return False


def _grasp_point(box: Box3) -> Point:
    return (box.center[0], box.center[1], box.top_z)


def _check_reach(state: WorldState, options: SimOptions, x: float, y: float) -> None:
    bx, by = options.arm_base(state.table)
    if math.hypot(x - bx, y - by) > options.reach_radius:
        raise OutOfReachFault(f"target ({x:.3f}, {y:.3f}) outside reach radius")


def apply_pick(state: WorldState, uid: str, options: SimOptions | None = None) -> WorldState:
    """Grasp ``uid`` at its top center, lifting over the approach corridor."""
    options = options or SimOptions()
    if state.held is not None:
        raise OccupiedHandFault(f"cannot pick {uid}: already holding {state.held}")
    obj = state.objects.get(uid)
    if obj is None:
        raise UnknownObjectFault(f"cannot pick unknown object {uid}")
    supported = sorted(o.uid for o in state.objects.values() if o.support_uid == uid)
    if supported:
        raise BlockedObjectFault(f"cannot pick {uid}: supporting {', '.join(supported)}")
    grasp = _grasp_point(obj.box)
    _check_reach(state, options, grasp[0], grasp[1])

    corridor = _corridor_top(
        state, (state.effector[0], state.effector[1]), (grasp[0], grasp[1]), options.hand_radius
    )
    z_clear = max(corridor + options.clearance, grasp[2], state.effector[2])
    pre_grasp = (grasp[0], grasp[1], z_clear)

    del state.objects[uid]
    state.held = uid
    state.held_box = obj.box
    state.held_state = obj.state
    state._extend(pre_grasp, grasp)
    return state


def apply_place(state: WorldState, place: Place, options: SimOptions | None = None,
                thresholds: RelationThresholds | None = None,
                rng: np.random.Generator | None = None) -> WorldState:
    """Lower the held object onto the table or its support, collision-checked."""
    options = options or SimOptions()
    th = thresholds or RelationThresholds()
    if state.held is None or state.held_box is None:
        raise EmptyHandFault("cannot place with an empty hand")

    if place.support_uid != TABLE_UID:
        support = state.objects.get(place.support_uid)
        if support is None:
            raise InvalidTargetFault(f"unknown support {place.support_uid}")
        bottom = interior_floor_z(support.box) if place.inside else support.box.top_z
        constraints = [
            (RelationLabel.IN if place.inside else RelationLabel.ON, place.support_uid)
        ]
    else:
        bottom = state.table.surface_z
        constraints = []

    half = state.held_box.half_extents
    yaw = state.held_box.yaw if place.yaw is None else place.yaw
    x, y = place.x, place.y
    if x is None or y is None:
        # Support given without coordinates: let the placement sampler choose.
        if place.support_uid == TABLE_UID:
            raise InvalidTargetFault("place on table requires explicit coordinates")
        rng = rng or np.random.default_rng(
            np.random.SeedSequence([state.steps_used, 0xA17])
        )
        probe = _PlacementAsset(half)
        candidate = find_placement(
            state.held, probe, constraints, state.objects, rng,
            state.table, th, LayoutOptions(max_attempts=100),
        )
        if candidate is None:
            raise InvalidTargetFault(f"no free spot on {place.support_uid}")
        x, y = candidate.center[0], candidate.center[1]
        yaw = candidate.yaw

    _check_reach(state, options, x, y)
    candidate = Box3((x, y, bottom + half[2]), half, yaw)
    ok = validate_placement(
        candidate, state.held, constraints, state.objects, th, state.table,
        workspace=None,
    )
    if not ok:
        raise InvalidTargetFault(
            f"placement at ({x:.3f}, {y:.3f}) collides, leaves the table, "
            f"or does not fit its support"
        )

    held_height = 2 * half[2]
    corridor = _corridor_top(
        state, (state.effector[0], state.effector[1]), (x, y),
        max(half[0], half[1]) + options.hand_radius,
    )
    z_clear = max(corridor + options.clearance + held_height, state.effector[2])
    end = (x, y, candidate.top_z)

    state.objects[state.held] = PlacedObject(
        uid=state.held, box=candidate, support_uid=place.support_uid, state=state.held_state
    )
    state.held = None
    state.held_box = None
    state.held_state = None
    state._extend((x, y, z_clear), end)
    return state


class _PlacementAsset:
    """Minimal footprint carrier for reusing the layout sampler on a held box."""

    def __init__(self, half: tuple[float, float, float]):
        self.footprint = (2 * half[0], 2 * half[1], 2 * half[2])


def apply_set_state(state: WorldState, uid: str, new_state: str,
                    options: SimOptions | None = None) -> WorldState:
    """Toggle an intra-object state by touching the object's top."""
    options = options or SimOptions()
    obj = state.objects.get(uid)
    if obj is None:
        raise UnknownObjectFault(f"cannot set state of unknown object {uid}")
    allowed = state.valid_states.get(uid, ())
    if new_state not in allowed:
        raise InvalidTargetFault(f"object {uid} has no state {new_state!r}")
    touch = _grasp_point(obj.box)
    _check_reach(state, options, touch[0], touch[1])
    corridor = _corridor_top(
        state, (state.effector[0], state.effector[1]), (touch[0], touch[1]), options.hand_radius
    )
    z_clear = max(corridor + options.clearance, touch[2], state.effector[2])
    state.objects[uid] = PlacedObject(uid=uid, box=obj.box, support_uid=obj.support_uid, state=new_state)
    state._extend((touch[0], touch[1], z_clear), touch)
    return state


# ---------------------------------------------------------------------------
# Episode runner
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Observation:
    instruction: str
    relations: frozenset
    poses: dict[str, dict]
    states: dict[str, str | None]
    held: str | None
    steps_used: int


class Policy(Protocol):
    name: str

    def reset(self, scenario: TaskScenario, layout: Layout) -> None: ...

    def decide(self, observation: Observation) -> SkillCall: ...


@dataclass
class EpisodeLog:
    scenario_id: str
    policy: str
    budget: int
    table: dict
    skills: list[dict]
    path: list[Point]
    p: float
    l: float
    termination: str  # done | budget_exhausted | skill_fault
    final_objects: list[dict]
    final_states: dict[str, str | None]
    held: str | None

    def to_dict(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "policy": self.policy,
            "budget": self.budget,
            "table": self.table,
            "skills": self.skills,
            "path": [list(p) for p in self.path],
            "p": self.p,
            "l": self.l,
            "termination": self.termination,
            "final_objects": self.final_objects,
            "final_states": self.final_states,
            "held": self.held,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EpisodeLog":
        return cls(
            scenario_id=data["scenario_id"],
            policy=data["policy"],
            budget=int(data["budget"]),
            table=dict(data["table"]),
            skills=list(data["skills"]),
            path=[tuple(p) for p in data["path"]],
            p=float(data["p"]),
            l=float(data["l"]),
            termination=data["termination"],
            final_objects=list(data["final_objects"]),
            final_states=dict(data["final_states"]),
            held=data.get("held"),
        )

    def final_layout(self) -> Layout:
        return Layout(
            table=TableSpec.from_dict(self.table),
            objects=[
                PlacedObject(
                    uid=o["uid"],
                    box=Box3(tuple(o["center"]), tuple(o["half_extents"]), o["yaw"]),
                    support_uid=o["support_uid"],
                    state=o.get("state"),
                )
                for o in self.final_objects
            ],
        )


def save_episode_log(log: EpisodeLog, path: str | Path) -> None:
    Path(path).write_text(json.dumps(log.to_dict(), indent=2) + "\n", encoding="utf-8")


def load_episode_log(path: str | Path) -> EpisodeLog:
    return EpisodeLog.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _observation(scenario: TaskScenario, state: WorldState, th: RelationThresholds) -> Observation:
    return Observation(
        instruction=scenario.instruction,
        relations=frozenset(
            (a, rel.value, b) for a, rel, b in relations_from_stats(state.stats(), th)
        ),
        poses={
            uid: {
                "center": list(obj.box.center),
                "half_extents": list(obj.box.half_extents),
                "yaw": obj.box.yaw,
                "support_uid": obj.support_uid,
            }
            for uid, obj in sorted(state.objects.items())
        },
        states=state.states(),
        held=state.held,
        steps_used=state.steps_used,
    )


def run_episode(
    scenario: TaskScenario,
    layout: Layout,
    policy: Policy,
    budget: int | None = None,
    options: SimOptions | None = None,
    thresholds: RelationThresholds | None = None,
) -> EpisodeLog:
    """Query the policy until Done, budget exhaustion, or a skill fault.

    Deterministic for a deterministic policy; faults are recorded, never
    raised past this function.
    """
    options = options or SimOptions()
    th = thresholds or RelationThresholds()
    limit = options.budget if budget is None else budget
    state = WorldState.from_layout(layout, scenario, options)
    policy.reset(scenario, layout)

    skills: list[dict] = []
    termination = "budget_exhausted"
    while True:
        if state.steps_used >= limit:
            termination = "budget_exhausted"
            break
        obs = _observation(scenario, state, th)
        try:
            skill = policy.decide(obs)
        except PolicyFault as exc:
            skills.append({"skill": "policy", "ok": False, "fault": str(exc)})
            termination = "skill_fault"
            break
        state.steps_used += 1
        entry = skill_to_dict(skill)
        if isinstance(skill, Done):
            entry["ok"] = True
            skills.append(entry)
            termination = "done"
            break
        try:
            if isinstance(skill, Pick):
                apply_pick(state, skill.uid, options)
            elif isinstance(skill, Place):
                apply_place(state, skill, options, th)
            elif isinstance(skill, SetState):
                apply_set_state(state, skill.uid, skill.state, options)
            else:
                raise PolicyFault(f"unknown skill object {skill!r}")
            entry["ok"] = True
            entry["fault"] = None
        except SkillFault as exc:
            entry["ok"] = False
            entry["fault"] = str(exc)
            skills.append(entry)
            termination = "skill_fault"
            break
        skills.append(entry)

    try:
        ideal = shortest_path_length(scenario, layout, options=options, thresholds=th)
    except (LayoutInfeasibleError, PolicyFault):
        ideal = 0.0

    return EpisodeLog(
        scenario_id=scenario.id,
        policy=getattr(policy, "name", type(policy).__name__),
        budget=limit,
        table=layout.table.to_dict(),
        skills=skills,
        path=list(state.path),
        p=state.path_length(),
        l=ideal,
        termination=termination,
        final_objects=[
            {
                "uid": o.uid,
                "center": list(o.box.center),
                "half_extents": list(o.box.half_extents),
                "yaw": o.box.yaw,
                "support_uid": o.support_uid,
                "state": o.state,
            }
            for o in state.objects.values()
        ],
        final_states=state.states(),
        held=state.held,
    )


# ---------------------------------------------------------------------------
# Demonstration planning (privileged-information oracle)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlanStep:
    kind: str  # "move" | "toggle"
    uid: str
    grasp: Point
    end: Point
    place: Place | None = None
    state: str | None = None


def _atom_holds(atom: GoalAtom, stats: dict[str, CloudStats],
                states: dict[str, str | None], th: RelationThresholds) -> bool:
    from .relations import between_from_stats, classify

    if atom.obj1_state is not None and states.get(atom.obj1_uid) != atom.obj1_state:
        return False
    if atom.relation is None:
        return True
    if atom.relation is RelationLabel.BETWEEN:
        a1, a2 = atom.anchor_uids()
        if atom.obj1_uid not in stats or a1 not in stats or a2 not in stats:
            return False
        return between_from_stats(stats[a1], stats[atom.obj1_uid], stats[a2], th)
    obj2 = atom.anchor_uids()[0]
    if atom.obj1_uid not in stats or obj2 not in stats:
        return False
    pair = classify(stats[atom.obj1_uid], stats[obj2], th)
    return pair.forward is atom.relation


def plan_demonstration(
    scenario: TaskScenario,
    layout: Layout,
    options: SimOptions | None = None,
    thresholds: RelationThresholds | None = None,
    layout_options: LayoutOptions | None = None,
) -> tuple[int, list[PlanStep]]:
    """Plan one demonstration achieving the first feasible goal disjunct.

    Deterministic in the scenario seed. Returns (disjunct index, steps);
    raises PolicyFault when no disjunct is achievable with pick/place/toggle.
    """
    options = options or SimOptions()
    th = thresholds or RelationThresholds()
    lopts = layout_options or LayoutOptions()
    pool = scenario.pool_map()
    failures: list[str] = []

    for d_idx, disjunct in enumerate(scenario.goals.disjuncts):
        objects = {o.uid: o for o in layout.objects}
        states = {o.uid: o.state for o in layout.objects}
        steps: list[PlanStep] = []
        pos = options.home(layout.table)
        feasible = True
        for a_idx, atom in enumerate(disjunct):
            stats = {uid: obj.stats() for uid, obj in objects.items()}
            if _atom_holds(atom, stats, states, th):
                continue
            if atom.obj1_state is not None and atom.relation is None:
                obj = objects.get(atom.obj1_uid)
                if obj is None:
                    feasible = False
                    failures.append(f"disjunct {d_idx}: {atom.obj1_uid} not in layout")
                    break
                touch = _grasp_point(obj.box)
                states[atom.obj1_uid] = atom.obj1_state
                objects[atom.obj1_uid] = PlacedObject(
                    obj.uid, obj.box, obj.support_uid, atom.obj1_state
                )
                steps.append(PlanStep("toggle", atom.obj1_uid, touch, touch, state=atom.obj1_state))
                pos = touch
                continue
            if atom.relation is RelationLabel.BETWEEN:
                feasible = False
                failures.append(f"disjunct {d_idx}: between atoms are not plannable")
                break

            mover_uid, relation, anchor_uid = atom.obj1_uid, atom.relation, atom.anchor_uids()[0]
            if relation in (RelationLabel.BENEATH, RelationLabel.OUT_OF):
                # (A beneath B) is achieved by moving B onto A; same for out_of/in.
                mover_uid, anchor_uid = anchor_uid, mover_uid
                relation = relation.inverse
            mover = objects.get(mover_uid)
            if mover is None or anchor_uid not in objects:
                feasible = False
                failures.append(f"disjunct {d_idx}: endpoints of atom {a_idx} not placed")
                break
            if any(o.support_uid == mover_uid for o in objects.values()):
                feasible = False
                failures.append(f"disjunct {d_idx}: {mover_uid} is loaded and cannot move")
                break
            others = {uid: obj for uid, obj in objects.items() if uid != mover_uid}
            rng = np.random.default_rng(
                np.random.SeedSequence(
                    [scenario.seed & 0xFFFFFFFFFFFFFFFF, 0xDE30, d_idx, a_idx]
                )
            )
            candidate = find_placement(
                mover_uid, pool[mover_uid], [(relation, anchor_uid)], others,
                rng, layout.table, th, lopts,
            )
            if candidate is None:
                feasible = False
                failures.append(
                    f"disjunct {d_idx}: no pose for {mover_uid} {relation.value} {anchor_uid}"
                )
                break
            grasp = _grasp_point(mover.box)
            end = (candidate.center[0], candidate.center[1], candidate.top_z)
            support = anchor_uid if relation in (RelationLabel.ON, RelationLabel.IN) else TABLE_UID
            place = Place(
                x=candidate.center[0], y=candidate.center[1],
                support_uid=support, inside=relation is RelationLabel.IN,
                yaw=candidate.yaw,
            )
            objects[mover_uid] = PlacedObject(mover_uid, candidate, support, mover.state)
            steps.append(PlanStep("move", mover_uid, grasp, end, place=place))
            pos = end

        if not feasible:
            continue
        final_stats = {uid: obj.stats() for uid, obj in objects.items()}
        if all(_atom_holds(atom, final_stats, states, th) for atom in disjunct):
            return d_idx, steps
        failures.append(f"disjunct {d_idx}: plan did not verify")

    raise PolicyFault(
        "no feasible demonstration: " + ("; ".join(failures) if failures else "no disjuncts")
    )


def shortest_path_length(
    scenario: TaskScenario,
    layout: Layout,
    options: SimOptions | None = None,
    thresholds: RelationThresholds | None = None,
) -> float:
    """Idealized minimal effector motion: straight chained segments
    home -> grasp -> target over the planned demonstration, no clearance."""
    options = options or SimOptions()
    try:
        _, steps = plan_demonstration(scenario, layout, options, thresholds)
    except PolicyFault as exc:
        raise LayoutInfeasibleError(f"no demonstration for {scenario.id}: {exc}") from exc
    pos = options.home(layout.table)
    total = 0.0
    for step in steps:
        total += math.dist(pos, step.grasp)
        if step.kind == "move":
            total += math.dist(step.grasp, step.end)
        pos = step.end
    return total
