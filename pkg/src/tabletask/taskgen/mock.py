"""Deterministic offline scenario generator.

Stands in for the text-generation service: emits template-driven scenarios
per task type that are valid by construction and comfortably layout-feasible,
so the whole pipeline runs without any external model. Goal atoms are made
initially false by placing the moved object on the contradicting side of its
anchor in the initial graph.
"""

from __future__ import annotations

import numpy as np

from ..catalog import AssetRecord
from ..errors import ScenarioSemanticError
from ..scenario import TaskScenario, TaskType, validate_scenario
from ..scenegraph import (
    GoalAtom,
    GoalConditionSet,
    RelationLabel,
    SceneGraph,
    SceneGraphEdge,
    SceneGraphNode,
)

_SIDES = (RelationLabel.LEFT, RelationLabel.RIGHT, RelationLabel.FRONT, RelationLabel.BACK)
_SIDE_PHRASE = {
    RelationLabel.LEFT: "to the left of",
    RelationLabel.RIGHT: "to the right of",
    RelationLabel.FRONT: "in front of",
    RelationLabel.BACK: "behind",
    RelationLabel.NEAR: "next to",
}
_STATE_VERB = {
    "open": "Open",
    "closed": "Close",
    "on": "Turn on",
    "off": "Turn off",
    "lit": "Light",
    "unlit": "Blow out",
}

# Size limits keeping every template comfortably solvable on the default table.
_MAX_ITEM_XY = 0.36
_SMALL_ITEM_XY = 0.16
_ON_FIT_MARGIN = 0.04
_IN_FIT_MARGIN = 0.03

# Budget for the total object run chained along one axis, after margins and
# the reachable-workspace cut of the default table.
_AXIS_LIMIT = {
    "x": 0.74,  # front/back runs along the 1.2 m extent
    "y": 0.54,  # left/right runs along the 0.8 m extent
}
_SIDE_AXIS = {
    RelationLabel.LEFT: "y",
    RelationLabel.RIGHT: "y",
    RelationLabel.FRONT: "x",
    RelationLabel.BACK: "x",
}
_RUN_GAP = 0.02

_TYPE_INDEX = {t: i for i, t in enumerate(TaskType)}


def _display(asset: AssetRecord) -> str:
    return asset.category.replace("_", " ")


def _is_small(asset: AssetRecord) -> bool:
    dx, dy, _ = asset.footprint
    return max(dx, dy) <= _SMALL_ITEM_XY


def _fits_on(target: AssetRecord, anchor: AssetRecord) -> bool:
    tx, ty, _ = target.footprint
    ax, ay, _ = anchor.footprint
    return min(ax, ay) >= max(tx, ty) + _ON_FIT_MARGIN


def _fits_in(target: AssetRecord, anchor: AssetRecord) -> bool:
    # Interior factors mirror the layout module's box-container geometry.
    if "container" not in anchor.tags:
        return False
    tx, ty, tz = target.footprint
    ax, ay, az = anchor.footprint
    return min(ax * 0.84, ay * 0.84) >= max(tx, ty) + _IN_FIT_MARGIN and tz < az * 0.88 - 0.005


class _Template:
    """Accumulates one scenario's picks, edges and goals deterministically."""

    def __init__(self, request, rng: np.random.Generator):
        self.request = request
        self.rng = rng
        usable = [a for a in request.pool if max(a.footprint[:2]) <= _MAX_ITEM_XY]
        self.candidates = sorted(usable, key=lambda a: a.uid)
        self.placed: list[AssetRecord] = []
        self.edges: list[SceneGraphEdge] = []
        self.initial_state: dict[str, str] = {}
        # Goal-relevant objects: never used as stacking bases and never stacked on.
        self.protected: set[str] = set()
        self.stacked: set[str] = set()
        self.stack_bases: set[str] = set()
        # Planar-relation chain depth per object; fillers only extend short chains
        # so layouts never need more lateral run than the table offers.
        self.chain_depth: dict[str, int] = {}
        # Side slots already promised around each object, including goal sides;
        # at most one neighbor per side keeps every band satisfiable.
        self.occupied: dict[str, set[RelationLabel]] = {}

    def take(self, pred=None, prefer=None) -> AssetRecord | None:
        chosen = [a for a in self.candidates if pred is None or pred(a)]
        if prefer is not None:
            preferred = [a for a in chosen if prefer(a)]
            if preferred:
                chosen = preferred
        if not chosen:
            return None
        asset = chosen[int(self.rng.integers(len(chosen)))]
        return self.take_specific(asset)

    def take_specific(self, asset: AssetRecord) -> AssetRecord:
        self.candidates.remove(asset)
        self.placed.append(asset)
        return asset

    def must_take(self, pred=None, prefer=None) -> AssetRecord:
        asset = self.take(pred=pred, prefer=prefer)
        if asset is None:
            raise ScenarioSemanticError(
                f"pool too small for the {self.request.task_type.value} template"
            )
        return asset

    def side(self, exclude: tuple[RelationLabel, ...] = ()) -> RelationLabel:
        options = [s for s in _SIDES if s not in exclude]
        return options[int(self.rng.integers(len(options)))]

    def goal_side(
        self,
        moved: AssetRecord,
        anchor: AssetRecord,
        exclude: tuple[RelationLabel, ...] = (),
    ) -> RelationLabel:
        """Side for a goal (or its contradicted initial edge): both the side and
        its mirror must be free around the anchor and the axis must have room
        for the moved object."""
        extent = min(moved.footprint[0], moved.footprint[1])
        options = [
            s for s in _SIDES
            if s not in exclude
            and self.side_free(anchor.uid, s)
            and self.side_free(anchor.uid, s.inverse)
            and self.run_fits(anchor.uid, s, extent)
        ]
        if not options:
            options = [
                s for s in _SIDES
                if s not in exclude
                and self.side_free(anchor.uid, s)
                and self.side_free(anchor.uid, s.inverse)
            ]
        if not options:
            raise ScenarioSemanticError("no free side around the goal anchor")
        return options[int(self.rng.integers(len(options)))]

    def reserve_side(self, uid: str, relation: RelationLabel) -> None:
        self.occupied.setdefault(uid, set()).add(relation)

    def side_free(self, uid: str, relation: RelationLabel) -> bool:
        return relation not in self.occupied.get(uid, set())

    def _extent(self, uid: str) -> float:
        asset = next(a for a in self.placed if a.uid == uid)
        return min(asset.footprint[0], asset.footprint[1])

    def axis_run(self, uid: str, axis: str) -> float:
        """Total extent of the relation chain through ``uid`` along one axis."""
        members = {uid}
        frontier = [uid]
        while frontier:
            current = frontier.pop()
            for e in self.edges:
                if _SIDE_AXIS.get(e.relation) != axis:
                    continue
                for other in (e.object_uid, e.anchor_uid):
                    if current in (e.object_uid, e.anchor_uid) and other not in members:
                        members.add(other)
                        frontier.append(other)
        return sum(self._extent(m) for m in members) + _RUN_GAP * (len(members) - 1)

    def run_fits(self, uid: str, relation: RelationLabel, new_extent: float) -> bool:
        axis = _SIDE_AXIS.get(relation)
        if axis is None:
            return True
        return self.axis_run(uid, axis) + _RUN_GAP + new_extent <= _AXIS_LIMIT[axis]

    def add_edge(self, obj_uid: str, relation: RelationLabel, anchor_uid: str) -> None:
        self.edges.append(SceneGraphEdge(obj_uid, relation, anchor_uid))
        if relation in _SIDES or relation is RelationLabel.NEAR:
            self.chain_depth[obj_uid] = max(
                self.chain_depth.get(obj_uid, 0),
                self.chain_depth.get(anchor_uid, 0) + 1,
            )
        if relation in _SIDES:
            # The object sits on this side of the anchor and vice versa.
            self.reserve_side(anchor_uid, relation)
            self.reserve_side(obj_uid, relation.inverse)

    def _filler_slots(self, filler: AssetRecord) -> list[tuple[str, RelationLabel]]:
        """(anchor, side) pairs a filler edge may still claim."""
        f_extent = min(filler.footprint[0], filler.footprint[1])
        slots = []
        for a in self.placed:
            if a.uid == filler.uid or a.uid in self.stacked:
                continue
            if self.chain_depth.get(a.uid, 0) >= 2:
                continue
            # Side bands of much smaller anchors cannot host this filler.
            if f_extent > min(a.footprint[0], a.footprint[1]) + 0.12:
                continue
            for side in _SIDES:
                if self.side_free(a.uid, side) and self.run_fits(a.uid, side, f_extent):
                    slots.append((a.uid, side))
        return slots

    def fill_to(self, count: int) -> None:
        """Add filler objects, each with one planar edge claiming a free side of
        an earlier object; occasionally stack a small filler on an unprotected
        wide one. Fillers with no free slot stay unconstrained."""
        while len(self.placed) < count:
            filler = self.take()
            if filler is None:
                return
            base = next(
                (
                    a for a in self.placed
                    if a.uid != filler.uid
                    and a.uid not in self.protected
                    and a.uid not in self.stacked
                    and a.uid not in self.stack_bases
                    and _fits_on(filler, a)
                ),
                None,
            )
            if base is not None and self.rng.random() < 0.3:
                self.add_edge(filler.uid, RelationLabel.ON, base.uid)
                self.stacked.add(filler.uid)  # not a planar anchor from here on
                self.stack_bases.add(base.uid)
                continue
            slots = self._filler_slots(filler)
            if slots:
                anchor_uid, side = slots[int(self.rng.integers(len(slots)))]
                self.add_edge(filler.uid, side, anchor_uid)

    def pick_initial_states(self, pinned: dict[str, str] | None = None) -> None:
        pinned = pinned or {}
        for asset in self.placed:
            if not asset.states:
                continue
            if asset.uid in pinned:
                self.initial_state[asset.uid] = pinned[asset.uid]
            else:
                self.initial_state[asset.uid] = asset.states[
                    int(self.rng.integers(len(asset.states)))
                ]

    def build(self, instruction: str, goals: GoalConditionSet) -> TaskScenario:
        names = ", ".join(a.name.lower() for a in self.placed)
        description = f"A tabletop scene with {len(self.placed)} objects: {names}."
        nodes = tuple(
            SceneGraphNode(a.uid, self.initial_state.get(a.uid)) for a in self.placed
        )
        graph = SceneGraph(description=description, nodes=nodes, edges=tuple(self.edges))
        scenario = TaskScenario(
            id=scenario_id_for(self.request),
            task_type=self.request.task_type,
            instruction=instruction,
            scene_graph=graph,
            goals=goals,
            asset_pool=tuple(self.request.pool),
            seed=self.request.seed,
        )
        validate_scenario(scenario)
        return scenario


def scenario_id_for(request) -> str:
    return f"{request.task_type.value}-{request.seed:012d}"


_PROBE_ATTEMPTS = 8


def mock_generate(request, horizon: int | None = None) -> TaskScenario:
    """Template-driven scenario for the request's task type.

    ``horizon`` overrides the number of chained goal atoms for long-horizon
    scenarios (default: 2 or 3, seed-dependent). Every emitted scenario is
    probed end to end on the default table: the layout must construct AND
    admit a planned demonstration. The template re-rolls deterministically on
    the rare draw that fails either probe.
    """
    from ..errors import LayoutInfeasibleError, PolicyFault
    from ..layout import construct_layout
    from ..sim import plan_demonstration

    last: TaskScenario | None = None
    for attempt in range(_PROBE_ATTEMPTS):
        rng = np.random.default_rng(
            np.random.SeedSequence(
                [
                    request.seed & 0xFFFFFFFFFFFFFFFF,
                    _TYPE_INDEX[request.task_type],
                    0x51AB,
                    attempt,
                ]
            )
        )
        t = _Template(request, rng)
        if request.task_type is TaskType.SPATIAL:
            scenario = _spatial(t)
        elif request.task_type is TaskType.APPEARANCE:
            scenario = _appearance(t)
        elif request.task_type is TaskType.COMMON_SENSE:
            scenario = _common_sense(t)
        else:
            scenario = _long_horizon(t, horizon)
        try:
            layout = construct_layout(scenario)
            plan_demonstration(scenario, layout)
            return scenario
        except (LayoutInfeasibleError, PolicyFault):
            last = scenario
    return last  # overwhelmingly unlikely; the caller's probe has the last word


def _spatial(t: _Template) -> TaskScenario:
    anchor = t.must_take()
    target = t.must_take(prefer=_is_small)
    goal_rel = t.goal_side(target, anchor)
    a_extent = min(anchor.footprint[0], anchor.footprint[1])
    if _SIDE_AXIS[goal_rel] == "x":
        # The anchor-secondary edge lands on the tight y axis; keep it short.
        secondary = t.take(
            pred=lambda a: min(a.footprint[0], a.footprint[1]) + a_extent + 2 * _RUN_GAP
            <= _AXIS_LIMIT["y"],
            prefer=_is_small,
        ) or t.must_take(prefer=_is_small)
    else:
        secondary = t.must_take()
    t.protected.update({secondary.uid, anchor.uid, target.uid})

    # Perpendicular to the goal axis, so the goal band and its contradicted
    # initial band stay free around the anchor.
    anchor_side = t.goal_side(anchor, secondary, exclude=(goal_rel, goal_rel.inverse))
    t.add_edge(anchor.uid, anchor_side, secondary.uid)
    t.add_edge(target.uid, goal_rel.inverse, anchor.uid)
    t.reserve_side(anchor.uid, goal_rel)
    t.fill_to(t.request.num_objects_min)
    t.pick_initial_states()

    disjuncts = [(GoalAtom(target.uid, relation=goal_rel, obj2_uid=anchor.uid),)]
    if t.rng.random() < 0.25:
        alt = t.side(exclude=(goal_rel, goal_rel.inverse))
        disjuncts.append((GoalAtom(target.uid, relation=alt, obj2_uid=anchor.uid),))
    goals = GoalConditionSet(tuple(disjuncts))
    instruction = (
        f"Move the {target.name.lower()} {_SIDE_PHRASE[goal_rel]} "
        f"the {_display(anchor)} that is {_SIDE_PHRASE[anchor_side]} "
        f"the {secondary.name.lower()}."
    )
    return t.build(instruction, goals)


def _appearance(t: _Template) -> TaskScenario:
    # Prefer a small target that has a same-category, differently colored mate.
    target = distractor = None
    by_category: dict[str, list[AssetRecord]] = {}
    for a in t.candidates:
        by_category.setdefault(a.category, []).append(a)
    for category in sorted(by_category):
        group = by_category[category]
        for cand in (a for a in group if _is_small(a)):
            mate = next((m for m in group if m.color != cand.color), None)
            if mate is not None:
                target = t.take_specific(cand)
                distractor = t.take_specific(mate)
                break
        if target is not None:
            break
    if target is None:
        target = t.must_take(prefer=_is_small)

    anchor = t.take(pred=lambda a: _fits_on(target, a), prefer=lambda a: "surface" in a.tags)
    if anchor is not None:
        goal_rel: RelationLabel = RelationLabel.ON
        contradiction = t.side()
        placement = f"on the {anchor.name.lower()}"
    else:
        anchor = t.must_take()
        goal_rel = t.goal_side(target, anchor)
        contradiction = goal_rel.inverse
        placement = f"{_SIDE_PHRASE[goal_rel]} the {anchor.name.lower()}"
    t.protected.update({target.uid, anchor.uid})

    t.add_edge(target.uid, contradiction, anchor.uid)
    if goal_rel is not RelationLabel.ON:
        t.reserve_side(anchor.uid, goal_rel)
    if distractor is not None:
        t.add_edge(distractor.uid, t.side(exclude=(contradiction.inverse,)), target.uid)
    t.fill_to(t.request.num_objects_min)
    t.pick_initial_states()

    goals = GoalConditionSet(
        ((GoalAtom(target.uid, relation=goal_rel, obj2_uid=anchor.uid),),)
    )
    instruction = (
        f"Find the {target.color} {target.material} {_display(target)} "
        f"with the {target.shape} profile and place it {placement}."
    )
    return t.build(instruction, goals)


def _common_sense(t: _Template) -> TaskScenario:
    stateful = [a for a in t.candidates if len(a.states) >= 2]
    food = [a for a in t.candidates if "food" in a.tags and _is_small(a)]
    stow_pairs = [
        (f, c) for f in food for c in t.candidates if c is not f and _fits_in(f, c)
    ]
    serve_pairs = [
        (f, s) for f in food for s in t.candidates
        if s is not f and "surface" in s.tags and _fits_on(f, s)
    ]
    variants = []
    if stateful:
        variants.append("state")
    if stow_pairs:
        variants.append("stow")
    if serve_pairs:
        variants.append("serve")
    if not variants:
        variants.append("tidy")
    variant = variants[int(t.rng.integers(len(variants)))]

    if variant == "state":
        obj = t.take_specific(stateful[int(t.rng.integers(len(stateful)))])
        t.protected.add(obj.uid)
        goal_state, initial = obj.states[0], obj.states[1]
        if t.rng.random() < 0.5:
            goal_state, initial = initial, goal_state
        t.fill_to(t.request.num_objects_min)
        t.pick_initial_states({obj.uid: initial})
        goals = GoalConditionSet(((GoalAtom(obj.uid, obj1_state=goal_state),),))
        verb = _STATE_VERB.get(goal_state)
        if verb is None:
            instruction = f"You are done with the {_display(obj)}. Set it to {goal_state}."
        else:
            instruction = f"You are done with the {_display(obj)}. {verb} it."
        return t.build(instruction, goals)

    if variant == "stow":
        target, anchor = stow_pairs[int(t.rng.integers(len(stow_pairs)))]
        relation = RelationLabel.IN
        instruction = (
            f"The {_display(target)} is out on the table; put it away "
            f"inside the {_display(anchor)}."
        )
    elif variant == "serve":
        target, anchor = serve_pairs[int(t.rng.integers(len(serve_pairs)))]
        relation = RelationLabel.ON
        instruction = f"Serve the {_display(target)}: set it on the {_display(anchor)}."
    else:
        target = t.must_take(prefer=_is_small)
        fit = [a for a in t.candidates if _fits_on(target, a)]
        if fit:
            anchor = t.take_specific(fit[int(t.rng.integers(len(fit)))])
            relation = RelationLabel.ON
            instruction = f"Tidy up: the {_display(target)} belongs on the {_display(anchor)}."
        else:
            anchor = t.must_take()
            relation = t.goal_side(target, anchor)
            instruction = (
                f"Tidy up: the {_display(target)} belongs "
                f"{_SIDE_PHRASE[relation]} the {_display(anchor)}."
            )
        t.protected.update({target.uid, anchor.uid})
        if relation in _SIDES:
            t.add_edge(target.uid, relation.inverse, anchor.uid)
            t.reserve_side(anchor.uid, relation)
        else:
            t.add_edge(target.uid, t.side(), anchor.uid)
        t.fill_to(t.request.num_objects_min)
        t.pick_initial_states()
        goals = GoalConditionSet(((GoalAtom(target.uid, relation=relation, obj2_uid=anchor.uid),),))
        return t.build(instruction, goals)

    t.take_specific(target)
    t.take_specific(anchor)
    t.protected.update({target.uid, anchor.uid})
    t.add_edge(target.uid, t.side(), anchor.uid)
    t.fill_to(t.request.num_objects_min)
    t.pick_initial_states()
    goals = GoalConditionSet(((GoalAtom(target.uid, relation=relation, obj2_uid=anchor.uid),),))
    return t.build(instruction, goals)


def _long_horizon(t: _Template, horizon: int | None) -> TaskScenario:
    h = horizon if horizon is not None else int(t.rng.integers(2, 4))
    if h < 1:
        raise ScenarioSemanticError("horizon must be at least 1")
    movers = [t.must_take(prefer=_is_small) for _ in range(h)]
    anchors = [t.must_take() for _ in range(h)]
    t.protected.update(a.uid for a in movers + anchors)

    atoms = []
    steps = []
    for mover, anchor in zip(movers, anchors):
        rel = t.goal_side(mover, anchor)
        t.add_edge(mover.uid, rel.inverse, anchor.uid)
        t.reserve_side(anchor.uid, rel)
        atoms.append(GoalAtom(mover.uid, relation=rel, obj2_uid=anchor.uid))
        steps.append(
            f"move the {mover.name.lower()} {_SIDE_PHRASE[rel]} the {anchor.name.lower()}"
        )

    t.fill_to(max(t.request.num_objects_min, 2 * h))
    t.pick_initial_states()
    goals = GoalConditionSet((tuple(atoms),))
    if len(steps) == 1:
        instruction = steps[0].capitalize() + "."
    elif len(steps) == 2:
        instruction = f"First, {steps[0]}; then, {steps[1]}."
    else:
        middle = "; then, ".join(steps[1:-1])
        instruction = f"First, {steps[0]}; then, {middle}; finally, {steps[-1]}."
    return t.build(instruction, goals)
