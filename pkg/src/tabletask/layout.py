"""Constraint-based layout construction.

Realizes a scene graph as concrete collision-free poses on a bounded table:
objects are sorted into topological levels by their on/in support edges,
then placed level by level with rejection sampling inside the feasible
region each relational constraint implies. Candidates that fail to
re-verify under relation inference are discarded, so every layout that
comes out of here reproduces its source graph's edges.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .catalog import AssetRecord
from .errors import GraphCycleError, LayoutInfeasibleError
from .geometry import Box3, effective_half_extents, interval_overlap
from .relations import CloudStats, RelationThresholds, classify, relations_from_stats
from .scenegraph import (
    SUPPORT_RELATIONS,
    RelationLabel,
    SceneGraph,
)
from .scenario import TaskScenario

TABLE_UID = "table"
DEFAULT_REACH_RADIUS = 0.85

# Box-proxy container geometry: fraction of each horizontal extent taken by
# the walls, and of the height taken by the floor.
INTERIOR_WALL_FRACTION = 0.08
INTERIOR_FLOOR_FRACTION = 0.12

SUPPORT_REST_TOLERANCE = 1e-6


@dataclass(frozen=True)
class TableSpec:
    extent_x: float = 1.2
    extent_y: float = 0.8
    surface_z: float = 0.0
    margin: float = 0.05

    def __post_init__(self):
        if self.margin <= 0 or min(self.extent_x, self.extent_y) <= 2 * self.margin:
            raise ValueError("table extents must exceed twice the margin")

    def usable_rect(self) -> tuple[float, float, float, float]:
        """(min_x, min_y, max_x, max_y) of the placeable area."""
        return (
            -self.extent_x / 2 + self.margin,
            -self.extent_y / 2 + self.margin,
            self.extent_x / 2 - self.margin,
            self.extent_y / 2 - self.margin,
        )

    def to_dict(self) -> dict:
        return {
            "extent_x": self.extent_x,
            "extent_y": self.extent_y,
            "surface_z": self.surface_z,
            "margin": self.margin,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TableSpec":
        return cls(
            extent_x=float(data["extent_x"]),
            extent_y=float(data["extent_y"]),
            surface_z=float(data["surface_z"]),
            margin=float(data["margin"]),
        )


@dataclass(frozen=True)
class Workspace:
    """Reachable disk for placements, so layouts stay executable by the arm."""

    base_x: float
    base_y: float
    radius: float = DEFAULT_REACH_RADIUS
    margin: float = 0.03

    def reachable(self, x: float, y: float) -> bool:
        return math.hypot(x - self.base_x, y - self.base_y) <= self.radius - self.margin


def default_workspace(table: TableSpec, radius: float = DEFAULT_REACH_RADIUS) -> Workspace:
    """Arm base at the midpoint of the table's long edge nearer the robot."""
    return Workspace(base_x=0.0, base_y=-table.extent_y / 2, radius=radius)


@dataclass(frozen=True)
class LayoutOptions:
    max_attempts: int = 200
    retry_rounds: int = 5
    sibling_clearance: float = 0.002
    use_workspace: bool = True
    reach_radius: float = DEFAULT_REACH_RADIUS


@dataclass(frozen=True)
class PlacedObject:
    uid: str
    box: Box3
    support_uid: str = TABLE_UID
    state: str | None = None

    def cloud(self) -> np.ndarray:
        """Deterministic 8-corner cloud; pins AABB and centroid exactly."""
        return self.box.corners()

    def stats(self) -> CloudStats:
        c = self.box.center
        return CloudStats(self.box.aabb_min, self.box.aabb_max, (c[0], c[1], c[2]))


@dataclass
class Layout:
    table: TableSpec
    objects: list[PlacedObject]
    seed: int = 0

    def by_uid(self) -> dict[str, PlacedObject]:
        return {o.uid: o for o in self.objects}

    def to_dict(self) -> dict:
        return {
            "table": self.table.to_dict(),
            "seed": self.seed,
            "objects": [
                {
                    "uid": o.uid,
                    "center": list(o.box.center),
                    "half_extents": list(o.box.half_extents),
                    "yaw": o.box.yaw,
                    "support_uid": o.support_uid,
                    "state": o.state if o.state is not None else "none",
                }
                for o in self.objects
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Layout":
        table = TableSpec.from_dict(data["table"])
        objects = []
        for entry in data["objects"]:
            state = entry.get("state", "none")
            objects.append(
                PlacedObject(
                    uid=str(entry["uid"]),
                    box=Box3(
                        tuple(float(v) for v in entry["center"]),
                        tuple(float(v) for v in entry["half_extents"]),
                        float(entry.get("yaw", 0.0)),
                    ),
                    support_uid=str(entry.get("support_uid", TABLE_UID)),
                    state=None if state in (None, "none") else str(state),
                )
            )
        layout = cls(table=table, objects=objects, seed=int(data.get("seed", 0)))
        _check_support_rest(layout)
        return layout


def _check_support_rest(layout: Layout) -> None:
    by_uid = layout.by_uid()
    for obj in layout.objects:
        if obj.support_uid == TABLE_UID:
            gap = obj.box.bottom_z - layout.table.surface_z
            expected = "table surface"
        else:
            support = by_uid.get(obj.support_uid)
            if support is None:
                raise LayoutInfeasibleError(
                    f"object {obj.uid} rests on unknown support {obj.support_uid}"
                )
            on_gap = obj.box.bottom_z - support.box.top_z
            in_gap = obj.box.bottom_z - interior_floor_z(support.box)
            gap = on_gap if abs(on_gap) <= abs(in_gap) else in_gap
            expected = f"support {obj.support_uid}"
        if abs(gap) > SUPPORT_REST_TOLERANCE:
            raise LayoutInfeasibleError(
                f"object {obj.uid} does not rest on {expected} (gap {gap:.2e} m)"
            )


def save_layout(layout: Layout, path: str | Path) -> None:
    Path(path).write_text(json.dumps(layout.to_dict(), indent=2) + "\n", encoding="utf-8")


def load_layout(path: str | Path) -> Layout:
    return Layout.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def interior_floor_z(container: Box3) -> float:
    height = container.aabb_max[2] - container.aabb_min[2]
    return container.aabb_min[2] + INTERIOR_FLOOR_FRACTION * height


def interior_rect(container: Box3) -> tuple[float, float, float, float]:
    min_x, min_y, max_x, max_y = container.footprint()
    inset_x = INTERIOR_WALL_FRACTION * (max_x - min_x)
    inset_y = INTERIOR_WALL_FRACTION * (max_y - min_y)
    return (min_x + inset_x, min_y + inset_y, max_x - inset_x, max_y - inset_y)


# ---------------------------------------------------------------------------
# Topological ordering
# ---------------------------------------------------------------------------


def topological_levels(graph: SceneGraph) -> list[list[str]]:
    """Group objects by support depth: level 0 rests on the table, an object
    lands at level k+1 once all of its supports sit at levels <= k. Levels are
    sorted lexicographically for determinism."""
    uids = sorted(graph.node_uids())
    supports: dict[str, set[str]] = {uid: set() for uid in uids}
    for edge in graph.edges:
        if edge.relation in SUPPORT_RELATIONS:
            supports[edge.object_uid].add(edge.anchor_uid)

    level_of: dict[str, int] = {}
    remaining = set(uids)
    current = 0
    while remaining:
        ready = sorted(
            uid
            for uid in remaining
            if all(dep in level_of for dep in supports[uid])
        )
        if not ready:
            cyclic = ", ".join(sorted(remaining))
            raise GraphCycleError(f"support relations contain a cycle among: {cyclic}")
        for uid in ready:
            depth = max((level_of[d] + 1 for d in supports[uid]), default=0)
            level_of[uid] = depth
        remaining -= set(ready)
        current += 1

    depth_max = max(level_of.values(), default=0)
    levels = [[] for _ in range(depth_max + 1)]
    for uid in uids:
        levels[level_of[uid]].append(uid)
    return [sorted(level) for level in levels if level]


PlacementConstraint = tuple[RelationLabel, str]


def constraints_for(
    uid: str, graph: SceneGraph, placed: dict[str, PlacedObject]
) -> list[PlacementConstraint]:
    """Constraints incident to ``uid`` whose other endpoint is already placed.

    Edges anchored on ``uid`` contribute their inverse. Edges between two
    unplaced objects defer until the second endpoint is placed. Support
    constraints sort first so the sampler sees them as primary.
    """
    out: list[PlacementConstraint] = []
    for edge in graph.edges:
        if edge.object_uid == uid and edge.anchor_uid in placed:
            out.append((edge.relation, edge.anchor_uid))
        elif edge.anchor_uid == uid and edge.object_uid in placed:
            out.append((edge.relation.inverse, edge.object_uid))
    out.sort(key=lambda c: (c[0] not in SUPPORT_RELATIONS, c[0].value, c[1]))
    return out


def placement_order(graph: SceneGraph, levels: list[list[str]]) -> list[str]:
    """Order objects so every anchor precedes the objects constrained to it.

    Support levels give the coarse order; planar edges refine it so each
    placement sees its own constraints instead of accumulated inverse ones.
    When planar edges form a cycle, the remainder falls back to level+lex
    order and the retry loop deals with the inverse constraints.
    """
    level_index = {uid: i for i, lvl in enumerate(levels) for uid in lvl}
    deps: dict[str, set[str]] = {uid: set() for uid in level_index}
    for edge in graph.edges:
        deps[edge.object_uid].add(edge.anchor_uid)
    order: list[str] = []
    done: set[str] = set()
    remaining = set(level_index)
    while remaining:
        ready = sorted(
            (uid for uid in remaining if deps[uid] <= done),
            key=lambda u: (level_index[u], u),
        )
        if not ready:
            order.extend(sorted(remaining, key=lambda u: (level_index[u], u)))
            break
        for uid in ready:
            order.append(uid)
            done.add(uid)
        remaining -= set(ready)
    return order


def _unplaced_dependents(
    uid: str, graph: SceneGraph, placed: dict[str, PlacedObject]
) -> list[tuple[RelationLabel, str]]:
    out = []
    for edge in graph.edges:
        if edge.object_uid == uid and edge.anchor_uid not in placed:
            out.append((edge.relation.inverse, edge.anchor_uid))
        elif edge.anchor_uid == uid and edge.object_uid not in placed:
            out.append((edge.relation, edge.object_uid))
    return out


def pending_dependents(
    uid: str,
    graph: SceneGraph,
    placed: dict[str, PlacedObject],
    pool: dict[str, AssetRecord],
) -> list["PendingDependent"]:
    """Room to reserve beside ``uid`` for neighbors that are not placed yet.

    Chains of same-direction relations accumulate: "C left of A left of this"
    reserves the full run of both objects plus their gaps, so the chain never
    starts against the table edge.
    """

    def chain_room(u: str, relation: RelationLabel, visited: frozenset[str]) -> float:
        total = 0.0
        for rel2, other in _unplaced_dependents(u, graph, placed):
            if rel2 is not relation or other in visited:
                continue
            dep = pool[other]
            extent = min(dep.footprint[0], dep.footprint[1])
            total = max(
                total,
                _LINK_GAP + extent + chain_room(other, relation, visited | {other}),
            )
        return total

    out: list[PendingDependent] = []
    for relation, other in _unplaced_dependents(uid, graph, placed):
        if relation not in _SIDE_DIRECTION:
            continue
        dep = pool[other]
        extent = min(dep.footprint[0], dep.footprint[1])
        room = _LINK_GAP + extent + chain_room(other, relation, frozenset({uid, other}))
        out.append((relation, room))
    return out


# ---------------------------------------------------------------------------
# Candidate sampling
# ---------------------------------------------------------------------------

_GAP_MIN = 0.002  # strict separation so side relations never degenerate to touching
_GAP_SLACK = 0.005  # keep sampled gaps clear of the xy_close boundary
_OVERLAP_MARGIN = 0.004  # minimum shared shadow so overlap checks stay strict
_LINK_GAP = 0.03  # reserved gap per chained dependent; samplers bias low to fit
_EDGE_KEEPOUT = 0.10  # first-tier placements prefer the table core

# A dependent waiting to be placed on one side of this object: the relation it
# will need (from this object's perspective) and the total room its chain needs.
PendingDependent = tuple[RelationLabel, float]

_SIDE_DIRECTION = {
    RelationLabel.LEFT: (0.0, 1.0),
    RelationLabel.RIGHT: (0.0, -1.0),
    RelationLabel.FRONT: (1.0, 0.0),
    RelationLabel.BACK: (-1.0, 0.0),
}


def _sample_interval(rng: np.random.Generator, lo: float, hi: float) -> float | None:
    if hi < lo:
        return None
    if hi == lo:
        return lo
    return float(rng.uniform(lo, hi))


def _sample_gap(rng: np.random.Generator, gap_hi: float) -> float:
    """Side-relation gap below the close threshold, biased toward small gaps
    so chained placements fit in the room reserved for them."""
    u = float(rng.random())
    return _GAP_MIN + (gap_hi - _GAP_MIN) * u * u


def _center_bounds(
    table: TableSpec,
    eff: tuple[float, float, float],
    pending: list[PendingDependent],
    th: RelationThresholds,
    keepout: float = 0.0,
) -> tuple[float, float, float, float] | None:
    """Bounds for the candidate center: inside the usable rect shrunk by the
    edge keepout, leaving room at each side where a dependent still has to land."""
    t_min_x, t_min_y, t_max_x, t_max_y = table.usable_rect()
    min_x, min_y = t_min_x + eff[0] + keepout, t_min_y + eff[1] + keepout
    max_x, max_y = t_max_x - eff[0] - keepout, t_max_y - eff[1] - keepout
    for relation, room in pending:
        if relation is RelationLabel.LEFT:
            max_y = min(max_y, t_max_y - room - eff[1])
        elif relation is RelationLabel.RIGHT:
            min_y = max(min_y, t_min_y + room + eff[1])
        elif relation is RelationLabel.FRONT:
            max_x = min(max_x, t_max_x - room - eff[0])
        elif relation is RelationLabel.BACK:
            min_x = max(min_x, t_min_x + room + eff[0])
    if min_x > max_x or min_y > max_y:
        return None
    return (min_x, min_y, max_x, max_y)


def _pending_reach_ok(
    x: float,
    y: float,
    eff: tuple[float, float, float],
    pending: list[PendingDependent],
    workspace: Workspace | None,
    th: RelationThresholds,
) -> bool:
    """The far end of each side dependent's chain must stay reachable too."""
    if workspace is None:
        return True
    for relation, room in pending:
        direction = _SIDE_DIRECTION.get(relation)
        if direction is None:
            continue
        axis_eff = eff[1] if direction[0] == 0.0 else eff[0]
        offset = axis_eff + max(room - 0.05, 0.02)
        if not workspace.reachable(x + direction[0] * offset, y + direction[1] * offset):
            return False
    return True


def _sample_xy(
    relation: RelationLabel,
    anchor: Box3,
    eff: tuple[float, float, float],
    th: RelationThresholds,
    bounds: tuple[float, float, float, float],
    rng: np.random.Generator,
) -> tuple[float, float] | None:
    """Draw a candidate center in the feasible region of one constraint;
    ``bounds`` is the already-shrunk center rectangle."""
    ehx, ehy, _ = eff
    a_min_x, a_min_y, a_max_x, a_max_y = anchor.footprint()
    c_min_x, c_min_y, c_max_x, c_max_y = bounds
    gap_hi = th.xy_close - _GAP_SLACK
    if gap_hi <= _GAP_MIN:
        gap_hi = th.xy_close * 0.8

    if relation is RelationLabel.ON:
        x = _sample_interval(rng, max(a_min_x + ehx, c_min_x), min(a_max_x - ehx, c_max_x))
        y = _sample_interval(rng, max(a_min_y + ehy, c_min_y), min(a_max_y - ehy, c_max_y))
        return None if x is None or y is None else (x, y)

    if relation is RelationLabel.IN:
        i_min_x, i_min_y, i_max_x, i_max_y = interior_rect(anchor)
        x = _sample_interval(rng, i_min_x + ehx, i_max_x - ehx)
        y = _sample_interval(rng, i_min_y + ehy, i_max_y - ehy)
        return None if x is None or y is None else (x, y)

    if relation in (RelationLabel.LEFT, RelationLabel.RIGHT):
        # Separated along y, shadows overlapping along x.
        x = _sample_interval(
            rng,
            max(a_min_x - ehx + _OVERLAP_MARGIN, c_min_x),
            min(a_max_x + ehx - _OVERLAP_MARGIN, c_max_x),
        )
        gap = _sample_gap(rng, gap_hi)
        if x is None:
            return None
        y = a_max_y + ehy + gap if relation is RelationLabel.LEFT else a_min_y - ehy - gap
        return (x, y) if c_min_y <= y <= c_max_y else None

    if relation in (RelationLabel.FRONT, RelationLabel.BACK):
        # Separated along x, shadows overlapping along y.
        y = _sample_interval(
            rng,
            max(a_min_y - ehy + _OVERLAP_MARGIN, c_min_y),
            min(a_max_y + ehy - _OVERLAP_MARGIN, c_max_y),
        )
        gap = _sample_gap(rng, gap_hi)
        if y is None:
            return None
        x = a_max_x + ehx + gap if relation is RelationLabel.FRONT else a_min_x - ehx - gap
        return (x, y) if c_min_x <= x <= c_max_x else None

    if relation is RelationLabel.NEAR:
        # Diagonal offset: both interval pairs disjoint, corner gap within
        # the close threshold, so the chain falls through to "near".
        total = _sample_interval(rng, 2 * _GAP_MIN, gap_hi)
        if total is None:
            return None
        theta = float(rng.uniform(0.3, math.pi / 2 - 0.3))
        gx = max(_GAP_MIN, total * math.cos(theta))
        gy = max(_GAP_MIN, total * math.sin(theta))
        x = a_max_x + ehx + gx if rng.integers(2) else a_min_x - ehx - gx
        y = a_max_y + ehy + gy if rng.integers(2) else a_min_y - ehy - gy
        if c_min_x <= x <= c_max_x and c_min_y <= y <= c_max_y:
            return (x, y)
        return None

    return None  # beneath/out_of/between never drive placement directly


def _support_bottom_z(relation: RelationLabel | None, anchor: Box3 | None, table: TableSpec) -> float:
    if anchor is None:
        return table.surface_z
    if relation is RelationLabel.IN:
        return interior_floor_z(anchor)
    return anchor.top_z


def validate_placement(
    candidate: Box3,
    uid: str,
    constraints: list[PlacementConstraint],
    placed: dict[str, PlacedObject],
    thresholds: RelationThresholds,
    table: TableSpec,
    workspace: Workspace | None = None,
    sibling_clearance: float = 0.002,
    keepouts: list[tuple[float, float, float, float]] | None = None,
) -> bool:
    """True iff the candidate is in bounds, reachable, collision-free against
    its siblings, fits its support, outside every reserved region, and
    re-verifies every constraint whose other endpoint is placed under
    relation inference."""
    t_min_x, t_min_y, t_max_x, t_max_y = table.usable_rect()
    c_min_x, c_min_y, c_max_x, c_max_y = candidate.footprint()
    if c_min_x < t_min_x or c_min_y < t_min_y or c_max_x > t_max_x or c_max_y > t_max_y:
        return False

    if workspace is not None and not workspace.reachable(candidate.center[0], candidate.center[1]):
        return False

    for k_min_x, k_min_y, k_max_x, k_max_y in keepouts or ():
        if interval_overlap(c_min_x, c_max_x, k_min_x, k_max_x) and interval_overlap(
            c_min_y, c_max_y, k_min_y, k_max_y
        ):
            return False

    support_uid = TABLE_UID
    support_relation: RelationLabel | None = None
    for relation, anchor_uid in constraints:
        if relation in SUPPORT_RELATIONS:
            support_uid = anchor_uid
            support_relation = relation
            break

    if support_relation is not None:
        anchor = placed.get(support_uid)
        if anchor is None:
            return False
        if support_relation is RelationLabel.ON:
            s_min_x, s_min_y, s_max_x, s_max_y = anchor.box.footprint()
        else:
            s_min_x, s_min_y, s_max_x, s_max_y = interior_rect(anchor.box)
            if candidate.top_z >= anchor.box.top_z:
                return False
        if (
            c_min_x < s_min_x or c_min_y < s_min_y
            or c_max_x > s_max_x or c_max_y > s_max_y
        ):
            return False

    for other in placed.values():
        if other.uid == uid or other.support_uid != support_uid:
            continue
        o_min_x, o_min_y, o_max_x, o_max_y = other.box.footprint()
        if interval_overlap(
            c_min_x - sibling_clearance, c_max_x + sibling_clearance, o_min_x, o_max_x
        ) and interval_overlap(
            c_min_y - sibling_clearance, c_max_y + sibling_clearance, o_min_y, o_max_y
        ):
            return False

    cand_stats = CloudStats(
        candidate.aabb_min, candidate.aabb_max, tuple(candidate.center)
    )
    for relation, anchor_uid in constraints:
        anchor = placed.get(anchor_uid)
        if anchor is None:
            continue
        pair = classify(cand_stats, anchor.stats(), thresholds)
        if pair.forward is not relation:
            return False
    return True


def find_placement(
    uid: str,
    asset: AssetRecord,
    constraints: list[PlacementConstraint],
    placed: dict[str, PlacedObject],
    rng: np.random.Generator,
    table: TableSpec,
    thresholds: RelationThresholds,
    options: LayoutOptions | None = None,
    pending: list[PendingDependent] | None = None,
    keepouts: list[tuple[float, float, float, float]] | None = None,
) -> Box3 | None:
    """Sample up to max_attempts candidate poses for ``uid``; return the first
    that validates, or None when the feasible region is exhausted.

    ``pending`` lists the side relations that later objects will need relative
    to this one; the sampling region reserves room for them so dependents do
    not start against a table edge or outside the workspace. ``keepouts`` are
    regions the candidate footprint must stay out of.
    """
    opts = options or LayoutOptions()
    workspace = default_workspace(table, opts.reach_radius) if opts.use_workspace else None
    dx, dy, dz = asset.footprint
    half = (dx / 2, dy / 2, dz / 2)
    pending = pending or []

    support: PlacementConstraint | None = None
    planar: list[PlacementConstraint] = []
    for relation, anchor_uid in constraints:
        if relation in SUPPORT_RELATIONS and support is None:
            support = (relation, anchor_uid)
        elif relation in (RelationLabel.BENEATH, RelationLabel.OUT_OF, RelationLabel.BETWEEN):
            continue  # realized when the other endpoint is placed
        elif relation not in SUPPORT_RELATIONS:
            planar.append((relation, anchor_uid))

    anchor_box = placed[support[1]].box if support else None
    primary = support or (planar[0] if planar else None)

    # Room reservations and the edge keepout are feasibility heuristics, not
    # correctness conditions; relax them over the attempt budget so over-booked
    # tables still place. Keepout only steers unconstrained roots.
    base_keepout = _EDGE_KEEPOUT if primary is None else 0.0
    tiers = (
        (pending, base_keepout),
        (pending, 0.0),
        ([(rel, room * 0.5) for rel, room in pending], 0.0),
        ([], 0.0),
    )
    for attempt in range(opts.max_attempts):
        pend_eff, keepout = tiers[min(3, 4 * attempt // max(1, opts.max_attempts))]
        yaw = float(rng.choice((0.0, math.pi / 2)))
        eff = effective_half_extents(half, yaw)
        bounds = _center_bounds(table, eff, pend_eff, thresholds, keepout)
        if bounds is None:
            continue
        if primary is None:
            x = _sample_interval(rng, bounds[0], bounds[2])
            y = _sample_interval(rng, bounds[1], bounds[3])
            xy = None if x is None or y is None else (x, y)
        else:
            rel_anchor = placed[primary[1]].box
            xy = _sample_xy(primary[0], rel_anchor, eff, thresholds, bounds, rng)
        if xy is None:
            continue
        if not _pending_reach_ok(xy[0], xy[1], eff, pend_eff, workspace, thresholds):
            continue
        bottom = _support_bottom_z(support[0] if support else None, anchor_box, table)
        candidate = Box3((xy[0], xy[1], bottom + half[2]), half, yaw)
        if validate_placement(
            candidate, uid, constraints, placed, thresholds, table,
            workspace, opts.sibling_clearance, keepouts,
        ):
            return candidate
    return None


def construct_layout(
    scenario: TaskScenario,
    table: TableSpec | None = None,
    seed: int | None = None,
    thresholds: RelationThresholds | None = None,
    options: LayoutOptions | None = None,
) -> Layout:
    """Realize the scenario's scene graph as concrete poses.

    Deterministic in (scenario, table, seed): every retry round derives its
    generator from (seed, round). Raises LayoutInfeasibleError with
    per-object diagnostics when all rounds are exhausted.
    """
    table = table or TableSpec()
    th = thresholds or RelationThresholds()
    opts = options or LayoutOptions()
    layout_seed = scenario.seed if seed is None else seed

    graph = scenario.scene_graph
    pool = scenario.pool_map()
    levels = topological_levels(graph)
    node_state = {n.object_uid: n.state for n in graph.nodes}
    support_of: dict[str, tuple[RelationLabel, str]] = {}
    for edge in graph.edges:
        if edge.relation in SUPPORT_RELATIONS:
            support_of[edge.object_uid] = (edge.relation, edge.anchor_uid)

    # Executability is part of the contract: the first goal disjunct's side
    # atoms reserve room beside their anchors and keep that band clear of
    # other objects, so a demonstration can always move the target there.
    goal_moves = _goal_side_moves(scenario)
    goal_pending: dict[str, list[PendingDependent]] = {}
    for anchor_uid, relation, mover_uid in goal_moves:
        mover = pool[mover_uid]
        room = _LINK_GAP + min(mover.footprint[0], mover.footprint[1])
        goal_pending.setdefault(anchor_uid, []).append((relation, room))

    order = placement_order(graph, levels)
    diagnostics: list[str] = []
    for attempt_round in range(opts.retry_rounds):
        rng = np.random.default_rng(
            np.random.SeedSequence([layout_seed & 0xFFFFFFFFFFFFFFFF, attempt_round])
        )
        placed: dict[str, PlacedObject] = {}
        keepouts: list[tuple[float, float, float, float]] = []
        failed = None
        for uid in order:
            constraints = constraints_for(uid, graph, placed)
            pending = pending_dependents(uid, graph, placed, pool)
            pending.extend(goal_pending.get(uid, ()))
            candidate = find_placement(
                uid, pool[uid], constraints, placed, rng, table, th, opts,
                pending=pending, keepouts=keepouts,
            )
            if candidate is None:
                failed = (uid, constraints)
                break
            placed[uid] = PlacedObject(
                uid=uid,
                box=candidate,
                support_uid=support_of.get(uid, (None, TABLE_UID))[1],
                state=node_state.get(uid),
            )
            for anchor_uid, relation, mover_uid in goal_moves:
                if anchor_uid == uid:
                    keepouts.append(
                        _goal_band(candidate, relation, pool[mover_uid])
                    )
        if failed:
            uid, constraints = failed
            pretty = ", ".join(f"{r.value}->{a}" for r, a in constraints) or "unconstrained"
            diagnostics.append(
                f"round {attempt_round}: no placement for {uid} under [{pretty}] "
                f"after {opts.max_attempts} attempts"
            )
            continue

        ordered = [placed[uid] for uid in order]
        layout = Layout(table=table, objects=ordered, seed=layout_seed)
        missing = missing_edges(layout, graph, th)
        if not missing:
            return layout
        diagnostics.append(
            f"round {attempt_round}: constructed layout failed re-verification: {missing}"
        )

    raise LayoutInfeasibleError(
        f"layout infeasible for scenario {scenario.id} after {opts.retry_rounds} rounds",
        diagnostics,
    )


def _goal_side_moves(scenario: TaskScenario) -> list[tuple[str, RelationLabel, str]]:
    """(anchor, side, mover) triples from the first goal disjunct."""
    moves = []
    for atom in scenario.goals.disjuncts[0]:
        if atom.relation in _SIDE_DIRECTION and isinstance(atom.obj2_uid, str):
            moves.append((atom.obj2_uid, atom.relation, atom.obj1_uid))
    return moves


def _goal_band(
    anchor: Box3, relation: RelationLabel, mover: AssetRecord
) -> tuple[float, float, float, float]:
    """Rectangle beside the anchor that must stay free for the goal move."""
    a_min_x, a_min_y, a_max_x, a_max_y = anchor.footprint()
    depth = _LINK_GAP + min(mover.footprint[0], mover.footprint[1])
    if relation is RelationLabel.LEFT:
        return (a_min_x, a_max_y, a_max_x, a_max_y + depth)
    if relation is RelationLabel.RIGHT:
        return (a_min_x, a_min_y - depth, a_max_x, a_min_y)
    if relation is RelationLabel.FRONT:
        return (a_max_x, a_min_y, a_max_x + depth, a_max_y)
    return (a_min_x - depth, a_min_y, a_min_x, a_max_y)


def missing_edges(
    layout: Layout, graph: SceneGraph, thresholds: RelationThresholds
) -> list[str]:
    """Scene-graph edges that do not re-verify on the layout, as readable strings."""
    stats = {o.uid: o.stats() for o in layout.objects}
    found = relations_from_stats(stats, thresholds)
    return [
        f"({e.object_uid} {e.relation.value} {e.anchor_uid})"
        for e in graph.edges
        if (e.object_uid, e.relation, e.anchor_uid) not in found
    ]
