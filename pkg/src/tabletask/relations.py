"""Spatial relation inference over point clouds.

Pairwise labels come from a fixed decision chain over bounding boxes and
centers: containment, then vertical stacking, then horizontal side-by-side
relations, then the near fallback, all gated on the clouds being close in
the XY plane. The ternary between check compares the chained center-to-center
vectors against an angle threshold. The same chain is also what converts a
concrete layout back into a relation set for goal evaluation.

Frame convention: x grows toward the camera (front), y grows to the camera's
left, z is up. Greater center x therefore reads as "front", greater center y
as "left".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

import numpy as np

from .errors import EvaluationError
from .geometry import interval_gap, interval_overlap, rect_gap
from .scenegraph import RelationLabel

if TYPE_CHECKING:
    from .layout import Layout


@dataclass(frozen=True)
class RelationThresholds:
    """Distance and angle constants for relation inference.

    ``xy_close`` gates every pairwise label; ``touching`` bounds the vertical
    gap for stacking; ``between_angle_max`` bounds the bend of the chained
    center vectors. Values are configuration, not hidden magic.
    """

    xy_close: float = 0.05
    touching: float = 0.01
    between_angle_max: float = math.pi / 6

    def __post_init__(self):
        if self.xy_close <= 0 or self.touching <= 0 or self.between_angle_max <= 0:
            raise ValueError("thresholds must be strictly positive")
        if self.between_angle_max >= math.pi / 2:
            raise ValueError("between_angle_max must be below a quarter turn")

    def scaled(self, factor: float) -> "RelationThresholds":
        return RelationThresholds(self.xy_close * factor, self.touching * factor, self.between_angle_max)


@dataclass(frozen=True)
class RelationPair:
    """Forward label for (a, b) and its mirror for (b, a)."""

    forward: RelationLabel | None
    backward: RelationLabel | None

    def __post_init__(self):
        if self.forward is not None and self.backward is not self.forward.inverse:
            raise ValueError("backward label must be the inverse of forward")


NO_RELATION = RelationPair(None, None)


@dataclass(frozen=True)
class CloudStats:
    """Bounding box and centroid, the only cloud features inference needs."""

    min: tuple[float, float, float]
    max: tuple[float, float, float]
    centroid: tuple[float, float, float]

    @classmethod
    def of(cls, points: np.ndarray | Iterable) -> "CloudStats":
        arr = np.asarray(points, dtype=float)
        if arr.size == 0:
            raise EvaluationError("empty point cloud")
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise EvaluationError(f"point cloud must be (n, 3), got {arr.shape}")
        lo = arr.min(axis=0)
        hi = arr.max(axis=0)
        c = arr.mean(axis=0)
        return cls(
            (float(lo[0]), float(lo[1]), float(lo[2])),
            (float(hi[0]), float(hi[1]), float(hi[2])),
            (float(c[0]), float(c[1]), float(c[2])),
        )


def xy_distance(a, b) -> float:
    """Shortest distance between the XY projections of two clouds' bounding boxes."""
    sa, sb = CloudStats.of(a), CloudStats.of(b)
    return stats_xy_distance(sa, sb)


def stats_xy_distance(a: CloudStats, b: CloudStats) -> float:
    return rect_gap(a.min[:2], a.max[:2], b.min[:2], b.max[:2])


def infer_pairwise(a, b, thresholds: RelationThresholds | None = None) -> RelationPair:
    """Label the spatial relationship between clouds ``a`` and ``b``."""
    th = thresholds or RelationThresholds()
    return classify(CloudStats.of(a), CloudStats.of(b), th)


def classify(a: CloudStats, b: CloudStats, th: RelationThresholds) -> RelationPair:
    """Decision chain over precomputed cloud stats.

    Order matters and ties in center coordinates fall through: containment,
    vertical, front/back, left/right, near. Only reached when the XY gap is
    within ``xy_close``.
    """
    if stats_xy_distance(a, b) > th.xy_close:
        return NO_RELATION

    if _inside(a, b):
        return RelationPair(RelationLabel.IN, RelationLabel.OUT_OF)
    if _inside(b, a):
        return RelationPair(RelationLabel.OUT_OF, RelationLabel.IN)

    overlap_x = interval_overlap(a.min[0], a.max[0], b.min[0], b.max[0])
    overlap_y = interval_overlap(a.min[1], a.max[1], b.min[1], b.max[1])
    overlap_z = interval_overlap(a.min[2], a.max[2], b.min[2], b.max[2])
    z_gap = interval_gap(a.min[2], a.max[2], b.min[2], b.max[2])

    # Vertical: the XY footprints overlap (shadows along z) and the boxes
    # are stacked within the touching distance.
    if overlap_x and overlap_y and z_gap <= th.touching:
        if a.centroid[2] > b.centroid[2]:
            return RelationPair(RelationLabel.ON, RelationLabel.BENEATH)
        if a.centroid[2] < b.centroid[2]:
            return RelationPair(RelationLabel.BENEATH, RelationLabel.ON)

    # Horizontal: shadows along an axis overlap exactly when the two
    # remaining interval pairs do. Separated along x with y-shadows
    # overlapping reads as front/back; the mirror case as left/right.
    shadow_along_x = overlap_y and overlap_z
    shadow_along_y = overlap_x and overlap_z
    if shadow_along_x and not shadow_along_y:
        if a.centroid[0] > b.centroid[0]:
            return RelationPair(RelationLabel.FRONT, RelationLabel.BACK)
        if a.centroid[0] < b.centroid[0]:
            return RelationPair(RelationLabel.BACK, RelationLabel.FRONT)
    elif shadow_along_y and not shadow_along_x:
        if a.centroid[1] > b.centroid[1]:
            return RelationPair(RelationLabel.LEFT, RelationLabel.RIGHT)
        if a.centroid[1] < b.centroid[1]:
            return RelationPair(RelationLabel.RIGHT, RelationLabel.LEFT)

    return RelationPair(RelationLabel.NEAR, RelationLabel.NEAR)


def _inside(a: CloudStats, b: CloudStats) -> bool:
    """Strict AABB containment of a within b, with a's center below b's top face."""
    return (
        all(b.min[i] < a.min[i] and a.max[i] < b.max[i] for i in range(3))
        and a.centroid[2] < b.max[2]
    )


def between_angle(a, b, c) -> float:
    """Bend angle at ``b`` of the centroid chain a -> b -> c, in radians."""
    sa, sb, sc = CloudStats.of(a), CloudStats.of(b), CloudStats.of(c)
    return _bend_angle(sa.centroid, sb.centroid, sc.centroid)


def _bend_angle(pa, pb, pc) -> float:
    u = np.asarray(pb) - np.asarray(pa)
    v = np.asarray(pc) - np.asarray(pb)
    nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
    if nu < 1e-12 or nv < 1e-12:
        return 0.0  # coincident centroids: treat the chain as straight
    cross = float(np.linalg.norm(np.cross(u, v)))
    dot = float(np.dot(u, v))
    return math.atan2(cross, dot)


def infer_between(a, b, c, thresholds: RelationThresholds | None = None) -> bool:
    """True when ``b`` sits between ``a`` and ``c``: the chained center
    vectors a->b and b->c bend by no more than the angle threshold."""
    th = thresholds or RelationThresholds()
    return between_angle(a, b, c) <= th.between_angle_max


def between_from_stats(
    a: CloudStats, b: CloudStats, c: CloudStats, thresholds: RelationThresholds
) -> bool:
    return _bend_angle(a.centroid, b.centroid, c.centroid) <= thresholds.between_angle_max


RelationTriple = tuple[str, RelationLabel, str]


def relations_from_stats(
    stats: dict[str, CloudStats], thresholds: RelationThresholds
) -> set[RelationTriple]:
    """All directed relation triples among the named clouds."""
    out: set[RelationTriple] = set()
    uids = sorted(stats)
    for i, ua in enumerate(uids):
        for ub in uids[i + 1:]:
            pair = classify(stats[ua], stats[ub], thresholds)
            if pair.forward is not None:
                out.add((ua, pair.forward, ub))
                out.add((ub, pair.backward, ua))
    return out


def scene_relations(
    layout: "Layout", thresholds: RelationThresholds | None = None
) -> set[RelationTriple]:
    """Convert a concrete layout back into relation triples.

    Every ordered object pair is labeled from its sampled cloud; both
    directions of each pair are emitted. The table itself is scene furniture,
    not an object, so it never appears as an anchor.
    """
    th = thresholds or RelationThresholds()
    stats = {obj.uid: CloudStats.of(obj.cloud()) for obj in layout.objects}
    return relations_from_stats(stats, th)
