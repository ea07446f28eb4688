"""Box geometry primitives.

Boxes stand in for object meshes throughout the engine: every collision,
containment, and relation check reduces to axis-aligned bounding boxes,
centers, and interval arithmetic, which boxes provide exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

Vec3 = tuple[float, float, float]

# Yaw values used for placement. Rotations stay quantized to quarter turns
# so footprint AABBs remain exact.
QUARTER_TURNS = (0.0, math.pi / 2, math.pi, 3 * math.pi / 2)


@dataclass(frozen=True)
class Box3:
    """Oriented box: center, half extents, and a yaw about the vertical axis."""

    center: Vec3
    half_extents: Vec3
    yaw: float = 0.0
    aabb_min: Vec3 = field(init=False, repr=False, compare=False)
    aabb_max: Vec3 = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if any(h <= 0 for h in self.half_extents):
            raise ValueError(f"half_extents must be positive, got {self.half_extents}")
        lo, hi = _corner_bounds(self.center, self.half_extents, self.yaw)
        object.__setattr__(self, "aabb_min", lo)
        object.__setattr__(self, "aabb_max", hi)

    @property
    def bottom_z(self) -> float:
        return self.aabb_min[2]

    @property
    def top_z(self) -> float:
        return self.aabb_max[2]

    def corners(self) -> np.ndarray:
        """The 8 box corners in world coordinates, shape (8, 3)."""
        return _corners(self.center, self.half_extents, self.yaw)

    def footprint(self) -> tuple[float, float, float, float]:
        """XY extent of the AABB as (min_x, min_y, max_x, max_y)."""
        return (self.aabb_min[0], self.aabb_min[1], self.aabb_max[0], self.aabb_max[1])

    def translated(self, dx: float, dy: float, dz: float) -> "Box3":
        cx, cy, cz = self.center
        return Box3((cx + dx, cy + dy, cz + dz), self.half_extents, self.yaw)


def _corners(center: Vec3, half: Vec3, yaw: float) -> np.ndarray:
    hx, hy, hz = half
    local = np.array(
        [
            (sx * hx, sy * hy, sz * hz)
            for sx in (-1.0, 1.0)
            for sy in (-1.0, 1.0)
            for sz in (-1.0, 1.0)
        ]
    )
    c, s = math.cos(yaw), math.sin(yaw)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return local @ rot.T + np.asarray(center)


def _corner_bounds(center: Vec3, half: Vec3, yaw: float) -> tuple[Vec3, Vec3]:
    pts = _corners(center, half, yaw)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    return (float(lo[0]), float(lo[1]), float(lo[2])), (float(hi[0]), float(hi[1]), float(hi[2]))


def effective_half_extents(half: Vec3, yaw: float) -> Vec3:
    """Half extents of the AABB after rotating by ``yaw`` (exact for quarter turns)."""
    hx, hy, hz = half
    c, s = abs(math.cos(yaw)), abs(math.sin(yaw))
    return (hx * c + hy * s, hx * s + hy * c, hz)


def sample_box_surface(box: Box3, n: int, seed: int) -> np.ndarray:
    """Sample ``n`` points on the box surface, deterministic in ``seed``.

    The first 8 points are the box corners, which pins the sample's axis-aligned
    bounding box to the box's own AABB exactly; the remainder is uniform over
    the surface, area-weighted per face. Requires n >= 8.
    """
    if n < 8:
        raise ValueError(f"need at least 8 points to pin the bounding box, got {n}")
    corners = box.corners()
    if n == 8:
        return corners

    rng = np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFF, n]))
    hx, hy, hz = box.half_extents
    # Face order: -x, +x, -y, +y, -z, +z
    areas = np.array([hy * hz, hy * hz, hx * hz, hx * hz, hx * hy, hx * hy], dtype=float)
    faces = rng.choice(6, size=n - 8, p=areas / areas.sum())
    u = rng.uniform(-1.0, 1.0, size=n - 8)
    v = rng.uniform(-1.0, 1.0, size=n - 8)

    local = np.empty((n - 8, 3))
    for i, (f, uu, vv) in enumerate(zip(faces, u, v)):
        axis = f // 2
        sign = -1.0 if f % 2 == 0 else 1.0
        if axis == 0:
            local[i] = (sign * hx, uu * hy, vv * hz)
        elif axis == 1:
            local[i] = (uu * hx, sign * hy, vv * hz)
        else:
            local[i] = (uu * hx, vv * hy, sign * hz)

    c, s = math.cos(box.yaw), math.sin(box.yaw)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    pts = local @ rot.T + np.asarray(box.center)
    return np.vstack([corners, pts])


def interval_overlap(lo1: float, hi1: float, lo2: float, hi2: float) -> bool:
    """Strict interval overlap: shared length must be positive, touching does not count."""
    return min(hi1, hi2) - max(lo1, lo2) > 0.0


def interval_gap(lo1: float, hi1: float, lo2: float, hi2: float) -> float:
    """Separation between two intervals; 0 when they overlap or touch."""
    return max(0.0, max(lo1, lo2) - min(hi1, hi2))


def rect_gap(a_min, a_max, b_min, b_max) -> float:
    """Euclidean gap between two axis-aligned rectangles given as (x, y) corner pairs."""
    dx = interval_gap(a_min[0], a_max[0], b_min[0], b_max[0])
    dy = interval_gap(a_min[1], a_max[1], b_min[1], b_max[1])
    return math.hypot(dx, dy)
