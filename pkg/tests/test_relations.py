"""Relation inference against independent oracles.

The pairwise chain is checked against closed-form box pairs constructed to
fall in exactly one branch; distances against dense brute-force sampling;
the ternary check against a plain dot-product angle.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tabletask.errors import EvaluationError
from tabletask.geometry import Box3
from tabletask.relations import (
    NO_RELATION,
    RelationPair,
    RelationThresholds,
    between_angle,
    infer_between,
    infer_pairwise,
    scene_relations,
    xy_distance,
)
from tabletask.scenegraph import RelationLabel

from conftest import box_cloud, cube_cloud, rng_for


def brute_force_xy_distance(a, b, n=40):
    """Min pairwise distance between densified XY projections of the hulls."""

    def densify(points):
        lo = points.min(axis=0)[:2]
        hi = points.max(axis=0)[:2]
        xs = np.linspace(lo[0], hi[0], n)
        ys = np.linspace(lo[1], hi[1], n)
        grid = np.array([(x, y) for x in xs for y in ys])
        return grid

    pa, pb = densify(np.asarray(a)), densify(np.asarray(b))
    diff = pa[:, None, :] - pb[None, :, :]
    return float(np.sqrt((diff**2).sum(axis=2)).min())


class TestXYDistance:
    def test_separated_squares(self):
        a = cube_cloud((0, 0, 0))
        b = cube_cloud((3, 0, 0))
        assert math.isclose(xy_distance(a, b), 2.0, abs_tol=1e-12)
        assert math.isclose(xy_distance(a, b), brute_force_xy_distance(a, b), abs_tol=1e-6)

    def test_overlapping_is_zero(self):
        a = cube_cloud((0, 0, 0))
        b = cube_cloud((0.4, 0.2, 0))
        assert xy_distance(a, b) == 0.0

    def test_diagonal_offset(self):
        a = cube_cloud((0, 0, 0))
        b = cube_cloud((2, 2, 0))
        assert math.isclose(xy_distance(a, b), math.sqrt(2.0), abs_tol=1e-12)
        assert math.isclose(xy_distance(a, b), brute_force_xy_distance(a, b), abs_tol=1e-3)

    def test_empty_cloud_rejected(self):
        with pytest.raises(EvaluationError):
            xy_distance(np.empty((0, 3)), cube_cloud((0, 0, 0)))


class TestPairwiseExamples:
    def test_stacked_cubes_on_beneath(self):
        a = cube_cloud((0, 0, 1.0))
        b = cube_cloud((0, 0, 0.0))
        assert infer_pairwise(a, b) == RelationPair(RelationLabel.ON, RelationLabel.BENEATH)
        assert infer_pairwise(b, a) == RelationPair(RelationLabel.BENEATH, RelationLabel.ON)

    def test_contained_cube_in_out_of(self):
        small = cube_cloud((0, 0, 0.5), side=0.2)
        big = box_cloud((0, 0, 0.5), (1.0, 1.0, 1.0))
        assert infer_pairwise(small, big) == RelationPair(RelationLabel.IN, RelationLabel.OUT_OF)
        assert infer_pairwise(big, small) == RelationPair(RelationLabel.OUT_OF, RelationLabel.IN)

    def test_depth_separation_front_back(self):
        # Overlap in y only; the cube with the greater x is in front.
        a = cube_cloud((1.04, 0.3, 0.5))
        b = cube_cloud((0.0, 0.0, 0.5))
        assert infer_pairwise(a, b) == RelationPair(RelationLabel.FRONT, RelationLabel.BACK)

    def test_lateral_separation_left_right(self):
        a = cube_cloud((0.3, 1.04, 0.5))
        b = cube_cloud((0.0, 0.0, 0.5))
        assert infer_pairwise(a, b) == RelationPair(RelationLabel.LEFT, RelationLabel.RIGHT)

    def test_far_apart_yields_nothing(self):
        a = cube_cloud((0, 0, 0.5))
        b = cube_cloud((2.0, 0, 0.5))
        assert infer_pairwise(a, b) == NO_RELATION

    def test_diagonal_near(self):
        a = cube_cloud((0, 0, 0.5))
        b = cube_cloud((1.02, 1.02, 0.5))
        assert infer_pairwise(a, b) == RelationPair(RelationLabel.NEAR, RelationLabel.NEAR)

    def test_gate_boundary(self):
        th = RelationThresholds()
        a = cube_cloud((0, 0, 0.5))
        just_inside = cube_cloud((1.0 + th.xy_close - 1e-9, 0.3, 0.5))
        just_outside = cube_cloud((1.0 + th.xy_close + 1e-6, 0.3, 0.5))
        assert infer_pairwise(a, just_inside, th) == RelationPair(
            RelationLabel.BACK, RelationLabel.FRONT
        )
        assert infer_pairwise(a, just_outside, th) == NO_RELATION


def closed_form_pairs(count, family, rng):
    """Box pairs with analytically known labels, one decision branch each."""
    th = RelationThresholds()
    out = []
    for _ in range(count):
        if family == "containment":
            big = Box3(
                (rng.uniform(-1, 1), rng.uniform(-1, 1), 0.5),
                (rng.uniform(0.3, 0.5), rng.uniform(0.3, 0.5), 0.5),
            )
            small = Box3(
                big.center,
                tuple(h * rng.uniform(0.2, 0.6) for h in big.half_extents),
            )
            out.append((small, big, RelationLabel.IN))
        elif family == "vertical":
            base = Box3(
                (rng.uniform(-1, 1), rng.uniform(-1, 1), 0.25),
                (rng.uniform(0.2, 0.4), rng.uniform(0.2, 0.4), 0.25),
            )
            top = Box3(
                (base.center[0], base.center[1], base.top_z + 0.1),
                tuple(h * 0.5 for h in base.half_extents),
            )
            out.append((top, base, RelationLabel.ON))
        elif family == "depth":
            b = Box3((0.0, 0.0, 0.3), (0.3, 0.3, 0.3))
            gap = rng.uniform(0.005, th.xy_close * 0.9)
            hx = rng.uniform(0.1, 0.3)
            a = Box3(
                (b.aabb_max[0] + hx + gap, rng.uniform(-0.2, 0.2), 0.3),
                (hx, 0.3, 0.3),
            )
            label = RelationLabel.FRONT if rng.random() < 0.5 else RelationLabel.BACK
            if label is RelationLabel.BACK:
                a = Box3((-a.center[0], a.center[1], 0.3), a.half_extents)
            out.append((a, b, label))
        else:  # lateral
            b = Box3((0.0, 0.0, 0.3), (0.3, 0.3, 0.3))
            gap = rng.uniform(0.005, th.xy_close * 0.9)
            hy = rng.uniform(0.1, 0.3)
            a = Box3(
                (rng.uniform(-0.2, 0.2), b.aabb_max[1] + hy + gap, 0.3),
                (0.3, hy, 0.3),
            )
            label = RelationLabel.LEFT if rng.random() < 0.5 else RelationLabel.RIGHT
            if label is RelationLabel.RIGHT:
                a = Box3((a.center[0], -a.center[1], 0.3), a.half_extents)
            out.append((a, b, label))
    return out


class TestOracleEquivalence:
    @pytest.mark.parametrize("family", ["containment", "vertical", "depth", "lateral"])
    def test_branch_family(self, family):
        rng = rng_for(99, hash(family) & 0xFFFF)
        for a, b, label in closed_form_pairs(50, family, rng):
            pair = infer_pairwise(a.corners(), b.corners())
            assert pair.forward is label, (a, b, label, pair)
            assert pair.backward is label.inverse


# Dyadic-rational coordinates keep every corner, centroid, translation and
# power-of-two scale exact in floating point, so center ties stay ties and
# the invariance properties hold literally, not just almost-everywhere.
dyadic = st.integers(-32, 32).map(lambda k: k / 32.0)
dyadic_pos = st.integers(2, 13).map(lambda k: k / 32.0)
boxes = st.builds(
    Box3,
    st.tuples(dyadic, dyadic, st.integers(0, 32).map(lambda k: k / 32.0)),
    st.tuples(dyadic_pos, dyadic_pos, dyadic_pos),
)


class TestPairwiseProperties:
    @settings(max_examples=150, deadline=None)
    @given(a=boxes, b=boxes)
    def test_antisymmetry(self, a, b):
        fwd = infer_pairwise(a.corners(), b.corners())
        rev = infer_pairwise(b.corners(), a.corners())
        if fwd.forward is None:
            assert rev.forward is None
        else:
            assert rev.forward is fwd.forward.inverse
            assert rev.backward is fwd.forward

    @settings(max_examples=150, deadline=None)
    @given(a=boxes, b=boxes, dx=dyadic, dy=dyadic, dz=dyadic)
    def test_translation_invariance(self, a, b, dx, dy, dz):
        before = infer_pairwise(a.corners(), b.corners())
        after = infer_pairwise(
            a.translated(dx, dy, dz).corners(), b.translated(dx, dy, dz).corners()
        )
        assert before == after

    @settings(max_examples=150, deadline=None)
    @given(a=boxes, b=boxes, factor=st.sampled_from([0.5, 1.5, 2.0, 3.0, 4.0]))
    def test_scale_threshold_consistency(self, a, b, factor):
        th = RelationThresholds()
        before = infer_pairwise(a.corners(), b.corners(), th)
        after = infer_pairwise(
            a.corners() * factor, b.corners() * factor, th.scaled(factor)
        )
        assert before == after


def dot_product_angle(pa, pb, pc):
    u = np.asarray(pb, dtype=float) - np.asarray(pa, dtype=float)
    v = np.asarray(pc, dtype=float) - np.asarray(pb, dtype=float)
    denom = np.linalg.norm(u) * np.linalg.norm(v)
    if denom < 1e-12:
        return 0.0
    return float(np.arccos(np.clip(np.dot(u, v) / denom, -1.0, 1.0)))


class TestBetween:
    def test_collinear_true(self):
        a = cube_cloud((0, 0, 0), 0.2)
        b = cube_cloud((1, 0, 0), 0.2)
        c = cube_cloud((2, 0, 0), 0.2)
        assert infer_between(a, b, c)

    def test_right_angle_false(self):
        a = cube_cloud((0, 0, 0), 0.2)
        b = cube_cloud((1, 0, 0), 0.2)
        c = cube_cloud((1, 1, 0), 0.2)
        assert not infer_between(a, b, c)

    def test_mild_bend_within_default(self):
        # Bend of 0.4 rad stays under the default threshold (pi/6 ~ 0.5236).
        angle = 0.4
        a = cube_cloud((0, 0, 0), 0.2)
        b = cube_cloud((1, 0, 0), 0.2)
        c = cube_cloud((1 + math.cos(angle), math.sin(angle), 0), 0.2)
        assert infer_between(a, b, c)

    def test_boundary_is_inclusive(self):
        th = RelationThresholds()
        angle = th.between_angle_max
        a = cube_cloud((0, 0, 0), 0.2)
        b = cube_cloud((1, 0, 0), 0.2)
        c = cube_cloud((1 + math.cos(angle), math.sin(angle), 0), 0.2)
        measured = between_angle(a, b, c)
        assert measured <= angle + 1e-12
        assert infer_between(a, b, c)

    def test_symmetry(self):
        rng = rng_for(4)
        for _ in range(50):
            pa, pb, pc = (rng.uniform(-1, 1, 3) for _ in range(3))
            a, b, c = (cube_cloud(tuple(p), 0.1) for p in (pa, pb, pc))
            assert infer_between(a, b, c) == infer_between(c, b, a)

    def test_matches_dot_product_oracle(self):
        rng = rng_for(5)
        for _ in range(200):
            pa, pb, pc = (rng.uniform(-1, 1, 3) for _ in range(3))
            a, b, c = (cube_cloud(tuple(p), 0.05) for p in (pa, pb, pc))
            assert abs(between_angle(a, b, c) - dot_product_angle(pa, pb, pc)) <= 1e-9


class TestSceneRelations:
    def test_single_object_empty(self, thresholds):
        from tabletask.layout import Layout, PlacedObject, TableSpec

        layout = Layout(
            table=TableSpec(),
            objects=[PlacedObject("a", Box3((0, 0, 0.05), (0.05, 0.05, 0.05)))],
        )
        assert scene_relations(layout, thresholds) == set()

    def test_stacked_pair_reported(self, thresholds):
        from tabletask.layout import Layout, PlacedObject, TableSpec

        plate = PlacedObject("plate", Box3((0, 0, 0.01), (0.12, 0.12, 0.01)))
        banana = PlacedObject(
            "banana", Box3((0.02, 0.0, 0.02 + 0.02), (0.09, 0.02, 0.02)), "plate"
        )
        layout = Layout(table=TableSpec(), objects=[plate, banana])
        rels = scene_relations(layout, thresholds)
        assert ("banana", RelationLabel.ON, "plate") in rels
        assert ("plate", RelationLabel.BENEATH, "banana") in rels

    def test_side_pair_is_mirrored(self, thresholds):
        from tabletask.layout import Layout, PlacedObject, TableSpec

        a = PlacedObject("a", Box3((0.0, 0.12, 0.05), (0.05, 0.05, 0.05)))
        b = PlacedObject("b", Box3((0.0, 0.0, 0.05), (0.05, 0.05, 0.05)))
        layout = Layout(table=TableSpec(), objects=[a, b])
        rels = scene_relations(layout, thresholds)
        assert ("a", RelationLabel.LEFT, "b") in rels
        assert ("b", RelationLabel.RIGHT, "a") in rels
