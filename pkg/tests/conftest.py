import numpy as np
import pytest

from tabletask import (
    Box3,
    RelationThresholds,
    TableSpec,
    TaskType,
    build_catalog,
    construct_layout,
)
from tabletask.taskgen import GenerationRequest, mock_generate, sample_pool


@pytest.fixture(scope="session")
def catalog():
    return build_catalog()


@pytest.fixture(scope="session")
def thresholds():
    return RelationThresholds()


@pytest.fixture(scope="session")
def table():
    return TableSpec()


def make_request(catalog, task_type=TaskType.SPATIAL, seed=7, num_objects=5):
    pool = sample_pool(catalog, task_type, seed=seed)
    return GenerationRequest(
        task_type=task_type, pool=tuple(pool), num_objects_min=num_objects, seed=seed
    )


@pytest.fixture()
def mock_scenario(catalog):
    return mock_generate(make_request(catalog, TaskType.SPATIAL, seed=7))


@pytest.fixture()
def solved_scenario(mock_scenario):
    return mock_scenario, construct_layout(mock_scenario)


def cube_cloud(center, side=1.0, yaw=0.0):
    """Corner cloud of an axis-aligned cube, exact AABB and centroid."""
    half = (side / 2, side / 2, side / 2)
    return Box3(tuple(float(c) for c in center), half, yaw).corners()


def box_cloud(center, extents, yaw=0.0):
    half = tuple(e / 2 for e in extents)
    return Box3(tuple(float(c) for c in center), half, yaw).corners()


def rng_for(*entropy):
    return np.random.default_rng(np.random.SeedSequence(list(entropy)))
