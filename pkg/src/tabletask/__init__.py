"""Deterministic tabletop task synthesis, layout solving, simulation and evaluation."""

from .catalog import AssetRecord, build_catalog, load_catalog, save_catalog
from .config import EngineConfig, load_config
from .errors import EngineError
from .evaluation import (
    BenchmarkReport,
    EpisodeResult,
    eval_atom,
    episode_score,
    evaluate_episode,
    report,
    spl,
    sr,
)
from .geometry import Box3, sample_box_surface
from .layout import (
    Layout,
    LayoutOptions,
    PlacedObject,
    TableSpec,
    construct_layout,
    find_placement,
    load_layout,
    save_layout,
    topological_levels,
    validate_placement,
)
from .policies import NoisyPolicy, NullPolicy, OraclePolicy, make_policy
from .relations import (
    RelationPair,
    RelationThresholds,
    infer_between,
    infer_pairwise,
    scene_relations,
    xy_distance,
)
from .scenario import TaskScenario, TaskType, load_scenario, save_scenario
from .scenegraph import (
    GoalAtom,
    GoalConditionSet,
    RelationLabel,
    SceneGraph,
    SceneGraphEdge,
    SceneGraphNode,
    validate_scene_graph,
)
from .sim import (
    Done,
    EpisodeLog,
    Pick,
    Place,
    SetState,
    SimOptions,
    WorldState,
    apply_pick,
    apply_place,
    apply_set_state,
    plan_demonstration,
    run_episode,
    shortest_path_length,
)
from .taskgen import (
    GenerationRequest,
    MockBackend,
    build_prompt,
    generate,
    mock_generate,
    parse_reply,
    sample_pool,
)

__version__ = "0.1.0"

__all__ = [
    "AssetRecord",
    "BenchmarkReport",
    "Box3",
    "Done",
    "EngineConfig",
    "EngineError",
    "EpisodeLog",
    "EpisodeResult",
    "GenerationRequest",
    "GoalAtom",
    "GoalConditionSet",
    "Layout",
    "LayoutOptions",
    "MockBackend",
    "NoisyPolicy",
    "NullPolicy",
    "OraclePolicy",
    "Pick",
    "Place",
    "PlacedObject",
    "RelationLabel",
    "RelationPair",
    "RelationThresholds",
    "SceneGraph",
    "SceneGraphEdge",
    "SceneGraphNode",
    "SetState",
    "SimOptions",
    "TableSpec",
    "TaskScenario",
    "TaskType",
    "WorldState",
    "apply_pick",
    "apply_place",
    "apply_set_state",
    "build_catalog",
    "build_prompt",
    "construct_layout",
    "eval_atom",
    "episode_score",
    "evaluate_episode",
    "find_placement",
    "generate",
    "infer_between",
    "infer_pairwise",
    "load_catalog",
    "load_config",
    "load_layout",
    "load_scenario",
    "make_policy",
    "mock_generate",
    "parse_reply",
    "plan_demonstration",
    "report",
    "run_episode",
    "sample_box_surface",
    "sample_pool",
    "save_catalog",
    "save_layout",
    "save_scenario",
    "scene_relations",
    "shortest_path_length",
    "spl",
    "sr",
    "topological_levels",
    "validate_placement",
    "validate_scene_graph",
    "xy_distance",
]
