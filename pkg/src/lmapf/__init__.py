"""Lifelong multi-agent pathfinding on 4-connected grids.

Planners: PIBT (one-step), windowed LaCAM, and LLLG (windowed LaCAM with
warm-started local guidance), plus anytime refiners and a benchmark harness.
"""

from .budget import Budget
from .core import (
    Config,
    Conflict,
    EpisodeMetrics,
    Plan,
    accumulate_metrics,
    validate_plan,
    validate_transition,
)
from .grid import UNREACHABLE, DistanceOracle, GridMap, MapFormatError, parse_map
from .guidance import (
    GuidancePaths,
    LexCost,
    WarmStart,
    best_guidance_path,
    guidance_path_cost,
    refine_guidance,
    shift_guidance,
    transition_collisions,
    warm_start,
)
from .lacam import (
    HighLevelNode,
    SearchOptions,
    WindowedResult,
    anytime_improve,
    plan_window,
    windowed_plan_cost,
)
from .lns import ReservationTable, refine_lns, replan_agent
from .pibt import PositiveConstraint, hindrance, plan_step
from .runner import (
    EpisodeConfig,
    EpisodeResult,
    Refiner,
    Solver,
    TaskGenerator,
    run_episode,
    sample_goal,
)

__all__ = [
    "Budget",
    "Config",
    "Conflict",
    "DistanceOracle",
    "EpisodeConfig",
    "EpisodeMetrics",
    "EpisodeResult",
    "GridMap",
    "GuidancePaths",
    "HighLevelNode",
    "LexCost",
    "MapFormatError",
    "Plan",
    "PositiveConstraint",
    "Refiner",
    "ReservationTable",
    "SearchOptions",
    "Solver",
    "TaskGenerator",
    "UNREACHABLE",
    "WarmStart",
    "WindowedResult",
    "accumulate_metrics",
    "anytime_improve",
    "best_guidance_path",
    "guidance_path_cost",
    "hindrance",
    "parse_map",
    "plan_step",
    "plan_window",
    "refine_guidance",
    "refine_lns",
    "replan_agent",
    "run_episode",
    "sample_goal",
    "shift_guidance",
    "transition_collisions",
    "validate_plan",
    "validate_transition",
    "warm_start",
    "windowed_plan_cost",
]
