"""The receding-horizon lifelong loop.

Every timestep: refresh completed goals, warm-start guidance from the
previous step's artifacts, plan a window from the current configuration,
optionally refine it, execute exactly its first joint move, and carry the
plan and guidance forward. Planning never commits more than one step, so
the loop replans from truth at every timestep.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from . import _kernels as K
from .budget import Budget
from .core import (
    Config,
    EpisodeMetrics,
    Plan,
    accumulate_metrics,
    validate_config,
    validate_transition,
)
from .grid import DistanceOracle, GridMap
from .guidance import GuidancePaths, WarmStart, rebuild_exhausted, refine_guidance, warm_start
from .lacam import SearchOptions, anytime_improve, plan_window
from .lns import refine_lns
from .pibt import plan_step


class Solver(Enum):
    PIBT = "pibt"
    LACAM = "lacam"
    LLLG = "lllg"


class Refiner(Enum):
    NONE = "none"
    LACAM_STAR = "lacam-star"
    LNS = "lns"


@dataclass
class EpisodeConfig:
    grid: GridMap
    starts: Config
    num_steps: int
    solver: Solver = Solver.LLLG
    scheme: WarmStart = WarmStart.PI
    w_phi: int = 20
    w_pi: int = 10
    m: int = 2
    alpha: float = 5.0
    refiner: Refiner = Refiner.NONE
    budget_s: Optional[float] = 10.0
    budget_expansions: Optional[int] = None
    k_lns: int = 8
    task_seed: int = 0
    planner_seed: int = 0
    # None resolves per solver: the plain one-step baseline plans without the
    # hindrance term, the search-based solvers with it.
    hindrance: Optional[bool] = None
    # instrumentation: keep per-step warm-started guidance and planned windows
    record_artifacts: bool = False

    def __post_init__(self) -> None:
        if self.w_phi < 1 or self.w_pi < 1 or self.m < 0:
            raise ValueError("require w_phi >= 1, w_pi >= 1, m >= 0")
        if self.num_steps < 0:
            raise ValueError("num_steps must be non-negative")

    @property
    def use_hindrance(self) -> bool:
        if self.hindrance is not None:
            return self.hindrance
        return self.solver is not Solver.PIBT


@dataclass
class TaskGenerator:
    """Uniform goal sampler over all passable vertices, deterministic per seed."""

    num_vertices: int
    seed: int
    rng: np.random.Generator = field(init=False)

    def __post_init__(self) -> None:
        self.rng = np.random.default_rng(self.seed)

    def sample(self, current: int) -> int:
        # the new goal may equal `current`; it then completes at the next
        # executed step the agent is still there
        return int(self.rng.integers(0, self.num_vertices))


def sample_goal(gen: TaskGenerator, current: int) -> int:
    return gen.sample(current)


@dataclass
class EpisodeResult:
    metrics: EpisodeMetrics
    trace: Plan
    fallback_steps: list[int]
    goal_trace: list[Config]
    phi_builds: int
    warm_starts: list = None  # type: ignore[assignment]  # when recorded
    plans: list = None  # type: ignore[assignment]  # when recorded

    @property
    def fallback_count(self) -> int:
        return len(self.fallback_steps)


def run_episode(
    cfg: EpisodeConfig, oracle: Optional[DistanceOracle] = None
) -> EpisodeResult:
    """Run one lifelong episode and return its metrics and executed trace.

    Raises on an invalid start configuration or if any executed transition
    fails validation (the latter would be an internal planner bug).
    """
    grid = cfg.grid
    validate_config(grid, cfg.starts)
    oracle = oracle or DistanceOracle(grid)
    n = len(cfg.starts)
    gen = TaskGenerator(grid.num_vertices, cfg.task_seed)
    rng = np.random.default_rng(cfg.planner_seed)
    workspace = K.AStarWorkspace()

    Q: Config = tuple(cfg.starts)
    goals = [gen.sample(v) for v in Q]
    elapsed = [0] * n
    metrics = EpisodeMetrics(num_vertices=grid.num_vertices)
    trace: Plan = [Q]
    goal_trace: list[Config] = []
    fallback_steps: list[int] = []
    phi_builds = 0
    prev_phi: Optional[GuidancePaths] = None
    prev_plan: Optional[Plan] = None
    warm_starts: list = []
    plans: list = []

    for step in range(1, cfg.num_steps + 1):
        if step > 1:
            for i in range(n):
                if Q[i] == goals[i]:
                    goals[i] = gen.sample(Q[i])
        goal_tuple = tuple(goals)
        goal_trace.append(goal_tuple)

        t_start = time.perf_counter()
        budget = Budget.start(cfg.budget_s, cfg.budget_expansions)
        options = SearchOptions(
            alpha=cfg.alpha,
            m=cfg.m,
            use_hindrance=cfg.use_hindrance,
            priorities=list(elapsed),
        )

        phi: Optional[GuidancePaths] = None
        fallback = False
        if cfg.solver is Solver.PIBT:
            Q2 = plan_step(
                grid, oracle, Q, goal_tuple, None, (), elapsed, rng, cfg.use_hindrance
            )
            plan: Plan = [Q, Q2]
        else:
            if cfg.solver is Solver.LLLG:
                scheme = cfg.scheme
                if scheme is WarmStart.PHI and prev_phi is None:
                    scheme = WarmStart.EMPTY
                if scheme is WarmStart.PI and prev_plan is None:
                    scheme = WarmStart.EMPTY
                phi = warm_start(scheme, prev_phi, prev_plan, Q, cfg.w_phi, cfg.w_pi)
                phi_builds += phi.num_agents
                if cfg.record_artifacts:
                    warm_starts.append((step, phi.copy()))
                if cfg.m >= 1:
                    phi = refine_guidance(
                        grid, oracle, Q, goal_tuple, phi, cfg.alpha, cfg.w_phi,
                        cfg.m, workspace,
                    )
                else:
                    phi = rebuild_exhausted(
                        grid, oracle, Q, goal_tuple, phi, cfg.alpha, workspace
                    )
            result = plan_window(
                grid, oracle, Q, goal_tuple, phi, cfg.w_pi, budget, rng, options
            )
            if cfg.refiner is Refiner.LACAM_STAR and len(result.plan) > 1:
                result = anytime_improve(
                    result, grid, oracle, Q, goal_tuple, phi, cfg.w_pi, budget,
                    rng, options,
                )
            plan = result.plan
            if cfg.refiner is Refiner.LNS and len(plan) > 1:
                plan = refine_lns(
                    grid, oracle, plan, goal_tuple, min(cfg.k_lns, n), budget,
                    rng, workspace,
                )
            if len(plan) == 1:
                if result.reached_goal_config:
                    plan = [Q, Q]  # everyone parked on goals: wait in place
                else:
                    Q2 = plan_step(
                        grid, oracle, Q, goal_tuple, None, (), elapsed, rng,
                        cfg.use_hindrance,
                    )
                    plan = [Q, Q2]
                    fallback = True
        runtime = time.perf_counter() - t_start

        Q2 = plan[1]
        conflicts = validate_transition(grid, Q, Q2)
        if conflicts:
            raise RuntimeError(f"planner produced invalid step {step}: {conflicts}")
        accumulate_metrics(metrics, Q, Q2, goal_tuple, runtime)
        if fallback:
            fallback_steps.append(step)
        for i in range(n):
            elapsed[i] = 0 if Q2[i] == goals[i] else elapsed[i] + 1

        if fallback or len(plan) < 2:
            prev_plan = [Q, Q2]
        else:
            prev_plan = plan
        prev_phi = phi
        if cfg.record_artifacts:
            plans.append((step, list(plan)))
        Q = Q2
        trace.append(Q)

    return EpisodeResult(
        metrics, trace, fallback_steps, goal_trace, phi_builds,
        warm_starts if cfg.record_artifacts else None,
        plans if cfg.record_artifacts else None,
    )
