"""Windowed configuration search with lazy successor generation.

The high-level search walks joint configurations depth-first; successors
come from the PIBT generator one at a time, steered by a lazily enumerated
tree of forced single-agent moves. Search stops at the window depth; an
anytime mode keeps searching under branch-and-bound to lower the windowed
plan cost.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from .budget import Budget
from .core import Config, Plan, validate_config
from .grid import DistanceOracle, GridMap
from .guidance import GuidancePaths, repair_diverged, shift_guidance
from .pibt import PositiveConstraint, plan_step, planning_order, rank_candidates


@dataclass
class SearchOptions:
    """Knobs shared by the windowed search and its anytime continuation."""

    alpha: float = 5.0
    m: int = 2
    use_hindrance: bool = True
    priorities: Optional[Sequence[float]] = None


@dataclass(frozen=True)
class _LowLevelNode:
    constraints: tuple[PositiveConstraint, ...]
    depth: int


@dataclass(eq=False)
class HighLevelNode:
    config: Config
    parent: Optional["HighLevelNode"]
    depth: int
    g_value: int
    order: list[int]
    constraint_queue: deque = field(default_factory=lambda: deque([_LowLevelNode((), 0)]))
    guidance: Optional[GuidancePaths] = None
    guidance_ready: bool = False
    children: list = field(default_factory=list)


@dataclass
class WindowedResult:
    plan: Plan
    reached_goal_config: bool
    nodes_expanded: int
    configs_generated: int


def transition_cost(Q: Config, Q2: Config, goals: Config) -> int:
    """Agents that moved or were off their goal each contribute 1."""
    return sum(1 for i in range(len(Q)) if Q2[i] != Q[i] or Q[i] != goals[i])


def config_heuristic(oracle: DistanceOracle, Q: Config, goals: Config) -> int:
    return sum(oracle.dist(Q[i], goals[i]) for i in range(len(Q)))


def windowed_plan_cost(oracle: DistanceOracle, plan: Plan, goals: Config) -> int:
    """Accumulated transition cost plus the terminal configuration's heuristic."""
    g = sum(
        transition_cost(plan[t], plan[t + 1], goals) for t in range(len(plan) - 1)
    )
    return g + config_heuristic(oracle, plan[-1], goals)


def _backtrack(node: HighLevelNode) -> Plan:
    plan = []
    cur: Optional[HighLevelNode] = node
    while cur is not None:
        plan.append(cur.config)
        cur = cur.parent
    plan.reverse()
    return plan


class _Search:
    """One windowed search context (stack, dedup table, RNG are local)."""

    def __init__(
        self,
        grid: GridMap,
        oracle: DistanceOracle,
        Q0: Config,
        goals: Config,
        phi_root: Optional[GuidancePaths],
        w_pi: int,
        budget: Budget,
        rng: np.random.Generator,
        options: SearchOptions,
    ):
        if w_pi < 1:
            raise ValueError("w_pi must be at least 1")
        validate_config(grid, Q0)
        self.grid = grid
        self.oracle = oracle
        self.Q0 = Q0
        self.goals = goals
        self.w_pi = w_pi
        self.budget = budget
        self.rng = rng
        self.options = options
        self.workspace = K.AStarWorkspace()
        n = len(Q0)
        self.priorities = (
            list(options.priorities) if options.priorities is not None else [0.0] * n
        )
        self.order = planning_order(self.priorities)
        self.root = HighLevelNode(Q0, None, 0, 0, self.order, guidance=phi_root,
                                  guidance_ready=True)
        self.explored: dict[tuple[int, Config], HighLevelNode] = {(0, Q0): self.root}
        self.stack: list[HighLevelNode] = [self.root]
        self.nodes_expanded = 0
        self.configs_generated = 0

    def _materialize_guidance(self, node: HighLevelNode) -> None:
        if node.guidance_ready:
            return
        parent = node.parent
        assert parent is not None
        if parent.guidance is None:
            node.guidance = None
        else:
            phi = shift_guidance(parent.guidance)
            if self.options.m >= 1:
                phi = repair_diverged(
                    self.grid,
                    self.oracle,
                    node.config,
                    self.goals,
                    phi,
                    self.options.alpha,
                    self.workspace,
                )
            node.guidance = phi
        node.guidance_ready = True

    def _draw_successor(self, node: HighLevelNode) -> Optional[Config]:
        """Consume one constraint set from the node's lazy low-level tree."""
        low = node.constraint_queue.popleft()
        if low.depth < len(self.Q0):
            agent = self.order[low.depth]
            for u in rank_candidates(
                self.grid,
                self.oracle,
                node.config,
                self.goals,
                node.guidance,
                agent,
                self.rng,
                self.options.use_hindrance,
            ):
                node.constraint_queue.append(
                    _LowLevelNode(
                        low.constraints + (PositiveConstraint(agent, u),),
                        low.depth + 1,
                    )
                )
        self.budget.charge()
        self.nodes_expanded += 1
        return plan_step(
            self.grid,
            self.oracle,
            node.config,
            self.goals,
            node.guidance,
            low.constraints,
            self.priorities,
            self.rng,
            self.options.use_hindrance,
        )

    def _register_child(self, parent: HighLevelNode, Q2: Config) -> HighLevelNode:
        child = HighLevelNode(
            Q2,
            parent,
            parent.depth + 1,
            parent.g_value + transition_cost(parent.config, Q2, self.goals),
            self.order,
        )
        self.explored[(child.depth, Q2)] = child
        parent.children.append(child)
        return child

    def _is_goal(self, Q: Config) -> bool:
        return all(Q[i] == self.goals[i] for i in range(len(Q)))


def plan_window(
    grid: GridMap,
    oracle: DistanceOracle,
    Q0: Config,
    goals: Config,
    phi_root: Optional[GuidancePaths],
    w_pi: int,
    budget: Budget,
    rng: np.random.Generator,
    options: Optional[SearchOptions] = None,
) -> WindowedResult:
    """First plan reaching depth w_pi (or the goal configuration earlier).

    Runs the depth-first windowed search until a node at the window depth is
    found; on budget expiry the deepest node's backtracked plan is returned
    instead (length 1 when no successor was ever generated, which callers
    treat as a stall).
    """
    options = options or SearchOptions()
    s = _Search(grid, oracle, Q0, goals, phi_root, w_pi, budget, rng, options)
    if s._is_goal(Q0):
        return WindowedResult([Q0], True, 0, 0)
    deepest = s.root
    while s.stack and not s.budget.exhausted():
        node = s.stack[-1]
        if not node.constraint_queue:
            s.stack.pop()
            continue
        s._materialize_guidance(node)
        Q2 = s._draw_successor(node)
        if Q2 is None:
            continue
        s.configs_generated += 1
        key = (node.depth + 1, Q2)
        existing = s.explored.get(key)
        if existing is not None:
            if existing.depth < s.w_pi:
                s.stack.append(existing)
            continue
        child = s._register_child(node, Q2)
        if child.depth > deepest.depth:
            deepest = child
        if s._is_goal(Q2):
            return WindowedResult(
                _backtrack(child), True, s.nodes_expanded, s.configs_generated
            )
        if child.depth == s.w_pi:
            return WindowedResult(
                _backtrack(child), False, s.nodes_expanded, s.configs_generated
            )
        s.stack.append(child)
    return WindowedResult(
        _backtrack(deepest),
        s._is_goal(deepest.config),
        s.nodes_expanded,
        s.configs_generated,
    )


def anytime_improve(
    result: WindowedResult,
    grid: GridMap,
    oracle: DistanceOracle,
    Q0: Config,
    goals: Config,
    phi_root: Optional[GuidancePaths],
    w_pi: int,
    budget: Budget,
    rng: np.random.Generator,
    options: Optional[SearchOptions] = None,
) -> WindowedResult:
    """Branch-and-bound continuation: lower the windowed plan cost.

    Nodes are scored f = g + h with g the accumulated transition cost and h
    the summed goal distances; nodes with f >= best are pruned. Rediscovered
    configurations relax g through recorded children, so with enough budget
    the search exhausts and the returned cost is optimal. The result is
    never worse than the input plan.
    """
    options = options or SearchOptions()
    s = _Search(grid, oracle, Q0, goals, phi_root, w_pi, budget, rng, options)
    best_plan = result.plan
    best_cost = windowed_plan_cost(oracle, result.plan, goals)
    best_node: Optional[HighLevelNode] = None

    def candidate_cost(node: HighLevelNode) -> int:
        return node.g_value + config_heuristic(oracle, node.config, goals)

    def consider(node: HighLevelNode) -> None:
        nonlocal best_cost, best_node
        if node.depth == s.w_pi or s._is_goal(node.config):
            c = candidate_cost(node)
            if c < best_cost:
                best_cost = c
                best_node = node

    def relax_children(node: HighLevelNode) -> None:
        stack = [node]
        while stack:
            cur = stack.pop()
            for child in cur.children:
                ng = cur.g_value + transition_cost(cur.config, child.config, goals)
                if ng < child.g_value:
                    child.g_value = ng
                    child.parent = cur
                    consider(child)
                    if child.constraint_queue and child.depth < s.w_pi:
                        s.stack.append(child)
                    stack.append(child)

    consider(s.root)
    while s.stack and not s.budget.exhausted():
        node = s.stack[-1]
        if not node.constraint_queue:
            s.stack.pop()
            continue
        if node.g_value + config_heuristic(oracle, node.config, goals) >= best_cost:
            s.stack.pop()
            continue
        s._materialize_guidance(node)
        Q2 = s._draw_successor(node)
        if Q2 is None:
            continue
        s.configs_generated += 1
        key = (node.depth + 1, Q2)
        existing = s.explored.get(key)
        if existing is not None:
            ng = node.g_value + transition_cost(node.config, Q2, goals)
            if existing not in node.children:
                node.children.append(existing)
            if ng < existing.g_value:
                existing.g_value = ng
                existing.parent = node
                consider(existing)
                relax_children(existing)
            if existing.constraint_queue and existing.depth < s.w_pi:
                s.stack.append(existing)
            continue
        child = s._register_child(node, Q2)
        consider(child)
        if child.depth < s.w_pi and not s._is_goal(Q2):
            s.stack.append(child)

    if best_node is not None:
        plan = _backtrack(best_node)
        return WindowedResult(
            plan,
            s._is_goal(plan[-1]),
            s.nodes_expanded,
            s.configs_generated,
        )
    return WindowedResult(
        best_plan, result.reached_goal_config, s.nodes_expanded, s.configs_generated
    )
