"""Built-in forward search engines."""

import heapq
import itertools
import logging
import math
import time
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import psutil

from .heuristic import AdditiveHeuristic
from .task import GroundTask, Plan

log = logging.getLogger(__name__)

ENGINES = ("internal-gbfs", "internal-bfs", "external")


class PlanningError(Exception):
    pass


class Unsolvable(PlanningError):
    """The whole reachable state space was searched without reaching the goal."""


class ResourceExhausted(PlanningError):
    def __init__(self, resource: str, detail: str = ""):
        self.resource = resource
        super().__init__(f"{resource} limit exhausted" + (f": {detail}" if detail else ""))


@dataclass(frozen=True)
class PlannerConfig:
    engine: str = "internal-gbfs"
    external_command: Optional[str] = None
    time_limit: float = 300.0
    memory_limit: int = 4 * 1024 ** 3
    # evaluate the heuristic when a node is expanded rather than generated
    lazy: bool = True
    max_expansions: Optional[int] = None
    unsolvable_exit_codes: Tuple[int, ...] = (10, 11)

    def __post_init__(self) -> None:
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}, expected one of {ENGINES}")
        if self.time_limit <= 0 or self.memory_limit <= 0:
            raise ValueError("resource limits must be positive")

    def replace(self, **kw) -> "PlannerConfig":
        from dataclasses import replace
        return replace(self, **kw)


class _Budget:
    def __init__(self, cfg: PlannerConfig):
        self.deadline = time.monotonic() + cfg.time_limit
        self.memory_limit = cfg.memory_limit
        self.max_expansions = cfg.max_expansions
        self.expansions = 0
        self._proc = psutil.Process()

    def tick(self) -> None:
        self.expansions += 1
        if self.max_expansions is not None and self.expansions > self.max_expansions:
            raise ResourceExhausted("expansions", str(self.max_expansions))
        if self.expansions & 127 == 0 and time.monotonic() > self.deadline:
            raise ResourceExhausted("time")
        if self.expansions & 4095 == 0 and self._proc.memory_info().rss > self.memory_limit:
            raise ResourceExhausted("memory")


def _extract(parents: Dict[int, Tuple[Optional[int], int]], s: int) -> Plan:
    steps = []
    while True:
        parent, op = parents[s]
        if parent is None:
            break
        steps.append(op)
        s = parent
    return Plan(tuple(reversed(steps)))


def breadth_first_search(task: GroundTask, cfg: PlannerConfig = PlannerConfig()) -> Plan:
    """Shortest plan by breadth-first search with duplicate detection."""
    budget = _Budget(cfg)
    s0 = task.init_mask
    if task.is_goal(s0):
        return Plan()
    parents: Dict[int, Tuple[Optional[int], int]] = {s0: (None, -1)}
    queue = deque([s0])
    while queue:
        s = queue.popleft()
        budget.tick()
        for op, t in task.successors(s):
            if t in parents:
                continue
            parents[t] = (s, op)
            if task.is_goal(t):
                return _extract(parents, t)
            queue.append(t)
    raise Unsolvable(f"exhausted {len(parents)} states")


def greedy_best_first_search(task: GroundTask, cfg: PlannerConfig = PlannerConfig()) -> Plan:
    """Greedy best-first search on the additive heuristic.

    Ties are broken by operator priority and then FIFO. Dead ends (infinite
    heuristic) are pruned, which is safe because the relaxation
    over-approximates reachability.
    """
    budget = _Budget(cfg)
    h = AdditiveHeuristic(task)
    prio = [op.priority for op in task.operators]
    counter = itertools.count()
    s0 = task.init_mask
    h0 = h(s0)
    if h0 == math.inf:
        raise Unsolvable("initial state is a relaxed dead end")
    parents: Dict[int, Tuple[Optional[int], int]] = {}
    # entries: (key, priority, tiebreak, state, parent, operator)
    open_list: List[tuple] = [(h0, 0, next(counter), s0, None, -1)]
    seen = {s0}
    while open_list:
        key, _, _, s, parent, op = heapq.heappop(open_list)
        if s in parents:
            continue
        parents[s] = (parent, op)
        if task.is_goal(s):
            return _extract(parents, s)
        budget.tick()
        if cfg.lazy:
            hs = h(s) if parent is not None else h0
            if hs == math.inf:
                continue
            for i, t in task.successors(s):
                if t not in parents:
                    heapq.heappush(open_list, (hs, prio[i], next(counter), t, s, i))
        else:
            for i, t in task.successors(s):
                if t in seen:
                    continue
                seen.add(t)
                ht = h(t)
                if ht == math.inf:
                    continue
                heapq.heappush(open_list, (ht, prio[i], next(counter), t, s, i))
    raise Unsolvable(f"exhausted {len(parents)} states")


def solve(task: GroundTask, cfg: PlannerConfig = PlannerConfig()) -> Plan:
    """Dispatch to the configured engine.

    Raises :class:`Unsolvable` or :class:`ResourceExhausted`; any returned
    plan has been validated against ``task``.
    """
    from .task import validate_plan
    if cfg.engine == "internal-bfs":
        plan = breadth_first_search(task, cfg)
    elif cfg.engine == "internal-gbfs":
        plan = greedy_best_first_search(task, cfg)
    else:
        from .external import solve_ground_task_external
        plan = solve_ground_task_external(task, cfg)
    validate_plan(task, plan.actions)
    return plan
