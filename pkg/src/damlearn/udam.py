"""Search over (number of actions, max arity) configurations.

Each node ``(k, r)`` is one compiled problem. Nodes are popped smallest
grounded operator count first, solved, and the cheapest induced model is
kept. Children ``(k+1, r)`` and ``(k, r+1)`` are added within bounds.
"""

import dataclasses
import heapq
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .compiler import CapacityError, CompileOptions, compile_task, operator_count
from .induction import Induction, induce, plan_cost, prune_edits, replay
from .pddl import parse_plan
from .planner import PlannerConfig, ResourceExhausted, Unsolvable, solve
from .planner.external import ExternalFailure
from .task import ActionSchema, LearningTask

log = logging.getLogger(__name__)

STRATEGIES = ("exhaust", "first-sat")


class Unlearnable(Exception):
    def __init__(self, ledger: "SearchLedger"):
        self.ledger = ledger
        super().__init__(f"no satisfiable configuration among {len(ledger.closed)} nodes")


@dataclass(frozen=True)
class UdamConfig:
    planner: PlannerConfig = PlannerConfig()
    strategy: str = "exhaust"
    max_k: Optional[int] = None
    max_r: Optional[int] = None
    # wall-clock budget for the whole search, seconds
    time_budget: Optional[float] = None
    prune: bool = True
    jobs: int = 1
    compile: CompileOptions = CompileOptions()

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")


@dataclass(frozen=True, order=True)
class ConfigNode:
    operator_count: int
    k: int
    r: int

    @property
    def key(self) -> Tuple[int, int]:
        return (self.k, self.r)


@dataclass
class NodeRecord:
    k: int
    r: int
    operator_count: int
    outcome: str
    plan_length: Optional[int] = None
    cost: Optional[Fraction] = None
    wall_time: float = 0.0
    detail: str = ""

    def to_json(self) -> dict:
        d = dataclasses.asdict(self)
        d["cost"] = None if self.cost is None else str(self.cost)
        d["cost_float"] = None if self.cost is None else float(self.cost)
        return d


@dataclass
class Best:
    node: ConfigNode
    cost: Fraction
    plan: Tuple[str, ...]
    induction: Induction

    @property
    def rank(self) -> tuple:
        return (self.cost, self.node.k, self.node.r)


@dataclass
class SearchLedger:
    bounds: Tuple[int, int]
    open: List[ConfigNode] = field(default_factory=list)
    closed: List[Tuple[int, int]] = field(default_factory=list)
    best: Optional[Best] = None
    log: List[NodeRecord] = field(default_factory=list)
    improvements: List[Fraction] = field(default_factory=list)
    first_solution_time: Optional[float] = None
    total_time: float = 0.0
    stopped: str = ""

    def known(self, key: Tuple[int, int]) -> bool:
        return key in self.closed or any(n.key == key for n in self.open)

    def to_json(self) -> dict:
        best = self.best
        return {
            "bounds": {"k": self.bounds[0], "r": self.bounds[1]},
            "nodes": [r.to_json() for r in self.log],
            "open": [[n.k, n.r] for n in sorted(self.open)],
            "closed": [list(c) for c in self.closed],
            "improvements": [str(c) for c in self.improvements],
            "best": None if best is None else {
                "k": best.node.k, "r": best.node.r, "cost": str(best.cost),
                "cost_float": float(best.cost), "plan": list(best.plan)},
            "first_solution_time": self.first_solution_time,
            "total_time": self.total_time,
            "stopped": self.stopped,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


@dataclass
class UdamResult:
    models: List[ActionSchema]
    cost: Fraction
    ledger: SearchLedger
    task: LearningTask
    induction: Induction

    def __iter__(self):
        return iter((self.models, self.cost, self.ledger))

    def best_plan(self, options: CompileOptions = CompileOptions()):
        """Recompile the best node; returns ``(compiled problem, plan ids)``."""
        cp = compile_task(self.task, options)
        return cp, parse_plan("\n".join(self.ledger.best.plan), cp.index)

    def replay_best(self, options: CompileOptions = CompileOptions()):
        """Replay the best plan on the training traces."""
        return replay(*self.best_plan(options))


def bounds(task: LearningTask, cfg: UdamConfig) -> Tuple[int, int]:
    k_max = max(2 * len(task.predicates), 1)
    r_max = len(task.objects)
    if cfg.max_k is not None:
        k_max = cfg.max_k
    if cfg.max_r is not None:
        r_max = cfg.max_r
    return k_max, r_max


def node_task(task: LearningTask, k: int, r: int) -> LearningTask:
    return dataclasses.replace(task, k=k, r=r, enforce_bounds=False)


def make_node(task: LearningTask, k: int, r: int, cfg: UdamConfig) -> Optional[ConfigNode]:
    """None if the seeds do not fit the configuration."""
    if len(task.seeds) > k or any(s.arity > r for s in task.seeds):
        return None
    return ConfigNode(operator_count(node_task(task, k, r), cfg.compile), k, r)


def expand(node: ConfigNode, ledger: SearchLedger, task: LearningTask,
           cfg: UdamConfig) -> SearchLedger:
    """Push the in-bound, unseen children of a just-closed node."""
    k_max, r_max = ledger.bounds
    for k, r in ((node.k + 1, node.r), (node.k, node.r + 1)):
        if k > k_max or r > r_max or ledger.known((k, r)):
            continue
        child = make_node(task, k, r, cfg)
        if child is not None:
            heapq.heappush(ledger.open, child)
        else:
            ledger.closed.append((k, r))
            ledger.log.append(NodeRecord(k, r, 0, "seed-mismatch"))
            expand(ConfigNode(0, k, r), ledger, task, cfg)
    return ledger


@dataclass
class _Outcome:
    record: NodeRecord
    plan: Tuple[str, ...] = ()
    induction: Optional[Induction] = None


def evaluate(task: LearningTask, node: ConfigNode, cfg: UdamConfig,
             time_limit: float) -> _Outcome:
    """Compile, solve, prune and induce one configuration."""
    start = time.monotonic()
    rec = NodeRecord(node.k, node.r, node.operator_count, "")
    try:
        if node.operator_count > cfg.compile.capacity:
            raise CapacityError("grounded operators", node.operator_count, cfg.compile.capacity)
        cp = compile_task(node_task(task, node.k, node.r), cfg.compile)
        pcfg = cfg.planner.replace(time_limit=max(time_limit, 1e-3))
        if pcfg.engine == "external":
            plan = cp.solve_external(pcfg)
        else:
            plan = solve(cp.ground, pcfg)
        if cfg.prune:
            plan = prune_edits(cp, plan)
        induction = induce(cp, plan)
        check = replay(cp, plan, induction)
        if not check.ok:
            raise AssertionError("induced models fail replay: " + "; ".join(check.failures))
        assert induction.cost == plan_cost(cp, plan)
        rec.outcome = "solved"
        rec.plan_length = len(plan)
        rec.cost = induction.cost
        names = tuple(cp.ground.operators[i].name for i in plan)
        return _Outcome(rec, names, induction)
    except Unsolvable as exc:
        rec.outcome, rec.detail = "unsolvable", str(exc)
    except ResourceExhausted as exc:
        rec.outcome, rec.detail = f"exhausted-{exc.resource}", str(exc)
    except CapacityError as exc:
        rec.outcome, rec.detail = "capacity", str(exc)
    except ExternalFailure as exc:
        rec.outcome, rec.detail = "external-failure", str(exc)
    finally:
        rec.wall_time = time.monotonic() - start
    return _Outcome(rec)


def _evaluate_packed(args) -> _Outcome:
    return evaluate(*args)


def udam_search(task: LearningTask, cfg: UdamConfig = UdamConfig()) -> UdamResult:
    """Explore the bounded (k, r) lattice from (1, 0).

    Raises :class:`Unlearnable` when no visited node is satisfiable.
    """
    start = time.monotonic()
    deadline = start + cfg.time_budget if cfg.time_budget else None
    ledger = SearchLedger(bounds(task, cfg))
    root = make_node(task, 1, 0, cfg)
    if root is None:
        ledger.closed.append((1, 0))
        ledger.log.append(NodeRecord(1, 0, 0, "seed-mismatch"))
        expand(ConfigNode(0, 1, 0), ledger, task, cfg)
    else:
        heapq.heappush(ledger.open, root)

    pool = ProcessPoolExecutor(cfg.jobs) if cfg.jobs > 1 else None
    try:
        while ledger.open:
            remaining = (deadline - time.monotonic()) if deadline else cfg.planner.time_limit
            if remaining <= 0:
                ledger.stopped = "time-budget"
                break
            limit = min(cfg.planner.time_limit, remaining)
            batch = [heapq.heappop(ledger.open) for _ in range(min(cfg.jobs, len(ledger.open)))]
            jobs = [(task, n, cfg, limit) for n in batch]
            outcomes = list(pool.map(_evaluate_packed, jobs)) if pool else [
                _evaluate_packed(j) for j in jobs]
            for node, out in zip(batch, outcomes):
                ledger.closed.append(node.key)
                ledger.log.append(out.record)
                log.info("node (%d,%d) ops=%d %s %s", node.k, node.r, node.operator_count,
                         out.record.outcome, "" if out.record.cost is None else out.record.cost)
                if out.induction is not None:
                    if ledger.first_solution_time is None:
                        ledger.first_solution_time = time.monotonic() - start
                    cand = Best(node, out.record.cost, out.plan, out.induction)
                    if ledger.best is None or cand.cost < ledger.best.cost:
                        ledger.improvements.append(cand.cost)
                    if ledger.best is None or cand.rank < ledger.best.rank:
                        ledger.best = cand
                expand(node, ledger, task, cfg)
            if cfg.strategy == "first-sat" and ledger.best is not None:
                ledger.stopped = "first-sat"
                break
    finally:
        if pool is not None:
            pool.shutdown()
    ledger.total_time = time.monotonic() - start
    if ledger.best is None:
        raise Unlearnable(ledger)
    best = ledger.best
    return UdamResult(best.induction.schemas, best.cost, ledger,
                      node_task(task, best.node.k, best.node.r), best.induction)
