"""Instance generators, trace generation and coverage of learned models."""

import json
import logging
import random
import time
from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence, Tuple

from .data import read_text
from .induction import NotASolution, simulate
from .pddl import Atom, DomainAst, ProblemAst, parse_domain
from .planner import (PlannerConfig, PlanningError, Unsolvable, ground_problem,
                      solve, validate_plan)
from .planner.external import ExternalFailure
from .task import ActionSchema, Trace, ground

log = logging.getLogger(__name__)

GENERATORS = ("visitall", "blocksworld", "hanoi")


def reference_domain(name: str) -> DomainAst:
    return parse_domain(read_text(f"{name}.pddl"))


def visitall_instance(n: int, seed: int, name: Optional[str] = None) -> ProblemAst:
    """``n`` x ``n`` grid, places ``p1..`` row-major, 4-neighbour moves and a
    seeded start place. Goal: every place visited."""
    if n < 1:
        raise ValueError("grid size must be positive")
    rng = random.Random(seed)
    places = [f"p{i}" for i in range(1, n * n + 1)]
    conn = []
    for i in range(n):
        for j in range(n):
            a = places[i * n + j]
            for di, dj in ((0, 1), (1, 0), (0, -1), (-1, 0)):
                if 0 <= i + di < n and 0 <= j + dj < n:
                    conn.append(Atom("connected", (a, places[(i + di) * n + j + dj])))
    start = rng.choice(places)
    init = (Atom("agent-at", (start,)), Atom("visited", (start,))) + tuple(conn)
    goal = tuple(Atom("visited", (p,)) for p in places)
    return ProblemAst(name or f"visitall-{n}x{n}-s{seed}", "visitall",
                      tuple((p, "place") for p in places), init, goal)


def _random_towers(blocks: List[str], rng: random.Random) -> List[List[str]]:
    order = blocks[:]
    rng.shuffle(order)
    towers: List[List[str]] = []
    for b in order:
        # join an existing tower or start a new one
        slot = rng.randrange(len(towers) + 1)
        if slot == len(towers):
            towers.append([b])
        else:
            towers[slot].append(b)
    return towers


def _tower_atoms(towers: List[List[str]]) -> List[Atom]:
    atoms = []
    for t in towers:
        atoms.append(Atom("ontable", (t[0],)))
        atoms.extend(Atom("on", (upper, lower)) for lower, upper in zip(t, t[1:]))
        atoms.append(Atom("clear", (t[-1],)))
    return atoms


def blocksworld_instance(n: int, seed: int, name: Optional[str] = None) -> ProblemAst:
    """``n`` blocks in random towers; the goal is another random set of
    towers given by its ``on`` atoms."""
    if n < 1:
        raise ValueError("need at least one block")
    rng = random.Random(seed)
    blocks = [f"b{i}" for i in range(1, n + 1)]
    init = _tower_atoms(_random_towers(blocks, rng)) + [Atom("handempty")]
    goal = [a for a in _tower_atoms(_random_towers(blocks, rng)) if a.predicate == "on"]
    if not goal:
        goal = [a for a in _tower_atoms([blocks]) if a.predicate == "on"] or \
            [Atom("ontable", (blocks[0],))]
    return ProblemAst(name or f"blocksworld-{n}-s{seed}", "blocksworld",
                      tuple((b, "object") for b in blocks), tuple(sorted(set(init))),
                      tuple(sorted(set(goal))))


def hanoi_instance(n: int, seed: int, name: Optional[str] = None) -> ProblemAst:
    """``n`` discs on three pegs in a random legal configuration; goal is the
    full tower on ``peg3``. Disc ``d1`` is the smallest."""
    if n < 1:
        raise ValueError("need at least one disc")
    rng = random.Random(seed)
    pegs = ["peg1", "peg2", "peg3"]
    discs = [f"d{i}" for i in range(1, n + 1)]
    init = []
    for p in pegs:
        init.extend(Atom("smaller", (p, d)) for d in discs)
    for i, big in enumerate(discs):
        init.extend(Atom("smaller", (big, small)) for small in discs[:i])
    stacks = {p: [] for p in pegs}
    for d in reversed(discs):
        stacks[rng.choice(pegs)].append(d)
    for p, stack in stacks.items():
        below = p
        for d in stack:
            init.append(Atom("on", (d, below)))
            below = d
        init.append(Atom("clear", (below,)))
    goal = []
    below = "peg3"
    for d in reversed(discs):
        goal.append(Atom("on", (d, below)))
        below = d
    return ProblemAst(name or f"hanoi-{n}-s{seed}", "hanoi",
                      tuple((o, "object") for o in pegs + discs), tuple(init), tuple(goal))


def generate_instances(domain: str, size: int, seeds: Sequence[int]) -> List[ProblemAst]:
    make = {"visitall": visitall_instance, "blocksworld": blocksworld_instance,
            "hanoi": hanoi_instance}.get(domain)
    if make is None:
        raise ValueError(f"no generator for {domain!r}, expected one of {GENERATORS}")
    return [make(size, s) for s in seeds]


def generate_traces(domain: DomainAst, instances: Sequence[ProblemAst],
                    observability: str = "endpoints",
                    cfg: PlannerConfig = PlannerConfig(),
                    skipped: Optional[List[str]] = None) -> List[Trace]:
    """Endpoint traces, or full state sequences of reference-domain plans.

    Unsolvable instances are skipped (their names go to ``skipped``).
    """
    if observability not in ("endpoints", "full-states"):
        raise ValueError("observability must be 'endpoints' or 'full-states'")
    traces = []
    for prob in instances:
        if observability == "endpoints":
            traces.append(Trace.from_problem(prob))
            continue
        gp = ground_problem(domain, prob)
        try:
            plan = solve(gp.task, cfg)
        except PlanningError as exc:
            log.warning("skipping %s: %s", prob.name, exc)
            if skipped is not None:
                skipped.append(prob.name)
            continue
        # record complete states, including static facts
        static = frozenset(prob.init) - frozenset(gp.table.atoms)
        states = [frozenset(gp.state_atoms(s)) | static for s in validate_plan(gp.task, plan.actions)]
        traces.append(Trace(prob.name, frozenset(prob.init), frozenset(prob.goal),
                            tuple(states), prob.objects))
    return traces


@dataclass
class InstanceRecord:
    instance: str
    solved: bool
    plan_length: Optional[int]
    wall_time: float
    outcome: str


@dataclass
class CoverageReport:
    records: List[InstanceRecord]

    @property
    def solved(self) -> int:
        return sum(r.solved for r in self.records)

    @property
    def total(self) -> int:
        return len(self.records)

    @property
    def fraction(self) -> float:
        return self.solved / self.total if self.records else 0.0

    def to_json(self) -> dict:
        return {"coverage": self.fraction, "solved": self.solved, "total": self.total,
                "instances": [asdict(r) for r in self.records]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def coverage(domain: DomainAst, instances: Sequence[ProblemAst],
             cfg: PlannerConfig = PlannerConfig()) -> CoverageReport:
    """Solve every instance under the learned ``domain``.

    An instance counts only if its plan also passes an independent
    simulation with the learned schemas.
    """
    schemas = [ActionSchema.from_action(a) for a in domain.actions]
    records = []
    for prob in instances:
        start = time.monotonic()
        try:
            gp = ground_problem(domain, prob)
            plan = solve(gp.task, cfg) if cfg.engine != "external" else _solve_ext(domain, prob, gp, cfg)
            steps = [gp.steps[i] for i in plan.actions]
            table = ground(domain.predicates, prob.objects, domain.hierarchy)
            simulate(schemas, Trace.from_problem(prob), steps, table)
            rec = InstanceRecord(prob.name, True, len(plan), 0.0, "solved")
        except Unsolvable:
            rec = InstanceRecord(prob.name, False, None, 0.0, "unsolvable")
        except NotASolution as exc:
            rec = InstanceRecord(prob.name, False, None, 0.0, f"invalid: {exc}")
        except (PlanningError, ExternalFailure) as exc:
            rec = InstanceRecord(prob.name, False, None, 0.0, f"failed: {exc}")
        rec.wall_time = time.monotonic() - start
        records.append(rec)
    return CoverageReport(records)


def _solve_ext(domain: DomainAst, prob: ProblemAst, gp, cfg: PlannerConfig):
    from .pddl import print_domain, print_problem
    from .planner import solve_external
    return solve_external(print_domain(domain), print_problem(prob), gp.index, gp.task, cfg)


def split_seeds(seed: int, n_train: int, n_val: int) -> Tuple[List[int], List[int]]:
    """Disjoint train and validation seed lists derived from ``seed``."""
    rng = random.Random(seed)
    pool = rng.sample(range(10 ** 6), n_train + n_val)
    return pool[:n_train], pool[n_train:]
