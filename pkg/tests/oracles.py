"""Independent reference implementations used as test oracles.

Everything here works on plain Python sets and is written without reusing
the package's bitmask machinery.
"""

from collections import deque
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from damlearn.planner import GroundTask, Operator


def holds(lit: int, state: FrozenSet[int]) -> bool:
    return (lit in state) if lit >= 0 else ((-lit - 1) not in state)


def applicable(op: Operator, state: FrozenSet[int]) -> bool:
    return all(any(holds(l, state) for l in clause) for clause in op.pre)


def apply(op: Operator, state: FrozenSet[int]) -> FrozenSet[int]:
    adds, dels = set(), set()
    for eff in op.effects:
        if all(holds(l, state) for l in eff.condition):
            adds.update(eff.add)
            dels.update(eff.delete)
    return frozenset((set(state) - dels) | adds)


def simulate(task: GroundTask, plan: Iterable[int]) -> Optional[List[FrozenSet[int]]]:
    """State sequence, or None if a step is inapplicable or the goal fails."""
    s = frozenset(task.init)
    states = [s]
    for i in plan:
        op = task.operators[i]
        if not applicable(op, s):
            return None
        s = apply(op, s)
        states.append(s)
    return states if task.goal <= s else None


def distance(task: GroundTask, limit: int = 10 ** 5) -> Optional[int]:
    """Shortest plan length by exhaustive reachability, None if unreachable."""
    s0 = frozenset(task.init)
    dist: Dict[FrozenSet[int], int] = {s0: 0}
    queue = deque([s0])
    while queue:
        s = queue.popleft()
        if task.goal <= s:
            return dist[s]
        for op in task.operators:
            if applicable(op, s):
                t = apply(op, s)
                if t not in dist:
                    dist[t] = dist[s] + 1
                    if len(dist) > limit:
                        raise RuntimeError("state space too large for the oracle")
                    queue.append(t)
    return None


def edit_fluent_count(arities: Iterable[int], r: int, k: int) -> int:
    """3 kinds x sum over predicates of r**arity variable tuples x k."""
    return 3 * k * sum(r ** a for a in arities)


def fluent_tuples(arity: int, r: int) -> List[Tuple[int, ...]]:
    out: List[Tuple[int, ...]] = [()]
    for _ in range(arity):
        out = [t + (v,) for t in out for v in range(1, r + 1)]
    return out


def lifted_replay(schemas, init, goal, steps) -> bool:
    """Apply named lifted STRIPS steps from ``init``; True iff every
    precondition holds and the final state covers ``goal``."""
    by_name = {s.name: s for s in schemas}
    state = {(a.predicate, a.args) for a in init}
    for name, args in steps:
        s = by_name[name]
        binding = {v: a for (v, _), a in zip(s.params, args)}

        def sub(atoms):
            return {(a.predicate, tuple(binding.get(t, t) for t in a.args)) for a in atoms}

        if not sub(s.pre) <= state:
            return False
        state = (state - sub(s.delete)) | sub(s.add)
    return {(a.predicate, a.args) for a in goal} <= state
