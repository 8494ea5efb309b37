"""Propositional planning tasks with clause preconditions and conditional
effects, plus the exact transition function used to validate plans.

Literals are ints: ``f`` for fluent ``f`` and ``~f`` for its negation.
Internally states are int bitmasks; the public simulator returns frozensets.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

Lit = int


def lit_fluent(lit: Lit) -> int:
    return lit if lit >= 0 else ~lit


@dataclass(frozen=True)
class Effect:
    """``condition ▷ (add, delete)``; an empty condition always fires."""

    condition: Tuple[Lit, ...] = ()
    add: Tuple[int, ...] = ()
    delete: Tuple[int, ...] = ()


@dataclass(frozen=True)
class Operator:
    name: str
    pre: Tuple[Tuple[Lit, ...], ...] = ()
    effects: Tuple[Effect, ...] = ()
    # search tie-breaking rank, lower is tried first
    priority: int = 0


@dataclass(frozen=True)
class Plan:
    actions: Tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.actions)

    def __iter__(self) -> Iterator[int]:
        return iter(self.actions)

    def __getitem__(self, i):
        return self.actions[i]


class Violation(Exception):
    """A plan step whose precondition clause fails, or an unmet goal."""

    def __init__(self, step: int, operator: Optional[str], clause: Optional[Tuple[Lit, ...]],
                 message: str):
        self.step = step
        self.operator = operator
        self.clause = clause
        super().__init__(message)


def _mask(ids: Iterable[int]) -> int:
    m = 0
    for i in ids:
        m |= 1 << i
    return m


def bits(state: int) -> List[int]:
    out = []
    i = 0
    while state:
        low = state & -state
        i = low.bit_length() - 1
        out.append(i)
        state ^= low
    return out


class _CompiledOp:
    __slots__ = ("pos", "neg", "clauses", "add", "dele", "cond")

    def __init__(self, op: Operator):
        self.pos = 0
        self.neg = 0
        self.clauses: List[Tuple[int, int]] = []
        for clause in op.pre:
            if len(clause) == 1:
                lit = clause[0]
                if lit >= 0:
                    self.pos |= 1 << lit
                else:
                    self.neg |= 1 << ~lit
            else:
                self.clauses.append((_mask(l for l in clause if l >= 0),
                                     _mask(~l for l in clause if l < 0)))
        self.add = 0
        self.dele = 0
        self.cond: List[Tuple[int, int, int, int]] = []
        for e in op.effects:
            if e.condition:
                self.cond.append((_mask(l for l in e.condition if l >= 0),
                                  _mask(~l for l in e.condition if l < 0),
                                  _mask(e.add), _mask(e.delete)))
            else:
                self.add |= _mask(e.add)
                self.dele |= _mask(e.delete)

    def applicable(self, s: int) -> bool:
        if s & self.pos != self.pos or s & self.neg:
            return False
        for p, n in self.clauses:
            if not (s & p or n & ~s):
                return False
        return True

    def apply(self, s: int) -> int:
        add, dele = self.add, self.dele
        for p, n, a, d in self.cond:
            if s & p == p and not s & n:
                add |= a
                dele |= d
        # delete first, then add
        return (s & ~dele) | add


@dataclass(frozen=True)
class GroundTask:
    """``<F, A, I, G>`` over dense fluent ids."""

    fluents: Tuple[str, ...]
    operators: Tuple[Operator, ...]
    init: FrozenSet[int]
    goal: FrozenSet[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "init", frozenset(self.init))
        object.__setattr__(self, "goal", frozenset(self.goal))
        n = len(self.fluents)
        for f in self.init | self.goal:
            if not 0 <= f < n:
                raise ValueError(f"fluent id {f} out of range")
        for op in self.operators:
            for clause in op.pre:
                if not clause:
                    raise ValueError(f"{op.name}: empty precondition clause")
                for lit in clause:
                    if not 0 <= lit_fluent(lit) < n:
                        raise ValueError(f"{op.name}: literal {lit} out of range")
            for e in op.effects:
                for f in (*map(lit_fluent, e.condition), *e.add, *e.delete):
                    if not 0 <= f < n:
                        raise ValueError(f"{op.name}: effect fluent {f} out of range")

    @cached_property
    def compiled(self) -> List[_CompiledOp]:
        return [_CompiledOp(op) for op in self.operators]

    @cached_property
    def init_mask(self) -> int:
        return _mask(self.init)

    @cached_property
    def goal_mask(self) -> int:
        return _mask(self.goal)

    def is_goal(self, s: int) -> bool:
        return s & self.goal_mask == self.goal_mask

    def successors(self, s: int) -> Iterator[Tuple[int, int]]:
        for i, op in enumerate(self.compiled):
            if op.applicable(s):
                yield i, op.apply(s)

    def state_names(self, s: Iterable[int]) -> List[str]:
        return [self.fluents[f] for f in sorted(s)]

    def plan_names(self, plan: Iterable[int]) -> List[str]:
        return [self.operators[i].name for i in plan]


def _failing_clause(op: Operator, s: int) -> Tuple[Lit, ...]:
    for clause in op.pre:
        if not any((s >> l) & 1 if l >= 0 else not (s >> ~l) & 1 for l in clause):
            return clause
    raise AssertionError("no failing clause")


def validate_plan(task: GroundTask, plan: Sequence[int]) -> List[FrozenSet[int]]:
    """Simulate ``plan`` from the initial state.

    Returns the visited states ``s_0 .. s_n``; raises :class:`Violation` on
    the first inapplicable step or if the goal does not hold at the end.
    """
    s = task.init_mask
    states = [s]
    for step, i in enumerate(plan, 1):
        if not 0 <= i < len(task.operators):
            raise Violation(step, None, None, f"step {step}: no operator with id {i}")
        cop = task.compiled[i]
        if not cop.applicable(s):
            op = task.operators[i]
            clause = _failing_clause(op, s)
            raise Violation(step, op.name, clause,
                            f"step {step}: {op.name} not applicable, clause "
                            f"{[_lit_name(task, l) for l in clause]} is false")
        s = cop.apply(s)
        states.append(s)
    if not task.is_goal(s):
        missing = sorted(task.goal - set(bits(s)))
        raise Violation(len(plan), None, None,
                        f"goal not reached, missing {task.state_names(missing)[:5]}")
    return [frozenset(bits(x)) for x in states]


def is_valid_plan(task: GroundTask, plan: Sequence[int]) -> bool:
    try:
        validate_plan(task, plan)
    except Violation:
        return False
    return True


def _lit_name(task: GroundTask, lit: Lit) -> str:
    return task.fluents[lit] if lit >= 0 else f"not {task.fluents[~lit]}"
