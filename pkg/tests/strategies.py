"""Hypothesis strategies for random planning and learning tasks."""

import itertools
import random

from hypothesis import strategies as st

from damlearn.pddl import Atom, PredicateSignature
from damlearn.planner import Effect, GroundTask, Operator
from damlearn.task import LearningTask, Trace


@st.composite
def literals(draw, n: int):
    f = draw(st.integers(0, n - 1))
    return f if draw(st.booleans()) else ~f


@st.composite
def ground_tasks(draw, max_fluents: int = 7, max_ops: int = 8) -> GroundTask:
    n = draw(st.integers(1, max_fluents))
    ops = []
    for j in range(draw(st.integers(1, max_ops))):
        pre = tuple(tuple(draw(st.lists(literals(n), min_size=1, max_size=2, unique=True)))
                    for _ in range(draw(st.integers(0, 2))))
        effects = []
        for _ in range(draw(st.integers(1, 3))):
            cond = tuple(draw(st.lists(literals(n), max_size=2, unique=True)))
            add = tuple(draw(st.lists(st.integers(0, n - 1), max_size=2, unique=True)))
            dele = tuple(draw(st.lists(st.integers(0, n - 1), max_size=2, unique=True)))
            effects.append(Effect(cond, add, dele))
        ops.append(Operator(f"(o{j})", pre, tuple(effects), priority=draw(st.integers(0, 2))))
    init = frozenset(draw(st.lists(st.integers(0, n - 1), max_size=n, unique=True)))
    goal = frozenset(draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=3, unique=True)))
    return GroundTask(tuple(f"(f{i})" for i in range(n)), tuple(ops), init, goal)


def random_learning_task(seed: int, max_preds: int = 3, max_objects: int = 3,
                         max_traces: int = 2) -> LearningTask:
    """Untyped task with small random traces; k and r are drawn too."""
    rng = random.Random(seed)
    n_preds = rng.randint(1, max_preds)
    preds = tuple(PredicateSignature(f"q{i}", tuple((f"?x{j}", "object")
                                                   for j in range(rng.randint(0, 2))))
                  for i in range(n_preds))
    objects = tuple((f"o{i}", "object") for i in range(1, rng.randint(1, max_objects) + 1))
    atoms = [Atom(p.name, args) for p in preds
             for args in itertools.product([o for o, _ in objects], repeat=p.arity)]
    traces = []
    for t in range(rng.randint(1, max_traces)):
        init = frozenset(a for a in atoms if rng.random() < 0.4)
        goal = frozenset(rng.sample(atoms, rng.randint(1, min(2, len(atoms)))))
        traces.append(Trace(f"t{t}", init, goal, objects=objects))
    k = rng.randint(1, 2)
    r = rng.randint(0, min(2, len(objects)))
    return LearningTask(preds, objects, tuple(traces), k, r, enforce_bounds=False)


def random_ground_task(seed: int, max_fluents: int = 12, max_ops: int = 24) -> GroundTask:
    """Seeded STRIPS-plus-conditional-effects task; at most 2**12 states."""
    rng = random.Random(seed)
    n = rng.randint(3, max_fluents)

    def lits(lo, hi):
        fs = rng.sample(range(n), rng.randint(lo, min(hi, n)))
        return tuple(f if rng.random() < 0.7 else ~f for f in fs)

    ops = []
    for j in range(rng.randint(1, max_ops)):
        pre = tuple((lit,) for lit in lits(1, 3))
        effects = [Effect((), (rng.randrange(n),),
                          tuple(rng.sample(range(n), rng.randint(0, 1))))]
        if rng.random() < 0.3:
            effects.append(Effect(lits(1, 1), (rng.randrange(n),), ()))
        ops.append(Operator(f"(o{j})", pre, tuple(effects)))
    init = frozenset(rng.sample(range(n), rng.randint(0, n // 2)))
    goal = frozenset(rng.sample(range(n), rng.randint(1, min(4, n))))
    return GroundTask(tuple(f"(f{i})" for i in range(n)), tuple(ops), init, goal)
