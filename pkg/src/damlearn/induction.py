"""From DAM plans to action schemas and back.

``induce`` reads the edit prefix of a compiled plan and produces concrete
schemas; ``encode_witness`` goes the other way and builds a compiled plan
from given schemas and per-trace action sequences.
"""

import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .compiler import (ApplyAction, CompiledProblem, EditAction, EditFluent,
                       sigma_of)
from .pddl import ROOT_TYPE, Atom, DomainAst, PredicateSignature, print_domain
from .planner import Plan, Violation, validate_plan
from .pddl.ast import TypeHierarchy
from .task import (ActionSchema, GroundAtomTable, LearningTask, State, Trace,
                   check_well_defined, ground, ground_schema,
                   schemas_to_domain, trim_schema, variable_names)

log = logging.getLogger(__name__)

Step = Tuple[str, Tuple[str, ...]]


class IllFormedPlan(ValueError):
    pass


class NotASolution(ValueError):
    def __init__(self, trace: str, step: Optional[int], message: str):
        self.trace = trace
        self.step = step
        super().__init__(f"trace {trace}: {message}")


@dataclass(frozen=True)
class InducedModel:
    slot: int                       # 1-based act index in the compilation
    schema: ActionSchema            # trimmed, ready to print
    untrimmed: ActionSchema         # over the compiled ?v1..?vj
    kept: Tuple[int, ...]           # untrimmed positions of schema params
    edits: Dict[str, int]           # edit counts by kind


@dataclass(frozen=True)
class Induction:
    models: Tuple[InducedModel, ...]
    dropped: Tuple[ActionSchema, ...]   # effect-free slots, untrimmed
    k: int
    slots: Tuple[ActionSchema, ...] = ()  # every slot untrimmed, in slot order

    @property
    def schemas(self) -> List[ActionSchema]:
        return [m.schema for m in self.models]

    @property
    def cost(self) -> Fraction:
        return model_cost([m.untrimmed for m in self.models], self.k, self.dropped)

    def by_slot(self) -> Dict[int, InducedModel]:
        return {m.slot: m for m in self.models}


def _edit_steps(cp: CompiledProblem, plan: Sequence[int]) -> List[EditFluent]:
    tags = cp.operator_tags
    pivot = cp.ed2val
    if pivot not in plan:
        raise IllFormedPlan("plan never switches to validation mode")
    at = list(plan).index(pivot)
    for step in plan[at + 1:]:
        if isinstance(tags[step], EditAction):
            raise IllFormedPlan(f"edit {cp.ground.operators[step].name} after ed2val")
    edits = []
    for step in plan[:at]:
        tag = tags[step]
        if not isinstance(tag, EditAction):
            raise IllFormedPlan(f"{cp.ground.operators[step].name} before ed2val")
        edits.append(tag.edit)
    return edits


def induce(cp: CompiledProblem, plan: Sequence[int]) -> Induction:
    """Apply the plan's edits to the initial partial models.

    Unused parameters are trimmed and renumbered. Slots that end with no
    effects are dropped with a warning since they can never change a state.
    """
    edits = _edit_steps(cp, list(plan))
    pre = [set(m.pre) for m in cp.initial_models]
    add = [set(m.add) for m in cp.initial_models]
    dele = [set(m.delete) for m in cp.initial_models]
    counts = [{"rpre": 0, "add": 0, "del": 0} for _ in cp.initial_models]
    for e in edits:
        i = e.action - 1
        counts[i][e.kind] += 1
        target = {"rpre": None, "add": add[i], "del": dele[i]}[e.kind]
        if target is None:
            pre[i].discard(e.atom)
        else:
            target.add(e.atom)
    models, dropped, slots = [], [], []
    for i, base in enumerate(cp.initial_models):
        schema = ActionSchema(base.name, base.params, frozenset(pre[i]), frozenset(add[i]),
                              frozenset(dele[i]))
        slots.append(schema)
        if not schema.add and not schema.delete:
            if any(counts[i].values()):
                log.warning("dropping effect-free action %s", base.name)
            dropped.append(schema)
            continue
        trimmed, kept = trim_schema(schema)
        check_well_defined(trimmed)
        models.append(InducedModel(i + 1, trimmed, schema, kept, counts[i]))
    return Induction(tuple(models), tuple(dropped), cp.task.k, tuple(slots))


def induce_models(cp: CompiledProblem, plan: Sequence[int]) -> List[ActionSchema]:
    return induce(cp, plan).schemas


def model_cost(models: Sequence[ActionSchema], k: int,
               dropped: Sequence[ActionSchema] = ()) -> Fraction:
    """Average over the declared ``k`` of ``|add| + |del| - |pre|``.

    Dropped effect-free actions still count with their remaining
    preconditions.
    """
    if k < 1:
        raise ValueError("k must be positive")
    total = sum(len(m.add) + len(m.delete) - len(m.pre) for m in models)
    total -= sum(len(m.pre) for m in dropped)
    return Fraction(total, k)


def plan_cost(cp: CompiledProblem, plan: Sequence[int]) -> Fraction:
    """Cost read off the edit prefix alone."""
    edits = _edit_steps(cp, list(plan))
    n = {"rpre": 0, "add": 0, "del": 0}
    for e in edits:
        n[e.kind] += 1
    preset = sum(len(m.add) + len(m.delete) for m in cp.initial_models)
    initial_pre = sum(len(m.pre) for m in cp.initial_models)
    return Fraction(n["add"] + n["del"] + preset - (initial_pre - n["rpre"]), cp.task.k)


# simulation over plain atom sets, independent of the compiled encoding

def _table(task: LearningTask) -> GroundAtomTable:
    return ground(task.predicates, task.objects, task.hierarchy)


def ground_step(schema: ActionSchema, args: Sequence[str], table: GroundAtomTable):
    """Ground ``schema`` at ``args``; ill-typed atoms are false/ignored."""
    if len(args) != schema.arity:
        raise ValueError(f"{schema.name} takes {schema.arity} arguments, got {len(args)}")
    binding = dict(zip(schema.param_names, args))
    pre = {a.substitute(binding) for a in schema.pre}
    add = {a.substitute(binding) for a in schema.add}
    dele = {a.substitute(binding) for a in schema.delete}
    ok = all(a in table for a in pre)
    return ok, frozenset(pre), frozenset(a for a in add if a in table), \
        frozenset(a for a in dele if a in table)


def simulate(models: Sequence[ActionSchema], trace: Trace, steps: Sequence[Step],
             table: GroundAtomTable) -> List[State]:
    """States visited by ``steps`` from the trace's initial state; raises
    :class:`NotASolution` on an inapplicable step or an unmet goal."""
    by_name = {m.name: m for m in models}
    s = frozenset(trace.init)
    states = [s]
    for n, (name, args) in enumerate(steps, 1):
        if name not in by_name:
            raise NotASolution(trace.id, n, f"unknown action {name}")
        ok, pre, add, dele = ground_step(by_name[name], args, table)
        if not ok or not pre <= s:
            missing = sorted(str(a) for a in pre - s)
            raise NotASolution(trace.id, n, f"step {n} ({name} {' '.join(args)}) "
                                            f"inapplicable, missing {missing}")
        s = (s - dele) | add
        states.append(s)
    if not trace.goal <= s:
        raise NotASolution(trace.id, None,
                           f"goal not reached, missing {sorted(str(a) for a in trace.goal - s)}")
    return states


def trace_plans(cp: CompiledProblem, plan: Sequence[int], induction: Induction) -> List[List[Step]]:
    """Per-trace action sequences of the apply suffix, expressed over the
    trimmed induced schemas. Applications of dropped slots are skipped."""
    by_slot = induction.by_slot()
    out: List[List[Step]] = [[] for _ in range(cp.task.m)]
    at = list(plan).index(cp.ed2val)
    for step in plan[at + 1:]:
        tag = cp.operator_tags[step]
        assert isinstance(tag, ApplyAction)
        m = by_slot.get(tag.action)
        if m is None:
            continue
        out[tag.trace - 1].append((m.schema.name, tuple(tag.omega[i] for i in m.kept)))
    return out


def slot_plans(cp: CompiledProblem, plan: Sequence[int]) -> List[List[Step]]:
    """Per-trace action sequences over the untrimmed slot schemas."""
    names = [m.name for m in cp.initial_models]
    out: List[List[Step]] = [[] for _ in range(cp.task.m)]
    at = list(plan).index(cp.ed2val)
    for step in plan[at + 1:]:
        tag = cp.operator_tags[step]
        out[tag.trace - 1].append((names[tag.action - 1], tag.omega))
    return out


@dataclass(frozen=True)
class ReplayResult:
    ok: bool
    failures: Tuple[str, ...] = ()


def replay(cp: CompiledProblem, plan: Sequence[int],
           induction: Optional[Induction] = None) -> ReplayResult:
    """Check that the induced models, applied along each trace's subsequence
    of the plan, turn every initial state into one satisfying its goal."""
    induction = induction or induce(cp, plan)
    table = _table(cp.task)
    failures = []
    for trace, steps in zip(cp.task.traces, trace_plans(cp, plan, induction)):
        try:
            simulate(induction.schemas, trace, steps, table)
        except NotASolution as exc:
            failures.append(str(exc))
    return ReplayResult(not failures, tuple(failures))


def encode_witness(models: Sequence[ActionSchema], cp: CompiledProblem,
                   plans: Sequence[Sequence[Step]]) -> Plan:
    """Build a compiled plan realizing ``models`` and the per-trace ``plans``.

    Model ``i`` is placed in slot ``i + 1``; its parameters map to the slot
    variables by position and spare slot variables are bound to the first
    object. Raises :class:`NotASolution` if a trace plan fails under the
    models and ``ValueError`` if a model does not fit the compilation.
    """
    task = cp.task
    if len(models) > task.k:
        raise ValueError(f"{len(models)} models do not fit k={task.k}")
    if len(plans) != task.m:
        raise ValueError(f"need {task.m} trace plans, got {len(plans)}")
    table = _table(task)
    for trace, steps in zip(task.traces, plans):
        simulate(models, trace, steps, table)

    fluent_ids = {t: i for i, t in enumerate(cp.fluent_tags)}
    edit_ops = {t.edit: i for i, t in enumerate(cp.operator_tags) if isinstance(t, EditAction)}
    init = cp.ground.init
    prefix: List[int] = []
    slot_of: Dict[str, int] = {}
    for a, model in enumerate(models, 1):
        arity = cp.arities[a - 1]
        if model.arity > arity:
            raise ValueError(f"{model.name} has arity {model.arity} > usable arity {arity}")
        slot_of[model.name] = a
        ren = dict(zip(model.param_names, variable_names(model.arity)))
        want = {"rpre": None, "add": {x.substitute(ren) for x in model.add},
                "del": {x.substitute(ren) for x in model.delete}}
        pre = {x.substitute(ren) for x in model.pre}
        initial = cp.initial_models[a - 1]
        if not pre <= initial.pre:
            raise ValueError(f"{model.name}: preconditions {sorted(map(str, pre - initial.pre))} "
                             "are not in the partial model")
        wanted = []
        for x in sorted(initial.pre - pre):
            wanted.append(EditFluent("rpre", a, x.predicate, sigma_of(x)))
        for kind in ("add", "del"):
            for x in sorted(want[kind]):
                wanted.append(EditFluent(kind, a, x.predicate, sigma_of(x)))
            base = initial.add if kind == "add" else initial.delete
            if not base <= want[kind]:
                raise ValueError(f"{model.name}: lacks seeded {kind} effects")
        for e in wanted:
            if e not in fluent_ids:
                raise ValueError(f"{model.name}: edit {e} is not part of the compilation")
            if fluent_ids[e] in init:
                continue
            prefix.append(edit_ops[e])
    prefix.sort()
    suffix: List[int] = []
    first = task.objects[0][0] if task.objects else None
    for t, steps in enumerate(plans, 1):
        for name, args in steps:
            a = slot_of[name]
            omega = tuple(args) + (first,) * (cp.arities[a - 1] - len(args))
            suffix.append(cp.operator_id(ApplyAction(a, t, omega)))
    plan = Plan(tuple(prefix) + (cp.ed2val,) + tuple(suffix))
    validate_plan(cp.ground, plan.actions)
    return plan


def prune_edits(cp: CompiledProblem, plan: Sequence[int]) -> Plan:
    """Greedily drop edit steps while the plan stays valid.

    Every removed edit lowers the cost: fewer effects, or one more retained
    precondition.
    """
    actions = list(plan)
    changed = True
    while changed:
        changed = False
        at = actions.index(cp.ed2val)
        for i in range(at - 1, -1, -1):
            cand = actions[:i] + actions[i + 1:]
            try:
                validate_plan(cp.ground, cand)
            except Violation:
                continue
            actions = cand
            changed = True
            break
    return Plan(tuple(actions))


def refine_types(schema: ActionSchema, predicates: Sequence[PredicateSignature],
                 hierarchy: TypeHierarchy) -> ActionSchema:
    """Narrow ``object`` parameters to the types their precondition slots
    demand. Exact under the convention that ill-typed atoms are false."""
    sig = {p.name: p.types for p in predicates}
    need: Dict[str, List[str]] = {}
    for atom in schema.pre:
        for v, t in zip(atom.args, sig[atom.predicate]):
            need.setdefault(v, []).append(t)
    params = []
    for v, t in schema.params:
        best = hierarchy.most_specific(need.get(v, []) + [t]) if t == ROOT_TYPE else None
        params.append((v, best or t))
    return ActionSchema(schema.name, tuple(params), schema.pre, schema.add, schema.delete)


def export_domain(task: LearningTask, schemas: Sequence[ActionSchema],
                  name: str = "learned") -> DomainAst:
    refined = [refine_types(s, task.predicates, task.hierarchy) for s in schemas]
    return schemas_to_domain(name, task.predicates, refined, task.types)


def export(task: LearningTask, induction: Induction, cp: Optional[CompiledProblem] = None,
           plan: Sequence[int] = (), name: str = "learned") -> Tuple[str, str]:
    """Learned PDDL domain text and a JSON metadata block."""
    domain = print_domain(export_domain(task, induction.schemas, name))
    meta = {
        "cost": str(induction.cost),
        "cost_float": float(induction.cost),
        "k": task.k,
        "r": task.r,
        "actions": [{"name": m.schema.name, "slot": m.slot, "arity": m.schema.arity,
                     "edits": m.edits} for m in induction.models],
        "dropped": [d.name for d in induction.dropped],
        "plan": [cp.ground.operators[i].name for i in plan] if cp is not None else [],
    }
    return domain, json.dumps(meta, indent=1)


def load_metadata(text: str) -> Mapping:
    return json.loads(text)
