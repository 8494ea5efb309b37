"""Compile a learning task into one classical planning problem.

A plan for the compiled problem first edits the partial action models
(removes preconditions, programs add/delete effects), then switches to
validation mode with ``ed2val`` and applies the edited actions to every
trace in parallel until all trace goals hold.
"""

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

from .pddl import (ROOT_TYPE, ActionAst, ActionIndex, Atom, ConditionalEffect,
                   DomainAst, EffectFormula, Formula, Literal,
                   PredicateSignature, ProblemAst, print_domain,
                   print_problem)
from .planner import (Effect, GroundTask, Operator, Plan, PlannerConfig,
                      solve_external)
from .task import (ActionSchema, GroundAtomTable, LearningTask, ground,
                   partial_precondition, variable_names)

EDIT_KINDS = ("rpre", "add", "del")
DEFAULT_CAPACITY = 5_000_000

EDIT_MODE = 0
VAL_MODE = 1


class CompileError(ValueError):
    pass


class CapacityError(CompileError):
    def __init__(self, what: str, count: int, budget: int):
        self.count = count
        self.budget = budget
        super().__init__(f"{what}: {count} exceeds budget {budget}")


Sigma = Tuple[int, ...]


@dataclass(frozen=True)
class ModeFluent:
    name: str


@dataclass(frozen=True)
class EditFluent:
    kind: str
    action: int
    predicate: str
    sigma: Sigma

    @property
    def atom(self) -> Atom:
        return Atom(self.predicate, tuple(f"?v{i}" for i in self.sigma))


@dataclass(frozen=True)
class HoldsFluent:
    trace: int
    predicate: str
    omega: Tuple[str, ...]


@dataclass(frozen=True)
class TouchedFluent:
    action: int


@dataclass(frozen=True)
class EditAction:
    edit: EditFluent


@dataclass(frozen=True)
class Ed2Val:
    pass


@dataclass(frozen=True)
class ApplyAction:
    action: int
    trace: int
    omega: Tuple[str, ...]


FluentTag = Union[ModeFluent, EditFluent, HoldsFluent, TouchedFluent]
OperatorTag = Union[EditAction, Ed2Val, ApplyAction]


@dataclass(frozen=True)
class CompileOptions:
    capacity: int = DEFAULT_CAPACITY
    # per-action usable arity; None means r for every action
    usable_arity: Optional[Tuple[int, ...]] = None
    symmetry_breaking: bool = False


@dataclass(frozen=True)
class CompiledObjects:
    base: Tuple[str, ...]
    vars: Tuple[str, ...]
    preds: Tuple[str, ...]
    acts: Tuple[str, ...]
    trs: Tuple[str, ...]


def sigma_of(atom: Atom) -> Sigma:
    return tuple(int(v[2:]) for v in atom.args)


def edit_name(e: EditFluent) -> str:
    return f"{e.kind}_act{e.action}_{e.predicate}" + "".join(f"_v{i}" for i in e.sigma)


def holds_name(trace: int, predicate: str) -> str:
    return f"holds_tr{trace}_{predicate}"


def _op_name(name: str, args: Sequence[str] = ()) -> str:
    return "(" + " ".join((name,) + tuple(args)) + ")"


@dataclass(frozen=True)
class SeedInfo:
    protected: FrozenSet[Sigma]
    preset: FrozenSet[Tuple[str, str, Sigma]]  # (kind, predicate, sigma)


def _seed_info(task: LearningTask) -> List[SeedInfo]:
    out = []
    for i in range(task.k):
        if i >= len(task.seeds):
            out.append(SeedInfo(frozenset(), frozenset()))
            continue
        seed = task.seeds[i]
        ren = {p: f"?v{j}" for j, p in enumerate(seed.param_names, 1)}
        protected = frozenset((a.predicate, sigma_of(a.substitute(ren))) for a in seed.pre)
        preset = frozenset(
            [("add", a.predicate, sigma_of(a.substitute(ren))) for a in seed.add]
            + [("del", a.predicate, sigma_of(a.substitute(ren))) for a in seed.delete])
        out.append(SeedInfo(protected, preset))  # type: ignore[arg-type]
    return out


def usable_arities(task: LearningTask, options: CompileOptions) -> Tuple[int, ...]:
    arities = options.usable_arity or (task.r,) * task.k
    if len(arities) != task.k or any(not 0 <= j <= task.r for j in arities):
        raise CompileError(f"usable arities {arities} must be k={task.k} values in [0, r]")
    for i, seed in enumerate(task.seeds):
        if seed.arity > arities[i]:
            raise CompileError(f"seed {seed.name} needs arity {seed.arity} > {arities[i]}")
    return tuple(arities)


def _action_atoms(task: LearningTask, arity: int) -> List[Atom]:
    return [a for a in partial_precondition(task.predicates, task.r, task.distinct_vars)
            if all(i <= arity for i in sigma_of(a))]


def operator_count(task: LearningTask, options: CompileOptions = CompileOptions()) -> int:
    """Exact grounded operator count ``|A_ed| + 1 + |A_app|`` without compiling."""
    arities = usable_arities(task, options)
    seeds = _seed_info(task)
    n_obj = len(task.objects)
    total = 1
    for a, j in enumerate(arities):
        n_atoms = len(_action_atoms(task, j))
        total += 3 * n_atoms - len(seeds[a].protected) - len(seeds[a].preset)
        total += task.m * n_obj ** j
    return total


def fluent_count(task: LearningTask, options: CompileOptions = CompileOptions()) -> int:
    arities = usable_arities(task, options)
    seeds = _seed_info(task)
    table = ground(task.predicates, task.objects, task.hierarchy)
    n = 2 + task.m * len(table)
    for a, j in enumerate(arities):
        n += 3 * len(_action_atoms(task, j)) - len(seeds[a].protected)
    if options.symmetry_breaking:
        n += task.k
    return n


@dataclass(frozen=True)
class CompiledProblem:
    task: LearningTask
    options: CompileOptions
    ground: GroundTask
    fluent_tags: Tuple[FluentTag, ...]
    operator_tags: Tuple[OperatorTag, ...]
    initial_models: Tuple[ActionSchema, ...]
    protected: Tuple[FrozenSet[Sigma], ...]
    arities: Tuple[int, ...]
    holds_table: GroundAtomTable
    _fluent_ids: Dict[FluentTag, int] = field(repr=False, compare=False, default_factory=dict)

    @cached_property
    def objects(self) -> CompiledObjects:
        return CompiledObjects(
            tuple(o for o, _ in self.task.objects), tuple(v[1:] for v in variable_names(self.task.r)),
            tuple(p.name for p in self.task.predicates),
            tuple(f"act{i}" for i in range(1, self.task.k + 1)),
            tuple(f"tr{i}" for i in range(1, self.task.m + 1)))

    def fluent_id(self, tag: FluentTag) -> int:
        return self._fluent_ids[tag]

    @cached_property
    def _operator_ids(self) -> Dict[OperatorTag, int]:
        return {t: i for i, t in enumerate(self.operator_tags)}

    def operator_id(self, tag: OperatorTag) -> int:
        return self._operator_ids[tag]

    @property
    def ed2val(self) -> int:
        return self.operator_id(Ed2Val())

    def edit_fluents(self) -> List[EditFluent]:
        return [t for t in self.fluent_tags if isinstance(t, EditFluent)]

    def holds_fluents(self) -> List[HoldsFluent]:
        return [t for t in self.fluent_tags if isinstance(t, HoldsFluent)]

    def count(self, kind: type) -> int:
        return sum(isinstance(t, kind) for t in self.operator_tags)

    @property
    def operator_count(self) -> int:
        return len(self.operator_tags)

    def split_plan(self, plan: Union[Plan, Sequence[int]]) -> Tuple[List[int], int, List[int]]:
        """(edit prefix, index of ed2val, apply suffix)."""
        actions = list(plan)
        pivot = self.ed2val
        if pivot not in actions:
            raise ValueError("plan has no ed2val step")
        at = actions.index(pivot)
        return actions[:at], at, actions[at + 1:]

    @cached_property
    def index(self) -> ActionIndex:
        steps = []
        for op in self.ground.operators:
            parts = op.name[1:-1].split()
            steps.append((parts[0], tuple(parts[1:])))
        return ActionIndex(steps)

    def emit_pddl(self) -> Tuple[str, str]:
        return emit_pddl(self)

    def backmap(self) -> dict:
        return backmap(self)

    def solve_external(self, cfg: PlannerConfig) -> Plan:
        domain, problem = self.emit_pddl()
        return solve_external(domain, problem, self.index, self.ground, cfg)


def compile_task(task: LearningTask, options: CompileOptions = CompileOptions()) -> CompiledProblem:
    """Build ``P' = <F', A', I', G'>`` for ``task``."""
    arities = usable_arities(task, options)
    n_ops = operator_count(task, options)
    if n_ops > options.capacity:
        raise CapacityError("grounded operators", n_ops, options.capacity)
    n_fl = fluent_count(task, options)
    if n_fl > options.capacity:
        raise CapacityError("fluents", n_fl, options.capacity)

    seeds = _seed_info(task)
    hierarchy = task.hierarchy
    table = ground(task.predicates, task.objects, hierarchy)
    objects = [o for o, _ in task.objects]

    tags: List[FluentTag] = [ModeFluent("edit-mode"), ModeFluent("val-mode")]
    names: List[str] = ["(edit-mode)", "(val-mode)"]
    atoms_of: List[List[Atom]] = []
    for a in range(1, task.k + 1):
        atoms = _action_atoms(task, arities[a - 1])
        atoms_of.append(atoms)
        for atom in atoms:
            sigma = sigma_of(atom)
            for kind in EDIT_KINDS:
                if kind == "rpre" and (atom.predicate, sigma) in seeds[a - 1].protected:
                    continue
                e = EditFluent(kind, a, atom.predicate, sigma)
                tags.append(e)
                names.append(_op_name(edit_name(e)))
    if options.symmetry_breaking:
        for a in range(1, task.k + 1):
            tags.append(TouchedFluent(a))
            names.append(f"(touched_act{a})")
    for t in range(1, task.m + 1):
        for g in table:
            tags.append(HoldsFluent(t, g.predicate, g.args))
            names.append(_op_name(holds_name(t, g.predicate), g.args))
    if len(set(names)) != len(names):
        raise CompileError("fluent name collision; rename predicates")
    fid: Dict[FluentTag, int] = {tag: i for i, tag in enumerate(tags)}

    ops: List[Operator] = []
    op_tags: List[OperatorTag] = []
    for tag in tags:
        if not isinstance(tag, EditFluent):
            continue
        if (tag.kind, tag.predicate, tag.sigma) in seeds[tag.action - 1].preset:
            continue
        e = fid[tag]
        pre: List[Tuple[int, ...]] = [(EDIT_MODE,), (~e,)]
        add = [e]
        if options.symmetry_breaking:
            if tag.action > 1:
                pre.append((fid[TouchedFluent(tag.action - 1)],))
            add.append(fid[TouchedFluent(tag.action)])
        ops.append(Operator(_op_name("edit_" + edit_name(tag)), tuple(pre),
                            (Effect((), tuple(add), ()),), priority=2))
        op_tags.append(EditAction(tag))
    ops.append(Operator("(ed2val)", ((EDIT_MODE,),), (Effect((), (VAL_MODE,), (EDIT_MODE,)),),
                        priority=0))
    op_tags.append(Ed2Val())

    for a in range(1, task.k + 1):
        protected = seeds[a - 1].protected
        for t in range(1, task.m + 1):
            for omega in itertools.product(objects, repeat=arities[a - 1]):
                clauses: List[Tuple[int, ...]] = [(VAL_MODE,)]
                effects: List[Effect] = []
                feasible = True
                for atom in atoms_of[a - 1]:
                    sigma = sigma_of(atom)
                    g = Atom(atom.predicate, tuple(omega[i - 1] for i in sigma))
                    h = fid.get(HoldsFluent(t, g.predicate, g.args)) if g in table else None
                    if (atom.predicate, sigma) in protected:
                        if h is None:
                            feasible = False
                            break
                        clauses.append((h,))
                    else:
                        rp = fid[EditFluent("rpre", a, atom.predicate, sigma)]
                        clauses.append((rp, h) if h is not None else (rp,))
                    if h is not None:
                        effects.append(Effect((fid[EditFluent("add", a, atom.predicate, sigma)],), (h,), ()))
                        effects.append(Effect((fid[EditFluent("del", a, atom.predicate, sigma)],), (), (h,)))
                if not feasible:
                    continue
                ops.append(Operator(_op_name(f"apply_act{a}_tr{t}", omega), tuple(clauses),
                                    tuple(effects), priority=1))
                op_tags.append(ApplyAction(a, t, tuple(omega)))

    init = {EDIT_MODE}
    for a in range(1, task.k + 1):
        for kind, p, sigma in seeds[a - 1].preset:
            init.add(fid[EditFluent(kind, a, p, sigma)])
        if options.symmetry_breaking and a <= len(task.seeds):
            init.add(fid[TouchedFluent(a)])
    goal = {VAL_MODE}
    for t, trace in enumerate(task.traces, 1):
        for atoms, target in ((trace.init, init), (trace.goal, goal)):
            for g in atoms:
                if g not in table:
                    raise CompileError(f"trace {trace.id}: atom {g} is not a type-compatible fluent")
                target.add(fid[HoldsFluent(t, g.predicate, g.args)])

    initial_models = []
    for a in range(1, task.k + 1):
        base = task.seeds[a - 1].name if a <= len(task.seeds) else f"act{a}"
        preset = seeds[a - 1].preset
        params = tuple((v, ROOT_TYPE) for v in variable_names(arities[a - 1]))
        atoms = atoms_of[a - 1]
        initial_models.append(ActionSchema(
            base, params, frozenset(atoms),
            frozenset(Atom(p, tuple(f"?v{i}" for i in s)) for k, p, s in preset if k == "add"),
            frozenset(Atom(p, tuple(f"?v{i}" for i in s)) for k, p, s in preset if k == "del")))

    ground_task = GroundTask(tuple(names), tuple(ops), frozenset(init), frozenset(goal))
    return CompiledProblem(task, options, ground_task, tuple(tags), tuple(op_tags),
                           tuple(initial_models), tuple(s.protected for s in seeds), arities,
                           table, fid)


def _lifted_holds(trace: int, atom: Atom) -> Atom:
    return Atom(holds_name(trace, atom.predicate), atom.args)


def emit_domain_ast(cp: CompiledProblem) -> DomainAst:
    """Lifted encoding whose grounding reproduces ``cp`` operator by operator."""
    task = cp.task
    typed = bool(task.types) or any(t != ROOT_TYPE for p in task.predicates for t in p.types)
    reqs = [":strips", ":negative-preconditions", ":disjunctive-preconditions",
            ":conditional-effects"]
    if typed:
        reqs.insert(1, ":typing")
    preds: List[PredicateSignature] = [PredicateSignature("edit-mode"), PredicateSignature("val-mode")]
    for tag in cp.fluent_tags:
        if isinstance(tag, EditFluent):
            preds.append(PredicateSignature(edit_name(tag)))
        elif isinstance(tag, TouchedFluent):
            preds.append(PredicateSignature(f"touched_act{tag.action}"))
    for t in range(1, task.m + 1):
        for p in task.predicates:
            preds.append(PredicateSignature(
                holds_name(t, p.name), tuple((f"?x{i}", typ) for i, typ in enumerate(p.types, 1))))

    edit_mode = Literal(Atom("edit-mode"))
    val_mode = Literal(Atom("val-mode"))
    actions: List[ActionAst] = []
    for tag, op in zip(cp.operator_tags, cp.ground.operators):
        if isinstance(tag, EditAction):
            e = Atom(edit_name(tag.edit))
            pre: List[Tuple] = [(edit_mode,), (Literal(e, False),)]
            eff = [Literal(e)]
            if cp.options.symmetry_breaking:
                if tag.edit.action > 1:
                    pre.append((Literal(Atom(f"touched_act{tag.edit.action - 1}")),))
                eff.append(Literal(Atom(f"touched_act{tag.edit.action}")))
            actions.append(ActionAst("edit_" + edit_name(tag.edit), (),
                                     Formula(tuple(pre)), EffectFormula(tuple(eff))))
    actions.append(ActionAst("ed2val", (), Formula(((edit_mode,),)),
                             EffectFormula((Literal(Atom("edit-mode"), False), val_mode))))
    for a in range(1, task.k + 1):
        params = tuple((v, ROOT_TYPE) for v in variable_names(cp.arities[a - 1]))
        atoms = [x for x in partial_precondition(task.predicates, task.r, task.distinct_vars)
                 if all(i <= cp.arities[a - 1] for i in sigma_of(x))]
        for t in range(1, task.m + 1):
            clauses: List[Tuple] = [(val_mode,)]
            whens: List[ConditionalEffect] = []
            for atom in atoms:
                sigma = sigma_of(atom)
                h = _lifted_holds(t, atom)
                if (atom.predicate, sigma) in cp.protected[a - 1]:
                    clauses.append((Literal(h),))
                else:
                    rp = Atom(edit_name(EditFluent("rpre", a, atom.predicate, sigma)))
                    clauses.append((Literal(rp), Literal(h)))
                add = Atom(edit_name(EditFluent("add", a, atom.predicate, sigma)))
                dele = Atom(edit_name(EditFluent("del", a, atom.predicate, sigma)))
                whens.append(ConditionalEffect((Literal(add),), (Literal(h),)))
                whens.append(ConditionalEffect((Literal(dele),), (Literal(h, False),)))
            actions.append(ActionAst(f"apply_act{a}_tr{t}", params, Formula(tuple(clauses)),
                                     EffectFormula((), tuple(whens))))
    return DomainAst("dam", tuple(reqs), tuple(task.types), (), tuple(preds), tuple(actions))


def emit_problem_ast(cp: CompiledProblem) -> ProblemAst:
    def atom(f: int) -> Atom:
        tag = cp.fluent_tags[f]
        if isinstance(tag, ModeFluent):
            return Atom(tag.name)
        if isinstance(tag, EditFluent):
            return Atom(edit_name(tag))
        if isinstance(tag, TouchedFluent):
            return Atom(f"touched_act{tag.action}")
        return Atom(holds_name(tag.trace, tag.predicate), tag.omega)

    return ProblemAst("dam-problem", "dam", tuple(cp.task.objects),
                      tuple(atom(f) for f in sorted(cp.ground.init)),
                      tuple(atom(f) for f in sorted(cp.ground.goal, key=_goal_order(cp))))


def _goal_order(cp: CompiledProblem):
    # holds goals first, val-mode last
    return lambda f: (f == VAL_MODE, f)


def emit_pddl(cp: CompiledProblem) -> Tuple[str, str]:
    return print_domain(emit_domain_ast(cp)), print_problem(emit_problem_ast(cp))


def _tag_json(tag) -> dict:
    if isinstance(tag, ModeFluent):
        return {"type": "mode", "name": tag.name}
    if isinstance(tag, EditFluent):
        return {"type": "edit", "kind": tag.kind, "action": tag.action,
                "predicate": tag.predicate, "sigma": list(tag.sigma)}
    if isinstance(tag, HoldsFluent):
        return {"type": "holds", "trace": tag.trace, "predicate": tag.predicate,
                "omega": list(tag.omega)}
    if isinstance(tag, TouchedFluent):
        return {"type": "touched", "action": tag.action}
    if isinstance(tag, EditAction):
        return {"type": "edit-action", **{k: v for k, v in _tag_json(tag.edit).items() if k != "type"}}
    if isinstance(tag, Ed2Val):
        return {"type": "ed2val"}
    return {"type": "apply", "action": tag.action, "trace": tag.trace, "omega": list(tag.omega)}


def backmap(cp: CompiledProblem) -> dict:
    """JSON-serializable map from fluent/operator ids to semantic tags."""
    return {
        "k": cp.task.k, "r": cp.task.r, "m": cp.task.m,
        "traces": [t.id for t in cp.task.traces],
        "fluents": [{"id": i, "name": n, **_tag_json(t)}
                    for i, (n, t) in enumerate(zip(cp.ground.fluents, cp.fluent_tags))],
        "operators": [{"id": i, "name": op.name, **_tag_json(t)}
                      for i, (op, t) in enumerate(zip(cp.ground.operators, cp.operator_tags))],
    }


def write_backmap(cp: CompiledProblem) -> str:
    return json.dumps(backmap(cp), indent=1)
