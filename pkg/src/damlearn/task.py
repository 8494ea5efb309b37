"""Learning-task formalism: action schemas, traces, grounding and the
initial (maximally restrictive) partial action models."""

import itertools
import json
from dataclasses import dataclass, field
from typing import (Dict, FrozenSet, Iterable, Iterator, List, Mapping,
                    Optional, Sequence, Tuple)

from .pddl import (ROOT_TYPE, ActionAst, Atom, DomainAst, EffectFormula,
                   Formula, Literal, PredicateSignature, ProblemAst,
                   TypeHierarchy, is_variable, parse_atom)

TypedList = Tuple[Tuple[str, str], ...]
State = FrozenSet[Atom]


class IllDefinedSchema(ValueError):
    pass


class NotFullyObserved(ValueError):
    pass


def variable_names(r: int) -> Tuple[str, ...]:
    return tuple(f"?v{i}" for i in range(1, r + 1))


@dataclass(frozen=True)
class ActionSchema:
    """A lifted STRIPS action ``<name, params, pre, add, del>``."""

    name: str
    params: TypedList
    pre: FrozenSet[Atom] = frozenset()
    add: FrozenSet[Atom] = frozenset()
    delete: FrozenSet[Atom] = frozenset()

    @property
    def arity(self) -> int:
        return len(self.params)

    @property
    def param_names(self) -> Tuple[str, ...]:
        return tuple(p for p, _ in self.params)

    def body_variables(self) -> set:
        return {v for a in self.pre | self.add | self.delete for v in a.variables()}

    def is_well_defined(self) -> bool:
        return self.body_variables() == set(self.param_names)

    @property
    def inconsistent(self) -> bool:
        return bool(self.add & self.delete)

    def to_action(self) -> ActionAst:
        pre = Formula.conjunction(Literal(a) for a in sorted(self.pre))
        eff = EffectFormula(
            tuple(Literal(a, False) for a in sorted(self.delete))
            + tuple(Literal(a) for a in sorted(self.add)))
        return ActionAst(self.name, self.params, pre, eff)

    @classmethod
    def from_action(cls, action: ActionAst) -> "ActionSchema":
        """Convert a plain STRIPS action (positive conjunctive precondition,
        unconditional effects)."""
        if not action.precondition.is_positive_conjunction():
            raise IllDefinedSchema(f"{action.name}: precondition is not STRIPS")
        if action.effect.conditional:
            raise IllDefinedSchema(f"{action.name}: conditional effects are not STRIPS")
        pre = frozenset(action.precondition.atoms())
        add = frozenset(l.atom for l in action.effect.unconditional if l.positive)
        delete = frozenset(l.atom for l in action.effect.unconditional if not l.positive)
        return cls(action.name, action.params, pre, add, delete)


def check_well_defined(schema: ActionSchema) -> None:
    """Raise unless the body mentions exactly the signature parameters."""
    body = schema.body_variables()
    params = set(schema.param_names)
    if len(params) != schema.arity:
        raise IllDefinedSchema(f"{schema.name}: repeated parameter")
    if body != params:
        raise IllDefinedSchema(
            f"{schema.name}: body variables {sorted(body)} != parameters {sorted(params)}")
    for a in schema.pre | schema.add | schema.delete:
        for t in a.args:
            if not is_variable(t):
                raise IllDefinedSchema(f"{schema.name}: constant {t} in {a}")


@dataclass(frozen=True)
class Trace:
    """Goal-oriented observation: initial state and (partial) goal state.

    ``states`` optionally holds the full state sequence when intermediate
    observations exist; ``None`` entries mark unobserved states.
    """

    id: str
    init: State
    goal: State
    states: Optional[Tuple[Optional[State], ...]] = None
    objects: TypedList = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "init", frozenset(self.init))
        object.__setattr__(self, "goal", frozenset(self.goal))
        if self.states is not None:
            states = tuple(None if s is None else frozenset(s) for s in self.states)
            object.__setattr__(self, "states", states)
            if states and states[0] is not None and states[0] != self.init:
                raise ValueError(f"trace {self.id}: first observed state differs from init")

    @classmethod
    def from_problem(cls, problem: ProblemAst, states: Optional[Sequence[State]] = None) -> "Trace":
        return cls(problem.name, frozenset(problem.init), frozenset(problem.goal),
                   None if states is None else tuple(states), problem.objects)

    def to_json(self) -> dict:
        out: dict = {"id": self.id,
                     "init": [str(a) for a in sorted(self.init)],
                     "goal": [str(a) for a in sorted(self.goal)]}
        if self.states is not None:
            out["states"] = [None if s is None else [str(a) for a in sorted(s)]
                             for s in self.states]
        if self.objects:
            out["objects"] = [list(o) for o in self.objects]
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> "Trace":
        def atoms(xs: Iterable[str]) -> State:
            return frozenset(parse_atom(x) for x in xs)
        states = obj.get("states")
        return cls(str(obj["id"]), atoms(obj.get("init", ())), atoms(obj.get("goal", ())),
                   None if states is None else tuple(None if s is None else atoms(s) for s in states),
                   tuple((str(n).lower(), str(t).lower()) for n, t in obj.get("objects", ())))


def read_traces(text: str) -> List[Trace]:
    return [Trace.from_json(json.loads(line)) for line in text.splitlines() if line.strip()]


def write_traces(traces: Iterable[Trace]) -> str:
    return "".join(json.dumps(t.to_json()) + "\n" for t in traces)


def split_traces(trace: Trace) -> List[Trace]:
    """One endpoint trace per consecutive pair of fully observed states; the
    goal of each split is the complete successor state."""
    if trace.states is None or any(s is None for s in trace.states):
        raise NotFullyObserved(f"trace {trace.id} lacks fully observed states")
    states = trace.states
    return [Trace(f"{trace.id}-{i}", states[i - 1], states[i], objects=trace.objects)
            for i in range(1, len(states))]


def infer_objects(traces: Sequence[Trace], predicates: Sequence[PredicateSignature],
                  hierarchy: TypeHierarchy = TypeHierarchy()) -> TypedList:
    """Union of trace objects in first-appearance order.

    Objects not declared by any trace get the most specific predicate slot
    type they occur in.
    """
    declared: Dict[str, str] = {}
    for t in traces:
        for name, typ in t.objects:
            declared.setdefault(name, typ)
    slots: Dict[str, List[str]] = {}
    sigs = {p.name: p for p in predicates}
    for t in traces:
        for state in (t.init, t.goal, *(s for s in (t.states or ()) if s is not None)):
            for a in sorted(state):
                if a.predicate not in sigs:
                    raise KeyError(f"unknown predicate {a.predicate} in trace {t.id}")
                for arg, typ in zip(a.args, sigs[a.predicate].types):
                    slots.setdefault(arg, []).append(typ)
    out: Dict[str, str] = dict(declared)
    for name, types in slots.items():
        if name not in out:
            out[name] = hierarchy.most_specific(types) or ROOT_TYPE
    return tuple(out.items())


@dataclass(frozen=True)
class LearningTask:
    """``k`` unknown actions of max arity ``r`` to be learned from traces."""

    predicates: Tuple[PredicateSignature, ...]
    objects: TypedList
    traces: Tuple[Trace, ...]
    k: int = 1
    r: int = 0
    seeds: Tuple[ActionSchema, ...] = ()
    types: TypedList = ()
    enforce_bounds: bool = field(default=True, compare=False)
    # enumerate partial preconditions without repeated variables
    distinct_vars: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "predicates", tuple(self.predicates))
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "traces", tuple(self.traces))
        object.__setattr__(self, "seeds", tuple(self.seeds))
        if not self.traces:
            raise ValueError("a learning task needs at least one trace")
        if self.k < 1 or self.r < 0:
            raise ValueError(f"need k >= 1 and r >= 0, got k={self.k} r={self.r}")
        if self.enforce_bounds:
            if self.k > max(2 * len(self.predicates), 1):
                raise ValueError(f"k={self.k} exceeds 2*|P|={2 * len(self.predicates)}")
            if self.r > len(self.objects):
                raise ValueError(f"r={self.r} exceeds |objects|={len(self.objects)}")
        if len(self.seeds) > self.k:
            raise ValueError("more seed schemas than learnable actions")
        names = [p.name for p in self.predicates]
        if len(set(names)) != len(names):
            raise ValueError("duplicate predicate names")
        onames = [o for o, _ in self.objects]
        if len(set(onames)) != len(onames):
            raise ValueError("duplicate object names")
        for seed in self.seeds:
            check_well_defined(seed)
            if seed.arity > self.r:
                raise ValueError(f"seed {seed.name} has arity {seed.arity} > r={self.r}")

    @property
    def m(self) -> int:
        return len(self.traces)

    @property
    def hierarchy(self) -> TypeHierarchy:
        return TypeHierarchy(self.types)

    def with_config(self, k: int, r: int) -> "LearningTask":
        return LearningTask(self.predicates, self.objects, self.traces, k, r,
                            self.seeds, self.types, self.enforce_bounds, self.distinct_vars)

    @classmethod
    def from_domain(cls, domain: DomainAst, traces: Sequence[Trace], k: int = 1, r: int = 0,
                    objects: Optional[TypedList] = None,
                    seeds: Sequence[ActionSchema] = (), **kw) -> "LearningTask":
        hierarchy = domain.hierarchy
        if objects is None:
            objects = tuple(domain.constants) + tuple(
                o for o in infer_objects(traces, domain.predicates, hierarchy)
                if o[0] not in dict(domain.constants))
        return cls(domain.predicates, objects, tuple(traces), k, r, tuple(seeds),
                   domain.types, **kw)


class GroundAtomTable:
    """Bijection between ground atoms and dense fluent ids."""

    def __init__(self, atoms: Iterable[Atom]):
        self.atoms: Tuple[Atom, ...] = tuple(atoms)
        self._index = {a: i for i, a in enumerate(self.atoms)}
        if len(self._index) != len(self.atoms):
            raise ValueError("duplicate atom in table")

    def __len__(self) -> int:
        return len(self.atoms)

    def __contains__(self, atom: Atom) -> bool:
        return atom in self._index

    def __iter__(self) -> Iterator[Atom]:
        return iter(self.atoms)

    def id(self, atom: Atom) -> int:
        return self._index[atom]

    def get(self, atom: Atom) -> Optional[int]:
        return self._index.get(atom)


def compatible_objects(objects: TypedList, typ: str, hierarchy: TypeHierarchy) -> List[str]:
    return [o for o, t in objects if hierarchy.is_subtype(t, typ)]


def ground(predicates: Sequence[PredicateSignature], objects: TypedList,
           hierarchy: TypeHierarchy = TypeHierarchy()) -> GroundAtomTable:
    """Every type-compatible ground atom, in predicate declaration order and
    then object-tuple order."""
    atoms = []
    for p in predicates:
        domains = [compatible_objects(objects, t, hierarchy) for t in p.types]
        atoms.extend(Atom(p.name, args) for args in itertools.product(*domains))
    return GroundAtomTable(atoms)


@dataclass(frozen=True)
class GroundAction:
    name: str
    args: Tuple[str, ...]
    pre: FrozenSet[Atom]
    add: FrozenSet[Atom]
    delete: FrozenSet[Atom]

    def applicable(self, state: State) -> bool:
        return self.pre <= state

    def apply(self, state: State) -> State:
        return (state - self.delete) | self.add

    def __str__(self) -> str:
        return "(" + " ".join((self.name,) + self.args) + ")"


def ground_schema(schema: ActionSchema, objects: TypedList,
                  hierarchy: TypeHierarchy = TypeHierarchy(),
                  table: Optional[GroundAtomTable] = None) -> List[GroundAction]:
    """One ground action per type-compatible parameter assignment.

    With a ``table``, assignments that need an ill-typed precondition atom are
    dropped and ill-typed effect atoms are ignored.
    """
    domains = [compatible_objects(objects, t, hierarchy) for _, t in schema.params]
    names = schema.param_names
    out = []
    for args in itertools.product(*domains):
        binding = dict(zip(names, args))
        pre = frozenset(a.substitute(binding) for a in schema.pre)
        add = frozenset(a.substitute(binding) for a in schema.add)
        delete = frozenset(a.substitute(binding) for a in schema.delete)
        if table is not None:
            if any(a not in table for a in pre):
                continue
            add = frozenset(a for a in add if a in table)
            delete = frozenset(a for a in delete if a in table)
        out.append(GroundAction(schema.name, args, pre, add, delete))
    return out


def partial_precondition(predicates: Sequence[PredicateSignature], r: int,
                         distinct: bool = False) -> List[Atom]:
    """All atoms ``p(sigma)`` with ``sigma`` over ``?v1..?vr``, in canonical
    order: predicate declaration order, then variable-tuple order.

    With ``distinct`` no variable repeats inside one atom, so ``conn(?v1 ?v1)``
    is left out.
    """
    vs = variable_names(r)
    pick = itertools.permutations if distinct else (lambda xs, n: itertools.product(xs, repeat=n))
    return [Atom(p.name, sigma) for p in predicates for sigma in pick(vs, p.arity)]


def init_partial_models(predicates: Sequence[PredicateSignature], k: int, r: int,
                        distinct: bool = False) -> List[ActionSchema]:
    """``k`` schemas over parameters ``?v1..?vr`` whose preconditions hold
    every predicate/variable combination and whose effects are empty.

    Parameters are typed ``object``; arity ``j < r`` variants are the
    restriction to ``?v1..?vj``.
    """
    if k < 1 or r < 0:
        raise ValueError("need k >= 1 and r >= 0")
    params = tuple((v, ROOT_TYPE) for v in variable_names(r))
    pre = frozenset(partial_precondition(predicates, r, distinct))
    return [ActionSchema(f"act{i}", params, pre) for i in range(1, k + 1)]


def trim_schema(schema: ActionSchema) -> Tuple[ActionSchema, Tuple[int, ...]]:
    """Drop parameters occurring in no atom and rename the rest ``?v1..``.

    Returns the trimmed schema and, for each kept parameter, its original
    position.
    """
    used = schema.body_variables()
    kept = tuple(i for i, p in enumerate(schema.param_names) if p in used)
    rename = {schema.param_names[i]: f"?v{j}" for j, i in enumerate(kept, 1)}
    params = tuple((rename[schema.param_names[i]], schema.params[i][1]) for i in kept)

    def ren(atoms: FrozenSet[Atom]) -> FrozenSet[Atom]:
        return frozenset(a.substitute(rename) for a in atoms)

    return ActionSchema(schema.name, params, ren(schema.pre), ren(schema.add),
                        ren(schema.delete)), kept


def schemas_to_domain(name: str, predicates: Sequence[PredicateSignature],
                      schemas: Sequence[ActionSchema], types: TypedList = ()) -> DomainAst:
    typed = bool(types) or any(t != ROOT_TYPE for p in predicates for t in p.types)
    reqs = (":strips", ":typing") if typed else (":strips",)
    return DomainAst(name, reqs, tuple(types), (), tuple(predicates),
                     tuple(s.to_action() for s in schemas))
