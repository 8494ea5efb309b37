"""Grounding of parsed PDDL (domain, problem) pairs into :class:`GroundTask`."""

import itertools
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

from ..pddl import (ActionIndex, Atom, Condition, DomainAst, Equality,
                    ProblemAst, TypeHierarchy)
from ..task import GroundAtomTable, compatible_objects, ground
from .task import Effect, GroundTask, Operator

_TRUE = True
_FALSE = False


@dataclass(frozen=True)
class GroundedProblem:
    task: GroundTask
    table: GroundAtomTable
    steps: Tuple[Tuple[str, Tuple[str, ...]], ...]  # (action name, args) per operator

    @property
    def index(self) -> ActionIndex:
        return ActionIndex(self.steps)

    def state_atoms(self, state) -> List[Atom]:
        return [self.table.atoms[f] for f in sorted(state)]


def _static_predicates(domain: DomainAst) -> set:
    changed = {lit.atom.predicate for a in domain.actions for lit in a.effect.literals()}
    return {p.name for p in domain.predicates} - changed


def ground_problem(domain: DomainAst, problem: ProblemAst,
                   simplify_statics: bool = True) -> GroundedProblem:
    """Instantiate every action over type-compatible objects.

    Equalities are decided here. Atoms outside the type-compatible table are
    constantly false (and ignored as effects). With ``simplify_statics``,
    predicates no action changes are evaluated against the initial state.
    """
    hierarchy: TypeHierarchy = domain.hierarchy
    objects = tuple(dict(tuple(domain.constants) + tuple(problem.objects)).items())
    table = ground(domain.predicates, objects, hierarchy)
    init_ids = frozenset(table.id(a) for a in problem.init)
    statics = _static_predicates(domain) if simplify_statics else set()

    def value(cond: Condition, binding: Dict[str, str]) -> Union[bool, int]:
        if isinstance(cond, Equality):
            eq = binding.get(cond.left, cond.left) == binding.get(cond.right, cond.right)
            return eq == cond.positive
        atom = cond.atom.substitute(binding)
        fid = table.get(atom)
        if fid is None:
            return not cond.positive
        if atom.predicate in statics:
            return (fid in init_ids) == cond.positive
        return fid if cond.positive else ~fid

    def conjunction(conds: Sequence[Condition], binding) -> Optional[Tuple[int, ...]]:
        lits = []
        for c in conds:
            v = value(c, binding)
            if v is _FALSE:
                return None
            if v is not _TRUE:
                lits.append(v)
        return tuple(lits)

    operators: List[Operator] = []
    steps: List[Tuple[str, Tuple[str, ...]]] = []
    for action in domain.actions:
        names = [p for p, _ in action.params]
        domains = [compatible_objects(objects, t, hierarchy) for _, t in action.params]
        for args in itertools.product(*domains):
            binding = dict(zip(names, args))
            clauses = []
            ok = True
            for clause in action.precondition.clauses:
                lits = []
                sat = False
                for c in clause:
                    v = value(c, binding)
                    if v is _TRUE:
                        sat = True
                        break
                    if v is not _FALSE:
                        lits.append(v)
                if sat:
                    continue
                if not lits:
                    ok = False
                    break
                clauses.append(tuple(dict.fromkeys(lits)))
            if not ok:
                continue
            effects = []
            plain_add, plain_del = [], []
            for lit in action.effect.unconditional:
                fid = table.get(lit.atom.substitute(binding))
                if fid is not None:
                    (plain_add if lit.positive else plain_del).append(fid)
            if plain_add or plain_del:
                effects.append(Effect((), tuple(plain_add), tuple(plain_del)))
            for ce in action.effect.conditional:
                cond = conjunction(ce.condition, binding)
                if cond is None:
                    continue
                add, dele = [], []
                for lit in ce.effects:
                    fid = table.get(lit.atom.substitute(binding))
                    if fid is not None:
                        (add if lit.positive else dele).append(fid)
                if add or dele:
                    effects.append(Effect(cond, tuple(add), tuple(dele)))
            name = "(" + " ".join((action.name,) + args) + ")"
            operators.append(Operator(name, tuple(clauses), tuple(effects)))
            steps.append((action.name, args))
    goal = frozenset(table.id(a) for a in problem.goal)
    fluents = tuple(str(a) for a in table.atoms)
    return GroundedProblem(GroundTask(fluents, tuple(operators), init_ids, goal), table, tuple(steps))
