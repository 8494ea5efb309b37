"""Immutable syntax trees for the supported PDDL fragment.

The fragment is typed STRIPS extended with negative and disjunctive
preconditions, equality and conditional effects. Preconditions are kept in
conjunctive normal form: a tuple of clauses, each clause a tuple of literals.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, Optional, Tuple, Union

ROOT_TYPE = "object"


@dataclass(frozen=True, order=True)
class Atom:
    """A predicate applied to terms (``?var`` variables or constants)."""

    predicate: str
    args: Tuple[str, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    def substitute(self, binding: Dict[str, str]) -> "Atom":
        return Atom(self.predicate, tuple(binding.get(a, a) for a in self.args))

    def variables(self) -> Iterator[str]:
        return (a for a in self.args if is_variable(a))

    def __str__(self) -> str:
        return "(" + " ".join((self.predicate,) + self.args) + ")"


@dataclass(frozen=True)
class Literal:
    atom: Atom
    positive: bool = True

    def negate(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    def __str__(self) -> str:
        return str(self.atom) if self.positive else f"(not {self.atom})"


@dataclass(frozen=True)
class Equality:
    """``(= a b)`` or its negation; evaluated at grounding time."""

    left: str
    right: str
    positive: bool = True

    def __str__(self) -> str:
        s = f"(= {self.left} {self.right})"
        return s if self.positive else f"(not {s})"


Condition = Union[Literal, Equality]
Clause = Tuple[Condition, ...]


@dataclass(frozen=True)
class Formula:
    """Conjunction of clauses; each clause is a disjunction of literals."""

    clauses: Tuple[Clause, ...] = ()

    @classmethod
    def conjunction(cls, conditions: Iterable[Condition]) -> "Formula":
        return cls(tuple((c,) for c in conditions))

    def is_positive_conjunction(self) -> bool:
        return all(
            len(c) == 1 and isinstance(c[0], Literal) and c[0].positive
            for c in self.clauses)

    def atoms(self) -> Iterator[Atom]:
        for clause in self.clauses:
            for lit in clause:
                if isinstance(lit, Literal):
                    yield lit.atom


@dataclass(frozen=True)
class ConditionalEffect:
    """``(when condition effects)``; condition is a conjunction of literals."""

    condition: Tuple[Condition, ...]
    effects: Tuple[Literal, ...]


@dataclass(frozen=True)
class EffectFormula:
    unconditional: Tuple[Literal, ...] = ()
    conditional: Tuple[ConditionalEffect, ...] = ()

    def literals(self) -> Iterator[Literal]:
        yield from self.unconditional
        for ce in self.conditional:
            yield from ce.effects


TypedList = Tuple[Tuple[str, str], ...]


@dataclass(frozen=True)
class PredicateSignature:
    name: str
    params: TypedList = ()

    @property
    def arity(self) -> int:
        return len(self.params)

    @property
    def types(self) -> Tuple[str, ...]:
        return tuple(t for _, t in self.params)


@dataclass(frozen=True)
class ActionAst:
    name: str
    params: TypedList = ()
    precondition: Formula = Formula()
    effect: EffectFormula = EffectFormula()


@dataclass(frozen=True)
class DomainAst:
    name: str
    requirements: Tuple[str, ...] = ()
    types: TypedList = ()
    constants: TypedList = ()
    predicates: Tuple[PredicateSignature, ...] = ()
    actions: Tuple[ActionAst, ...] = ()

    def predicate(self, name: str) -> PredicateSignature:
        for p in self.predicates:
            if p.name == name:
                return p
        raise KeyError(name)

    def action(self, name: str) -> ActionAst:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(name)

    @property
    def hierarchy(self) -> "TypeHierarchy":
        return TypeHierarchy(self.types)


@dataclass(frozen=True)
class ProblemAst:
    name: str
    domain_name: str
    objects: TypedList = ()
    init: Tuple[Atom, ...] = ()
    goal: Tuple[Atom, ...] = ()
    requirements: Tuple[str, ...] = ()


@dataclass(frozen=True)
class TypeHierarchy:
    """Single-inheritance type forest rooted at ``object``."""

    declared: TypedList = ()
    _parent: Dict[str, str] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_parent", dict(self.declared))

    def __contains__(self, name: str) -> bool:
        return name == ROOT_TYPE or name in self._parent

    def parent(self, name: str) -> Optional[str]:
        return self._parent.get(name)

    def ancestors(self, name: str) -> Tuple[str, ...]:
        """``name`` followed by its supertypes up to the root."""
        chain = [name]
        seen = {name}
        while chain[-1] != ROOT_TYPE:
            nxt = self._parent.get(chain[-1], ROOT_TYPE)
            if nxt in seen:
                raise ValueError(f"cyclic type hierarchy at {nxt!r}")
            seen.add(nxt)
            chain.append(nxt)
        return tuple(chain)

    def is_subtype(self, sub: str, sup: str) -> bool:
        return sup == ROOT_TYPE or sup in self.ancestors(sub)

    def overlaps(self, a: str, b: str) -> bool:
        return self.is_subtype(a, b) or self.is_subtype(b, a)

    def most_specific(self, types: Iterable[str]) -> Optional[str]:
        """The deepest type among ``types`` if they form a chain, else None."""
        best = ROOT_TYPE
        for t in types:
            if self.is_subtype(t, best):
                best = t
            elif not self.is_subtype(best, t):
                return None
        return best


def is_variable(term: str) -> bool:
    return term.startswith("?")
