"""PDDL fragment: typed STRIPS with negative/disjunctive preconditions,
equality and conditional effects."""

from .ast import (ROOT_TYPE, ActionAst, Atom, Clause, Condition,
                  ConditionalEffect, DomainAst, EffectFormula, Equality,
                  Formula, Literal, PredicateSignature, ProblemAst,
                  TypeHierarchy, is_variable)
from .errors import (ArityMismatch, PDDLError, PDDLSyntaxError, TypeMismatch,
                     UndeclaredType, UnknownAction, UnknownObject,
                     UnknownPredicate, UnsupportedRequirement)
from .parser import (ActionIndex, parse_atom, parse_domain, parse_plan,
                     parse_problem, read_plan_steps)
from .printer import print_domain, print_plan, print_problem

__all__ = [
    "ROOT_TYPE", "ActionAst", "Atom", "Clause", "Condition", "ConditionalEffect",
    "DomainAst", "EffectFormula", "Equality", "Formula", "Literal",
    "PredicateSignature", "ProblemAst", "TypeHierarchy", "is_variable",
    "ArityMismatch", "PDDLError", "PDDLSyntaxError", "TypeMismatch",
    "UndeclaredType", "UnknownAction", "UnknownObject", "UnknownPredicate",
    "UnsupportedRequirement", "ActionIndex", "parse_atom", "parse_domain",
    "parse_plan", "parse_problem", "read_plan_steps", "print_domain",
    "print_plan", "print_problem",
]
