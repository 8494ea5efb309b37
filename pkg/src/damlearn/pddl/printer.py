"""Pretty printer whose output re-parses to the identical AST."""

from typing import Iterable, List, Sequence, Tuple

from .ast import (ROOT_TYPE, ActionAst, Clause, Condition, DomainAst,
                  EffectFormula, Formula, Literal, ProblemAst, TypedList)


def _typed(items: TypedList, typed: bool) -> str:
    if not typed:
        return " ".join(name for name, _ in items)
    groups: List[Tuple[List[str], str]] = []
    for name, t in items:
        if groups and groups[-1][1] == t:
            groups[-1][0].append(name)
        else:
            groups.append(([name], t))
    return " ".join(" ".join(names) + f" - {t}" for names, t in groups)


def _conj(items: Sequence[str]) -> str:
    if len(items) == 1:
        return items[0]
    return "(and" + "".join(" " + i for i in items) + ")"


def _clause(clause: Clause) -> str:
    if len(clause) == 1:
        return str(clause[0])
    return "(or " + " ".join(str(c) for c in clause) + ")"


def format_formula(f: Formula) -> str:
    return "(and" + "".join(" " + _clause(c) for c in f.clauses) + ")"


def format_effect(eff: EffectFormula) -> str:
    parts = [str(lit) for lit in eff.unconditional]
    for ce in eff.conditional:
        cond = _conj([str(c) for c in ce.condition]) if ce.condition else "(and)"
        effs = _conj([str(e) for e in ce.effects]) if ce.effects else "(and)"
        parts.append(f"(when {cond} {effs})")
    return "(and" + "".join("\n      " + p for p in parts) + ")"


def _is_typed(requirements: Iterable[str], *lists: TypedList) -> bool:
    if ":typing" in requirements:
        return True
    return any(t != ROOT_TYPE for lst in lists for _, t in lst)


def format_action(a: ActionAst, typed: bool) -> str:
    lines = [f"  (:action {a.name}",
             f"    :parameters ({_typed(a.params, typed)})"]
    if a.precondition.clauses:
        lines.append(f"    :precondition {format_formula(a.precondition)}")
    lines.append(f"    :effect {format_effect(a.effect)})")
    return "\n".join(lines)


def print_domain(dom: DomainAst) -> str:
    typed = _is_typed(dom.requirements, dom.types, dom.constants,
                      *(p.params for p in dom.predicates), *(a.params for a in dom.actions))
    out = [f"(define (domain {dom.name})"]
    if dom.requirements:
        out.append("  (:requirements " + " ".join(dom.requirements) + ")")
    if dom.types:
        out.append(f"  (:types {_typed(dom.types, True)})")
    if dom.constants:
        out.append(f"  (:constants {_typed(dom.constants, typed)})")
    out.append("  (:predicates")
    for p in dom.predicates:
        params = _typed(p.params, typed)
        out.append(f"    ({p.name}{' ' + params if params else ''})")
    out.append("  )")
    for a in dom.actions:
        out.append(format_action(a, typed))
    out.append(")")
    return "\n".join(out) + "\n"


def print_problem(prob: ProblemAst, typed: bool = True) -> str:
    out = [f"(define (problem {prob.name})", f"  (:domain {prob.domain_name})"]
    if prob.requirements:
        out.append("  (:requirements " + " ".join(prob.requirements) + ")")
    typed = typed and any(t != ROOT_TYPE for _, t in prob.objects)
    out.append(f"  (:objects {_typed(prob.objects, typed)})")
    out.append("  (:init")
    out.extend(f"    {a}" for a in prob.init)
    out.append("  )")
    out.append("  (:goal (and" + "".join(f"\n    {a}" for a in prob.goal) + "))")
    out.append(")")
    return "\n".join(out) + "\n"


def print_plan(steps: Iterable[Tuple[str, Tuple[str, ...]]]) -> str:
    return "".join("(" + " ".join((name,) + tuple(args)) + ")\n" for name, args in steps)
