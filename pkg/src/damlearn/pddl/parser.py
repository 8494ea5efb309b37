"""Reader for PDDL domains, problems and IPC plan files."""

import re
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple, Union

from .ast import (ROOT_TYPE, ActionAst, Atom, Condition, ConditionalEffect,
                  DomainAst, EffectFormula, Equality, Formula, Literal,
                  PredicateSignature, ProblemAst, TypedList, TypeHierarchy,
                  is_variable)
from .errors import (ArityMismatch, PDDLSyntaxError, TypeMismatch,
                     UndeclaredType, UnknownAction, UnknownObject,
                     UnknownPredicate, UnsupportedRequirement)

SUPPORTED_REQUIREMENTS = frozenset({
    ":strips", ":typing", ":negative-preconditions",
    ":disjunctive-preconditions", ":conditional-effects", ":equality",
})

_TOKEN = re.compile(r";[^\n]*|\(|\)|[^\s();]+|\s+")


class Sym(str):
    line = 0
    column = 0


class SList(list):
    line = 0
    column = 0


SExpr = Union[Sym, SList]


def read_sexpr(text: str) -> SExpr:
    """Read exactly one s-expression; identifiers are lower-cased."""
    stack: List[SList] = []
    result: Optional[SExpr] = None
    line, col = 1, 1
    for m in _TOKEN.finditer(text):
        tok = m.group()
        tline, tcol = line, col
        nl = tok.count("\n")
        if nl:
            line += nl
            col = len(tok) - tok.rfind("\n")
        else:
            col += len(tok)
        if tok[0] == ";" or tok.isspace():
            continue
        if result is not None:
            raise PDDLSyntaxError(f"trailing input {tok!r}", tline, tcol)
        if tok == "(":
            node = SList()
            node.line, node.column = tline, tcol
            stack.append(node)
        elif tok == ")":
            if not stack:
                raise PDDLSyntaxError("unbalanced ')'", tline, tcol)
            node = stack.pop()
            if stack:
                stack[-1].append(node)
            else:
                result = node
        else:
            sym = Sym(tok.lower())
            sym.line, sym.column = tline, tcol
            if not stack:
                result = sym
            else:
                stack[-1].append(sym)
    if stack:
        raise PDDLSyntaxError("unexpected end of input, missing ')'",
                              stack[-1].line, stack[-1].column)
    if result is None:
        raise PDDLSyntaxError("empty input", 1, 1)
    return result


def _err(node: SExpr, message: str) -> PDDLSyntaxError:
    return PDDLSyntaxError(message, node.line, node.column)


def _expect_list(node: SExpr, what: str) -> SList:
    if not isinstance(node, SList):
        raise _err(node, f"expected {what}, got {node!r}")
    return node


def _expect_sym(node: SExpr, what: str) -> Sym:
    if not isinstance(node, Sym):
        raise _err(node, f"expected {what}")
    return node


def _parse_typed_list(node: Sequence[SExpr], hierarchy: Optional[TypeHierarchy]) -> TypedList:
    out: List[Tuple[str, str]] = []
    pending: List[str] = []
    i = 0
    while i < len(node):
        item = _expect_sym(node[i], "name")
        if item == "-":
            if i + 1 >= len(node):
                raise _err(item, "missing type after '-'")
            tnode = node[i + 1]
            if isinstance(tnode, SList):
                raise _err(tnode, "'either' types are not supported")
            if hierarchy is not None and tnode not in hierarchy:
                raise UndeclaredType(str(tnode))
            out.extend((p, str(tnode)) for p in pending)
            pending = []
            i += 2
            continue
        pending.append(str(item))
        i += 1
    out.extend((p, ROOT_TYPE) for p in pending)
    return tuple(out)


def _sections(root: SList, kind: str) -> Tuple[str, Dict[str, SList], List[SList]]:
    if len(root) < 2 or root[0] != "define":
        raise _err(root, "expected (define ...)")
    header = _expect_list(root[1], f"({kind} name)")
    if len(header) != 2 or header[0] != kind:
        raise _err(header, f"expected ({kind} name)")
    name = str(_expect_sym(header[1], "name"))
    sections: Dict[str, SList] = {}
    actions: List[SList] = []
    for sec in root[2:]:
        sec = _expect_list(sec, "section")
        if not sec or not isinstance(sec[0], Sym):
            raise _err(sec, "malformed section")
        key = str(sec[0])
        if key == ":action":
            actions.append(sec)
        elif key in sections:
            raise _err(sec, f"duplicate section {key}")
        else:
            sections[key] = sec
    return name, sections, actions


def _check_requirements(sec: Optional[SList]) -> Tuple[str, ...]:
    if sec is None:
        return ()
    reqs = []
    for r in sec[1:]:
        r = _expect_sym(r, "requirement")
        if r not in SUPPORTED_REQUIREMENTS:
            raise UnsupportedRequirement(str(r))
        reqs.append(str(r))
    return tuple(reqs)


class _Scope:
    """Name resolution context for atoms inside a domain or problem."""

    def __init__(self, predicates: Mapping[str, PredicateSignature],
                 terms: Mapping[str, str], hierarchy: TypeHierarchy,
                 strict: bool = False):
        self.predicates = predicates
        self.terms = terms
        self.hierarchy = hierarchy
        # ground atoms need a genuine subtype; lifted ones only an overlap
        self.fits = hierarchy.is_subtype if strict else hierarchy.overlaps

    def atom(self, node: SExpr) -> Atom:
        node = _expect_list(node, "atom")
        if not node:
            raise _err(node, "empty atom")
        name = str(_expect_sym(node[0], "predicate name"))
        sig = self.predicates.get(name)
        if sig is None:
            raise UnknownPredicate(name)
        args = tuple(str(_expect_sym(a, "term")) for a in node[1:])
        if len(args) != sig.arity:
            raise ArityMismatch(name, sig.arity, len(args))
        for arg, slot in zip(args, sig.types):
            if arg not in self.terms:
                raise UnknownObject(arg)
            if not self.fits(self.terms[arg], slot):
                raise TypeMismatch(
                    f"{arg} of type {self.terms[arg]} does not fit {slot} in {name}")
        return Atom(name, args)

    def term(self, node: SExpr) -> str:
        t = str(_expect_sym(node, "term"))
        if t not in self.terms:
            raise UnknownObject(t)
        return t

    def condition(self, node: SExpr) -> Condition:
        node = _expect_list(node, "literal")
        if node and node[0] == "not":
            if len(node) != 2:
                raise _err(node, "'not' takes one argument")
            inner = self.condition(node[1])
            if isinstance(inner, Equality):
                return Equality(inner.left, inner.right, not inner.positive)
            if not inner.positive:
                raise _err(node, "double negation is not supported")
            return inner.negate()
        if node and node[0] == "=":
            if len(node) != 3:
                raise _err(node, "'=' takes two arguments")
            return Equality(self.term(node[1]), self.term(node[2]))
        if node and node[0] in ("and", "or", "imply", "forall", "exists", "when"):
            raise _err(node, f"'{node[0]}' not allowed here")
        return Literal(self.atom(node))

    def clause(self, node: SExpr) -> Tuple[Condition, ...]:
        node = _expect_list(node, "clause")
        if node and node[0] == "or":
            if len(node) == 1:
                raise _err(node, "empty disjunction")
            return tuple(self.condition(c) for c in node[1:])
        return (self.condition(node),)

    def formula(self, node: SExpr) -> Formula:
        node = _expect_list(node, "formula")
        if node and node[0] == "and":
            clauses: List[Tuple[Condition, ...]] = []
            for sub in node[1:]:
                if isinstance(sub, SList) and sub and sub[0] == "and":
                    clauses.extend(self.formula(sub).clauses)
                else:
                    clauses.append(self.clause(sub))
            return Formula(tuple(clauses))
        return Formula((self.clause(node),))

    def conjunction(self, node: SExpr) -> Tuple[Condition, ...]:
        f = self.formula(node)
        if any(len(c) != 1 for c in f.clauses):
            raise _err(node, "disjunction not allowed in this position")
        return tuple(c[0] for c in f.clauses)

    def effect_literals(self, node: SExpr) -> Tuple[Literal, ...]:
        lits = self.conjunction(node)
        for lit in lits:
            if isinstance(lit, Equality):
                raise _err(node, "equality cannot be an effect")
        return lits  # type: ignore[return-value]

    def effect(self, node: SExpr) -> EffectFormula:
        node = _expect_list(node, "effect")
        items = node[1:] if node and node[0] == "and" else [node]
        plain: List[Literal] = []
        whens: List[ConditionalEffect] = []
        for item in items:
            item = _expect_list(item, "effect")
            if item and item[0] == "when":
                if len(item) != 3:
                    raise _err(item, "'when' takes a condition and an effect")
                whens.append(ConditionalEffect(self.conjunction(item[1]),
                                               self.effect_literals(item[2])))
            elif item and item[0] == "and":
                sub = self.effect(item)
                plain.extend(sub.unconditional)
                whens.extend(sub.conditional)
            else:
                plain.extend(self.effect_literals(item))
        return EffectFormula(tuple(plain), tuple(whens))


def parse_domain(text: str) -> DomainAst:
    root = _expect_list(read_sexpr(text), "domain")
    name, sections, action_nodes = _sections(root, "domain")
    unknown = set(sections) - {":requirements", ":types", ":constants", ":predicates"}
    if unknown:
        key = sorted(unknown)[0]
        if key in (":functions", ":derived", ":durative-action"):
            raise UnsupportedRequirement(key)
        raise _err(sections[key], f"unexpected section {key}")
    requirements = _check_requirements(sections.get(":requirements"))

    types: TypedList = ()
    if ":types" in sections:
        raw = _parse_typed_list(sections[":types"][1:], None)
        declared = {t for t, _ in raw} | {ROOT_TYPE}
        for _, parent in raw:
            if parent not in declared:
                raise UndeclaredType(parent)
        types = tuple((t, p) for t, p in raw if t != ROOT_TYPE)
    hierarchy = TypeHierarchy(types)
    try:
        for t, _ in types:
            hierarchy.ancestors(t)
    except ValueError as exc:
        raise PDDLSyntaxError(str(exc)) from None

    constants: TypedList = ()
    if ":constants" in sections:
        constants = _parse_typed_list(sections[":constants"][1:], hierarchy)

    predicates: List[PredicateSignature] = []
    seen: Set[str] = set()
    for pnode in sections.get(":predicates", SList([None]))[1:]:
        pnode = _expect_list(pnode, "predicate declaration")
        pname = str(_expect_sym(pnode[0], "predicate name")) if pnode else ""
        if not pname:
            raise _err(pnode, "empty predicate declaration")
        if pname in seen:
            raise _err(pnode, f"duplicate predicate {pname}")
        seen.add(pname)
        predicates.append(PredicateSignature(pname, _parse_typed_list(pnode[1:], hierarchy)))
    pred_map = {p.name: p for p in predicates}

    actions: List[ActionAst] = []
    names: Set[str] = set()
    for anode in action_nodes:
        action = _parse_action(anode, pred_map, constants, hierarchy)
        if action.name in names:
            raise _err(anode, f"duplicate action {action.name}")
        names.add(action.name)
        actions.append(action)
    return DomainAst(name, requirements, types, constants, tuple(predicates), tuple(actions))


def _parse_action(node: SList, predicates: Mapping[str, PredicateSignature],
                  constants: TypedList, hierarchy: TypeHierarchy) -> ActionAst:
    if len(node) < 2:
        raise _err(node, "action without a name")
    name = str(_expect_sym(node[1], "action name"))
    fields: Dict[str, SExpr] = {}
    rest = node[2:]
    if len(rest) % 2:
        raise _err(node, f"malformed action {name}")
    for key, value in zip(rest[::2], rest[1::2]):
        key = _expect_sym(key, "action field")
        if key not in (":parameters", ":precondition", ":effect"):
            raise _err(key, f"unexpected action field {key}")
        fields[str(key)] = value
    params: TypedList = ()
    if ":parameters" in fields:
        params = _parse_typed_list(_expect_list(fields[":parameters"], "parameter list"), hierarchy)
        for p, _ in params:
            if not is_variable(p):
                raise _err(fields[":parameters"], f"parameter {p} must start with '?'")
        if len({p for p, _ in params}) != len(params):
            raise _err(fields[":parameters"], f"duplicate parameter in {name}")
    scope = _Scope(predicates, dict(constants) | dict(params), hierarchy)
    pre = Formula()
    if ":precondition" in fields:
        pnode = _expect_list(fields[":precondition"], "precondition")
        if len(pnode) > 0:
            pre = scope.formula(pnode)
    eff = EffectFormula()
    if ":effect" in fields:
        enode = _expect_list(fields[":effect"], "effect")
        if len(enode) > 0:
            eff = scope.effect(enode)
    return ActionAst(name, params, pre, eff)


def _dedup(atoms: Sequence[Atom]) -> Tuple[Atom, ...]:
    return tuple(dict.fromkeys(atoms))


def parse_problem(text: str, dom: DomainAst) -> ProblemAst:
    root = _expect_list(read_sexpr(text), "problem")
    name, sections, actions = _sections(root, "problem")
    if actions:
        raise _err(actions[0], "actions are not allowed in a problem")
    unknown = set(sections) - {":domain", ":requirements", ":objects", ":init", ":goal"}
    if unknown:
        key = sorted(unknown)[0]
        if key == ":metric":
            raise UnsupportedRequirement(key)
        raise _err(sections[key], f"unexpected section {key}")
    if ":domain" not in sections or len(sections[":domain"]) != 2:
        raise _err(root, "missing (:domain name)")
    domain_name = str(_expect_sym(sections[":domain"][1], "domain name"))
    requirements = _check_requirements(sections.get(":requirements"))
    hierarchy = dom.hierarchy
    objects: TypedList = ()
    if ":objects" in sections:
        objects = _parse_typed_list(sections[":objects"][1:], hierarchy)
    terms = dict(dom.constants)
    for o, t in objects:
        if o in terms and terms[o] != t:
            raise _err(sections[":objects"], f"object {o} declared twice")
        terms[o] = t
    scope = _Scope({p.name: p for p in dom.predicates}, terms, hierarchy, strict=True)
    init = _dedup([scope.atom(a) for a in sections.get(":init", SList([None]))[1:]])
    goal: Tuple[Atom, ...] = ()
    if ":goal" in sections:
        gsec = sections[":goal"]
        if len(gsec) != 2:
            raise _err(gsec, "goal takes exactly one formula")
        f = scope.formula(gsec[1])
        if not f.is_positive_conjunction():
            raise _err(gsec, "goal must be a positive conjunction of ground atoms")
        goal = _dedup([c[0].atom for c in f.clauses])  # type: ignore[union-attr]
    return ProblemAst(name, domain_name, objects, init, goal, requirements)


class ActionIndex:
    """Resolves textual ground actions ``(name obj ...)`` to integer ids."""

    def __init__(self, entries: Sequence[Tuple[str, Tuple[str, ...]]]):
        self._ids: Dict[Tuple[str, Tuple[str, ...]], int] = {}
        self._arity: Dict[str, int] = {}
        for i, (name, args) in enumerate(entries):
            self._ids[(name, tuple(args))] = i
            self._arity.setdefault(name, len(args))

    def __len__(self) -> int:
        return len(self._ids)

    def lookup(self, name: str, args: Tuple[str, ...]) -> int:
        name = name.lower()
        args = tuple(a.lower() for a in args)
        if name not in self._arity:
            raise UnknownAction(name)
        if self._arity[name] != len(args):
            raise ArityMismatch(name, self._arity[name], len(args))
        try:
            return self._ids[(name, args)]
        except KeyError:
            raise UnknownAction(f"({' '.join((name,) + args)})") from None


def read_plan_steps(text: str) -> List[Tuple[str, Tuple[str, ...]]]:
    """Lexical view of an IPC plan file: one ``(name args...)`` per line."""
    steps = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split(";", 1)[0].strip()
        if not line:
            continue
        # tolerate "0: (a b)" step prefixes some planners emit
        line = re.sub(r"^\d+(\.\d+)?\s*:\s*", "", line)
        line = re.sub(r"\s*\[\d+(\.\d+)?\]\s*$", "", line)
        if not (line.startswith("(") and line.endswith(")")):
            raise PDDLSyntaxError(f"malformed plan step {raw.strip()!r}", lineno, 1)
        parts = line[1:-1].split()
        if not parts:
            raise PDDLSyntaxError("empty plan step", lineno, 1)
        steps.append((parts[0].lower(), tuple(p.lower() for p in parts[1:])))
    return steps


def parse_plan(text: str, index: ActionIndex) -> List[int]:
    return [index.lookup(name, args) for name, args in read_plan_steps(text)]


def parse_atom(text: str) -> Atom:
    """Parse a ground atom written as ``(p a b)`` or ``p a b``."""
    text = text.strip()
    if not text.startswith("("):
        text = f"({text})"
    node = read_sexpr(text)
    if not isinstance(node, SList) or not node or any(isinstance(x, SList) for x in node):
        raise PDDLSyntaxError(f"malformed atom {text!r}")
    return Atom(str(node[0]), tuple(str(x) for x in node[1:]))
