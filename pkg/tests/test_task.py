"""Schemas, traces, grounding and partial models."""

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from damlearn.pddl import Atom, PredicateSignature
from damlearn.task import (ActionSchema, IllDefinedSchema, LearningTask,
                           NotFullyObserved, Trace, check_well_defined,
                           ground, ground_schema, infer_objects,
                           init_partial_models, partial_precondition,
                           read_traces, split_traces, trim_schema,
                           write_traces)

P = (PredicateSignature("at", (("?x", "object"),)), PredicateSignature("v", (("?x", "object"),)),
     PredicateSignature("conn", (("?x", "object"), ("?y", "object"))))


def A(p, *args):
    return Atom(p, args)


def test_move_is_well_defined(move_schema):
    assert move_schema.is_well_defined()
    check_well_defined(move_schema)


def test_ill_defined_schema():
    bad = ActionSchema("a", (("?x", "object"), ("?y", "object")), frozenset({A("v", "?x")}))
    assert not bad.is_well_defined()
    with pytest.raises(IllDefinedSchema):
        check_well_defined(bad)


def test_partial_models_default_enumeration():
    (m,) = init_partial_models(P, 1, 2)
    assert len(m.pre) == 8 and not m.add and not m.delete
    assert A("conn", "?v1", "?v1") in m.pre


def test_partial_models_distinct_enumeration():
    (m,) = init_partial_models(P, 1, 2, distinct=True)
    assert m.pre == {A("at", "?v1"), A("at", "?v2"), A("v", "?v1"), A("v", "?v2"),
                     A("conn", "?v1", "?v2"), A("conn", "?v2", "?v1")}


def test_partial_models_arity_zero():
    (m,) = init_partial_models(P, 1, 0)
    assert m.pre == frozenset()
    q = (PredicateSignature("q"),)
    ms = init_partial_models(q, 2, 1)
    assert [m.pre for m in ms] == [frozenset({A("q")})] * 2


def test_ground_counts():
    objs = (("p1", "object"), ("p2", "object"))
    assert len(ground(P, objs)) == 8
    assert len(ground((), objs)) == 0
    assert len(ground(P[2:], objs + (("p3", "object"),))) == 9


def test_ground_schema_counts(move_schema):
    places = (("p1", "place"), ("p2", "place"))
    acts = ground_schema(move_schema, places)
    assert sorted(a.args for a in acts) == [("p1", "p1"), ("p1", "p2"), ("p2", "p1"), ("p2", "p2")]
    assert len(ground_schema(move_schema, places + (("p3", "place"),))) == 9
    assert len(ground_schema(ActionSchema("noop", ()), places)) == 1


def test_ground_move_transition(move_schema):
    (m,) = [a for a in ground_schema(move_schema, (("p1", "place"), ("p2", "place")))
            if a.args == ("p1", "p2")]
    s = frozenset({A("agent-at", "p1"), A("connected", "p1", "p2"), A("connected", "p2", "p1"),
                   A("visited", "p1")})
    assert m.applicable(s)
    assert m.apply(s) == {A("agent-at", "p2"), A("connected", "p1", "p2"),
                          A("connected", "p2", "p1"), A("visited", "p1"), A("visited", "p2")}


def test_add_wins_over_delete():
    a = ActionSchema("flip", (("?x", "object"),), frozenset(), frozenset({A("v", "?x")}),
                     frozenset({A("v", "?x")}))
    (g,) = ground_schema(a, (("o", "object"),))
    assert g.apply(frozenset({A("v", "o")})) == {A("v", "o")}
    assert a.inconsistent


def test_trim_schema():
    s = ActionSchema("a", (("?v1", "object"), ("?v2", "object")), frozenset(),
                     frozenset({A("v", "?v2")}))
    t, kept = trim_schema(s)
    assert kept == (1,)
    assert t.params == (("?v1", "object"),) and t.add == {A("v", "?v1")}


def test_split_traces():
    s0, s1, s2 = (frozenset({A("v", f"p{i}")}) for i in range(3))
    tr = Trace("t", s0, s2, states=(s0, s1, s2))
    parts = split_traces(tr)
    assert [(p.init, p.goal) for p in parts] == [(s0, s1), (s1, s2)]
    assert [(p.init, p.goal) for p in split_traces(Trace("u", s0, s1, states=(s0, s1)))] == [(s0, s1)]
    assert split_traces(Trace("w", s0, s0, states=(s0,))) == []
    with pytest.raises(NotFullyObserved):
        split_traces(Trace("x", s0, s2, states=(s0, None, s2)))
    with pytest.raises(NotFullyObserved):
        split_traces(Trace("y", s0, s2))


atoms = st.builds(Atom, st.sampled_from(["at", "v"]), st.tuples(st.sampled_from(["a", "b", "c"])))


@given(st.frozensets(atoms), st.frozensets(atoms), st.booleans())
def test_trace_json_round_trip(init, goal, with_states):
    states = (init, None) if with_states else None
    t = Trace("t1", init, goal, states, (("a", "object"),))
    assert Trace.from_json(json.loads(json.dumps(t.to_json()))) == t
    assert read_traces(write_traces([t, t])) == [t, t]


def test_infer_objects(visitall_domain, visitall_trace):
    objs = infer_objects([visitall_trace], visitall_domain.predicates, visitall_domain.hierarchy)
    assert objs == (("p1", "place"), ("p2", "place"))
    bare = Trace("b", frozenset({A("visited", "q")}), frozenset())
    assert infer_objects([bare], visitall_domain.predicates,
                         visitall_domain.hierarchy) == (("q", "place"),)


def test_learning_task_bounds(visitall_trace, visitall_domain):
    with pytest.raises(ValueError):
        LearningTask.from_domain(visitall_domain, [visitall_trace], k=7, r=1)
    with pytest.raises(ValueError):
        LearningTask.from_domain(visitall_domain, [visitall_trace], k=1, r=3)
    with pytest.raises(ValueError):
        LearningTask.from_domain(visitall_domain, [], k=1, r=1)
    t = LearningTask.from_domain(visitall_domain, [visitall_trace], k=1, r=2)
    assert t.m == 1 and t.with_config(2, 1).k == 2


def test_partial_precondition_order():
    atoms = partial_precondition(P, 1)
    assert atoms == [A("at", "?v1"), A("v", "?v1"), A("conn", "?v1", "?v1")]
