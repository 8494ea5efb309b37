"""Configuration-lattice search."""

import json

import pytest

from damlearn.compiler import CompileOptions
from damlearn.pddl import Atom, PredicateSignature
from damlearn.planner import PlannerConfig
from damlearn.task import LearningTask, Trace
from damlearn.udam import (ConfigNode, SearchLedger, UdamConfig, Unlearnable,
                           expand, udam_search)
from damlearn.validation import generate_instances, generate_traces, reference_domain

Q = PredicateSignature("q", (("?x", "object"),))


def one_pred_task(goal=True) -> LearningTask:
    g = frozenset({Atom("q", ("o",))}) if goal else frozenset()
    return LearningTask((Q,), (("o", "object"),), (Trace("t", frozenset(), g),))


def test_lattice_one_predicate_one_object():
    res = udam_search(one_pred_task())
    assert sorted(res.ledger.closed) == [(1, 0), (1, 1), (2, 0), (2, 1)]
    assert len(set(res.ledger.closed)) == 4 and not res.ledger.open
    assert [r.outcome for r in res.ledger.log].count("solved") == 2


def test_expand_interior_and_boundary():
    preds = tuple(PredicateSignature(f"p{i}", (("?x", "object"),)) for i in range(3))
    objs = tuple((f"o{i}", "object") for i in range(64))
    task = LearningTask(preds, objs, (Trace("t", frozenset(), frozenset()),))
    cfg = UdamConfig()
    ledger = SearchLedger((6, 64), closed=[(1, 0)])
    expand(ConfigNode(0, 1, 0), ledger, task, cfg)
    assert sorted(n.key for n in ledger.open) == [(1, 1), (2, 0)]
    full = SearchLedger((6, 64), closed=[(6, 64)])
    expand(ConfigNode(0, 6, 64), full, task, cfg)
    assert full.open == []
    dedup = SearchLedger((6, 64), closed=[(2, 1), (1, 1)])
    expand(ConfigNode(0, 1, 1), dedup, task, cfg)
    assert [n.key for n in dedup.open] == [(1, 2)]


def test_pop_order_by_operator_count():
    res = udam_search(one_pred_task())
    counts = [r.operator_count for r in res.ledger.log]
    assert counts == sorted(counts)


def test_degenerate_traces_solve_at_root():
    res = udam_search(one_pred_task(goal=False))
    first = res.ledger.log[0]
    assert (first.k, first.r, first.outcome) == (1, 0, "solved")
    assert len(res.ledger.closed) == 4


def test_unlearnable():
    # r = 0 cannot touch the unary predicate
    with pytest.raises(Unlearnable) as info:
        udam_search(one_pred_task(), UdamConfig(max_r=0))
    assert sorted(info.value.ledger.closed) == [(1, 0), (2, 0)]


@pytest.fixture(scope="module")
def visitall_2x2():
    dom = reference_domain("visitall")
    traces = generate_traces(dom, generate_instances("visitall", 2, [3, 4]))
    return LearningTask.from_domain(dom, traces)


def test_visitall_2x2(visitall_2x2):
    res = udam_search(visitall_2x2, UdamConfig(max_k=2, max_r=2))
    closed = res.ledger.closed
    assert closed[:1] == [(1, 0)] and (1, 1) in closed
    assert res.ledger.best.induction.cost == res.cost
    assert res.replay_best().ok
    imp = res.ledger.improvements
    assert all(a > b for a, b in zip(imp, imp[1:])) and imp[-1] == res.cost
    solved = [r.cost for r in res.ledger.log if r.cost is not None]
    assert res.cost == min(solved)


def test_improvements_strictly_decrease_with_several_solutions():
    preds = (Q, PredicateSignature("p", (("?x", "object"), ("?y", "object"))))
    objs = (("a", "object"), ("b", "object"))
    t = Trace("t", frozenset({Atom("p", ("a", "b"))}), frozenset({Atom("q", ("b",))}))
    res = udam_search(LearningTask(preds, objs, (t,)), UdamConfig(max_k=2, max_r=2))
    assert len([r for r in res.ledger.log if r.outcome == "solved"]) > 1
    imp = res.ledger.improvements
    assert all(a > b for a, b in zip(imp, imp[1:]))


def test_determinism(visitall_2x2):
    cfg = UdamConfig(max_k=2, max_r=2)
    a = udam_search(visitall_2x2, cfg).ledger.to_json()
    b = udam_search(visitall_2x2, cfg).ledger.to_json()
    strip = lambda d: [{k: v for k, v in n.items() if k != "wall_time"} for n in d["nodes"]]
    assert strip(a) == strip(b) and a["best"] == b["best"]


def test_parallel_matches_serial(visitall_2x2):
    serial = udam_search(visitall_2x2, UdamConfig(max_k=2, max_r=2))
    parallel = udam_search(visitall_2x2, UdamConfig(max_k=2, max_r=2, jobs=2))
    assert sorted(serial.ledger.closed) == sorted(parallel.ledger.closed)
    assert serial.cost == parallel.cost
    assert serial.ledger.best.node == parallel.ledger.best.node


def test_first_sat_stops_early(visitall_2x2):
    res = udam_search(visitall_2x2, UdamConfig(max_k=2, max_r=2, strategy="first-sat"))
    assert res.ledger.stopped == "first-sat"
    assert res.ledger.log[-1].outcome == "solved"


def test_capacity_marks_node_non_viable(visitall_2x2):
    res = udam_search(visitall_2x2, UdamConfig(max_k=2, max_r=2,
                                               compile=CompileOptions(capacity=60)))
    outcomes = {(r.k, r.r): r.outcome for r in res.ledger.log}
    assert outcomes[(2, 2)] == "capacity"
    assert "solved" in outcomes.values()


def test_time_budget_returns_incumbent(visitall_2x2):
    res = udam_search(visitall_2x2, UdamConfig(max_k=4, max_r=4, time_budget=0.5,
                                               strategy="exhaust"))
    assert res.ledger.best is not None
    if res.ledger.stopped:
        assert res.ledger.stopped == "time-budget" and res.ledger.open


def test_exhausted_node_recorded(visitall_2x2):
    cfg = UdamConfig(max_k=1, max_r=2, planner=PlannerConfig(max_expansions=3))
    with pytest.raises(Unlearnable) as info:
        udam_search(visitall_2x2, cfg)
    assert any(r.outcome == "exhausted-expansions" for r in info.value.ledger.log)


def test_ledger_json(visitall_2x2):
    res = udam_search(visitall_2x2, UdamConfig(max_k=1, max_r=1))
    data = json.loads(res.ledger.dumps())
    assert set(data) >= {"nodes", "best", "closed", "open", "improvements", "total_time"}
    node = data["nodes"][0]
    assert set(node) >= {"k", "r", "operator_count", "outcome", "plan_length", "cost", "wall_time"}


def test_models_replay_on_training_traces(visitall_2x2):
    res = udam_search(visitall_2x2, UdamConfig(max_k=1, max_r=2))
    assert res.ledger.best.node.key in {(1, 1), (1, 2)}
    assert res.replay_best().ok
    # a model must at least be able to visit a place
    assert any(a.predicate == "visited" for m in res.models for a in m.add)
