"""Simulator, heuristic and the built-in search engines."""

import math

import pytest
from hypothesis import HealthCheck, given, settings

import oracles
from damlearn.data import read_text
from damlearn.pddl import parse_domain, parse_problem
from damlearn.planner import (AdditiveHeuristic, Effect, GroundTask, Operator,
                              PlannerConfig, ResourceExhausted, Unsolvable,
                              Violation, breadth_first_search,
                              greedy_best_first_search, ground_problem, solve,
                              validate_plan)
from strategies import ground_tasks

BFS = PlannerConfig(engine="internal-bfs", time_limit=30)
GBFS = PlannerConfig(engine="internal-gbfs", time_limit=30)


def bundled(domain: str, problem: str):
    d = parse_domain(read_text(domain))
    return ground_problem(d, parse_problem(read_text(problem), d))


@given(ground_tasks())
@settings(max_examples=150, deadline=None)
def test_simulator_matches_naive(task):
    # any prefix of applicable operators simulates identically
    s = frozenset(task.init)
    plan = []
    for op_id, op in enumerate(task.operators):
        if oracles.applicable(op, s):
            plan.append(op_id)
            s = oracles.apply(op, s)
    expected = oracles.simulate(task, plan)
    if expected is None:
        with pytest.raises(Violation):
            validate_plan(task, plan)
    else:
        assert validate_plan(task, plan) == expected


@given(ground_tasks())
@settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])
def test_bfs_is_optimal_and_gbfs_sound(task):
    dist = oracles.distance(task)
    if dist is None:
        with pytest.raises(Unsolvable):
            breadth_first_search(task, BFS)
        with pytest.raises(Unsolvable):
            greedy_best_first_search(task, GBFS)
        return
    assert len(breadth_first_search(task, BFS)) == dist
    for lazy in (True, False):
        plan = greedy_best_first_search(task, GBFS.replace(lazy=lazy))
        assert oracles.simulate(task, plan) is not None


@given(ground_tasks())
@settings(max_examples=100, deadline=None)
def test_heuristic_detects_only_true_dead_ends(task):
    h = AdditiveHeuristic(task)(task.init_mask)
    if h == math.inf:
        assert oracles.distance(task) is None
    if task.goal <= task.init:
        assert h == 0


def test_goal_in_init_gives_empty_plan():
    t = GroundTask(("(a)",), (Operator("(x)", (), (Effect((), (0,), ()),)),), frozenset({0}),
                   frozenset({0}))
    assert len(solve(t, BFS)) == 0 and len(solve(t, GBFS)) == 0
    assert validate_plan(t, []) == [frozenset({0})]


def test_unreachable_goal():
    t = GroundTask(("(a)", "(b)"), (Operator("(x)", (), (Effect((), (0,), ()),)),),
                   frozenset(), frozenset({1}))
    for cfg in (BFS, GBFS):
        with pytest.raises(Unsolvable):
            solve(t, cfg)


def test_violation_names_failing_clause():
    t = GroundTask(("(a)", "(b)"), (Operator("(x)", ((0, 1),), ()),), frozenset(), frozenset())
    with pytest.raises(Violation) as info:
        validate_plan(t, [0])
    assert info.value.step == 1 and info.value.clause == (0, 1)


def test_conditional_effects_read_the_old_state():
    # a swap: both conditions are evaluated before either effect applies
    op = Operator("(swap)", (), (Effect((0,), (1,), (0,)), Effect((1,), (0,), (1,))))
    t = GroundTask(("(a)", "(b)"), (op,), frozenset({0}), frozenset({1}))
    assert validate_plan(t, [0]) == [frozenset({0}), frozenset({1})]


def test_delete_then_add():
    op = Operator("(x)", (), (Effect((), (0,), (0,)),))
    t = GroundTask(("(a)",), (op,), frozenset(), frozenset({0}))
    assert validate_plan(t, [0])[-1] == frozenset({0})


def test_expansion_budget():
    ops = tuple(Operator(f"(inc{i})", ((~i,),), (Effect((), (i,), ()),)) for i in range(12))
    t = GroundTask(tuple(f"(f{i})" for i in range(13)), ops, frozenset(), frozenset({12}))
    with pytest.raises(ResourceExhausted) as info:
        breadth_first_search(t, BFS.replace(max_expansions=50))
    assert info.value.resource == "expansions"


def test_time_budget():
    ops = tuple(Operator(f"(inc{i})", ((~i,),), (Effect((), (i,), ()),)) for i in range(16))
    t = GroundTask(tuple(f"(f{i})" for i in range(17)), ops, frozenset(), frozenset({16}))
    with pytest.raises(ResourceExhausted):
        breadth_first_search(t, BFS.replace(time_limit=0.05))


def test_config_validation():
    with pytest.raises(ValueError):
        PlannerConfig(engine="madagascar")
    with pytest.raises(ValueError):
        PlannerConfig(time_limit=0)


@pytest.mark.parametrize("domain,problem,optimal", [
    ("visitall.pddl", "visitall-2.pddl", 1),
    ("blocksworld.pddl", "blocksworld-3.pddl", 6),
    ("hanoi.pddl", "hanoi-3.pddl", 7),
])
def test_bundled_problems(domain, problem, optimal):
    gp = bundled(domain, problem)
    assert len(solve(gp.task, BFS)) == optimal
    plan = solve(gp.task, GBFS)
    assert oracles.simulate(gp.task, plan) is not None


def test_grounding_visitall(visitall_domain, visitall_problem):
    gp = ground_problem(visitall_domain, visitall_problem, simplify_statics=False)
    assert len(gp.task.fluents) == 8
    assert [op.name for op in gp.task.operators] == [
        "(move p1 p1)", "(move p1 p2)", "(move p2 p1)", "(move p2 p2)"]
    s1 = validate_plan(gp.task, [1])[-1]
    assert {str(a) for a in gp.state_atoms(s1)} == {
        "(agent-at p2)", "(connected p1 p2)", "(connected p2 p1)", "(visited p1)", "(visited p2)"}


def test_grounding_static_simplification(visitall_domain, visitall_problem):
    simple = ground_problem(visitall_domain, visitall_problem).task
    full = ground_problem(visitall_domain, visitall_problem, simplify_statics=False).task
    # connected is static: false instances prune the operator, true ones vanish
    assert [op.name for op in simple.operators] == ["(move p1 p2)", "(move p2 p1)"]
    assert all(len(op.pre) == 1 for op in simple.operators)
    assert all(len(op.pre) == 2 for op in full.operators)


def test_equality_preconditions():
    d = parse_domain("""(define (domain eq) (:requirements :strips :equality)
      (:predicates (p ?x) (q ?x ?y))
      (:action a :parameters (?x ?y) :precondition (and (p ?x) (not (= ?x ?y)))
               :effect (q ?x ?y)))""")
    p = parse_problem("(define (problem e) (:domain eq) (:objects o1 o2) (:init (p o1)) "
                      "(:goal (q o1 o2)))", d)
    gp = ground_problem(d, p, simplify_statics=False)
    assert [op.name for op in gp.task.operators] == ["(a o1 o2)", "(a o2 o1)"]
    assert [op.name for op in ground_problem(d, p).task.operators] == ["(a o1 o2)"]
