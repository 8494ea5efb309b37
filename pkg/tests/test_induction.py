"""Inducing schemas from compiled plans, costs and witness plans."""

import json
from fractions import Fraction

import pytest

from damlearn.compiler import (ApplyAction, EditAction, EditFluent,
                               compile_task)
from damlearn.induction import (IllFormedPlan, NotASolution, encode_witness,
                                export, induce, induce_models, model_cost,
                                plan_cost, prune_edits, replay, slot_plans,
                                trace_plans)
from damlearn.pddl import Atom, PredicateSignature, parse_domain
from damlearn.planner import (PlannerConfig, Plan, PlanningError, solve,
                              validate_plan)
from damlearn.task import ActionSchema, LearningTask, Trace, init_partial_models
from strategies import random_learning_task


def edit(cp, kind, pred, *sigma):
    return cp.operator_id(EditAction(EditFluent(kind, 1, pred, sigma)))


def fig1b_prefix(cp):
    # remove everything except agent-at(x) and connected(x, y), then program effects
    keep = {("agent-at", (1,)), ("connected", (1, 2))}
    steps = [edit(cp, "rpre", e.predicate, *e.sigma) for e in cp.edit_fluents()
             if e.kind == "rpre" and (e.predicate, e.sigma) not in keep]
    return steps + [edit(cp, "add", "visited", 2), edit(cp, "add", "agent-at", 2),
                    edit(cp, "del", "agent-at", 1)]


def rename(schema, names):
    ren = dict(zip(schema.param_names, names))
    return ActionSchema(schema.name, tuple((ren[p], t) for p, t in schema.params),
                        *(frozenset(a.substitute(ren) for a in s)
                          for s in (schema.pre, schema.add, schema.delete)))


def test_fig1b_prefix_induces_move(visitall_cp, move_schema):
    plan = fig1b_prefix(visitall_cp) + [visitall_cp.ed2val]
    (model,) = induce_models(visitall_cp, plan)
    expected = rename(move_schema, ("?v1", "?v2"))
    assert (model.pre, model.add, model.delete) == (expected.pre, expected.add, expected.delete)
    assert model.arity == 2 and model.is_well_defined()


def test_empty_prefix_is_dropped(visitall_cp):
    ind = induce(visitall_cp, [visitall_cp.ed2val])
    assert ind.models == () and len(ind.dropped) == 1
    assert ind.dropped[0].pre == visitall_cp.initial_models[0].pre
    assert ind.cost == -8


def test_trim_to_arity_zero():
    preds = (PredicateSignature("q"), PredicateSignature("p", (("?x", "object"),)))
    t = Trace("t", frozenset(), frozenset({Atom("q")}))
    cp = compile_task(LearningTask(preds, (("o", "object"),), (t,), 1, 1))
    plan = [edit(cp, "rpre", "p", 1), edit(cp, "add", "q"), cp.ed2val]
    (model,) = induce_models(cp, plan)
    assert model.arity == 0 and model.add == {Atom("q")} and model.pre == {Atom("q")}


def test_edit_after_pivot_is_ill_formed(visitall_cp):
    e = edit(visitall_cp, "add", "visited", 2)
    with pytest.raises(IllFormedPlan):
        induce(visitall_cp, [visitall_cp.ed2val, e])
    with pytest.raises(IllFormedPlan):
        induce(visitall_cp, [e])


def test_costs(move_schema, visitall_task):
    assert model_cost([move_schema], 1) == Fraction(1)
    (untouched,) = init_partial_models(visitall_task.predicates, 1, 2)
    assert model_cost([], 1, [untouched]) == -8
    (distinct,) = init_partial_models(visitall_task.predicates, 1, 2, distinct=True)
    assert model_cost([], 1, [distinct]) == -6
    assert model_cost([move_schema], 2, [distinct]) == Fraction(1 - 6, 2)
    with pytest.raises(ValueError):
        model_cost([], 0)


def test_witness_for_move(visitall_cp, move_schema):
    plan = encode_witness([move_schema], visitall_cp, [[("move", ("p1", "p2"))]])
    validate_plan(visitall_cp.ground, plan.actions)
    ind = induce(visitall_cp, plan)
    assert ind.cost == 1 == plan_cost(visitall_cp, plan)
    assert replay(visitall_cp, plan, ind).ok


def test_witness_trivial_plan(visitall_task):
    s = visitall_task.traces[0].init
    t = Trace("done", s, frozenset(list(s)[:1]))
    task = LearningTask(visitall_task.predicates, visitall_task.objects, (t,), 1, 2,
                        types=visitall_task.types)
    cp = compile_task(task)
    assert encode_witness(list(cp.initial_models), cp, [[]]) == Plan((cp.ed2val,))


def test_witness_rejects_bad_trace_plan(visitall_cp, move_schema):
    with pytest.raises(NotASolution):
        encode_witness([move_schema], visitall_cp, [[("move", ("p2", "p1"))]])
    with pytest.raises(NotASolution):
        encode_witness([move_schema], visitall_cp, [[]])


def test_witness_rejects_oversized_models(visitall_cp, move_schema):
    with pytest.raises(ValueError):
        encode_witness([move_schema, move_schema], visitall_cp, [[]])


def test_prune_keeps_validity_and_lowers_cost(visitall_cp):
    # add a useless edit on top of a valid plan
    plan = solve(visitall_cp.ground, PlannerConfig())
    prefix, _, suffix = visitall_cp.split_plan(plan)
    extra = edit(visitall_cp, "add", "connected", 1, 1)
    if extra in prefix:
        pytest.skip("planner already used the edit")
    padded = prefix + [extra, visitall_cp.ed2val] + suffix
    validate_plan(visitall_cp.ground, padded)
    pruned = prune_edits(visitall_cp, padded)
    validate_plan(visitall_cp.ground, pruned.actions)
    assert plan_cost(visitall_cp, pruned) < plan_cost(visitall_cp, padded)
    assert extra not in pruned.actions


@pytest.mark.parametrize("seed", range(30))
def test_round_trip_and_cost_correspondence(seed):
    task = random_learning_task(seed)
    cp = compile_task(task)
    try:
        plan = solve(cp.ground, PlannerConfig(time_limit=20))
    except PlanningError:
        return
    ind = induce(cp, plan)
    assert ind.cost == plan_cost(cp, plan)
    assert replay(cp, plan, ind).ok
    # back through the witness encoder on the same compilation
    witness = encode_witness(ind.slots, cp, slot_plans(cp, plan))
    validate_plan(cp.ground, witness.actions)
    assert induce(cp, witness).cost == ind.cost
    # the trimmed schemas fit a compilation with exactly as many slots
    if ind.schemas:
        small = compile_task(task.with_config(len(ind.schemas), task.r))
        validate_plan(small.ground, encode_witness(ind.schemas, small,
                                                   trace_plans(cp, plan, ind)).actions)


def test_export(visitall_cp, visitall_task, move_schema):
    plan = encode_witness([move_schema], visitall_cp, [[("move", ("p1", "p2"))]])
    ind = induce(visitall_cp, plan)
    domain, meta = export(visitall_task, ind, visitall_cp, plan.actions)
    d = parse_domain(domain)
    assert d.actions[0].params == (("?v1", "place"), ("?v2", "place"))
    m = json.loads(meta)
    assert m["cost"] == "1" and m["actions"][0]["edits"]["add"] == 2
    assert m["plan"][-2:] == ["(ed2val)", "(apply_act1_tr1 p1 p2)"]
