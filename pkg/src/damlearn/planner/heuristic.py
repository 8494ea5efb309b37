"""Additive delete-relaxation heuristic for clause preconditions and
conditional effects.

A clause costs the cheapest of its literals; negative literals are free in
the relaxation. A conditional effect fires once its operator is reached and
its (positive) condition fluents are, at the sum of those costs.
"""

import heapq
import math
from typing import List

from .task import GroundTask, bits

INF = math.inf


class AdditiveHeuristic:
    def __init__(self, task: GroundTask):
        n = len(task.fluents)
        self.goal = sorted(task.goal)
        self.clause_op: List[int] = []
        self.fluent_clauses: List[List[int]] = [[] for _ in range(n)]
        self.op_open: List[int] = []
        self.op_units: List[List[int]] = []
        self.unit_add: List[List[int]] = []
        self.unit_need: List[int] = []
        self.fluent_units: List[List[int]] = [[] for _ in range(n)]
        for oi, op in enumerate(task.operators):
            open_clauses = 0
            for clause in op.pre:
                if any(l < 0 for l in clause):
                    continue
                cid = len(self.clause_op)
                self.clause_op.append(oi)
                for f in set(clause):
                    self.fluent_clauses[f].append(cid)
                open_clauses += 1
            self.op_open.append(open_clauses)
            units = []
            for e in op.effects:
                if not e.add:
                    continue
                uid = len(self.unit_add)
                cond = sorted({l for l in e.condition if l >= 0})
                self.unit_add.append(list(e.add))
                self.unit_need.append(len(cond) + 1)
                for f in cond:
                    self.fluent_units[f].append(uid)
                units.append(uid)
            self.op_units.append(units)
        self.n = n
        self.free_ops = [oi for oi, c in enumerate(self.op_open) if c == 0]

    def __call__(self, state: int) -> float:
        cost = [INF] * self.n
        heap = []
        for f in bits(state):
            cost[f] = 0
            heap.append((0, f))
        goal_left = {f for f in self.goal if cost[f] != 0}
        if not goal_left:
            return 0
        clause_done = bytearray(len(self.clause_op))
        op_open = self.op_open[:]
        op_cost = [0] * len(op_open)
        unit_need = self.unit_need[:]
        unit_cost = [0] * len(unit_need)
        unit_add = self.unit_add
        op_units = self.op_units

        def fire(u: int) -> None:
            c = unit_cost[u]
            for g in unit_add[u]:
                if c < cost[g]:
                    cost[g] = c
                    heapq.heappush(heap, (c, g))

        def reach_op(o: int) -> None:
            c = op_cost[o] + 1
            for u in op_units[o]:
                unit_cost[u] += c
                unit_need[u] -= 1
                if not unit_need[u]:
                    fire(u)

        for o in self.free_ops:
            reach_op(o)
        fluent_clauses = self.fluent_clauses
        fluent_units = self.fluent_units
        clause_op = self.clause_op
        while heap:
            c, f = heapq.heappop(heap)
            if c > cost[f]:
                continue
            if f in goal_left:
                goal_left.discard(f)
                if not goal_left:
                    break
            for cl in fluent_clauses[f]:
                if clause_done[cl]:
                    continue
                clause_done[cl] = 1
                o = clause_op[cl]
                op_cost[o] += c
                op_open[o] -= 1
                if not op_open[o]:
                    reach_op(o)
            for u in fluent_units[f]:
                unit_cost[u] += c
                unit_need[u] -= 1
                if not unit_need[u]:
                    fire(u)
        if goal_left:
            return INF
        return sum(cost[g] for g in self.goal)
