"""Adapter for off-the-shelf planners driven through PDDL files.

The command template must contain ``{domain}``, ``{problem}`` and
``{plan-out}`` placeholders (``{plan}`` is accepted as an alias). Exit status
0 with a plan file means solved; the configured unsolvable exit codes mean
the planner proved unsolvability. Returned plans are always re-validated.
"""

import hashlib
import os
import resource
import shlex
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path
from typing import Optional

from ..pddl import ActionIndex, PDDLError, parse_plan
from .search import PlannerConfig, ResourceExhausted, Unsolvable
from .task import GroundTask, Plan, Violation, validate_plan

RESOURCE_EXIT_CODES = (22, 23, 24)


class ExternalFailure(Exception):
    def __init__(self, message: str, returncode: Optional[int] = None, stderr: str = ""):
        self.returncode = returncode
        self.stderr_digest = hashlib.sha1(stderr.encode()).hexdigest()[:12] if stderr else ""
        tail = stderr.strip().splitlines()[-3:] if stderr else []
        super().__init__(message + (f" [exit {returncode}]" if returncode is not None else "")
                         + ("".join("\n  " + t for t in tail)))


def fast_downward_command() -> Optional[str]:
    """Command template for a pip-installed Fast Downward, if present."""
    try:
        import importlib.util
        spec = importlib.util.find_spec("up_fast_downward")
    except (ImportError, ValueError):
        return None
    if spec is None or not spec.submodule_search_locations:
        return None
    script = Path(list(spec.submodule_search_locations)[0]) / "downward" / "fast-downward.py"
    if not script.exists():
        return None
    return (f"{shlex.quote(sys.executable)} {shlex.quote(str(script))} "
            "--plan-file {plan-out} {domain} {problem} "
            "--search 'lazy_greedy([ff()], preferred=[ff()])'")


def default_external_command() -> Optional[str]:
    return os.environ.get("DAMLEARN_EXTERNAL_CMD") or fast_downward_command()


def _render(template: str, domain: str, problem: str, plan_out: str) -> list:
    args = []
    for tok in shlex.split(template):
        tok = (tok.replace("{domain}", domain).replace("{problem}", problem)
               .replace("{plan-out}", plan_out).replace("{plan}", plan_out))
        args.append(tok)
    return args


def run_external(domain_text: str, problem_text: str, cfg: PlannerConfig) -> str:
    """Run the external planner and return the raw plan text."""
    template = cfg.external_command or default_external_command()
    if not template:
        raise ExternalFailure("no external planner command configured")
    for ph in ("{domain}", "{problem}"):
        if ph not in template:
            raise ExternalFailure(f"command template lacks {ph}")
    if "{plan-out}" not in template and "{plan}" not in template:
        raise ExternalFailure("command template lacks {plan-out}")
    mem = cfg.memory_limit

    def limit() -> None:
        resource.setrlimit(resource.RLIMIT_AS, (mem, mem))

    with tempfile.TemporaryDirectory(prefix="damlearn-") as tmp:
        d, p, out = (os.path.join(tmp, n) for n in ("domain.pddl", "problem.pddl", "plan.txt"))
        Path(d).write_text(domain_text)
        Path(p).write_text(problem_text)
        try:
            proc = subprocess.run(_render(template, d, p, out), cwd=tmp, capture_output=True,
                                  text=True, timeout=cfg.time_limit, preexec_fn=limit)
        except subprocess.TimeoutExpired:
            raise ResourceExhausted("time", "external planner") from None
        except OSError as exc:
            raise ExternalFailure(f"cannot run external planner: {exc}") from None
        if proc.returncode in cfg.unsolvable_exit_codes:
            raise Unsolvable(f"external planner exit {proc.returncode}")
        if proc.returncode in RESOURCE_EXIT_CODES:
            raise ResourceExhausted("external", f"exit {proc.returncode}")
        if proc.returncode != 0:
            raise ExternalFailure("external planner failed", proc.returncode, proc.stderr)
        for cand in (out, out + ".1"):
            if os.path.exists(cand):
                return Path(cand).read_text()
        raise ExternalFailure("external planner produced no plan file", 0, proc.stderr)


def solve_external(domain_text: str, problem_text: str, index: ActionIndex,
                   task: GroundTask, cfg: PlannerConfig) -> Plan:
    """Solve emitted PDDL externally; decode via ``index`` and re-validate
    against ``task`` before returning."""
    text = run_external(domain_text, problem_text, cfg)
    try:
        plan = Plan(tuple(parse_plan(text, index)))
    except PDDLError as exc:
        raise ExternalFailure(f"undecodable plan: {exc}") from None
    try:
        validate_plan(task, plan.actions)
    except Violation as exc:
        raise ExternalFailure(f"external plan does not validate: {exc}") from None
    return plan


def ground_task_to_pddl(task: GroundTask) -> tuple:
    """Propositional PDDL for ``task``: fluent ``i`` becomes ``(f<i>)`` and
    operator ``j`` the 0-ary action ``o<j>``."""

    def lit(l: int) -> str:
        return f"(f{l})" if l >= 0 else f"(not (f{~l}))"

    def conj(items) -> str:
        items = list(items)
        return items[0] if len(items) == 1 else "(and " + " ".join(items) + ")"

    lines = ["(define (domain ground)",
             "  (:requirements :strips :negative-preconditions "
             ":disjunctive-preconditions :conditional-effects)",
             "  (:predicates " + " ".join(f"(f{i})" for i in range(len(task.fluents))) + ")"]
    for j, op in enumerate(task.operators):
        pre = " ".join(lit(c[0]) if len(c) == 1 else "(or " + " ".join(map(lit, c)) + ")"
                       for c in op.pre)
        effs = []
        for e in op.effects:
            body = [f"(not (f{f}))" for f in e.delete] + [f"(f{f})" for f in e.add]
            if not body:
                continue
            if e.condition:
                effs.append(f"(when {conj(map(lit, e.condition))} {conj(body)})")
            else:
                effs.extend(body)
        lines.append(f"  (:action o{j} :parameters () :precondition (and {pre}) "
                     f":effect (and {' '.join(effs)}))")
    lines.append(")")
    problem = ("(define (problem ground) (:domain ground)\n  (:init "
               + " ".join(f"(f{i})" for i in sorted(task.init))
               + ")\n  (:goal (and " + " ".join(f"(f{i})" for i in sorted(task.goal)) + ")))\n")
    return "\n".join(lines) + "\n", problem


def solve_ground_task_external(task: GroundTask, cfg: PlannerConfig) -> Plan:
    domain, problem = ground_task_to_pddl(task)
    index = ActionIndex([(f"o{j}", ()) for j in range(len(task.operators))])
    return solve_external(domain, problem, index, task, cfg)


def external_available(cfg: Optional[PlannerConfig] = None) -> bool:
    cmd = (cfg.external_command if cfg else None) or default_external_command()
    if not cmd:
        return False
    exe = shlex.split(cmd)[0]
    return bool(shutil.which(exe) or os.path.exists(exe))
