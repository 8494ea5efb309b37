"""Learn STRIPS action models from goal-oriented traces.

Exit status: 0 on success, 1 on domain errors (bad PDDL, unsolvable or
unlearnable tasks), 2 on usage errors.
"""

import argparse
import glob
import json
import logging
import os
import re
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__
from .compiler import CompileError, CompileOptions, compile_task
from .induction import NotASolution, export
from .pddl import PDDLError, parse_domain, parse_problem, print_plan, print_problem
from .planner import (PlannerConfig, PlanningError, ground_problem, solve,
                      solve_external)
from .planner.external import ExternalFailure
from .task import (ActionSchema, IllDefinedSchema, LearningTask,
                   NotFullyObserved, Trace, split_traces, write_traces)
from .udam import UdamConfig, Unlearnable, udam_search
from .validation import (GENERATORS, coverage, generate_instances,
                         generate_traces, reference_domain)

log = logging.getLogger("damlearn")


class UsageError(Exception):
    pass


DOMAIN_ERRORS = (PDDLError, PlanningError, CompileError, Unlearnable, NotFullyObserved,
                 IllDefinedSchema, NotASolution, ExternalFailure, ValueError, KeyError)


def parse_memory(text: str) -> int:
    m = re.fullmatch(r"(\d+(?:\.\d+)?)\s*([kmgt]?)i?b?", text.strip().lower())
    if not m:
        raise argparse.ArgumentTypeError(f"bad memory size {text!r}")
    scale = {"": 1, "k": 2 ** 10, "m": 2 ** 20, "g": 2 ** 30, "t": 2 ** 40}[m.group(2)]
    return int(float(m.group(1)) * scale)


def _positive_float(text: str) -> float:
    v = float(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _add_planner_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("planner")
    g.add_argument("--engine", default="internal",
                   choices=["internal", "internal-gbfs", "internal-bfs", "external"],
                   help="internal means greedy best-first search (default)")
    g.add_argument("--external-cmd", help="command template with {domain} {problem} {plan-out}")
    g.add_argument("--time-limit", type=_positive_float, default=300.0,
                   help="seconds per planner call (default 300)")
    g.add_argument("--mem-limit", type=parse_memory, default=4 * 2 ** 30,
                   help="memory per planner call, e.g. 4G (default)")


def planner_config(args: argparse.Namespace) -> PlannerConfig:
    engine = "internal-gbfs" if args.engine == "internal" else args.engine
    if engine == "external" and not (args.external_cmd or _default_ext()):
        raise UsageError("--engine external needs --external-cmd or DAMLEARN_EXTERNAL_CMD")
    return PlannerConfig(engine=engine, external_command=args.external_cmd,
                         time_limit=args.time_limit, memory_limit=args.mem_limit)


def _default_ext() -> Optional[str]:
    from .planner import default_external_command
    return default_external_command()


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text)


def _expand(patterns: Sequence[str], suffixes: Sequence[str] = ()) -> List[str]:
    out: List[str] = []
    for pat in patterns:
        if os.path.isdir(pat):
            out.extend(sorted(str(p) for p in Path(pat).iterdir()
                              if not suffixes or p.suffix in suffixes))
            continue
        hits = sorted(glob.glob(pat))
        if not hits:
            raise UsageError(f"no file matches {pat}")
        out.extend(hits)
    return out


def load_traces(patterns: Sequence[str]) -> List[Trace]:
    """Traces from JSON (one object or a list) or JSON Lines files."""
    traces: List[Trace] = []
    for path in _expand(patterns, (".json", ".jsonl")):
        text = _read(path)
        try:
            obj = json.loads(text)
            items = obj if isinstance(obj, list) else [obj]
        except json.JSONDecodeError:
            items = [json.loads(line) for line in text.splitlines() if line.strip()]
        traces.extend(Trace.from_json(o) for o in items)
    if not traces:
        raise UsageError("no traces given")
    return traces


def load_task(args: argparse.Namespace, k: int = 1, r: int = 0) -> LearningTask:
    domain = parse_domain(_read(args.predicates))
    traces = load_traces(args.traces)
    if getattr(args, "split", False):
        traces = [s for t in traces for s in split_traces(t)]
    seeds: List[ActionSchema] = []
    if getattr(args, "prior", None):
        prior = parse_domain(_read(args.prior))
        seeds = [ActionSchema.from_action(a) for a in prior.actions]
    return LearningTask.from_domain(domain, traces, k=k, r=r, seeds=seeds, enforce_bounds=False,
                                    distinct_vars=getattr(args, "distinct_vars", False))


def cmd_learn(args: argparse.Namespace) -> int:
    task = load_task(args)
    task = task.with_config(max(1, len(task.seeds)), max((s.arity for s in task.seeds), default=0))
    cfg = UdamConfig(planner=planner_config(args), strategy=args.strategy, max_k=args.max_k,
                     max_r=args.max_r, time_budget=args.time_budget, prune=not args.no_prune,
                     jobs=args.jobs,
                     compile=CompileOptions(symmetry_breaking=args.symmetry_breaking))
    try:
        result = udam_search(task, cfg)
    except Unlearnable as exc:
        if args.ledger:
            _write(args.ledger, exc.ledger.dumps())
        raise
    ledger = result.ledger
    best = ledger.best
    domain_text, meta = export(result.task, result.induction, name=args.name)
    meta_obj = json.loads(meta)
    meta_obj["plan"] = list(best.plan)
    _write(args.out, domain_text)
    report = {"model": args.out, "metadata": meta_obj, "ledger": ledger.to_json(),
              "summary": {"total_time": ledger.total_time,
                          "first_solution_time": ledger.first_solution_time,
                          "best_cost": str(result.cost), "best_cost_float": float(result.cost),
                          "best_k": best.node.k, "best_r": best.node.r,
                          "nodes": len(ledger.log)}}
    if args.validate:
        dom = parse_domain(domain_text)
        probs = [parse_problem(_read(p), dom) for p in _expand(args.validate, (".pddl",))]
        cov = coverage(dom, probs, planner_config(args))
        report["coverage"] = cov.to_json()
    if args.ledger:
        _write(args.ledger, ledger.dumps())
    if args.report:
        _write(args.report, json.dumps(report, indent=1) + "\n")
    s = report["summary"]
    first = "-" if s["first_solution_time"] is None else f"{s['first_solution_time']:.2f}s"
    line = (f"total time {s['total_time']:.2f}s | first solution {first} | "
            f"best cost {float(result.cost):.2f} (k={best.node.k}, r={best.node.r})")
    if "coverage" in report:
        c = report["coverage"]
        line += f" | coverage {c['solved']}/{c['total']}"
    print(line, file=sys.stderr if args.out in (None, "-") else sys.stdout)
    return 0


def cmd_compile(args: argparse.Namespace) -> int:
    task = load_task(args, args.k, args.r)
    cp = compile_task(task, CompileOptions(symmetry_breaking=args.symmetry_breaking))
    domain, problem = cp.emit_pddl()
    _write(args.domain_out, domain)
    _write(args.problem_out, problem)
    if args.backmap:
        _write(args.backmap, json.dumps(cp.backmap(), indent=1) + "\n")
    summary = (f"fluents {len(cp.ground.fluents)} | operators {cp.operator_count} "
               f"(edit {len(cp.operator_tags) - 1 - _n_apply(cp)}, ed2val 1, apply {_n_apply(cp)})")
    print(summary, file=sys.stderr)
    return 0


def _n_apply(cp) -> int:
    from .compiler import ApplyAction
    return cp.count(ApplyAction)


def cmd_solve(args: argparse.Namespace) -> int:
    cfg = planner_config(args)
    domain_text = _read(args.domain)
    problem_text = _read(args.problem)
    dom = parse_domain(domain_text)
    prob = parse_problem(problem_text, dom)
    gp = ground_problem(dom, prob)
    if cfg.engine == "external":
        plan = solve_external(domain_text, problem_text, gp.index, gp.task, cfg)
    else:
        plan = solve(gp.task, cfg)
    _write(args.plan_out, print_plan(gp.steps[i] for i in plan.actions))
    print(f"plan length {len(plan)}", file=sys.stderr)
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    dom = parse_domain(_read(args.model))
    probs = [parse_problem(_read(p), dom) for p in _expand(args.instances, (".pddl",))]
    if not probs:
        raise UsageError("no instances given")
    report = coverage(dom, probs, planner_config(args))
    if args.report:
        _write(args.report, report.dumps() + "\n")
    print(f"coverage {report.solved}/{report.total} = {report.fraction:.3f}")
    return 0


def _reference(name_or_path: str):
    if os.path.exists(name_or_path):
        return parse_domain(_read(name_or_path))
    if name_or_path in GENERATORS:
        return reference_domain(name_or_path)
    raise UsageError(f"unknown reference domain {name_or_path!r}")


def _instances(args: argparse.Namespace, dom):
    if args.instances:
        return [parse_problem(_read(p), dom) for p in _expand(args.instances, (".pddl",))]
    if not args.generator:
        raise UsageError("give --instances or --generator")
    return generate_instances(args.generator, args.size,
                              [args.seed + i for i in range(args.count)])


def cmd_trace_gen(args: argparse.Namespace) -> int:
    dom = _reference(args.domain or args.generator or "")
    probs = _instances(args, dom)
    skipped: List[str] = []
    traces = generate_traces(dom, probs, args.observability, planner_config(args), skipped)
    if skipped:
        print(f"skipped unsolvable: {' '.join(skipped)}", file=sys.stderr)
    _write(args.out, write_traces(traces))
    return 0


def cmd_gen_instances(args: argparse.Namespace) -> int:
    probs = generate_instances(args.generator, args.size,
                               [args.seed + i for i in range(args.count)])
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for p in probs:
        (out / f"{p.name}.pddl").write_text(print_problem(p))
    print(f"wrote {len(probs)} instances to {out}", file=sys.stderr)
    return 0


def cmd_split(args: argparse.Namespace) -> int:
    traces = load_traces(args.traces)
    _write(args.out, write_traces(s for t in traces for s in split_traces(t)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="damlearn", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def task_flags(p):
        p.add_argument("--traces", nargs="+", required=True, help="trace files (JSON or JSONL)")
        p.add_argument("--predicates", required=True, help="PDDL domain declaring the predicates")
        p.add_argument("--prior", help="PDDL domain whose actions seed the first slots")
        p.add_argument("--split", action="store_true", help="split full-state traces first")
        p.add_argument("--distinct-vars", action="store_true",
                       help="no repeated variable inside a partial precondition atom")
        p.add_argument("--symmetry-breaking", action="store_true")

    p = sub.add_parser("learn", help="learn action models from traces")
    task_flags(p)
    _add_planner_flags(p)
    p.add_argument("--out", default="-", help="learned PDDL domain")
    p.add_argument("--report", help="JSON report")
    p.add_argument("--ledger", help="JSON search ledger")
    p.add_argument("--name", default="learned", help="domain name of the output")
    p.add_argument("--strategy", choices=["exhaust", "first-sat"], default="exhaust")
    p.add_argument("--max-k", type=int)
    p.add_argument("--max-r", type=int)
    p.add_argument("--time-budget", type=_positive_float, help="global wall-clock seconds")
    p.add_argument("--no-prune", action="store_true", help="keep redundant edits")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--validate", nargs="+", metavar="INSTANCE",
                   help="held-out problems for a coverage check")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("compile", help="emit the compiled PDDL of one configuration")
    task_flags(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--domain-out", default="-")
    p.add_argument("--problem-out", default="-")
    p.add_argument("--backmap", help="JSON map from ids to fluents and operators")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("solve", help="solve a PDDL problem")
    p.add_argument("--domain", required=True)
    p.add_argument("--problem", required=True)
    p.add_argument("--plan-out", default="-")
    p.add_argument("--seed", type=int, default=0)
    _add_planner_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", help="coverage of a learned model")
    p.add_argument("--model", required=True)
    p.add_argument("--instances", nargs="+", required=True, help="problem files or directories")
    p.add_argument("--report")
    p.add_argument("--seed", type=int, default=0)
    _add_planner_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("trace-gen", help="traces from a reference domain")
    p.add_argument("--domain", help=f"PDDL file or one of {', '.join(GENERATORS)}")
    p.add_argument("--instances", nargs="+")
    p.add_argument("--generator", choices=GENERATORS)
    p.add_argument("--size", type=int, default=3)
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--observability", choices=["endpoints", "full-states"], default="endpoints")
    p.add_argument("--out", default="-")
    _add_planner_flags(p)
    p.set_defaults(func=cmd_trace_gen)

    p = sub.add_parser("gen-instances", help="write seeded generator instances")
    p.add_argument("--generator", choices=GENERATORS, required=True)
    p.add_argument("--size", type=int, default=3)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_gen_instances)

    p = sub.add_parser("split", help="split full-state traces into endpoint traces")
    p.add_argument("--traces", nargs="+", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_split)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"damlearn: error: {exc}", file=sys.stderr)
        return 2
    except DOMAIN_ERRORS as exc:
        print(f"damlearn: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
