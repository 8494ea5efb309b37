from typing import Dict, List

from pytest import fixture, hookimpl

from damlearn.compiler import CompiledProblem, compile_task
from damlearn.data import read_text
from damlearn.pddl import DomainAst, ProblemAst, parse_domain, parse_problem
from damlearn.task import ActionSchema, LearningTask, Trace


@fixture(scope="session")
def visitall_domain() -> DomainAst:
    return parse_domain(read_text("visitall.pddl"))


@fixture(scope="session")
def visitall_problem(visitall_domain: DomainAst) -> ProblemAst:
    return parse_problem(read_text("visitall-2.pddl"), visitall_domain)


@fixture(scope="session")
def visitall_trace(visitall_problem: ProblemAst) -> Trace:
    return Trace.from_problem(visitall_problem)


@fixture(scope="session")
def visitall_task(visitall_domain: DomainAst, visitall_trace: Trace) -> LearningTask:
    return LearningTask.from_domain(visitall_domain, [visitall_trace], k=1, r=2)


@fixture(scope="session")
def visitall_cp(visitall_task: LearningTask) -> CompiledProblem:
    return compile_task(visitall_task)


@fixture(scope="session")
def move_schema(visitall_domain: DomainAst) -> ActionSchema:
    return ActionSchema.from_action(visitall_domain.action("move"))


@fixture(scope="session")
def bundled_names() -> List[str]:
    from damlearn.data import names
    return names()


ACCEPTANCE: Dict[int, tuple] = {}


@fixture()
def criterion(request) -> Dict[str, str]:
    """Per-criterion detail dict, printed in the terminal summary."""
    marker = request.node.get_closest_marker("criterion")
    detail: Dict[str, str] = {}
    ACCEPTANCE[marker.args[0]] = (request.node, detail)
    return detail


@hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        item.acceptance_outcome = rep.outcome


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        node, detail = ACCEPTANCE[n]
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(
            getattr(node, "acceptance_outcome", ""), "FAIL")
        text = "; ".join(f"{k}={v}" for k, v in detail.items())
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {text}")
