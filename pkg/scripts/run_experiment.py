"""Learn a domain from generated traces and measure held-out coverage.

    python3 scripts/run_experiment.py visitall --size 3 --n-train 2
"""

import argparse
import dataclasses
import json
import logging
import sys
import typing
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from damlearn.induction import export
from damlearn.pddl import parse_domain
from damlearn.planner import PlannerConfig
from damlearn.task import LearningTask, split_traces
from damlearn.udam import UdamConfig, Unlearnable, udam_search
from damlearn.validation import (coverage, generate_instances, generate_traces,
                                 reference_domain, split_seeds)


@dataclass
class ExperimentConfig:
    domain: str = "visitall"
    size: int = 3
    n_train: int = 2
    n_val: int = 10
    seed: int = 0
    # "endpoints" or "split": splits of full-state traces
    observability: str = "endpoints"
    # validation instances may be larger than training ones
    val_size: Optional[int] = None
    max_k: Optional[int] = 2
    max_r: Optional[int] = 2
    strategy: str = "exhaust"
    time_budget: Optional[float] = 600.0
    node_time_limit: float = 120.0
    jobs: int = 1


def run(cfg: ExperimentConfig) -> dict:
    ref = reference_domain(cfg.domain)
    train_seeds, val_seeds = split_seeds(cfg.seed, cfg.n_train, cfg.n_val)
    train = generate_instances(cfg.domain, cfg.size, train_seeds)
    if cfg.observability == "split":
        traces = [s for t in generate_traces(ref, train, "full-states") for s in split_traces(t)]
    else:
        traces = generate_traces(ref, train, "endpoints")
    task = LearningTask.from_domain(ref, traces)
    ucfg = UdamConfig(planner=PlannerConfig(time_limit=cfg.node_time_limit),
                      strategy=cfg.strategy, max_k=cfg.max_k, max_r=cfg.max_r,
                      time_budget=cfg.time_budget, jobs=cfg.jobs)
    out = {"config": dataclasses.asdict(cfg), "traces": len(traces)}
    try:
        res = udam_search(task, ucfg)
    except Unlearnable as exc:
        out.update(learned=False, ledger=exc.ledger.to_json())
        return out
    text, _ = export(res.task, res.induction, name=f"{cfg.domain}-learned")
    val = generate_instances(cfg.domain, cfg.val_size or cfg.size, val_seeds)
    cov = coverage(parse_domain(text), val, PlannerConfig(time_limit=cfg.node_time_limit))
    out.update(learned=True, cost=str(res.cost), cost_float=float(res.cost),
               k=res.ledger.best.node.k, r=res.ledger.best.node.r,
               total_time=res.ledger.total_time,
               first_solution_time=res.ledger.first_solution_time,
               nodes=len(res.ledger.log), stopped=res.ledger.stopped,
               coverage=f"{cov.solved}/{cov.total}", model=text)
    return out


def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("domain", choices=["visitall", "blocksworld", "hanoi"])
    hints = typing.get_type_hints(ExperimentConfig)
    for f in dataclasses.fields(ExperimentConfig):
        if f.name == "domain":
            continue
        # Optional[X] -> X
        kind = next((a for a in typing.get_args(hints[f.name]) if a is not type(None)),
                    hints[f.name])
        p.add_argument("--" + f.name.replace("_", "-"), type=kind, default=f.default)
    p.add_argument("--out", help="write the JSON result here")
    return p


def main(argv=None) -> int:
    args = vars(parser().parse_args(argv))
    out_path = args.pop("out")
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    result = run(ExperimentConfig(**args))
    text = json.dumps(result, indent=1)
    if out_path:
        Path(out_path).write_text(text + "\n")
    print(text if not out_path else json.dumps({k: v for k, v in result.items() if k != "model"}))
    return 0 if result["learned"] else 1


if __name__ == "__main__":
    sys.exit(main())
