"""Desk-scale results table for the three generator domains.

    python3 scripts/desk_table.py --out results/
"""

import argparse
import json
from pathlib import Path

from run_experiment import ExperimentConfig, run

CONFIGS = [
    ExperimentConfig("visitall", size=3, n_train=2, max_k=2, max_r=2),
    ExperimentConfig("blocksworld", size=2, n_train=3, observability="split", val_size=3,
                     max_k=4, max_r=2, time_budget=300),
    ExperimentConfig("hanoi", size=2, n_train=3, observability="split", val_size=3,
                     max_k=2, max_r=3, time_budget=300),
]


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, help="directory for per-domain JSON results")
    args = p.parse_args()
    rows = []
    for cfg in CONFIGS:
        res = run(cfg)
        if args.out:
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / f"{cfg.domain}.json").write_text(json.dumps(res, indent=1) + "\n")
        rows.append((cfg.domain, res.get("cost_float"), res.get("k"), res.get("r"),
                     res.get("total_time"), res.get("coverage", "-")))
    print(f"{'domain':<12} {'cost':>7} {'k':>2} {'r':>2} {'time(s)':>8}  coverage")
    for d, c, k, r, t, cov in rows:
        cost = "-" if c is None else f"{c:.2f}"
        secs = "-" if t is None else f"{t:.1f}"
        print(f"{d:<12} {cost:>7} {k or '-':>2} {r if r is not None else '-':>2} {secs:>8}  {cov}")


if __name__ == "__main__":
    main()
