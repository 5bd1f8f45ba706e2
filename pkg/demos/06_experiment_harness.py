#!/usr/bin/env python3
# Reproducible experiment grids through the harness.
#
# A flat key = value config describes a grid; repeated keys become grid
# axes. Every (cell, seed, solver) run appends one fully-echoed row to
# results.csv, so any row can be regenerated from the row alone. The
# same flow is available from the shell:
#
#   roofs run --config exp.cfg --out results --threads 2
#   roofs summarize --out results
#   roofs check-theory --out results

from pathlib import Path

import pandas as pd

from roofs.harness import check_theory_run, parse_config, run_experiment, summarize

CONFIG = """
p = 300
n = 250
mu_ratio = 0.2
sigma = 0.1
batch_size = 100
corruption_ratio = 0.1
corruption_ratio = 0.3
solver = roofs
solver = ols
seed = 0
seed = 1
seed = 2
theory_checks = true
theory_trials = 8
"""

out = Path("demo_results")
spec = parse_config(CONFIG)
print(f"grid: {len(spec.cells())} cells x {len(spec.seeds)} seeds x {len(spec.solvers)} solvers")

rows, failed = run_experiment(spec, out, threads=2)
print(f"{rows} rows written, {failed} failures")

frame = pd.read_csv(out / "results.csv")
cols = ["corruption_ratio", "solver", "seed", "l2_error", "f1_uncorrupted", "converged_final"]
print(frame[cols].to_string(index=False))

summary_path, long_path = summarize(out)
print(f"\nsummary tables: {summary_path}, {long_path}")

report = check_theory_run(out, trials=8)
print(f"theory re-check written to {report}")
print(pd.read_csv(report)[["seed", "set_bound_ok", "error_bound_ok", "error_bound_slack"]]
      .to_string(index=False))
