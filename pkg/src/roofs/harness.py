"""Experiment grids: flat-text configs, seeded runs, CSV results, summaries.

Config grammar (one ``key = value`` pair per line, ``#`` starts a
comment, repeating a key turns its values into a list):

    p = 2000
    n = 1000
    mu_ratio = 0.2          # or an absolute  mu = 400
    corruption_ratio = 0.1
    corruption_ratio = 0.2  # repeated keys form a grid axis
    sigma = 0.1
    batch_size = 100
    tau_mode = adaptive     # adaptive | fixed (fixed uses the true ratio)
    solver = roofs          # roofs | ols | oracle | fixed:<gamma>
    solver = ols
    seed = 0
    seed = 1
    repetitions = 1         # expands a single seed into seed..seed+k-1
    passes = 1              # deliveries of the feature pool per solve
    epsilon = 1e-6
    max_inner_iters = 500
    mid_batch_iters = 20    # iteration budget per intermediate batch
    theory_checks = false
    theory_trials = 20

Grid axes are p, n, mu_ratio/mu, corruption_ratio, sigma and batch_size;
every cell runs once per seed and once per solver. Results append one
CSV row per (cell, seed, solver) with the full configuration echoed.
"""

import itertools
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .baselines import fixed_ratio_thresholding, oracle_ols
from .core import FeatureStore, SampleIndexSet, SparseCoefficients, round_half_up
from .datagen import PRNG_IDENTITY, GenConfig, make_instance
from .metrics import score_run
from .solver import SolveResult, SolverConfig, solve
from .theory import evaluate_run

__all__ = ["ExperimentSpec", "parse_config", "load_config", "run_experiment",
           "summarize", "check_theory_run", "RESULTS_NAME", "METADATA_NAME"]

RESULTS_NAME = "results.csv"
METADATA_NAME = "metadata.txt"
SUMMARY_NAME = "summary.csv"
LONG_NAME = "summary_long.csv"
THEORY_NAME = "theory_report.csv"
SOLUTIONS_DIR = "solutions"

RESULT_COLUMNS = [
    "cell", "p", "n", "mu", "mu_ratio", "corruption_ratio", "sigma",
    "corruption_scale", "batch_size", "passes", "tau_mode", "solver", "seed",
    "epsilon", "max_inner_iters", "mid_batch_iters",
    "l2_error", "f1_uncorrupted", "f1_features",
    "s_hat_size", "psi_hat_size", "inner_iterations", "converged_all",
    "converged_final",
    "tau_fallbacks", "wall_time_seconds",
    "monotonicity_ok", "set_bound_ok", "error_bound_ok", "set_bound_slack", "error_bound_slack",
    "convexity_phi",
]


@dataclass(frozen=True)
class ExperimentSpec:
    p: tuple = (2000,)
    n: tuple = (1000,)
    mu_ratio: tuple = (0.2,)
    mu: tuple = ()                    # absolute support sizes; overrides mu_ratio
    corruption_ratio: tuple = (0.1,)
    sigma: tuple = (0.1,)
    batch_size: tuple = (100,)
    corruption_scale: float = 5.0
    tau_mode: str = "adaptive"
    solvers: tuple = ("roofs",)
    seeds: tuple = (0,)
    passes: int = 1
    epsilon: float = 1e-6
    max_inner_iters: int = 500
    mid_batch_iters: int = 20
    theory_checks: bool = False
    theory_trials: int = 20

    def cells(self):
        """Enumerate grid cells as dicts, in deterministic order."""
        mu_axis = [("mu", m) for m in self.mu] or [("mu_ratio", r) for r in self.mu_ratio]
        axes = itertools.product(
            self.p, self.n, mu_axis, self.corruption_ratio, self.sigma, self.batch_size
        )
        out = []
        for i, (p, n, mu_kv, cr, sg, bs) in enumerate(axes):
            kind, val = mu_kv
            mu = int(val) if kind == "mu" else max(1, round_half_up(val * p))
            out.append({
                "cell": i, "p": p, "n": n, "mu": mu,
                "mu_ratio": mu / p, "corruption_ratio": cr,
                "sigma": sg, "batch_size": bs,
            })
        return out


def _to_bool(v):
    if v.lower() in ("true", "1", "yes", "on"):
        return True
    if v.lower() in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def parse_config(text):
    """Parse the flat key = value grammar into an ExperimentSpec."""
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        pairs.setdefault(key.strip(), []).append(value.strip())

    def take(key, conv, default):
        if key not in pairs:
            return default
        vals = pairs.pop(key)
        if len(vals) > 1:
            raise ValueError(f"config key {key!r} given more than once")
        return conv(vals[0])

    def take_list(key, conv, default):
        if key not in pairs:
            return default
        return tuple(conv(v) for v in pairs.pop(key))

    spec = ExperimentSpec(
        p=take_list("p", int, (2000,)),
        n=take_list("n", int, (1000,)),
        mu_ratio=take_list("mu_ratio", float, (0.2,)),
        mu=take_list("mu", int, ()),
        corruption_ratio=take_list("corruption_ratio", float, (0.1,)),
        sigma=take_list("sigma", float, (0.1,)),
        batch_size=take_list("batch_size", int, (100,)),
        corruption_scale=take("corruption_scale", float, 5.0),
        tau_mode=take("tau_mode", str, "adaptive"),
        solvers=take_list("solver", str, ("roofs",)),
        seeds=take_list("seed", int, (0,)),
        passes=take("passes", int, 1),
        epsilon=take("epsilon", float, 1e-6),
        max_inner_iters=take("max_inner_iters", int, 500),
        mid_batch_iters=take("mid_batch_iters", int, 20),
        theory_checks=take("theory_checks", _to_bool, False),
        theory_trials=take("theory_trials", int, 20),
    )
    reps = take("repetitions", int, 1)
    pairs.pop("out", None)  # allowed in files, handled by the CLI
    pairs.pop("threads", None)
    if pairs:
        raise ValueError(f"unknown config keys: {sorted(pairs)}")
    if reps > 1:
        if len(spec.seeds) != 1:
            raise ValueError("repetitions > 1 requires a single base seed")
        spec = replace(spec, seeds=tuple(spec.seeds[0] + i for i in range(reps)))
    for s in spec.solvers:
        _parse_solver(s)
    return spec


def load_config(path):
    return parse_config(Path(path).read_text())


def _parse_solver(tag):
    if tag in ("roofs", "ols", "oracle"):
        return tag, None
    if tag.startswith("fixed:"):
        gamma = float(tag.split(":", 1)[1])
        if not 0.5 < gamma <= 1.0:
            raise ValueError(f"fixed-ratio solver gamma must be in (0.5, 1], got {gamma}")
        return "fixed", gamma
    raise ValueError(f"unknown solver {tag!r}")


def _full_store(design):
    store = FeatureStore(design.n)
    for fid in range(design.p):
        store.add(fid, design.row(fid))
    return store


def _result_from_beta(beta, s_hat, psi_hat, wall):
    return SolveResult(
        beta_hat=beta, s_hat=s_hat, psi_hat=psi_hat, objective_trace=[],
        inner_iterations_total=0, converged_per_batch=[True], wall_time=wall,
        last_eta=0.0, tau_fallback_count=0,
    )


def _run_one_solver(tag, design, y, truth, cell, spec):
    """Run one solver on one instance; returns (SolveResult, is_iterative)."""
    kind, gamma_param = _parse_solver(tag)
    n = design.n
    if kind == "roofs":
        cfg = SolverConfig(
            mu=cell["mu"],
            epsilon=spec.epsilon,
            tau_mode=spec.tau_mode,
            gamma=(1.0 - cell["corruption_ratio"]) if spec.tau_mode == "fixed" else None,
            max_inner_iters=spec.max_inner_iters,
            mid_batch_iters=spec.mid_batch_iters,
        )
        batches = design.iter_batches(cell["batch_size"], passes=spec.passes)
        return solve(batches, y, cfg), True
    store = _full_store(design)
    if kind in ("fixed", "ols"):
        res = fixed_ratio_thresholding(
            store, y, cell["mu"], gamma_param if kind == "fixed" else 1.0,
            eps=spec.epsilon, max_iters=spec.max_inner_iters,
        )
        return res, True
    # oracle
    t0 = time.perf_counter()
    beta = oracle_ols(store, y, truth)
    return _result_from_beta(
        beta, truth.s_star, truth.psi_star, time.perf_counter() - t0
    ), False


def _job(cell, seed, spec):
    """Worker: one grid cell x seed, all solvers. Returns (rows, solutions)."""
    gen = GenConfig(
        p=cell["p"], n=cell["n"], mu=cell["mu"],
        corruption_ratio=cell["corruption_ratio"], sigma=cell["sigma"],
        corruption_scale=spec.corruption_scale, seed=seed,
    )
    design, y, truth = make_instance(gen)
    rows, solutions = [], {}
    for tag in spec.solvers:
        t0 = time.perf_counter()
        result, iterative = _run_one_solver(tag, design, y, truth, cell, spec)
        wall = time.perf_counter() - t0
        m = score_run(result, truth, wall)
        row = {
            **cell,
            "corruption_scale": spec.corruption_scale,
            "passes": spec.passes,
            "tau_mode": spec.tau_mode if tag == "roofs" else "fixed",
            "solver": tag, "seed": seed,
            "epsilon": spec.epsilon,
            "max_inner_iters": spec.max_inner_iters,
            "mid_batch_iters": spec.mid_batch_iters,
            "l2_error": m.l2_error,
            "f1_uncorrupted": m.f1_uncorrupted,
            "f1_features": m.f1_features,
            "s_hat_size": len(result.s_hat),
            "psi_hat_size": len(result.psi_hat),
            "inner_iterations": result.inner_iterations_total,
            "converged_all": all(result.converged_per_batch),
            "converged_final": bool(result.converged_per_batch[-1]) if result.converged_per_batch else False,
            "tau_fallbacks": result.tau_fallback_count,
            "wall_time_seconds": m.wall_time_seconds,
            "monotonicity_ok": "", "set_bound_ok": "", "error_bound_ok": "",
            "set_bound_slack": "", "error_bound_slack": "", "convexity_phi": "",
        }
        if spec.theory_checks and iterative and truth.gamma > 0.5:
            store = _store_for_result(design)
            report = evaluate_run(
                result, truth, store, y,
                eta=result.last_eta if result.last_eta > 0 else 1.0,
                trials=spec.theory_trials, seed=seed,
            )
            row.update({
                "monotonicity_ok": report.monotonicity_holds,
                "set_bound_ok": report.set_bound_holds,
                "error_bound_ok": report.error_bound_holds,
                "set_bound_slack": report.set_bound_slack,
                "error_bound_slack": report.error_bound_slack,
                "convexity_phi": report.phi_mu_hat,
            })
        rows.append(row)
        if iterative:
            solutions[_solution_name(cell["cell"], seed, tag)] = _solution_text(result)
    return rows, solutions


def _store_for_result(design):
    """Full design store for the theory checks (needs arbitrary subsets)."""
    store = FeatureStore(design.n)
    for fid in range(design.p):
        store.add(fid, design.row(fid))
    return store


def _solution_name(cell, seed, tag):
    return f"cell{cell:03d}_seed{seed}_{tag.replace(':', '_')}.txt"


def _solution_text(result):
    lines = ["[beta]"]
    for fid in result.psi_hat.ids:
        lines.append(f"{int(fid)},{result.beta_hat.get(int(fid))!r}")
    lines.append("[s_hat]")
    lines.extend(str(int(i)) for i in result.s_hat.indices)
    lines.append("[meta]")
    lines.append(f"last_eta = {result.last_eta!r}")
    lines.append(f"converged_all = {all(result.converged_per_batch)}")
    return "\n".join(lines) + "\n"


def _job_star(args):
    cell, seed, spec = args
    try:
        return cell["cell"], seed, _job(cell, seed, spec), None
    except Exception:
        return cell["cell"], seed, None, traceback.format_exc()


def run_experiment(spec, out_dir, threads=1):
    """Execute the grid; write results.csv, metadata.txt and solutions/.

    Per-job failures are recorded and skipped. Returns (ok, failed) job
    counts; callers exit nonzero when failed > 0.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / SOLUTIONS_DIR).mkdir(exist_ok=True)

    jobs = [(cell, seed, spec) for cell in spec.cells() for seed in spec.seeds]
    results = {}
    errors = []
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for cell_i, seed, payload, err in pool.map(_job_star, jobs):
                if err is None:
                    results[(cell_i, seed)] = payload
                else:
                    errors.append((cell_i, seed, err))
    else:
        for args in jobs:
            cell_i, seed, payload, err = _job_star(args)
            if err is None:
                results[(cell_i, seed)] = payload
            else:
                errors.append((cell_i, seed, err))

    rows = []
    for cell in spec.cells():
        for seed in spec.seeds:
            payload = results.get((cell["cell"], seed))
            if payload is None:
                continue
            job_rows, solutions = payload
            rows.extend(job_rows)
            for name, text in solutions.items():
                (out / SOLUTIONS_DIR / name).write_text(text)

    frame = pd.DataFrame(rows, columns=RESULT_COLUMNS)
    frame.to_csv(out / RESULTS_NAME, index=False)
    _write_metadata(spec, out)
    if errors:
        with open(out / "errors.log", "w") as fh:
            for cell_i, seed, err in errors:
                fh.write(f"== cell {cell_i} seed {seed} ==\n{err}\n")
    return len(rows), len(errors)


def _write_metadata(spec, out):
    with open(Path(out) / METADATA_NAME, "w") as fh:
        fh.write(f"artifact_version = {__version__}\n")
        fh.write(f"prng = {PRNG_IDENTITY}\n")
        fh.write(f"sigma_default = 0.1\n")
        fh.write(f"epsilon = {spec.epsilon!r}\n")
        fh.write(f"max_inner_iters = {spec.max_inner_iters}\n")
        fh.write(f"mid_batch_iters = {spec.mid_batch_iters}\n")
        fh.write(f"corruption_scale = {spec.corruption_scale!r}\n")
        fh.write(f"passes = {spec.passes}\n")
        fh.write(f"tau_mode = {spec.tau_mode}\n")
        fh.write(f"theory_trials = {spec.theory_trials}\n")


def summarize(results_path, out_dir=None):
    """Aggregate results into a Table-2/3-shaped grid plus a long format.

    The summary pivots mean/std of each metric by solver (rows) against
    corruption ratio (columns) within every (p, n, mu_ratio, sigma)
    block; the long file carries one (config, solver, metric) mean/std
    per row for external plotting.
    """
    results_path = Path(results_path)
    if results_path.is_dir():
        results_path = results_path / RESULTS_NAME
    out = Path(out_dir) if out_dir is not None else results_path.parent
    out.mkdir(parents=True, exist_ok=True)

    try:
        frame = pd.read_csv(results_path)
    except pd.errors.EmptyDataError:
        frame = pd.DataFrame()
    if frame.empty:
        import warnings

        warnings.warn(f"no result rows in {results_path}; writing empty summaries",
                      stacklevel=2)
        pd.DataFrame().to_csv(out / SUMMARY_NAME, index=False)
        pd.DataFrame().to_csv(out / LONG_NAME, index=False)
        return out / SUMMARY_NAME, out / LONG_NAME

    metrics = ["l2_error", "f1_uncorrupted", "f1_features", "wall_time_seconds"]
    block_keys = ["p", "n", "mu_ratio", "sigma"]
    blocks = []
    for keys, grp in frame.groupby(block_keys):
        pivot = grp.pivot_table(
            index="solver", columns="corruption_ratio", values=metrics,
            aggfunc=["mean", "std"],
        )
        pivot.columns = [f"{metric}_{stat}_cr{ratio:g}" for stat, metric, ratio in pivot.columns]
        pivot = pivot.reset_index()
        for key, val in zip(block_keys, keys):
            pivot.insert(0, key, val)
        blocks.append(pivot)
    summary = pd.concat(blocks, ignore_index=True)
    summary.to_csv(out / SUMMARY_NAME, index=False)

    long = (
        frame.groupby(["p", "n", "mu_ratio", "sigma", "batch_size",
                       "corruption_ratio", "solver"])[metrics]
        .agg(["mean", "std", "count"])
        .reset_index()
    )
    long.columns = ["_".join(str(c) for c in col if str(c) != "") if isinstance(col, tuple) else str(col)
                    for col in long.columns]
    long.to_csv(out / LONG_NAME, index=False)
    return out / SUMMARY_NAME, out / LONG_NAME


def _load_solution(path, n):
    beta, s_hat, meta = {}, [], {}
    section = None
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("["):
            section = line.strip("[]")
            continue
        if section == "beta":
            fid, _, w = line.partition(",")
            beta[int(fid)] = float(w)
        elif section == "s_hat":
            s_hat.append(int(line))
        elif section == "meta":
            k, _, v = line.partition("=")
            meta[k.strip()] = v.strip()
    coeffs = SparseCoefficients(beta)
    psi = coeffs.support()
    return _result_from_beta(
        coeffs, SampleIndexSet(np.asarray(s_hat, dtype=np.int64), n), psi, 0.0
    ), float(meta.get("last_eta", "1.0"))


def check_theory_run(out_dir, trials=20):
    """Re-run the theory checks against stored solutions of a prior run.

    Instances are regenerated from the configuration echoed in
    results.csv (generation is deterministic given the seed), solutions
    are loaded from the solutions directory, and one row per checked run
    is written to theory_report.csv.
    """
    out = Path(out_dir)
    frame = pd.read_csv(out / RESULTS_NAME)
    rows = []
    for _, row in frame.iterrows():
        if row["solver"] == "oracle" or row["solver"] == "ols":
            continue
        gamma = 1.0 - float(row["corruption_ratio"])
        if gamma <= 0.5:
            continue
        sol_path = out / SOLUTIONS_DIR / _solution_name(
            int(row["cell"]), int(row["seed"]), str(row["solver"])
        )
        if not sol_path.exists():
            continue
        gen = GenConfig(
            p=int(row["p"]), n=int(row["n"]), mu=int(row["mu"]),
            corruption_ratio=float(row["corruption_ratio"]),
            sigma=float(row["sigma"]),
            corruption_scale=float(row["corruption_scale"]),
            seed=int(row["seed"]),
        )
        design, y, truth = make_instance(gen)
        result, eta = _load_solution(sol_path, design.n)
        store = _store_for_result(design)
        report = evaluate_run(result, truth, store, y,
                              eta=eta if eta > 0 else 1.0, trials=trials,
                              seed=int(row["seed"]))
        rows.append({
            "cell": int(row["cell"]), "seed": int(row["seed"]),
            "solver": row["solver"], "gamma": report.gamma, "lambda": report.lam,
            "phi_mu_hat": report.phi_mu_hat, "alpha_hat": report.alpha_hat,
            "monotonicity_ok": report.monotonicity_holds, "set_bound_ok": report.set_bound_holds,
            "error_bound_ok": report.error_bound_holds,
            "set_bound_slack": report.set_bound_slack,
            "error_bound_slack": report.error_bound_slack,
        })
    report_frame = pd.DataFrame(rows)
    report_frame.to_csv(out / THEORY_NAME, index=False)
    return out / THEORY_NAME
