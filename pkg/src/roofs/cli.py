"""Command line entry points: gen, run, summarize, check-theory."""

import argparse
import sys
from pathlib import Path

from .datagen import GenConfig, make_instance
from .harness import (
    RESULTS_NAME,
    check_theory_run,
    load_config,
    run_experiment,
    summarize,
)
from .streamio import write_stream


def _common(parser):
    parser.add_argument("--config", type=Path, help="flat key = value config file")
    parser.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override base seed")
    parser.add_argument("--threads", type=int, default=1, help="parallel worker processes")


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="roofs",
        description="robust sparse regression with streaming feature batches",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("gen", "generate a dataset and write its batch stream"),
        ("run", "run an experiment grid and write results.csv"),
        ("summarize", "aggregate results.csv into summary tables"),
        ("check-theory", "re-run theory checks on a stored run"),
    ]:
        sp = sub.add_parser(name, help=help_)
        _common(sp)
        if name == "summarize":
            sp.add_argument("--results", type=Path, default=None,
                            help="results.csv (defaults to <out>/results.csv)")
        if name == "check-theory":
            sp.add_argument("--trials", type=int, default=20,
                            help="sampled blocks for the strong-convexity estimate")
    args = parser.parse_args(argv)

    if args.command == "gen":
        spec = load_config(args.config) if args.config else None
        seed = args.seed if args.seed is not None else (spec.seeds[0] if spec else 0)
        if spec is None:
            cfg = GenConfig(p=2000, n=1000, mu=400, corruption_ratio=0.1, sigma=0.1, seed=seed)
            batch_size = 100
        else:
            cell = spec.cells()[0]
            cfg = GenConfig(
                p=cell["p"], n=cell["n"], mu=cell["mu"],
                corruption_ratio=cell["corruption_ratio"], sigma=cell["sigma"],
                corruption_scale=spec.corruption_scale, seed=seed,
            )
            batch_size = cell["batch_size"]
        design, y, truth = make_instance(cfg)
        manifest = write_stream(design, y, truth, batch_size, args.out)
        print(f"wrote {len(manifest.batch_files)} batch files "
              f"(p={manifest.p}, n={manifest.n}) to {args.out}")
        return 0

    if args.command == "run":
        if args.config is None:
            parser.error("run requires --config")
        spec = load_config(args.config)
        if args.seed is not None:
            from dataclasses import replace
            spec = replace(spec, seeds=tuple(args.seed + i for i in range(len(spec.seeds))))
        ok, failed = run_experiment(spec, args.out, threads=args.threads)
        print(f"{ok} result rows written to {args.out / RESULTS_NAME}"
              + (f"; {failed} job(s) FAILED (see errors.log)" if failed else ""))
        return 1 if failed else 0

    if args.command == "summarize":
        results = args.results if args.results is not None else args.out
        summary, long_form = summarize(results, args.out)
        print(f"wrote {summary} and {long_form}")
        return 0

    if args.command == "check-theory":
        report = check_theory_run(args.out, trials=args.trials)
        print(f"wrote {report}")
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
