"""Command-line interface: generate, run, experiment, report.

Exit codes: 0 success, 1 usage error, 2 validation error, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import secrets
import sys
from pathlib import Path

import numpy as np

from .algorithms import Algorithm, SolverConfig, solve
from .harness import (ABLATION_ALGORITHMS, DEFAULT_ALGORITHMS, ReportFormat, Scale, SweepVar,
                      emit_report, load_report, preset, report_to_json, run_experiment)
from .instance import (CapacityMode, GeneratorParams, InstanceError, JobMode, Model, ProfessionMode,
                       generate_instance, load_instance, serialize_instance)
from .objective import Evaluator
from .solution import format_pairs

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _csv_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _choices(enum_cls):
    return [m.value for m in enum_cls]


def _add_solver_flags(p):
    p.add_argument("--budget", type=_positive, help="objective evaluations (default 100*V^2*L)")
    p.add_argument("--samples", type=_positive, default=1000, help="Monte-Carlo samples per evaluation")
    p.add_argument("--p-m", type=float, default=0.5, help="bit-wise mutation probability (GSEMO-SR)")
    p.add_argument("--crossover-prob", type=float, default=0.9)
    p.add_argument("--mutation-prob", type=float, default=1.0)
    p.add_argument("--population-size", type=_positive)
    p.add_argument("--neighborhood-size", type=_positive, default=20)
    p.add_argument("--offspring-cap-factor", type=_positive, default=20)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="resettle", description="Migrant resettlement under matroid constraints.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a synthetic instance file")
    g.add_argument("--model", required=True, choices=_choices(Model))
    g.add_argument("--migrants", type=_positive, required=True)
    g.add_argument("--localities", type=_positive, required=True)
    g.add_argument("--jobs", type=_positive, required=True)
    g.add_argument("--professions", type=_positive, required=True)
    g.add_argument("--profession-mode", choices=_choices(ProfessionMode),
                   default=ProfessionMode.EVEN_SPLIT.value)
    g.add_argument("--job-mode", choices=_choices(JobMode), default=JobMode.EQUAL_PER_LOCALITY.value)
    g.add_argument("--capacity-mode", choices=_choices(CapacityMode),
                   default=CapacityMode.EQUAL_TO_JOBS.value)
    g.add_argument("--jobs-per-profession", type=_csv_ints)
    g.add_argument("--jobs-per-locality", type=_positive, default=10)
    g.add_argument("--fixed-capacity", type=int, default=10)
    g.add_argument("--seed", type=int)
    g.add_argument("--out", required=True, help="output path, '-' for stdout")

    r = sub.add_parser("run", help="solve one instance with one algorithm")
    r.add_argument("--instance", required=True)
    r.add_argument("--algorithm", required=True, choices=_choices(Algorithm))
    r.add_argument("--seed", type=int)
    r.add_argument("--rescore-samples", type=_positive, default=10_000)
    _add_solver_flags(r)

    e = sub.add_parser("experiment", help="run a parameter sweep and write report files")
    e.add_argument("--sweep", required=True, choices=_choices(SweepVar))
    e.add_argument("--model", required=True, choices=_choices(Model))
    e.add_argument("--scale", choices=_choices(Scale), default=Scale.DESK.value)
    e.add_argument("--values", type=_csv_ints, help="override the preset sweep values")
    e.add_argument("--replicates", type=_positive)
    e.add_argument("--algorithms", default="default",
                   help="comma-separated names, 'default' (full comparison) or 'ablation'")
    e.add_argument("--seed", type=int)
    e.add_argument("--threads", type=_positive, default=1)
    e.add_argument("--rescore-samples", type=_positive)
    e.add_argument("--budget-factor", type=_positive)
    e.add_argument("--wall-time", action="store_true", help="record wall time (breaks byte-identity)")
    e.add_argument("--formats", default="csv,markdown,plotdata")
    e.add_argument("--out", required=True, help="output directory")
    _add_solver_flags(e)
    e.set_defaults(samples=None)

    rep = sub.add_parser("report", help="render a stored report in another format")
    rep.add_argument("--report", required=True)
    rep.add_argument("--format", required=True, choices=_choices(ReportFormat))
    rep.add_argument("--out", default="-")
    return parser


def _seed(args) -> int:
    if args.seed is None:
        args.seed = secrets.randbits(63)
        print(f"seed: {args.seed}", file=sys.stderr)
    return args.seed


def _write(path: str, data: bytes):
    if path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(path).write_bytes(data)


def _solver_config(args, algorithm: Algorithm, budget: int, seed: int) -> SolverConfig:
    return SolverConfig(algorithm, budget, seed=seed, p_m=args.p_m,
                        crossover_prob=args.crossover_prob, mutation_prob=args.mutation_prob,
                        population_size=args.population_size,
                        neighborhood_size=args.neighborhood_size,
                        offspring_cap_factor=args.offspring_cap_factor)


def cmd_generate(args) -> int:
    params = GeneratorParams(
        Model(args.model), args.migrants, args.localities, args.jobs, args.professions,
        profession_mode=ProfessionMode(args.profession_mode), job_mode=JobMode(args.job_mode),
        capacity_mode=CapacityMode(args.capacity_mode), jobs_per_profession=args.jobs_per_profession,
        jobs_per_locality=args.jobs_per_locality, fixed_capacity=args.fixed_capacity,
        seed=_seed(args))
    _write(args.out, serialize_instance(generate_instance(params)))
    return EXIT_OK


def cmd_run(args) -> int:
    instance = load_instance(args.instance)
    seed = _seed(args)
    budget = args.budget or 100 * instance.n_migrants ** 2 * instance.n_localities
    config = _solver_config(args, Algorithm(args.algorithm), budget, seed)
    seeds = np.random.SeedSequence(seed).spawn(2)
    evaluator = Evaluator(instance, samples=args.samples, seed=seeds[0])
    result = solve(instance, evaluator, config)
    f = Evaluator(instance, samples=args.rescore_samples, seed=seeds[1]).estimate(result.best)
    print(f"algorithm: {config.algorithm.label}")
    print(f"f: {f!r}")
    print(f"f_hat_in_run: {result.best_f1_in_run!r}")
    print(f"evaluations: {result.evaluations_used}")
    print(f"assignment: {format_pairs(instance, result.best)}")
    return EXIT_OK


def _algorithms(text: str) -> tuple[Algorithm, ...]:
    if text == "default":
        return DEFAULT_ALGORITHMS
    if text == "ablation":
        return ABLATION_ALGORITHMS
    try:
        return tuple(Algorithm(x.strip()) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise UsageError(f"unknown algorithm in --algorithms: {exc}")


def cmd_experiment(args) -> int:
    formats = [f.strip() for f in args.formats.split(",") if f.strip()]
    bad = [f for f in formats if f not in _choices(ReportFormat)]
    if bad:
        raise UsageError(f"unknown report format(s): {', '.join(bad)}")
    algorithms = _algorithms(args.algorithms)
    overrides = dict(run_seed=_seed(args), record_wall_time=args.wall_time)
    for name, flag in (("values", args.values), ("replicates", args.replicates),
                       ("samples", args.samples), ("rescore_samples", args.rescore_samples),
                       ("budget_factor", args.budget_factor), ("budget", args.budget)):
        if flag is not None:
            overrides[name] = flag
    spec = preset(args.sweep, args.model, args.scale, **overrides)
    # budget and seed are set per cell by the harness
    configs = [_solver_config(args, a, 1, 0) for a in algorithms]
    report = run_experiment(spec, configs, threads=args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{spec.model.value}_{spec.variable.value}"
    (out / f"{stem}.json").write_bytes(report_to_json(report))
    suffix = {"csv": "csv", "markdown": "md", "plotdata": "plot.csv"}
    for f in formats:
        (out / f"{stem}.{suffix[f]}").write_bytes(emit_report(report, f))
    for rec in report.errors():
        print(f"cell failed: {rec.algorithm} value={rec.sweep_value} replicate={rec.replicate}: "
              f"{rec.error}", file=sys.stderr)
    return EXIT_RUNTIME if report.errors() else EXIT_OK


def cmd_report(args) -> int:
    report = load_report(args.report)
    _write(args.out, emit_report(report, args.format))
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "run": cmd_run, "experiment": cmd_experiment,
            "report": cmd_report}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (InstanceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
