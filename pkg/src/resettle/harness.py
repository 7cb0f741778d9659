"""Experiment sweeps: replicated instances, every solver, re-scoring and reports.

A cell is one (sweep value, algorithm, replicate).  Every cell derives its
seeds from the run seed and its own coordinates, so cells can run in any
order or in parallel and adding an algorithm never changes the others.
"""
from __future__ import annotations

import csv
import enum
import io
import json
import math
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .algorithms import Algorithm, SolverConfig, solve
from .instance import CapacityMode, GeneratorParams, JobMode, Model, ProfessionMode, generate_instance
from .objective import Evaluator
from .solution import format_pairs, is_feasible
from .stats import rank_rows, wilcoxon_signed_rank

CHECKPOINTS = (0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
SIGNIFICANCE = 0.05

DEFAULT_ALGORITHMS = (
    Algorithm.ADDITIVE, Algorithm.GREEDY, Algorithm.NSGA2_2R, Algorithm.NSGA2_100,
    Algorithm.MOEAD, Algorithm.GSEMO, Algorithm.GSEMO_SR,
)
ABLATION_ALGORITHMS = (Algorithm.GSEMO, Algorithm.GSEMO_S, Algorithm.GSEMO_R, Algorithm.GSEMO_SR)


class SweepVar(str, enum.Enum):
    MIGRANTS = "migrants"
    LOCALITIES = "localities"
    JOBS = "jobs"
    PROFESSIONS = "professions"


class Scale(str, enum.Enum):
    PAPER = "paper"
    DESK = "desk"


class ReportFormat(str, enum.Enum):
    CSV = "csv"
    MARKDOWN = "markdown"
    PLOTDATA = "plotdata"


@dataclass(frozen=True)
class SweepSpec:
    variable: SweepVar
    values: tuple[int, ...]
    model: Model
    n_migrants: int
    n_localities: int
    n_professions: int
    # None means |J| = |V|; in the jobs sweep, the other profession's job count
    n_jobs: int | None = None
    fixed_capacity: int = 10
    jobs_per_locality: int = 10
    replicates: int = 10
    run_seed: int = 0
    samples: int = 1000
    rescore_samples: int = 10_000
    budget_factor: int = 100
    budget: int | None = None
    record_wall_time: bool = False

    def __post_init__(self):
        object.__setattr__(self, "variable", SweepVar(self.variable))
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if not self.values:
            raise ValueError("sweep needs at least one value")
        if self.replicates < 1:
            raise ValueError("replicates must be positive")
        if self.samples < 1 or self.rescore_samples < 1:
            raise ValueError("sample counts must be positive")
        if self.budget is not None and self.budget < 1:
            raise ValueError("budget must be positive")
        for v in self.values:
            self.generator_params(v, 0).validate()

    def generator_params(self, value: int, replicate: int) -> GeneratorParams:
        V, L, P = self.n_migrants, self.n_localities, self.n_professions
        J = self.n_jobs if self.n_jobs is not None else V
        common = dict(model=self.model, seed=self.instance_seed(value, replicate))
        if self.variable is SweepVar.MIGRANTS:
            return GeneratorParams(n_migrants=value, n_localities=L, n_jobs=value,
                                   n_professions=P, **common)
        if self.variable is SweepVar.LOCALITIES:
            return GeneratorParams(n_migrants=V, n_localities=value, n_jobs=J, n_professions=P,
                                   job_mode=JobMode.RANDOM_AT_LEAST_ONE_PER_LOCALITY, **common)
        if self.variable is SweepVar.JOBS:
            # value = jobs of the first profession, the second keeps n_jobs
            return GeneratorParams(n_migrants=V, n_localities=L, n_jobs=value + J,
                                   n_professions=2, jobs_per_profession=(value, J),
                                   capacity_mode=CapacityMode.FIXED,
                                   fixed_capacity=self.fixed_capacity, **common)
        return GeneratorParams(n_migrants=V, n_localities=L, n_jobs=self.jobs_per_locality * L,
                               n_professions=value,
                               profession_mode=ProfessionMode.RANDOM_AT_LEAST_ONE,
                               job_mode=JobMode.FIXED_PER_LOCALITY,
                               jobs_per_locality=self.jobs_per_locality,
                               capacity_mode=CapacityMode.FIXED,
                               fixed_capacity=self.fixed_capacity, **common)

    def _seed(self, *coords: int) -> int:
        ss = np.random.SeedSequence([self.run_seed, list(SweepVar).index(self.variable), *coords])
        return int(ss.generate_state(1, np.uint64)[0])

    def instance_seed(self, value: int, replicate: int) -> int:
        return self._seed(value, replicate)

    def cell_seed(self, value: int, replicate: int, label: str, purpose: int) -> int:
        return self._seed(value, replicate, zlib.crc32(label.encode()), purpose)

    def budget_for(self, params: GeneratorParams) -> int:
        if self.budget is not None:
            return self.budget
        return self.budget_factor * params.n_migrants ** 2 * params.n_localities


_PRESETS = {
    # variable: (full-size values, fixed), (desk values, desk fixed)
    SweepVar.MIGRANTS: (
        ((100, 120, 140, 160, 180, 200), dict(n_migrants=100, n_localities=10, n_professions=2)),
        ((20, 30), dict(n_migrants=20, n_localities=5, n_professions=2)),
    ),
    SweepVar.LOCALITIES: (
        ((16, 18, 20, 22, 24, 26, 28, 30), dict(n_migrants=100, n_localities=16, n_professions=2)),
        ((3, 4, 5), dict(n_migrants=30, n_localities=5, n_professions=2)),
    ),
    SweepVar.JOBS: (
        ((10, 20, 30, 40, 60, 70, 80, 90),
         dict(n_migrants=100, n_localities=10, n_professions=2, n_jobs=50, fixed_capacity=10)),
        ((3, 6, 9, 12, 18, 21, 24, 27),
         dict(n_migrants=30, n_localities=5, n_professions=2, n_jobs=15, fixed_capacity=6)),
    ),
    SweepVar.PROFESSIONS: (
        ((5, 10, 15, 20, 25, 30),
         dict(n_migrants=100, n_localities=10, n_professions=5, fixed_capacity=10,
              jobs_per_locality=10)),
        ((3, 6, 9, 12),
         dict(n_migrants=30, n_localities=5, n_professions=3, fixed_capacity=6,
              jobs_per_locality=6)),
    ),
}


def preset(variable: SweepVar | str, model: Model | str, scale: Scale | str = Scale.DESK,
           **overrides) -> SweepSpec:
    """Sweep with the published settings (paper scale) or their workstation-sized version (desk)."""
    variable, scale = SweepVar(variable), Scale(scale)
    paper, desk = _PRESETS[variable]
    values, fixed = paper if scale is Scale.PAPER else desk
    sampling = (dict(samples=1000, rescore_samples=10_000) if scale is Scale.PAPER
                else dict(samples=100, rescore_samples=1000))
    kw = dict(variable=variable, values=values, model=Model(model), **fixed, **sampling)
    kw.update(overrides)
    return SweepSpec(**kw)


# --- running -----------------------------------------------------------------------

@dataclass
class CellRecord:
    sweep_value: int
    algorithm: str
    replicate: int
    final_f: float | None
    f_hat_in_run: float | None
    evaluations: int | None
    budget: int
    checkpoints: list[float] = field(default_factory=list)
    assignment: str = ""
    wall_ms: float | None = None
    error: str | None = None


def _checkpoint_values(trace: Sequence[tuple[int, float]], budget: int) -> list[float]:
    out = []
    k, best = 0, 0.0
    for frac in CHECKPOINTS:
        at = max(1, round(frac * budget))
        while k < len(trace) and trace[k][0] <= at:
            best = max(best, float(trace[k][1]))
            k += 1
        out.append(best)
    return out


def run_cell(spec: SweepSpec, config: SolverConfig, value: int, replicate: int) -> CellRecord:
    label = config.algorithm.label
    params = spec.generator_params(value, replicate)
    budget = spec.budget_for(params)
    record = CellRecord(value, label, replicate, None, None, None, budget)
    start = time.perf_counter()
    try:
        instance = generate_instance(params)
        cfg = replace(config, budget=budget, seed=spec.cell_seed(value, replicate, label, 0))
        evaluator = Evaluator(instance, samples=spec.samples,
                              seed=spec.cell_seed(value, replicate, label, 1))
        result = solve(instance, evaluator, cfg)
        if not is_feasible(instance, result.best):
            raise RuntimeError("solver returned an infeasible assignment")
        if result.evaluations_used > budget:
            raise RuntimeError("solver exceeded its evaluation budget")
        rescorer = Evaluator(instance, samples=spec.rescore_samples,
                             seed=spec.cell_seed(value, replicate, label, 2))
        record.final_f = rescorer.estimate(result.best)
        record.f_hat_in_run = result.best_f1_in_run
        record.evaluations = result.evaluations_used
        record.checkpoints = _checkpoint_values(result.trace, budget)
        record.assignment = format_pairs(instance, result.best)
    except Exception as exc:  # reported per cell, never dropped
        record.error = f"{type(exc).__name__}: {exc}"
    if spec.record_wall_time:
        record.wall_ms = round((time.perf_counter() - start) * 1000, 3)
    return record


def _run_cell_args(args):
    return run_cell(*args)


@dataclass
class AggregateRow:
    sweep_value: int
    algorithm: str
    n: int
    mean: float
    std: float
    wilcoxon_p: float | None
    significant: bool
    rank: float


@dataclass
class ExperimentReport:
    spec: SweepSpec
    algorithms: list[str]
    reference: str
    records: list[CellRecord]

    def cells(self, value: int, label: str) -> list[CellRecord]:
        return [r for r in self.records if r.sweep_value == value and r.algorithm == label]

    def final_values(self, value: int, label: str) -> np.ndarray:
        return np.array([np.nan if r.final_f is None else r.final_f
                         for r in sorted(self.cells(value, label), key=lambda r: r.replicate)])

    def aggregates(self) -> list[AggregateRow]:
        rows = []
        for value in self.spec.values:
            vals = {a: self.final_values(value, a) for a in self.algorithms}
            means = np.array([vals[a].mean() if vals[a].size else np.nan for a in self.algorithms])
            ranks = rank_rows(np.nan_to_num(means, nan=-np.inf)[None, :])[0]
            ref = vals.get(self.reference)
            for a, mean, rank in zip(self.algorithms, means, ranks):
                v = vals[a]
                p = None
                if (a != self.reference and ref is not None and v.size == ref.size and v.size
                        and not np.isnan(v).any() and not np.isnan(ref).any()):
                    p = wilcoxon_signed_rank(ref, v)
                sig = p is not None and p < SIGNIFICANCE and ref.mean() > mean
                std = float(v.std()) if v.size else math.nan
                rows.append(AggregateRow(value, a, int(v.size), float(mean), std, p, sig, float(rank)))
        return rows

    def average_ranks(self) -> dict[str, float]:
        rows = self.aggregates()
        return {a: float(np.mean([r.rank for r in rows if r.algorithm == a])) for a in self.algorithms}

    def errors(self) -> list[CellRecord]:
        return [r for r in self.records if r.error is not None]

    def to_dict(self) -> dict:
        spec = asdict(self.spec)
        spec["variable"] = self.spec.variable.value
        spec["model"] = self.spec.model.value
        spec["values"] = list(self.spec.values)
        return dict(spec=spec, algorithms=self.algorithms, reference=self.reference,
                    records=[asdict(r) for r in self.records])

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentReport":
        try:
            spec = SweepSpec(**doc["spec"])
            records = [CellRecord(**r) for r in doc["records"]]
            return cls(spec, list(doc["algorithms"]), doc["reference"], records)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed report: {exc}") from exc


def run_experiment(spec: SweepSpec, configs: Sequence[SolverConfig], threads: int = 1,
                   reference: Algorithm | str | None = None) -> ExperimentReport:
    """Run every config on every replicate instance of every sweep value.

    Config budgets and seeds are replaced per cell (budget from the spec,
    seeds from the cell coordinates).  ``threads`` > 1 uses worker processes.
    """
    if not configs:
        raise ValueError("need at least one solver config")
    labels = [c.algorithm.label for c in configs]
    if len(set(labels)) != len(labels):
        raise ValueError("each algorithm may appear only once per experiment")
    if reference is None:
        reference = Algorithm.GSEMO_SR if Algorithm.GSEMO_SR.label in labels else configs[0].algorithm
    ref_label = Algorithm(reference).label
    if ref_label not in labels:
        raise ValueError(f"reference {ref_label} is not among the configs")
    jobs = [(spec, c, v, k) for v in spec.values for c in configs for k in range(spec.replicates)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(_run_cell_args, jobs))
    else:
        records = [_run_cell_args(j) for j in jobs]
    return ExperimentReport(spec, labels, ref_label, records)


def save_report(report: ExperimentReport, path) -> None:
    with open(path, "wb") as fh:
        fh.write(report_to_json(report))


def report_to_json(report: ExperimentReport) -> bytes:
    return (json.dumps(report.to_dict(), indent=1, sort_keys=True) + "\n").encode()


def load_report(path) -> ExperimentReport:
    with open(path, "rb") as fh:
        return ExperimentReport.from_dict(json.loads(fh.read()))


# --- rendering -----------------------------------------------------------------------

REPLICATE_COLUMNS = ["sweep_var", "sweep_value", "model", "algorithm", "replicate", "final_f",
                     "f_hat_in_run", "evaluations", "wall_ms"]
AGGREGATE_COLUMNS = ["mean", "std", "wilcoxon_p_vs_ref", "rank"]
CSV_COLUMNS = REPLICATE_COLUMNS + AGGREGATE_COLUMNS + ["error"]
PLOT_COLUMNS = ["sweep_var", "sweep_value", "model", "algorithm", "replicate", "checkpoint",
                "evaluations", "best_f_hat"]


def _num(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x)) if isinstance(x, float) else str(x)


def _csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    spec = report.spec
    aggs = {(r.sweep_value, r.algorithm): r for r in report.aggregates()}
    for value in spec.values:
        for a in report.algorithms:
            for r in sorted(report.cells(value, a), key=lambda r: r.replicate):
                w.writerow([spec.variable.value, value, spec.model.value, a, r.replicate,
                            _num(r.final_f), _num(r.f_hat_in_run), _num(r.evaluations),
                            _num(r.wall_ms), "", "", "", "", r.error or ""])
            g = aggs[(value, a)]
            w.writerow([spec.variable.value, value, spec.model.value, a, "aggregate", "", "", "", "",
                        _num(g.mean), _num(g.std), _num(g.wilcoxon_p), _num(g.rank), ""])
    return buf.getvalue()


_SYMBOLS = {SweepVar.MIGRANTS: "|V|", SweepVar.LOCALITIES: "|L|", SweepVar.JOBS: "|J|",
            SweepVar.PROFESSIONS: "|Π|"}


def _markdown(report: ExperimentReport) -> str:
    spec = report.spec
    aggs = {(r.sweep_value, r.algorithm): r for r in report.aggregates()}
    avg = report.average_ranks() if report.algorithms else {}
    lines = [f"### {spec.model.value.capitalize()} model, varying {_SYMBOLS[spec.variable]}", "",
             "| " + " | ".join([_SYMBOLS[spec.variable], *map(str, spec.values), "Avg.R."]) + " |",
             "|" + "---|" * (len(spec.values) + 2)]
    best = {}
    for value in spec.values:
        means = [aggs[(value, a)].mean for a in report.algorithms]
        finite = [m for m in means if not math.isnan(m)]
        best[value] = max(finite) if finite else None
    for a in report.algorithms:
        cells = [a]
        for value in spec.values:
            g = aggs[(value, a)]
            if math.isnan(g.mean):
                cells.append("error")
                continue
            text = f"{g.mean:.2f}±{g.std:.2f}"
            if best[value] is not None and f"{g.mean:.2f}" == f"{best[value]:.2f}":
                text = f"**{text}**"
            if g.significant:
                text += " •"
            cells.append(text)
        cells.append(f"{avg[a]:.2f}")
        lines.append("| " + " | ".join(cells) + " |")
    lines += ["", f"• {report.reference} is significantly better "
                  f"(Wilcoxon signed-rank, p < {SIGNIFICANCE})."]
    return "\n".join(lines) + "\n"


def _plotdata(report: ExperimentReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PLOT_COLUMNS)
    spec = report.spec
    for value in spec.values:
        for a in report.algorithms:
            cells = [r for r in sorted(report.cells(value, a), key=lambda r: r.replicate)
                     if r.error is None]
            if not cells:
                continue
            budget = cells[0].budget
            evals = [max(1, round(c * budget)) for c in CHECKPOINTS]
            for r in cells:
                for c, e, f in zip(CHECKPOINTS, evals, r.checkpoints):
                    w.writerow([spec.variable.value, value, spec.model.value, a, r.replicate,
                                repr(c), e, repr(float(f))])
            mean = np.mean([r.checkpoints for r in cells], axis=0)
            for c, e, f in zip(CHECKPOINTS, evals, mean):
                w.writerow([spec.variable.value, value, spec.model.value, a, "mean",
                            repr(c), e, repr(float(f))])
    return buf.getvalue()


def emit_report(report: ExperimentReport, fmt: ReportFormat | str) -> bytes:
    fmt = ReportFormat(fmt)
    if fmt is ReportFormat.CSV:
        return _csv(report).encode()
    if fmt is ReportFormat.MARKDOWN:
        return _markdown(report).encode()
    return _plotdata(report).encode()


def empty_report(spec: SweepSpec) -> ExperimentReport:
    return ExperimentReport(spec, [], "", [])
