import csv
import io
import math

import numpy as np
import pytest

from resettle.algorithms import Algorithm, SolverConfig
from resettle.harness import (CHECKPOINTS, ExperimentReport, ReportFormat, SweepSpec, SweepVar,
                              empty_report, emit_report, load_report, preset, report_to_json,
                              run_experiment, save_report)
from resettle.instance import Model, generate_instance


def cfg(*algs):
    return [SolverConfig(a, 1) for a in algs]


def tiny(variable="migrants", model="interview", **kw):
    base = dict(values=(6,), replicates=2, budget=150, samples=30, rescore_samples=200)
    base.update(kw)
    return preset(variable, model, "desk", **base)


def test_single_cell_report():
    spec = tiny(replicates=1)
    rep = run_experiment(spec, cfg(Algorithm.GREEDY))
    (agg,) = rep.aggregates()
    assert agg.n == 1 and agg.std == 0.0 and agg.rank == 1.0 and agg.wilcoxon_p is None
    assert rep.records[0].error is None


def test_same_seed_same_bytes():
    spec = tiny()
    configs = cfg(Algorithm.GREEDY, Algorithm.GSEMO_SR)
    a, b = run_experiment(spec, configs), run_experiment(spec, configs)
    assert report_to_json(a) == report_to_json(b)
    for fmt in ReportFormat:
        assert emit_report(a, fmt) == emit_report(b, fmt)


def test_thread_count_does_not_change_results():
    spec = tiny(model="coordination")
    configs = cfg(Algorithm.ADDITIVE, Algorithm.GSEMO_SR)
    assert report_to_json(run_experiment(spec, configs, threads=1)) == \
        report_to_json(run_experiment(spec, configs, threads=3))


def test_adding_an_algorithm_changes_nothing_else():
    spec = tiny()
    small = run_experiment(spec, cfg(Algorithm.GSEMO_SR))
    big = run_experiment(spec, cfg(Algorithm.GREEDY, Algorithm.GSEMO_SR))
    pick = lambda rep: [r for r in rep.records if r.algorithm == "MR-GSEMO-SR"]
    assert pick(small) == pick(big)


def test_replicates_use_distinct_instances():
    spec = tiny(replicates=3)
    insts = [generate_instance(spec.generator_params(6, k)) for k in range(3)]
    assert insts[0] != insts[1] and insts[1] != insts[2]
    assert generate_instance(spec.generator_params(6, 1)) == insts[1]


def test_aggregate_means_match_replicates():
    spec = tiny(values=(5, 6), replicates=3)
    rep = run_experiment(spec, cfg(Algorithm.ADDITIVE, Algorithm.GREEDY, Algorithm.GSEMO_SR))
    rows = list(csv.DictReader(io.StringIO(emit_report(rep, "csv").decode())))
    for agg in (r for r in rows if r["replicate"] == "aggregate"):
        reps = [float(r["final_f"]) for r in rows if r["replicate"] != "aggregate"
                and r["algorithm"] == agg["algorithm"] and r["sweep_value"] == agg["sweep_value"]]
        assert len(reps) == 3
        assert abs(float(agg["mean"]) - sum(reps) / 3) <= 1e-12
        assert float(agg["std"]) == pytest.approx(np.std(reps), abs=1e-12)


def test_ranks_are_permutations_and_average():
    spec = tiny(values=(5, 6), replicates=2)
    rep = run_experiment(spec, cfg(Algorithm.ADDITIVE, Algorithm.GREEDY, Algorithm.GSEMO_SR))
    aggs = rep.aggregates()
    for v in spec.values:
        ranks = sorted(a.rank for a in aggs if a.sweep_value == v)
        assert sum(ranks) == pytest.approx(6.0)
    avg = rep.average_ranks()
    for a in rep.algorithms:
        assert avg[a] == pytest.approx(np.mean([g.rank for g in aggs if g.algorithm == a]))


def test_significance_needs_p_below_threshold():
    spec = tiny(replicates=2)
    rep = run_experiment(spec, cfg(Algorithm.ADDITIVE, Algorithm.GSEMO_SR))
    # two pairs can never reach p < 0.05
    assert not any(a.significant for a in rep.aggregates())


def test_empty_report_is_header_only():
    out = emit_report(empty_report(tiny()), "csv").decode()
    assert out.strip().split(",") == [
        "sweep_var", "sweep_value", "model", "algorithm", "replicate", "final_f", "f_hat_in_run",
        "evaluations", "wall_ms", "mean", "std", "wilcoxon_p_vs_ref", "rank", "error"]
    assert out.count("\n") == 1


def test_plot_traces_are_non_decreasing():
    spec = tiny(replicates=2)
    rep = run_experiment(spec, cfg(Algorithm.GREEDY, Algorithm.GSEMO, Algorithm.GSEMO_SR))
    rows = list(csv.DictReader(io.StringIO(emit_report(rep, "plotdata").decode())))
    series = {}
    for r in rows:
        series.setdefault((r["algorithm"], r["replicate"]), []).append(
            (float(r["checkpoint"]), float(r["best_f_hat"])))
    assert len(series) == 3 * 3
    for pts in series.values():
        assert [c for c, _ in pts] == list(CHECKPOINTS)
        vals = [f for _, f in pts]
        assert vals == sorted(vals)


def test_markdown_layout():
    spec = tiny(values=(5, 6), replicates=2)
    rep = run_experiment(spec, cfg(Algorithm.GREEDY, Algorithm.GSEMO_SR))
    md = emit_report(rep, "markdown").decode()
    assert "| |V| | 5 | 6 | Avg.R. |" in md
    assert md.count("**") == 2 * 2  # one bold cell per column (unless tied)
    assert "MR-GSEMO-SR" in md


def test_save_and_reload(tmp_path):
    spec = tiny()
    rep = run_experiment(spec, cfg(Algorithm.GREEDY))
    save_report(rep, tmp_path / "r.json")
    back = load_report(tmp_path / "r.json")
    assert report_to_json(back) == report_to_json(rep)
    assert emit_report(back, "markdown") == emit_report(rep, "markdown")


def test_cell_errors_are_captured():
    spec = tiny(budget=3)  # additive needs |V|*|L| evaluations
    rep = run_experiment(spec, cfg(Algorithm.ADDITIVE, Algorithm.GREEDY))
    errs = rep.errors()
    assert len(errs) == 2 and all("BudgetExhausted" in r.error for r in errs)
    agg = {a.algorithm: a for a in rep.aggregates()}
    assert math.isnan(agg["Additive"].mean)
    assert "error" in emit_report(rep, "markdown").decode()
    assert "BudgetExhausted" in emit_report(rep, "csv").decode()


def test_wall_time_is_opt_in():
    rep = run_experiment(tiny(replicates=1), cfg(Algorithm.GREEDY))
    assert rep.records[0].wall_ms is None
    rep = run_experiment(tiny(replicates=1, record_wall_time=True), cfg(Algorithm.GREEDY))
    assert rep.records[0].wall_ms >= 0


def test_default_budget_formula():
    spec = preset("migrants", "interview", "desk")
    assert spec.budget_for(spec.generator_params(20, 0)) == 100 * 20**2 * 5
    assert spec.samples == 100 and spec.rescore_samples == 1000
    paper = preset("migrants", "interview", "paper")
    assert paper.values == (100, 120, 140, 160, 180, 200)
    assert paper.samples == 1000 and paper.rescore_samples == 10_000


@pytest.mark.parametrize("variable", list(SweepVar))
@pytest.mark.parametrize("scale", ["paper", "desk"])
def test_presets_generate_valid_instances(variable, scale):
    spec = preset(variable, "coordination", scale)
    for v in spec.values:
        inst = generate_instance(spec.generator_params(v, 0))
        if variable is SweepVar.MIGRANTS:
            assert inst.n_migrants == v and inst.jobs.sum() == v
            assert np.array_equal(inst.capacities, inst.jobs.sum(axis=1))
        elif variable is SweepVar.LOCALITIES:
            assert inst.n_localities == v and np.all(inst.jobs.sum(axis=1) >= 1)
        elif variable is SweepVar.JOBS:
            assert inst.jobs.sum(axis=0).tolist() == [v, spec.n_jobs]
            assert np.all(inst.capacities == spec.fixed_capacity)
        else:
            assert inst.num_professions == v
            assert np.all(inst.jobs.sum(axis=1) == spec.jobs_per_locality)
            assert np.array_equal(inst.jobs.sum(axis=0), np.bincount(inst.professions, minlength=v))


def test_spec_validation():
    with pytest.raises(ValueError):
        tiny(values=())
    with pytest.raises(ValueError):
        tiny(replicates=0)
    with pytest.raises(ValueError):
        run_experiment(tiny(), [])
    with pytest.raises(ValueError):
        run_experiment(tiny(), cfg(Algorithm.GREEDY, Algorithm.GREEDY))
