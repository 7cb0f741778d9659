import subprocess
import sys

import numpy as np
import pytest

from resettle.cli import main
from resettle.instance import load_instance, parse_instance
from resettle.solution import from_pairs, is_feasible


def gen(tmp_path, model="interview", name="inst.json", seed=1, **kw):
    path = tmp_path / name
    args = dict(migrants=8, localities=3, jobs=8, professions=2)
    args.update(kw)
    argv = ["generate", "--model", model, "--seed", str(seed), "--out", str(path)]
    for k, v in args.items():
        argv += [f"--{k.replace('_', '-')}", str(v)]
    assert main(argv) == 0
    return path


def run_out(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_run(text):
    return dict(line.split(": ", 1) for line in text.strip().splitlines())


def test_generate_to_stdout_round_trips(capsys):
    code, out, _ = run_out(capsys, ["generate", "--model", "coordination", "--migrants", "50",
                                    "--localities", "5", "--jobs", "50", "--professions", "2",
                                    "--seed", "3", "--out", "-"])
    assert code == 0
    inst = parse_instance(out)
    assert inst.n_migrants == 50 and inst.n_localities == 5 and inst.jobs.sum() == 50


@pytest.mark.parametrize("model", ["interview", "coordination"])
def test_run_prints_feasible_assignment(tmp_path, capsys, model):
    path = gen(tmp_path, model)
    code, out, _ = run_out(capsys, ["run", "--instance", str(path), "--algorithm", "gsemo_sr",
                                    "--budget", "300", "--samples", "20", "--rescore-samples", "200",
                                    "--seed", "5"])
    assert code == 0
    fields = parse_run(out)
    assert fields["algorithm"] == "MR-GSEMO-SR"
    assert float(fields["f"]) >= 0 and int(fields["evaluations"]) <= 300
    inst = load_instance(path)
    pairs = [tuple(map(int, p.strip("()").split(","))) for p in fields["assignment"].split()]
    assert is_feasible(inst, from_pairs(inst, pairs))


def test_run_is_repeatable_and_leaves_input_alone(tmp_path, capsys):
    path = gen(tmp_path)
    before = path.read_bytes()
    argv = ["run", "--instance", str(path), "--algorithm", "greedy", "--samples", "30",
            "--rescore-samples", "100", "--seed", "9"]
    first = run_out(capsys, argv)
    second = run_out(capsys, argv)
    assert first == second and first[0] == 0
    assert path.read_bytes() == before


def test_missing_seed_is_reported(tmp_path, capsys):
    path = tmp_path / "i.json"
    code, _, err = run_out(capsys, ["generate", "--model", "interview", "--migrants", "4",
                                    "--localities", "2", "--jobs", "4", "--professions", "2",
                                    "--out", str(path)])
    assert code == 0 and err.startswith("seed: ")
    seed = int(err.split()[1])
    again = tmp_path / "j.json"
    main(["generate", "--model", "interview", "--migrants", "4", "--localities", "2", "--jobs", "4",
          "--professions", "2", "--seed", str(seed), "--out", str(again)])
    assert again.read_bytes() == path.read_bytes()


def test_exit_codes(tmp_path, capsys):
    path = gen(tmp_path)
    assert run_out(capsys, [])[0] == 1
    assert run_out(capsys, ["run", "--instance", str(path), "--algorithm", "nope"])[0] == 1
    assert run_out(capsys, ["run", "--instance", str(path), "--algorithm", "gsemo_sr",
                            "--p-m", "3", "--seed", "0"])[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"model": "lottery"}')
    code, _, err = run_out(capsys, ["run", "--instance", str(bad), "--algorithm", "greedy",
                                    "--seed", "0"])
    assert code == 2 and "model" in err
    assert run_out(capsys, ["run", "--instance", str(tmp_path / "missing.json"),
                            "--algorithm", "greedy", "--seed", "0"])[0] == 3
    assert run_out(capsys, ["run", "--instance", str(path), "--algorithm", "additive",
                            "--budget", "2", "--seed", "0"])[0] == 3


EXPERIMENT = ["experiment", "--sweep", "migrants", "--model", "coordination", "--values", "5,6",
              "--replicates", "2", "--algorithms", "additive,greedy,gsemo_sr", "--samples", "20",
              "--rescore-samples", "100", "--budget", "200", "--seed", "11"]


def test_experiment_is_byte_identical_across_threads(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(EXPERIMENT + ["--out", str(a), "--threads", "1"]) == 0
    assert main(EXPERIMENT + ["--out", str(b), "--threads", "2"]) == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == ["coordination_migrants.csv", "coordination_migrants.json",
                     "coordination_migrants.md", "coordination_migrants.plot.csv"]
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()

    code, out, _ = run_out(capsys, ["report", "--report", str(a / "coordination_migrants.json"),
                                    "--format", "markdown"])
    assert code == 0 and out == (a / "coordination_migrants.md").read_text()


def test_experiment_cell_failure_exits_three(tmp_path, capsys):
    argv = [x if x != "200" else "3" for x in EXPERIMENT]
    code, _, err = run_out(capsys, argv + ["--out", str(tmp_path)])
    assert code == 3 and "cell failed" in err
    assert (tmp_path / "coordination_migrants.csv").exists()


def test_bad_format_is_usage_error(tmp_path, capsys):
    assert run_out(capsys, EXPERIMENT + ["--out", str(tmp_path), "--formats", "pdf"])[0] == 1


def test_console_entry_point(tmp_path):
    path = gen(tmp_path)
    cmd = [sys.executable, "-m", "resettle.cli", "run", "--instance", str(path),
           "--algorithm", "greedy", "--samples", "10", "--rescore-samples", "50", "--seed", "1"]
    a = subprocess.run(cmd, capture_output=True, check=True)
    b = subprocess.run(cmd, capture_output=True, check=True)
    assert a.stdout == b.stdout and b"assignment:" in a.stdout
