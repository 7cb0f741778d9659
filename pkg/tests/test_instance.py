import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resettle.instance import (CapacityMode, GeneratorParams, JobMode, Model, ProfessionMode,
                               SchemaError, ValidationError, generate_instance, instance_to_dict,
                               load_instance, parse_instance, save_instance, serialize_instance)

from strategies import instances


def test_smallest_interview_instance():
    inst = generate_instance(GeneratorParams(Model.INTERVIEW, 2, 1, 2, 1, seed=7))
    assert inst.n_localities == 1
    assert inst.jobs[0, 0] == 2
    assert inst.capacities[0] == 2
    assert inst.probs.shape == (2, 1)
    assert np.all((inst.probs >= 0) & (inst.probs <= 1))
    assert inst.coordination_probs is None


def test_coordination_even_split_professions():
    inst = generate_instance(GeneratorParams(Model.COORDINATION, 4, 2, 4, 2, seed=3))
    assert inst.professions.tolist() == [0, 0, 1, 1]
    for v in range(4):
        other = 1 - inst.professions[v]
        assert inst.probs[v, other] == 0.0
    assert inst.interview_probs is None


def test_generation_is_deterministic():
    p = GeneratorParams(Model.COORDINATION, 12, 3, 12, 3, seed=99)
    a, b = generate_instance(p), generate_instance(p)
    assert a == b
    assert serialize_instance(a) == serialize_instance(b)
    assert generate_instance(GeneratorParams(Model.COORDINATION, 12, 3, 12, 3, seed=100)) != a


def test_interview_probabilities_are_uniform():
    inst = generate_instance(GeneratorParams(Model.INTERVIEW, 1000, 100, 1000, 2, seed=1))
    p = inst.probs.ravel()
    assert p.size == 10**5
    assert abs(p.mean() - 0.5) < 0.01
    assert abs(p.var() - 1 / 12) < 0.005


@given(st.integers(1, 40), st.integers(1, 8), st.integers(0, 2**32))
def test_even_split_counts(nv, npf, seed):
    inst = generate_instance(GeneratorParams(Model.INTERVIEW, nv, 1, nv, npf, seed=seed))
    counts = np.bincount(inst.professions, minlength=npf)
    assert set(counts.tolist()) <= {nv // npf, -(-nv // npf)}


@given(st.integers(1, 40), st.integers(1, 8), st.integers(0, 2**32))
def test_random_at_least_one_never_leaves_a_profession_empty(nv, npf, seed):
    npf = min(npf, nv)
    inst = generate_instance(GeneratorParams(Model.INTERVIEW, nv, 2, nv, npf, seed=seed,
                                             profession_mode=ProfessionMode.RANDOM_AT_LEAST_ONE))
    assert np.all(np.bincount(inst.professions, minlength=npf) >= 1)
    # one job of the right profession per migrant
    assert np.array_equal(inst.jobs.sum(axis=0), np.bincount(inst.professions, minlength=npf))


@given(st.integers(1, 30), st.integers(1, 7), st.integers(0, 2**32))
def test_equal_to_jobs_capacity(nj, nl, seed):
    inst = generate_instance(GeneratorParams(Model.INTERVIEW, 5, nl, nj, 2, seed=seed))
    assert np.array_equal(inst.capacities, inst.jobs.sum(axis=1))
    assert inst.jobs.sum() == nj


def test_uneven_jobs_go_to_lowest_localities():
    inst = generate_instance(GeneratorParams(Model.INTERVIEW, 5, 3, 11, 2, seed=0))
    assert inst.jobs.sum(axis=1).tolist() == [4, 4, 3]


def test_random_at_least_one_per_locality():
    for seed in range(50):
        inst = generate_instance(GeneratorParams(
            Model.INTERVIEW, 10, 6, 10, 2, seed=seed,
            job_mode=JobMode.RANDOM_AT_LEAST_ONE_PER_LOCALITY))
        assert inst.jobs.sum() == 10
        assert np.all(inst.jobs.sum(axis=1) >= 1)


def test_fixed_jobs_and_capacity():
    inst = generate_instance(GeneratorParams(
        Model.COORDINATION, 20, 4, 20, 5, seed=2, profession_mode=ProfessionMode.RANDOM_AT_LEAST_ONE,
        job_mode=JobMode.FIXED_PER_LOCALITY, jobs_per_locality=5,
        capacity_mode=CapacityMode.FIXED, fixed_capacity=5))
    assert inst.jobs.sum(axis=1).tolist() == [5, 5, 5, 5]
    assert inst.capacities.tolist() == [5, 5, 5, 5]


def test_job_override_per_profession():
    inst = generate_instance(GeneratorParams(
        Model.INTERVIEW, 10, 5, 25, 2, seed=4, jobs_per_profession=(5, 20),
        capacity_mode=CapacityMode.FIXED, fixed_capacity=2))
    assert inst.jobs.sum(axis=0).tolist() == [5, 20]


@pytest.mark.parametrize("kw", [
    dict(n_migrants=0),
    dict(n_professions=9, profession_mode=ProfessionMode.RANDOM_AT_LEAST_ONE),
    dict(jobs_per_profession=(1, 2)),
    dict(job_mode=JobMode.FIXED_PER_LOCALITY, jobs_per_locality=3),
    dict(n_jobs=1, job_mode=JobMode.RANDOM_AT_LEAST_ONE_PER_LOCALITY),
])
def test_invalid_params(kw):
    base = dict(model=Model.INTERVIEW, n_migrants=4, n_localities=2, n_jobs=4, n_professions=2)
    base.update(kw)
    with pytest.raises(ValueError):
        generate_instance(GeneratorParams(**base))


@settings(max_examples=60)
@given(instances())
def test_round_trip(inst):
    text = serialize_instance(inst)
    back = parse_instance(text)
    assert back == inst
    assert serialize_instance(back) == text


def test_round_trip_generated_file(tmp_path):
    inst = generate_instance(GeneratorParams(Model.COORDINATION, 9, 3, 9, 3, seed=5))
    save_instance(inst, tmp_path / "i.json")
    assert load_instance(tmp_path / "i.json") == inst


def _doc():
    return instance_to_dict(generate_instance(GeneratorParams(Model.COORDINATION, 4, 2, 4, 2, seed=1)))


def test_probability_out_of_range():
    doc = _doc()
    doc["probs"][0][0] = 1.5
    with pytest.raises(ValidationError, match="probability out of range"):
        parse_instance(json.dumps(doc))


def test_missing_coordination_probs_is_schema_error():
    doc = _doc()
    del doc["probs"]
    with pytest.raises(SchemaError, match="coordination_probs") as info:
        parse_instance(json.dumps(doc))
    assert info.value.location == "$.probs"


@pytest.mark.parametrize("mutate, location", [
    (lambda d: d.pop("model"), "$.model"),
    (lambda d: d.__setitem__("model", "lottery"), "$.model"),
    (lambda d: d["migrants"][1].__setitem__("profession", "x"), "$.migrants[1].profession"),
    (lambda d: d["localities"][0].__setitem__("jobs_by_profession", [1]),
     "$.localities[0].jobs_by_profession"),
    (lambda d: d["probs"][2].append(0.5), "$.probs[2]"),
    (lambda d: d["localities"][1].__setitem__("id", 7), "$.localities[1].id"),
])
def test_schema_errors_name_the_location(mutate, location):
    doc = _doc()
    mutate(doc)
    with pytest.raises(SchemaError) as info:
        parse_instance(json.dumps(doc))
    assert info.value.location == location


def test_bad_json_is_schema_error():
    with pytest.raises(SchemaError):
        parse_instance(b"{not json")


def test_instances_are_read_only():
    inst = generate_instance(GeneratorParams(Model.INTERVIEW, 3, 2, 3, 1, seed=0))
    with pytest.raises(ValueError):
        inst.probs[0, 0] = 0.3
