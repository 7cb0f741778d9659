"""Problem instances: domain model, synthetic generators and the JSON file format."""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np


class Model(str, enum.Enum):
    INTERVIEW = "interview"
    COORDINATION = "coordination"


class ProfessionMode(str, enum.Enum):
    EVEN_SPLIT = "even_split"
    RANDOM_AT_LEAST_ONE = "random_at_least_one"


class JobMode(str, enum.Enum):
    EQUAL_PER_LOCALITY = "equal_per_locality"
    RANDOM_AT_LEAST_ONE_PER_LOCALITY = "random_at_least_one_per_locality"
    FIXED_PER_LOCALITY = "fixed_per_locality"


class CapacityMode(str, enum.Enum):
    EQUAL_TO_JOBS = "equal_to_jobs"
    FIXED = "fixed"


class InstanceError(ValueError):
    """Base class for malformed instances."""


class SchemaError(InstanceError):
    """Instance document does not follow the schema."""

    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location


class ValidationError(InstanceError):
    """Instance document is well-formed but violates an invariant."""


@dataclass(frozen=True)
class Migrant:
    id: int
    profession: int


@dataclass(frozen=True)
class Locality:
    id: int
    capacity: int
    jobs_by_profession: tuple[int, ...]

    @property
    def jobs(self) -> int:
        return sum(self.jobs_by_profession)


@dataclass(frozen=True, eq=False)
class Instance:
    """An immutable migrant resettlement instance.

    ``probs`` is |V| x |L| for the interview model and |V| x |Pi| for the
    coordination model.  Arrays are made read-only on construction.
    """

    model: Model
    professions: np.ndarray  # (|V|,) profession id per migrant
    capacities: np.ndarray  # (|L|,)
    jobs: np.ndarray  # (|L|, |Pi|)
    probs: np.ndarray
    num_professions: int = field(default=-1)

    def __post_init__(self):
        model = Model(self.model)
        professions = np.array(self.professions, dtype=np.int64).reshape(-1)
        capacities = np.array(self.capacities, dtype=np.int64).reshape(-1)
        jobs = np.array(self.jobs, dtype=np.int64)
        probs = np.array(self.probs, dtype=np.float64)
        num_prof = self.num_professions
        if num_prof < 0:
            num_prof = jobs.shape[1] if jobs.ndim == 2 else 0
        object.__setattr__(self, "model", model)
        object.__setattr__(self, "num_professions", int(num_prof))
        for name, arr in (("professions", professions), ("capacities", capacities),
                          ("jobs", jobs), ("probs", probs)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        self._validate()

    def _validate(self):
        nv, nl, npf = self.n_migrants, self.n_localities, self.num_professions
        if nv * nl <= 0:
            raise ValidationError("instance needs at least one migrant and one locality")
        if npf <= 0:
            raise ValidationError("num_professions must be positive")
        if self.jobs.shape != (nl, npf):
            raise ValidationError(f"jobs must have shape ({nl}, {npf}), got {self.jobs.shape}")
        if np.any(self.professions < 0) or np.any(self.professions >= npf):
            raise ValidationError("migrant profession id out of range")
        if np.any(self.capacities < 0):
            raise ValidationError("capacity must be non-negative")
        if np.any(self.jobs < 0):
            raise ValidationError("job counts must be non-negative")
        cols = nl if self.model is Model.INTERVIEW else npf
        if self.probs.shape != (nv, cols):
            raise ValidationError(f"probs must have shape ({nv}, {cols}), got {self.probs.shape}")
        if not np.all((self.probs >= 0.0) & (self.probs <= 1.0)):
            raise ValidationError("probability out of range")

    @property
    def n_migrants(self) -> int:
        return int(self.professions.shape[0])

    @property
    def n_localities(self) -> int:
        return int(self.capacities.shape[0])

    @property
    def n(self) -> int:
        return self.n_migrants * self.n_localities

    @property
    def max_feasible_size(self) -> int:
        """Size r of the largest feasible assignment."""
        return int(min(self.n_migrants, self.capacities.sum()))

    @property
    def migrants(self) -> list[Migrant]:
        return [Migrant(i, int(p)) for i, p in enumerate(self.professions)]

    @property
    def localities(self) -> list[Locality]:
        return [Locality(j, int(c), tuple(int(x) for x in self.jobs[j]))
                for j, c in enumerate(self.capacities)]

    @property
    def interview_probs(self) -> np.ndarray | None:
        return self.probs if self.model is Model.INTERVIEW else None

    @property
    def coordination_probs(self) -> np.ndarray | None:
        return self.probs if self.model is Model.COORDINATION else None

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.model is other.model
                and self.num_professions == other.num_professions
                and np.array_equal(self.professions, other.professions)
                and np.array_equal(self.capacities, other.capacities)
                and np.array_equal(self.jobs, other.jobs)
                and self.probs.shape == other.probs.shape
                and np.array_equal(self.probs, other.probs))

    __hash__ = None


@dataclass(frozen=True)
class GeneratorParams:
    model: Model
    n_migrants: int
    n_localities: int
    n_jobs: int
    n_professions: int
    profession_mode: ProfessionMode = ProfessionMode.EVEN_SPLIT
    job_mode: JobMode = JobMode.EQUAL_PER_LOCALITY
    capacity_mode: CapacityMode = CapacityMode.EQUAL_TO_JOBS
    # Explicit number of jobs per profession; overrides the even split.
    jobs_per_profession: tuple[int, ...] | None = None
    jobs_per_locality: int = 10
    fixed_capacity: int = 10
    seed: int = 0

    def validate(self):
        for name in ("n_migrants", "n_localities", "n_jobs", "n_professions"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.profession_mode is ProfessionMode.RANDOM_AT_LEAST_ONE and self.n_professions > self.n_migrants:
            raise ValueError("cannot give every profession a migrant: more professions than migrants")
        if self.jobs_per_profession is not None:
            if len(self.jobs_per_profession) != self.n_professions:
                raise ValueError("jobs_per_profession needs one entry per profession")
            if sum(self.jobs_per_profession) != self.n_jobs:
                raise ValueError("jobs_per_profession must sum to n_jobs")
            if any(j < 0 for j in self.jobs_per_profession):
                raise ValueError("jobs_per_profession entries must be non-negative")
        if self.job_mode is JobMode.RANDOM_AT_LEAST_ONE_PER_LOCALITY and self.n_jobs < self.n_localities:
            raise ValueError("fewer jobs than localities: cannot give each locality a job")
        if self.job_mode is JobMode.FIXED_PER_LOCALITY and self.n_jobs != self.jobs_per_locality * self.n_localities:
            raise ValueError(
                f"fixed_per_locality needs n_jobs == {self.jobs_per_locality} * n_localities")
        if self.fixed_capacity < 0 or self.jobs_per_locality <= 0:
            raise ValueError("fixed capacity / jobs per locality out of range")


def _even_counts(total: int, parts: int) -> np.ndarray:
    counts = np.full(parts, total // parts, dtype=np.int64)
    counts[: total % parts] += 1
    return counts


def _assign_professions(params: GeneratorParams, rng: np.random.Generator) -> np.ndarray:
    nv, npf = params.n_migrants, params.n_professions
    if params.profession_mode is ProfessionMode.EVEN_SPLIT:
        return np.repeat(np.arange(npf), _even_counts(nv, npf))
    prof = rng.integers(0, npf, size=nv)
    seeded = rng.permutation(nv)[:npf]
    prof[seeded] = np.arange(npf)
    return prof


def _job_profession_counts(params: GeneratorParams, professions: np.ndarray) -> np.ndarray:
    if params.jobs_per_profession is not None:
        return np.asarray(params.jobs_per_profession, dtype=np.int64)
    if params.profession_mode is ProfessionMode.RANDOM_AT_LEAST_ONE and params.n_jobs == params.n_migrants:
        # one job of the right profession for every migrant
        return np.bincount(professions, minlength=params.n_professions).astype(np.int64)
    return _even_counts(params.n_jobs, params.n_professions)


def _jobs_per_locality(params: GeneratorParams, rng: np.random.Generator) -> np.ndarray:
    nj, nl = params.n_jobs, params.n_localities
    if params.job_mode is JobMode.EQUAL_PER_LOCALITY:
        return _even_counts(nj, nl)
    if params.job_mode is JobMode.FIXED_PER_LOCALITY:
        return np.full(nl, params.jobs_per_locality, dtype=np.int64)
    counts = np.ones(nl, dtype=np.int64)
    counts += np.bincount(rng.integers(0, nl, size=nj - nl), minlength=nl)
    return counts


def generate_instance(params: GeneratorParams) -> Instance:
    """Draw a synthetic instance; identical params give identical instances."""
    params.validate()
    rng = np.random.default_rng(params.seed)
    model = Model(params.model)
    nv, nl, npf = params.n_migrants, params.n_localities, params.n_professions

    professions = _assign_professions(params, rng)
    job_prof = np.repeat(np.arange(npf), _job_profession_counts(params, professions))
    rng.shuffle(job_prof)
    per_loc = _jobs_per_locality(params, rng)
    owner = np.repeat(np.arange(nl), per_loc)
    jobs = np.zeros((nl, npf), dtype=np.int64)
    np.add.at(jobs, (owner, job_prof), 1)

    if params.capacity_mode is CapacityMode.EQUAL_TO_JOBS:
        capacities = jobs.sum(axis=1)
    else:
        capacities = np.full(nl, params.fixed_capacity, dtype=np.int64)

    if model is Model.INTERVIEW:
        probs = rng.random((nv, nl))
    else:
        probs = np.zeros((nv, npf))
        probs[np.arange(nv), professions] = rng.random(nv)
    return Instance(model, professions, capacities, jobs, probs, num_professions=npf)


# --- file format -----------------------------------------------------------

def instance_to_dict(instance: Instance) -> dict[str, Any]:
    return {
        "model": instance.model.value,
        "num_professions": instance.num_professions,
        "migrants": [{"id": m.id, "profession": m.profession} for m in instance.migrants],
        "localities": [
            {"id": loc.id, "capacity": loc.capacity, "jobs_by_profession": list(loc.jobs_by_profession)}
            for loc in instance.localities
        ],
        # json emits floats via repr, which round-trips exactly
        "probs": instance.probs.tolist(),
    }


def serialize_instance(instance: Instance) -> bytes:
    return (json.dumps(instance_to_dict(instance), indent=1) + "\n").encode("utf-8")


def _require(obj: dict, key: str, kind, where: str):
    if key not in obj:
        raise SchemaError(f"{where}.{key}", "missing field")
    value = obj[key]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise SchemaError(f"{where}.{key}", f"expected integer, got {type(value).__name__}")
    if kind is not int and not isinstance(value, kind):
        raise SchemaError(f"{where}.{key}", f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def instance_from_dict(doc: Any) -> Instance:
    if not isinstance(doc, dict):
        raise SchemaError("$", "top level must be an object")
    model_name = _require(doc, "model", str, "$")
    try:
        model = Model(model_name)
    except ValueError:
        raise SchemaError("$.model", f"unknown model {model_name!r}") from None
    npf = _require(doc, "num_professions", int, "$")
    migrants = _require(doc, "migrants", list, "$")
    localities = _require(doc, "localities", list, "$")
    if "probs" not in doc:
        other = "interview_probs" if model is Model.INTERVIEW else "coordination_probs"
        raise SchemaError("$.probs", f"missing field (model {model.value} requires {other})")
    probs = _require(doc, "probs", list, "$")

    professions = []
    for i, m in enumerate(migrants):
        where = f"$.migrants[{i}]"
        if not isinstance(m, dict):
            raise SchemaError(where, "expected object")
        if _require(m, "id", int, where) != i:
            raise SchemaError(f"{where}.id", "ids must be dense and ordered")
        professions.append(_require(m, "profession", int, where))

    capacities, jobs = [], []
    for j, loc in enumerate(localities):
        where = f"$.localities[{j}]"
        if not isinstance(loc, dict):
            raise SchemaError(where, "expected object")
        if _require(loc, "id", int, where) != j:
            raise SchemaError(f"{where}.id", "ids must be dense and ordered")
        capacities.append(_require(loc, "capacity", int, where))
        row = _require(loc, "jobs_by_profession", list, where)
        if len(row) != npf:
            raise SchemaError(f"{where}.jobs_by_profession", f"expected {npf} entries, got {len(row)}")
        for k, x in enumerate(row):
            if isinstance(x, bool) or not isinstance(x, int):
                raise SchemaError(f"{where}.jobs_by_profession[{k}]", "expected integer")
        jobs.append(row)

    ncols = len(localities) if model is Model.INTERVIEW else npf
    if len(probs) != len(migrants):
        raise SchemaError("$.probs", f"expected {len(migrants)} rows, got {len(probs)}")
    for i, row in enumerate(probs):
        if not isinstance(row, list) or len(row) != ncols:
            raise SchemaError(f"$.probs[{i}]", f"expected a row of {ncols} numbers")
        for k, x in enumerate(row):
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise SchemaError(f"$.probs[{i}][{k}]", "expected number")

    jobs_arr = np.array(jobs, dtype=np.int64).reshape(len(localities), npf)
    probs_arr = np.array(probs, dtype=np.float64).reshape(len(migrants), ncols)
    return Instance(model, professions, capacities, jobs_arr, probs_arr, num_professions=npf)


def parse_instance(data: bytes | str) -> Instance:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    return instance_from_dict(doc)


def load_instance(path) -> Instance:
    with open(path, "rb") as fh:
        return parse_instance(fh.read())


def save_instance(instance: Instance, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_instance(instance))
