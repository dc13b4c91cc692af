"""Scenario seed store: load, validate, sample, and save episode initializers.

A seed is one line of JSON with exactly four fields: id, dataset, scenario
(assistant role plus user situation), and initial_prompt (the opening user
utterance). Seeds initialize every training and evaluation episode.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass

SEED_FIELDS = ("id", "dataset", "scenario", "initial_prompt")


class SeedError(ValueError):
    """Base class for seed-store errors."""


class MalformedRecord(SeedError):
    """A seed line that does not parse or is missing a required field."""


class DuplicateId(SeedError):
    """Two seeds in one set share an id."""


class KTooLarge(SeedError):
    """A sample request for more seeds than the set holds."""


@dataclass(frozen=True)
class ScenarioSeed:
    id: str
    dataset: str
    scenario: str
    initial_prompt: str

    def __post_init__(self) -> None:
        if not self.id:
            raise MalformedRecord("seed id must be non-empty")
        if not self.scenario.strip():
            raise MalformedRecord(f"seed {self.id!r}: scenario must be non-empty")
        if not self.initial_prompt.strip():
            raise MalformedRecord(f"seed {self.id!r}: initial_prompt must be non-empty")

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "dataset": self.dataset,
            "scenario": self.scenario,
            "initial_prompt": self.initial_prompt,
        }


@dataclass(frozen=True)
class Provenance:
    source: str
    loaded_at: float


@dataclass(frozen=True)
class SeedSet:
    seeds: tuple[ScenarioSeed, ...]
    provenance: Provenance | None = None

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for seed in self.seeds:
            if seed.id in seen:
                raise DuplicateId(f"duplicate seed id: {seed.id!r}")
            seen.add(seed.id)

    def __len__(self) -> int:
        return len(self.seeds)

    def __iter__(self):
        return iter(self.seeds)

    def ids(self) -> tuple[str, ...]:
        return tuple(seed.id for seed in self.seeds)


def seed_from_record(record: dict, line_number: int | None = None) -> ScenarioSeed:
    where = f" (line {line_number})" if line_number is not None else ""
    if not isinstance(record, dict):
        raise MalformedRecord(f"seed record must be an object{where}")
    missing = [name for name in SEED_FIELDS if not str(record.get(name, "")).strip()]
    if missing:
        raise MalformedRecord(f"seed record missing field(s) {', '.join(missing)}{where}")
    extra = set(record) - set(SEED_FIELDS)
    if extra:
        raise MalformedRecord(f"seed record has unknown field(s) {sorted(extra)}{where}")
    return ScenarioSeed(
        id=str(record["id"]),
        dataset=str(record["dataset"]),
        scenario=str(record["scenario"]),
        initial_prompt=str(record["initial_prompt"]),
    )


def load_seeds(path: str) -> SeedSet:
    """Load a line-delimited seed file, validating every record in order."""
    seeds: list[ScenarioSeed] = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as err:
                raise MalformedRecord(f"line {line_number}: invalid JSON ({err.msg})") from err
            seeds.append(seed_from_record(record, line_number))
    return SeedSet(tuple(seeds), Provenance(source=str(path), loaded_at=time.time()))


def save_seeds(seed_set: SeedSet, path: str) -> None:
    """Write seeds in canonical one-record-per-line form (field order fixed)."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for seed in seed_set:
            handle.write(json.dumps(seed.to_record(), ensure_ascii=False))
            handle.write("\n")


def sample_seeds(seed_set: SeedSet, k: int, rng_seed: int) -> SeedSet:
    """Sample k distinct seeds, deterministic in rng_seed, without replacement."""
    if k > len(seed_set):
        raise KTooLarge(f"asked for {k} seeds from a set of {len(seed_set)}")
    rng = random.Random(rng_seed)
    sampled = rng.sample(list(seed_set.seeds), k)
    return SeedSet(tuple(sampled), seed_set.provenance)
