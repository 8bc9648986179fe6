"""Dendritic cell population engine.

A tissue compartment buffers suspect items (antigen) and carries the
current signal vector.  A fixed population of cells samples the tissue
every tick, fuses the signals into three cumulative outputs and, once
sufficiently stimulated, migrates: every stored antigen is presented with
a binary context and the cell is recycled.
"""

from __future__ import annotations

import random
from collections import OrderedDict
from dataclasses import dataclass, field

from .errors import ConfigError, EngineInvariantError
from .signals import SignalVector


@dataclass(frozen=True, slots=True)
class Antigen:
    """A suspect item: one system call attributed to a process."""

    pid: int
    label: str
    arrival_time: float


@dataclass(frozen=True, slots=True)
class PresentationRecord:
    """One antigen presented by a migrating cell.

    context is 1 when the cell matured (anomalous surroundings), else 0.
    """

    antigen: Antigen
    context: int
    presented_at: float


@dataclass(frozen=True)
class WeightMatrix:
    """Per-category weights of the three output increments.

    The safe category suppresses the mature output, so its mature weight
    must be negative; csm weights stay non-negative so stimulation can
    only accumulate within a cell lifetime.
    """

    csm_pamp: float = 2.0
    csm_danger: float = 1.0
    csm_safe: float = 2.0
    semi_pamp: float = 0.0
    semi_danger: float = 0.0
    semi_safe: float = 3.0
    mature_pamp: float = 2.0
    mature_danger: float = 1.0
    mature_safe: float = -3.0
    inflammation_base: float = 1.0

    def __post_init__(self):
        if min(self.csm_pamp, self.csm_danger, self.csm_safe) < 0:
            raise ConfigError("csm weights must be non-negative")
        if self.mature_safe >= 0:
            raise ConfigError("safe weight on the mature output must be negative")
        if self.inflammation_base <= 0:
            raise ConfigError("inflammation base must be positive")


def combine_categories(signals: SignalVector) -> tuple[float, float, float, int]:
    """Collapse the seven signals into (pamp, danger, safe, inflammation)."""
    return (
        (signals.pamp1 + signals.pamp2) / 2.0,
        (signals.ds1 + signals.ds2) / 2.0,
        (signals.ss1 + signals.ss2) / 2.0,
        signals.inflammation,
    )


@dataclass(frozen=True)
class EngineConfig:
    population_size: int = 100
    tissue_capacity: int = 500
    antigens_per_update: int = 10
    cell_store_capacity: int = 50
    threshold_min: float = 100.0
    threshold_max: float = 300.0
    weights: WeightMatrix = field(default_factory=WeightMatrix)
    seed: int = 0

    def __post_init__(self):
        if self.population_size <= 0 or self.tissue_capacity <= 0:
            raise ConfigError("population and tissue capacity must be positive")
        if self.antigens_per_update <= 0 or self.antigens_per_update > self.tissue_capacity:
            raise ConfigError("antigens_per_update must be in [1, tissue_capacity]")
        if self.cell_store_capacity <= 0:
            raise ConfigError("cell store capacity must be positive")
        if self.threshold_min <= 0:
            raise ConfigError("migration thresholds must be positive")
        if self.threshold_min > self.threshold_max:
            raise ConfigError("threshold range is inverted")


class TissueCompartment:
    """Fixed-size antigen buffer plus the signal vector of the current tick.

    When full, a new arrival overwrites the longest-resident antigen, so
    the buffer behaves like a ring under sustained overflow.
    """

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.slots: list[Antigen | None] = [None] * capacity
        self._free = list(range(capacity - 1, -1, -1))
        self._residents: OrderedDict[int, None] = OrderedDict()
        self.current_signals: SignalVector | None = None
        self.stored_total = 0
        self.overwritten_total = 0

    @property
    def occupied_count(self) -> int:
        return len(self._residents)

    def store(self, antigen: Antigen) -> None:
        if self._free:
            idx = self._free.pop()
        else:
            idx, _ = self._residents.popitem(last=False)
            self.overwritten_total += 1
        self.slots[idx] = antigen
        self._residents[idx] = None
        self.stored_total += 1

    def take(self, idx: int) -> Antigen | None:
        antigen = self.slots[idx]
        if antigen is not None:
            self.slots[idx] = None
            del self._residents[idx]
            self._free.append(idx)
        return antigen


class DendriticCell:
    """One sampling cell with its cumulative outputs and antigen store."""

    __slots__ = ("store_capacity", "migration_threshold", "antigen_store", "csm", "semi", "mature")

    def __init__(self, store_capacity: int, migration_threshold: float):
        self.store_capacity = store_capacity
        self.migration_threshold = migration_threshold
        self.antigen_store: list[Antigen] = []
        self.csm = 0.0
        self.semi = 0.0
        self.mature = 0.0

    def sample(self, tissue: TissueCompartment, rng: random.Random, k: int) -> None:
        """Draw k distinct slots; move found antigen in while room remains."""
        for idx in rng.sample(range(tissue.capacity), k):
            if len(self.antigen_store) >= self.store_capacity:
                break
            antigen = tissue.take(idx)
            if antigen is not None:
                self.antigen_store.append(antigen)

    def update_signals(self, pamp: float, danger: float, safe: float,
                       inflammation: int, weights: WeightMatrix) -> None:
        factor = weights.inflammation_base + inflammation
        self.csm = max(0.0, self.csm + factor * (
            weights.csm_pamp * pamp + weights.csm_danger * danger + weights.csm_safe * safe))
        self.semi = max(0.0, self.semi + factor * (
            weights.semi_pamp * pamp + weights.semi_danger * danger + weights.semi_safe * safe))
        self.mature = max(0.0, self.mature + factor * (
            weights.mature_pamp * pamp + weights.mature_danger * danger + weights.mature_safe * safe))

    @property
    def wants_migration(self) -> bool:
        return self.csm > self.migration_threshold

    def context(self) -> int:
        return 1 if self.mature > self.semi else 0

    def present(self, now: float) -> list[PresentationRecord]:
        ctx = self.context()
        return [PresentationRecord(antigen, ctx, now) for antigen in self.antigen_store]

    def reset(self, rng: random.Random, threshold_min: float, threshold_max: float) -> None:
        self.antigen_store = []
        self.csm = self.semi = self.mature = 0.0
        self.migration_threshold = rng.uniform(threshold_min, threshold_max)


class DcaEngine:
    """Deterministic driver of the tissue and the cell population."""

    def __init__(self, config: EngineConfig | None = None):
        self.config = config or EngineConfig()
        self.rng = random.Random(self.config.seed)
        self.tissue = TissueCompartment(self.config.tissue_capacity)
        self.cells = [
            DendriticCell(
                self.config.cell_store_capacity,
                self.rng.uniform(self.config.threshold_min, self.config.threshold_max),
            )
            for _ in range(self.config.population_size)
        ]
        self.presented_total = 0
        self.ticks_run = 0

    def tick(self, signals: SignalVector, antigens: list[Antigen], now: float) -> list[PresentationRecord]:
        """Advance one virtual second and return any presentations.

        Order is fixed: new antigen enters the tissue, the signal vector is
        published, every cell samples then updates in population order, and
        finally stimulated cells present and are recycled.
        """
        for antigen in antigens:
            self.tissue.store(antigen)
        self.tissue.current_signals = signals
        pamp, danger, safe, inflammation = combine_categories(signals)
        k = self.config.antigens_per_update
        weights = self.config.weights
        for cell in self.cells:
            cell.sample(self.tissue, self.rng, k)
            cell.update_signals(pamp, danger, safe, inflammation, weights)
        records: list[PresentationRecord] = []
        for cell in self.cells:
            if cell.wants_migration:
                records.extend(cell.present(now))
                cell.reset(self.rng, self.config.threshold_min, self.config.threshold_max)
        self.presented_total += len(records)
        self.ticks_run += 1
        return records

    def audit(self) -> dict[str, int]:
        """Antigen bookkeeping; every ingested antigen must be accounted for."""
        in_cells = sum(len(cell.antigen_store) for cell in self.cells)
        counts = {
            "ingested": self.tissue.stored_total,
            "in_tissue": self.tissue.occupied_count,
            "in_cells": in_cells,
            "presented": self.presented_total,
            "overwritten": self.tissue.overwritten_total,
        }
        counts["balanced"] = int(
            counts["ingested"]
            == counts["in_tissue"] + counts["in_cells"] + counts["presented"] + counts["overwritten"]
        )
        return counts

    def check_conservation(self) -> None:
        counts = self.audit()
        if not counts["balanced"]:
            raise EngineInvariantError(f"antigen conservation broken: {counts}")
