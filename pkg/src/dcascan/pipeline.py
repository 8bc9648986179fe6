"""Glue: replay an event stream through signal derivation and the engine."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

from .engine import Antigen, DcaEngine, EngineConfig, PresentationRecord
from .events import EventStream, iter_buckets
from .signals import SignalConfig, SignalDeriver, SignalVector


@dataclass
class RunResult:
    records: list[PresentationRecord] = field(default_factory=list)
    signal_trace: list[tuple[int, SignalVector]] = field(default_factory=list)
    ticks: int = 0
    audit: dict[str, int] = field(default_factory=dict)


def run_stream(stream: EventStream,
               engine_config: EngineConfig | None = None,
               signal_config: SignalConfig | None = None,
               *,
               audit_every: int = 0,
               collect_trace: bool = False) -> RunResult:
    """Replay the stream tick by tick through a fresh deriver and engine.

    ``audit_every`` > 0 re-checks antigen conservation after every that
    many ticks and once more at the end.
    """
    deriver = SignalDeriver(signal_config)
    engine = DcaEngine(engine_config)
    result = RunResult()
    for bucket in iter_buckets(stream):
        signals = deriver.derive(bucket)
        antigens = [
            Antigen(ev.pid, ev.process_name, ev.timestamp)
            for ev in bucket.process_events
            if ev.kind == "syscall"
        ]
        result.records.extend(engine.tick(signals, antigens, float(bucket.second)))
        if collect_trace:
            result.signal_trace.append((bucket.second, signals))
        if audit_every and (bucket.second + 1) % audit_every == 0:
            engine.check_conservation()
    if audit_every:
        engine.check_conservation()
    result.ticks = engine.ticks_run
    result.audit = engine.audit()
    return result


def write_signal_trace(trace: list[tuple[int, SignalVector]], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "pamp1", "pamp2", "ds1", "ds2", "ss1", "ss2", "inflammation"])
        for second, sv in trace:
            writer.writerow([
                second,
                f"{sv.pamp1:.4f}", f"{sv.pamp2:.4f}", f"{sv.ds1:.4f}", f"{sv.ds2:.4f}",
                f"{sv.ss1:.4f}", f"{sv.ss2:.4f}", sv.inflammation,
            ])
