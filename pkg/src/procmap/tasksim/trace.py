"""Execution traces: the ordered lifecycle log plus per-processor statistics."""

from __future__ import annotations

from dataclasses import dataclass, field

ENQUEUED = "enqueued"
MAPPED = "mapped"
LAUNCHED = "launched"
EXECUTED = "executed"

STAGES = (ENQUEUED, MAPPED, LAUNCHED, EXECUTED)


@dataclass(frozen=True)
class LogEntry:
    stage: str
    task: str
    node: int | None
    proc: int | None
    step: int

    def record(self) -> dict:
        return {
            "stage": self.stage,
            "task": self.task,
            "node": self.node,
            "proc": self.proc,
            "step": self.step,
        }


@dataclass
class Trace:
    entries: tuple[LogEntry, ...]
    proc_stats: dict[tuple[int, int], dict[str, int]] = field(default_factory=dict)

    def records(self) -> list[dict]:
        return [e.record() for e in self.entries]

    @staticmethod
    def from_records(records) -> "Trace":
        entries = []
        for r in records:
            entries.append(
                LogEntry(r["stage"], r["task"], r.get("node"), r.get("proc"), r["step"])
            )
        return Trace(tuple(entries))

    def stages_of(self, task: str) -> list[str]:
        return [e.stage for e in self.entries if e.task == task]
