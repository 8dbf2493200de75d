"""Task-lifecycle simulator: graphs, execution semantics, traces, checking."""

from .check import TraceDiagnostic, check_trace
from .graph import IndexTask, TaskGraph, load_taskgraph
from .sim import (
    ExecState,
    ShardDistribute,
    ShardLocal,
    Simulator,
    expand_shards,
    run_to_quiescence,
    shard_policy,
    step,
)
from .trace import ENQUEUED, EXECUTED, LAUNCHED, MAPPED, STAGES, LogEntry, Trace

__all__ = [
    "ENQUEUED",
    "EXECUTED",
    "ExecState",
    "IndexTask",
    "LAUNCHED",
    "LogEntry",
    "MAPPED",
    "STAGES",
    "ShardDistribute",
    "ShardLocal",
    "Simulator",
    "TaskGraph",
    "Trace",
    "TraceDiagnostic",
    "check_trace",
    "expand_shards",
    "load_taskgraph",
    "run_to_quiescence",
    "shard_policy",
    "step",
]
