"""Independent trace checker.

Re-verifies, entry by entry, that every premise of the rule that produced a
log entry held at emission time, that mapped processors agree with the
mapping function, and that distribution conserved points.  The checker works
from the trace, the graph, and the mapping alone; traces from any producer
that follows the deterministic shard policy can be checked.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import TaskGraph
from .sim import MappingFn, ShardTree, expand_shards
from .trace import ENQUEUED, EXECUTED, LAUNCHED, MAPPED, Trace


@dataclass(frozen=True)
class TraceDiagnostic:
    code: str
    message: str
    index: int  # entry position in the trace, -1 for whole-trace findings

    def __str__(self):
        return f"entry {self.index}: [{self.code}] {self.message}"


class _Checker:
    def __init__(self, trace, graph: TaskGraph, mapping: MappingFn):
        self.entries = trace.entries if isinstance(trace, Trace) else tuple(
            Trace.from_records(trace).entries
        )
        self.graph = graph
        self.mapping = mapping
        self.diags: list[TraceDiagnostic] = []
        self.trees: dict[str, ShardTree] = {}
        self.leaves_total: dict[str, int] = {graph.root: 1}
        for tid, task in graph.tasks.items():
            if tid == graph.root:
                continue
            tree = expand_shards(task, mapping, graph.ispaces[tid])
            self.trees[tid] = tree
            self.leaves_total[tid] = len(tree.leaves)
            self._check_conservation(tid, tree)
        self.enqueued: set[str] = set()
        self.mapped: dict[str, tuple[int, int]] = {}
        self.launched: dict[str, tuple[int, int]] = {}
        self.executed: dict[str, tuple[int, int]] = {}
        self.mapped_n = {t: 0 for t in graph.tasks}
        self.launched_n = {t: 0 for t in graph.tasks}
        self.executed_n = {t: 0 for t in graph.tasks}

    def _check_conservation(self, tid: str, tree: ShardTree) -> None:
        for sub_id, decision in tree.decisions.items():
            if not hasattr(decision, "left"):
                continue
            whole = set(tree.subtasks[sub_id].points)
            halves = set(decision.left.points) | set(decision.right.points)
            if whole != halves or set(decision.left.points) & set(decision.right.points):
                self.fail(
                    "PointConservation",
                    f"distribution of {sub_id!r} does not partition its points",
                    -1,
                )

    def fail(self, code: str, message: str, index: int) -> None:
        self.diags.append(TraceDiagnostic(code, message, index))

    def origin_of(self, tid: str) -> str:
        return tid.split("/", 1)[0]

    def complete(self, counter: dict[str, int], origin: str) -> bool:
        return counter[origin] >= self.leaves_total[origin]

    def run(self) -> list[TraceDiagnostic]:
        prev_step = None
        for i, e in enumerate(self.entries):
            if prev_step is not None and e.step <= prev_step:
                self.fail("StepOrder", f"step {e.step} does not increase", i)
            prev_step = e.step
            origin = self.origin_of(e.task)
            if origin not in self.graph.tasks:
                self.fail("UnknownTask", f"task {e.task!r} is not in the graph", i)
                continue
            if e.stage == ENQUEUED:
                self.check_enqueued(e, i)
            elif e.stage == MAPPED:
                self.check_mapped(e, i, origin)
            elif e.stage == LAUNCHED:
                self.check_launched(e, i, origin)
            elif e.stage == EXECUTED:
                self.check_executed(e, i, origin)
            else:
                self.fail("UnknownStage", f"unknown stage {e.stage!r}", i)
        return self.diags

    # -- per-stage premises ----------------------------------------------------

    def check_enqueued(self, e, i) -> None:
        tid = e.task
        if tid != self.origin_of(tid) or tid == self.graph.root:
            self.fail("PremiseViolation", f"{tid!r} cannot be enqueued", i)
            return
        if tid in self.enqueued:
            self.fail("DuplicateStage", f"{tid!r} enqueued twice", i)
            return
        parent = self.graph.parent[tid]
        if not self.complete(self.launched_n, parent):
            self.fail(
                "PremiseViolation",
                f"enqueued({tid!r}) before parent {parent!r} launched",
                i,
            )
        for sib in self.graph.earlier_siblings(tid):
            if sib not in self.enqueued:
                self.fail(
                    "PremiseViolation",
                    f"enqueued({tid!r}) before earlier sibling {sib!r}",
                    i,
                )
        expected_node = (
            0 if parent == self.graph.root
            else min(self.trees[parent].targets.values())[0]
        )
        if e.node != expected_node:
            self.fail(
                "PremiseViolation",
                f"enqueued({tid!r}) on node {e.node}, expected {expected_node}",
                i,
            )
        self.enqueued.add(tid)

    def _expected_target(self, tid: str, origin: str, i: int):
        if origin == self.graph.root:
            if tid != origin:
                self.fail("UnknownTask", f"the root task is never distributed, got {tid!r}", i)
            return None  # root is bootstrapped, never mapped through the rules
        tree = self.trees[origin]
        if tid not in tree.subtasks:
            self.fail("UnknownTask", f"{tid!r} is not a fragment of {origin!r}", i)
            return None
        if tid not in tree.targets:
            self.fail(
                "PremiseViolation",
                f"{tid!r} distributes further and cannot map directly",
                i,
            )
            return None
        return tree.targets[tid]

    def check_mapped(self, e, i, origin) -> None:
        tid = e.task
        if tid in self.mapped:
            self.fail("DuplicateStage", f"{tid!r} mapped twice", i)
            return
        target = self._expected_target(tid, origin, i)
        if target is None:
            if origin == tid == self.graph.root:
                self.fail("PremiseViolation", "the root task is never mapped", i)
            return
        if (e.node, e.proc) != target:
            self.fail(
                "MappingMismatch",
                f"mapped({tid!r}) at {(e.node, e.proc)}, mapping says {target}",
                i,
            )
        if origin != self.graph.root and origin not in self.enqueued:
            self.fail("PremiseViolation", f"mapped({tid!r}) before enqueued({origin!r})", i)
        for dep in self.graph.sibling_deps_before[origin]:
            if not self.complete(self.mapped_n, dep):
                self.fail(
                    "PremiseViolation",
                    f"mapped({tid!r}) before sibling dependence {dep!r} was mapped",
                    i,
                )
        self.mapped[tid] = (e.node, e.proc)
        self.mapped_n[origin] += 1

    def check_launched(self, e, i, origin) -> None:
        tid = e.task
        if tid in self.launched:
            self.fail("DuplicateStage", f"{tid!r} launched twice", i)
            return
        if tid == self.graph.root:
            # bootstrap: the root is live on (0, 0) before any rule fires
            if (e.node, e.proc) != (0, 0) or e.step != 0:
                self.fail(
                    "PremiseViolation",
                    "root bootstrap must be launched(root) at (0, 0), step 0",
                    i,
                )
            self.launched[tid] = (0, 0)
            self.launched_n[origin] += 1
            self.mapped_n[origin] = self.leaves_total[origin]
            return
        if tid not in self.mapped:
            self.fail("PremiseViolation", f"launched({tid!r}) before mapped", i)
        elif self.mapped[tid] != (e.node, e.proc):
            self.fail(
                "MappingMismatch",
                f"launched({tid!r}) at {(e.node, e.proc)}, mapped at {self.mapped[tid]}",
                i,
            )
        for dep in self.graph.deps_before[origin]:
            if not self.complete(self.executed_n, dep):
                self.fail(
                    "PremiseViolation",
                    f"launched({tid!r}) before dependence {dep!r} executed",
                    i,
                )
        self.launched[tid] = (e.node, e.proc)
        self.launched_n[origin] += 1

    def check_executed(self, e, i, origin) -> None:
        tid = e.task
        if tid in self.executed:
            self.fail("DuplicateStage", f"{tid!r} executed twice", i)
            return
        if tid not in self.launched:
            self.fail("PremiseViolation", f"executed({tid!r}) before launched", i)
        elif self.launched[tid] != (e.node, e.proc):
            self.fail(
                "MappingMismatch",
                f"executed({tid!r}) at {(e.node, e.proc)}, launched at {self.launched[tid]}",
                i,
            )
        for dep in self.graph.deps_before[origin]:
            if not self.complete(self.executed_n, dep):
                self.fail(
                    "PremiseViolation",
                    f"executed({tid!r}) before dependence {dep!r} executed",
                    i,
                )
        for child in self.graph.children[origin]:
            if not self.complete(self.executed_n, child):
                self.fail(
                    "PremiseViolation",
                    f"executed({tid!r}) before child {child!r} executed",
                    i,
                )
        self.executed[tid] = (e.node, e.proc)
        self.executed_n[origin] += 1


def check_trace(trace, graph: TaskGraph, mapping: MappingFn) -> list[TraceDiagnostic]:
    """Verify a trace against the rule premises; empty result means valid."""
    return _Checker(trace, graph, mapping).run()
