"""Deterministic simulator of the task lifecycle semantics.

Tasks move through enqueued -> mapped -> launched -> executed, driven by six
rules over per-node queues:

* ENQUEUE     parent launched and all earlier siblings enqueued; the task
              joins the enqueued queue of its parent's node.
* DISTRIBUTE  a queued task whose points target several processors splits in
              two (the points of the lexicographically smallest target vs.
              the rest); the halves join the queues of their target nodes.
* LOCAL       a queued task whose points share one processor moves to the
              mapped queue of its target node.
* MAP         once every sibling it depends on is fully mapped, the task
              leaves the queue and logs its processor.
* LAUNCH      all dependence predecessors executed and the task mapped.
* EXECUTE     additionally every child is executed.

The root is bootstrapped as launched on processor (0, 0) at step 0 so its
children can enqueue; only that launched entry appears in the log.

A task that distributed is considered mapped / launched / executed once all
of its fragments are; fragments inherit the origin's dependences and parent.
Any queued task may be picked (queue position does not gate applicability),
which keeps every schedule deadlock-free for acyclic dependences.

The default scheduler is deterministic: rule priority EXECUTE > LAUNCH > MAP
> LOCAL > DISTRIBUTE > ENQUEUE, ties broken by smallest task id.  A seeded
random scheduler picks uniformly among all applicable moves instead.
"""

from __future__ import annotations

import heapq
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from ..errors import EmptyTask, Stuck
from ..spaces import MachineShape
from .graph import IndexTask, TaskGraph
from .trace import ENQUEUED, EXECUTED, LAUNCHED, MAPPED, LogEntry, Trace

MappingFn = Callable[[tuple[int, ...], tuple[int, ...]], tuple[int, int]]

R_EXECUTE, R_LAUNCH, R_MAP, R_LOCAL, R_DISTRIBUTE, R_ENQUEUE = range(6)
RULE_NAMES = ("EXECUTE", "LAUNCH", "MAP", "LOCAL", "DISTRIBUTE", "ENQUEUE")


@dataclass(frozen=True)
class ShardLocal:
    """All points of the task target one processor on this node."""

    node: int


@dataclass(frozen=True)
class ShardDistribute:
    """Binary split of an index task, with the target node of each half."""

    left: IndexTask
    right: IndexTask
    left_node: int
    right_node: int


def shard_policy(task: IndexTask, mapping: MappingFn, ispace) -> ShardLocal | ShardDistribute:
    """Decide whether a task stays local or splits across processors.

    If every point maps to one processor the task is local to that node.
    Otherwise the points mapping to the lexicographically smallest processor
    form one fresh sub-task and the rest form another; applying the policy
    repeatedly therefore terminates with one task per distinct processor.
    """
    if not task.points:
        raise EmptyTask(f"task {task.id!r} has no points")
    ispace = tuple(ispace)
    procs = [mapping(p, ispace) for p in task.points]
    distinct = set(procs)
    if len(distinct) == 1:
        return ShardLocal(procs[0][0])
    low = min(distinct)
    left_pts = tuple(p for p, t in zip(task.points, procs) if t == low)
    right_pts = tuple(p for p, t in zip(task.points, procs) if t != low)
    left = IndexTask(f"{task.id}/0", left_pts)
    right = IndexTask(f"{task.id}/1", right_pts)
    right_low = min(t for t in procs if t != low)
    return ShardDistribute(left, right, low[0], right_low[0])


@dataclass(frozen=True)
class ShardTree:
    """Deterministic expansion of one task under the shard policy."""

    decisions: dict[str, ShardLocal | ShardDistribute]
    subtasks: dict[str, IndexTask]
    leaves: tuple[str, ...]
    targets: dict[str, tuple[int, int]]  # leaf id -> common (node, proc)


def expand_shards(task: IndexTask, mapping: MappingFn, ispace) -> ShardTree:
    """Apply the shard policy to a fixpoint, recording every decision."""
    decisions: dict[str, ShardLocal | ShardDistribute] = {}
    subtasks: dict[str, IndexTask] = {}
    leaves: list[str] = []
    targets: dict[str, tuple[int, int]] = {}
    stack = [task]
    while stack:
        t = stack.pop()
        subtasks[t.id] = t
        decision = shard_policy(t, mapping, ispace)
        decisions[t.id] = decision
        if isinstance(decision, ShardLocal):
            leaves.append(t.id)
            targets[t.id] = mapping(t.points[0], tuple(ispace))
        else:
            assert set(decision.left.points) | set(decision.right.points) == set(t.points)
            stack.append(decision.right)
            stack.append(decision.left)
    return ShardTree(decisions, subtasks, tuple(sorted(leaves)), targets)


@dataclass
class ExecState:
    """Queue contents and the log, as visible simulator state."""

    enqueued_queues: dict[int, list[str]]
    mapped_queues: dict[int, list[str]]
    log: tuple[LogEntry, ...]


@dataclass
class _Frag:
    task: IndexTask
    origin: str
    decision: ShardLocal | ShardDistribute
    target: tuple[int, int] | None
    queue_node: int | None = None
    in_enqueued: bool = False
    in_mapped_queue: bool = False
    mapped: bool = False
    launched: bool = False
    executed: bool = False


@dataclass
class _Origin:
    tid: str
    leaves_total: int
    unmapped: int
    unlaunched: int
    unexecuted: int
    map_deps_remaining: int
    exec_deps_remaining: int
    children_remaining: int
    enqueue_ptr: int = 0
    in_mapped_queue: set = field(default_factory=set)
    mapped_unlaunched: set = field(default_factory=set)
    launched_unexecuted: set = field(default_factory=set)

    @property
    def map_complete(self) -> bool:
        return self.unmapped == 0

    @property
    def launch_complete(self) -> bool:
        return self.unlaunched == 0

    @property
    def exec_complete(self) -> bool:
        return self.unexecuted == 0


class Simulator:
    """One run of the execution semantics over a task graph and a mapping."""

    def __init__(
        self,
        graph: TaskGraph,
        mapping: MappingFn,
        machine: MachineShape,
        scheduler: str = "deterministic",
        seed: int | None = None,
    ):
        if scheduler not in ("deterministic", "random"):
            raise ValueError(f"unknown scheduler {scheduler!r}")
        self.graph = graph
        self.mapping = mapping
        self.machine = machine
        self.scheduler = scheduler
        self.rng = random.Random(seed)
        self.step_no = 0
        self.log: list[LogEntry] = []
        self.e_queues: dict[int, deque[str]] = {}
        self.m_queues: dict[int, deque[str]] = {}

        self.trees: dict[str, ShardTree] = {}
        self.enqueue_node: dict[str, int] = {}
        for tid, task in graph.tasks.items():
            if tid == graph.root:
                continue
            tree = expand_shards(task, mapping, graph.ispaces[tid])
            self.trees[tid] = tree
            self.enqueue_node[tid] = min(tree.targets.values())[0]
        self.enqueue_node[graph.root] = 0

        self.origins: dict[str, _Origin] = {}
        for tid in graph.tasks:
            leaves = 1 if tid == graph.root else len(self.trees[tid].leaves)
            self.origins[tid] = _Origin(
                tid=tid,
                leaves_total=leaves,
                unmapped=leaves,
                unlaunched=leaves,
                unexecuted=leaves,
                map_deps_remaining=len(graph.sibling_deps_before[tid]),
                exec_deps_remaining=len(graph.deps_before[tid]),
                children_remaining=len(graph.children[tid]),
            )

        self.frags: dict[str, _Frag] = {}

        # per-rule heaps for the deterministic scheduler, one flat pool for
        # the random one; entries are validated against current state on pop
        self.heaps: list[list[str]] = [[] for _ in RULE_NAMES]
        self.pool: list[tuple[int, str]] = []
        self.pool_members: set[tuple[int, str]] = set()

        self._bootstrap_root()

    # -- setup -----------------------------------------------------------------

    def _bootstrap_root(self) -> None:
        root = self.graph.root
        origin = self.origins[root]
        frag = _Frag(
            task=self.graph.tasks[root],
            origin=root,
            decision=ShardLocal(0),
            target=(0, 0),
            mapped=True,
            launched=True,
        )
        self.frags[root] = frag
        origin.unmapped = 0
        origin.unlaunched = 0
        origin.launched_unexecuted.add(root)
        self._emit(LAUNCHED, root, 0, 0)
        self.step_no = 1
        if origin.children_remaining == 0:
            self._push(R_EXECUTE, root)
        else:
            self._push_next_child(root)

    # -- candidate plumbing -----------------------------------------------------

    def _push(self, rule: int, tid: str) -> None:
        if self.scheduler == "deterministic":
            heapq.heappush(self.heaps[rule], tid)
        else:
            key = (rule, tid)
            if key not in self.pool_members:
                self.pool_members.add(key)
                self.pool.append(key)

    def _valid(self, rule: int, tid: str) -> bool:
        if rule == R_ENQUEUE:
            if tid not in self.origins or tid == self.graph.root:
                return False
            parent = self.graph.parent[tid]
            p_origin = self.origins[parent]
            order = self.graph.children[parent]
            return (
                p_origin.launch_complete
                and p_origin.enqueue_ptr < len(order)
                and order[p_origin.enqueue_ptr] == tid
            )
        frag = self.frags.get(tid)
        if frag is None:
            return False
        if rule == R_DISTRIBUTE:
            return frag.in_enqueued and isinstance(frag.decision, ShardDistribute)
        if rule == R_LOCAL:
            return frag.in_enqueued and isinstance(frag.decision, ShardLocal)
        if rule == R_MAP:
            return frag.in_mapped_queue and self.origins[frag.origin].map_deps_remaining == 0
        if rule == R_LAUNCH:
            return (
                frag.mapped
                and not frag.launched
                and self.origins[frag.origin].exec_deps_remaining == 0
            )
        if rule == R_EXECUTE:
            return (
                frag.launched
                and not frag.executed
                and self.origins[frag.origin].children_remaining == 0
            )
        return False

    def _pick(self) -> tuple[int, str] | None:
        if self.scheduler == "deterministic":
            for rule in range(6):
                heap = self.heaps[rule]
                while heap:
                    tid = heap[0]
                    if self._valid(rule, tid):
                        heapq.heappop(heap)
                        return rule, tid
                    heapq.heappop(heap)
            return None
        while self.pool:
            i = self.rng.randrange(len(self.pool))
            rule, tid = self.pool[i]
            self.pool[i] = self.pool[-1]
            self.pool.pop()
            self.pool_members.discard((rule, tid))
            if self._valid(rule, tid):
                return rule, tid
        return None

    # -- rule effects ----------------------------------------------------------

    def _emit(self, stage: str, task: str, node: int | None, proc: int | None) -> None:
        self.log.append(LogEntry(stage, task, node, proc, self.step_no))

    def _push_next_child(self, parent: str) -> None:
        origin = self.origins[parent]
        order = self.graph.children[parent]
        if origin.enqueue_ptr < len(order):
            self._push(R_ENQUEUE, order[origin.enqueue_ptr])

    def _enter_enqueued(self, task: IndexTask, origin: str, node: int) -> None:
        tree = self.trees[origin]
        decision = tree.decisions[task.id]
        target = tree.targets.get(task.id)
        frag = _Frag(task=task, origin=origin, decision=decision, target=target,
                     queue_node=node, in_enqueued=True)
        self.frags[task.id] = frag
        self.e_queues.setdefault(node, deque()).append(task.id)
        rule = R_LOCAL if isinstance(decision, ShardLocal) else R_DISTRIBUTE
        self._push(rule, task.id)

    def _apply(self, rule: int, tid: str) -> None:
        if rule == R_ENQUEUE:
            parent = self.graph.parent[tid]
            node = self.enqueue_node[parent]
            self._emit(ENQUEUED, tid, node, None)
            self._enter_enqueued(self.graph.tasks[tid], tid, node)
            self.origins[parent].enqueue_ptr += 1
            self._push_next_child(parent)
            return

        frag = self.frags[tid]
        origin = self.origins[frag.origin]
        if rule == R_DISTRIBUTE:
            self.e_queues[frag.queue_node].remove(tid)
            frag.in_enqueued = False
            d = frag.decision
            self._enter_enqueued(d.left, frag.origin, d.left_node)
            self._enter_enqueued(d.right, frag.origin, d.right_node)
            return
        if rule == R_LOCAL:
            self.e_queues[frag.queue_node].remove(tid)
            frag.in_enqueued = False
            node = frag.decision.node
            frag.queue_node = node
            frag.in_mapped_queue = True
            self.m_queues.setdefault(node, deque()).append(tid)
            origin.in_mapped_queue.add(tid)
            if origin.map_deps_remaining == 0:
                self._push(R_MAP, tid)
            return
        if rule == R_MAP:
            self.m_queues[frag.queue_node].remove(tid)
            frag.in_mapped_queue = False
            frag.mapped = True
            node, proc = frag.target
            self._emit(MAPPED, tid, node, proc)
            origin.in_mapped_queue.discard(tid)
            origin.mapped_unlaunched.add(tid)
            origin.unmapped -= 1
            if origin.exec_deps_remaining == 0:
                self._push(R_LAUNCH, tid)
            if origin.map_complete:
                for succ in self.graph.deps_after[frag.origin]:
                    if frag.origin in self.graph.sibling_deps_before[succ]:
                        s = self.origins[succ]
                        s.map_deps_remaining -= 1
                        if s.map_deps_remaining == 0:
                            for member in sorted(s.in_mapped_queue):
                                self._push(R_MAP, member)
            return
        if rule == R_LAUNCH:
            frag.launched = True
            node, proc = frag.target
            self._emit(LAUNCHED, tid, node, proc)
            origin.mapped_unlaunched.discard(tid)
            origin.launched_unexecuted.add(tid)
            origin.unlaunched -= 1
            if origin.children_remaining == 0:
                self._push(R_EXECUTE, tid)
            if origin.launch_complete:
                self._push_next_child(frag.origin)
            return
        if rule == R_EXECUTE:
            frag.executed = True
            node, proc = frag.target
            self._emit(EXECUTED, tid, node, proc)
            origin.launched_unexecuted.discard(tid)
            origin.unexecuted -= 1
            if origin.exec_complete:
                for succ in self.graph.deps_after[frag.origin]:
                    s = self.origins[succ]
                    s.exec_deps_remaining -= 1
                    if s.exec_deps_remaining == 0:
                        for member in sorted(s.mapped_unlaunched):
                            self._push(R_LAUNCH, member)
                parent = self.graph.parent.get(frag.origin)
                if parent is not None:
                    p = self.origins[parent]
                    p.children_remaining -= 1
                    if p.children_remaining == 0:
                        for member in sorted(p.launched_unexecuted):
                            self._push(R_EXECUTE, member)
            return
        raise AssertionError(f"unknown rule {rule}")

    # -- driving ------------------------------------------------------------------

    def step(self) -> bool:
        """Apply exactly one rule; False when no rule is applicable."""
        move = self._pick()
        if move is None:
            return False
        self._apply(*move)
        self.step_no += 1
        return True

    @property
    def done(self) -> bool:
        return all(o.exec_complete for o in self.origins.values())

    def state(self) -> ExecState:
        return ExecState(
            enqueued_queues={n: list(q) for n, q in self.e_queues.items() if q},
            mapped_queues={n: list(q) for n, q in self.m_queues.items() if q},
            log=tuple(self.log),
        )

    def run(self) -> Trace:
        while self.step():
            pass
        if not self.done:
            raise Stuck(self._diagnose(), blocked=self._blocked_tasks())
        return Trace(tuple(self.log), self._stats())

    def _stats(self) -> dict[tuple[int, int], dict[str, int]]:
        stats: dict[tuple[int, int], dict[str, int]] = {}
        for tid, frag in self.frags.items():
            if tid == self.graph.root or frag.target is None or not frag.executed:
                continue
            entry = stats.setdefault(frag.target, {"tasks": 0, "points": 0})
            entry["tasks"] += 1
            entry["points"] += len(frag.task.points)
        return stats

    def _blocked_tasks(self) -> list[str]:
        return sorted(o.tid for o in self.origins.values() if not o.exec_complete)

    def _diagnose(self) -> str:
        for tid in self._blocked_tasks():
            origin = self.origins[tid]
            frag = self.frags.get(tid)
            if frag is None:
                parent = self.graph.parent[tid]
                if not self.origins[parent].launch_complete:
                    return f"stuck: ENQUEUE of {tid!r} needs parent {parent!r} launched"
                return f"stuck: ENQUEUE of {tid!r} waits on an earlier sibling"
            if not origin.map_complete and origin.map_deps_remaining > 0:
                missing = [
                    d for d in self.graph.sibling_deps_before[tid]
                    if not self.origins[d].map_complete
                ]
                return f"stuck: MAP of {tid!r} needs mapped siblings {missing}"
            if not origin.launch_complete and origin.exec_deps_remaining > 0:
                missing = [
                    d for d in self.graph.deps_before[tid]
                    if not self.origins[d].exec_complete
                ]
                return f"stuck: LAUNCH of {tid!r} needs executed predecessors {missing}"
            if origin.children_remaining > 0:
                missing = [
                    c for c in self.graph.children[tid]
                    if not self.origins[c].exec_complete
                ]
                return f"stuck: EXECUTE of {tid!r} needs executed children {missing}"
        return "stuck: no applicable rule"


def step(sim: Simulator) -> bool:
    """Advance a simulator by one rule application."""
    return sim.step()


def run_to_quiescence(
    graph: TaskGraph,
    mapping: MappingFn,
    machine: MachineShape,
    scheduler: str = "deterministic",
    seed: int | None = None,
) -> Trace:
    """Run the semantics until no rule applies; raises Stuck if unfinished."""
    return Simulator(graph, mapping, machine, scheduler=scheduler, seed=seed).run()
