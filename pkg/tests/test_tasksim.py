"""Graph loading, shard policy, lifecycle rules, and the trace checker."""

import json
import random
from collections import Counter
from pathlib import Path

import pytest

from graphgen import block2d_mapping, random_graph_doc
from procmap.errors import CyclicDependence, EmptyTask, MultipleRoots, SchemaError, Stuck
from procmap.spaces import MachineShape
from procmap.tasksim import (
    IndexTask,
    LogEntry,
    ShardDistribute,
    ShardLocal,
    Simulator,
    Trace,
    check_trace,
    expand_shards,
    load_taskgraph,
    run_to_quiescence,
    shard_policy,
)

CORPUS = Path(__file__).parent / "corpus"
GPU22 = MachineShape("GPU", 2, 2)
BLOCK22 = block2d_mapping(2, 2)


def fghk_graph():
    return load_taskgraph((CORPUS / "fghk.json").read_text())


def single_task_doc():
    return {"tasks": [{"id": "main", "points": [[0, 0]], "ispace": [2, 2]}]}


# -- loading --------------------------------------------------------------------


def test_load_fghk():
    g = fghk_graph()
    assert g.root == "f"
    assert g.children["f"] == ("g", "h", "k")
    assert g.sibling_deps_before["k"] == ("g", "h")
    assert g.ispaces["g"] == (2, 2)


def test_load_single_root():
    g = load_taskgraph(single_task_doc())
    assert g.root == "main"
    assert g.children["main"] == ()


def test_load_bbox_ispace_default():
    g = load_taskgraph({"tasks": [{"id": "a", "points": [[1, 3], [2, 0]]}]})
    assert g.ispaces["a"] == (3, 4)


def test_load_cycle_in_deps():
    doc = json.loads((CORPUS / "fghk.json").read_text())
    doc["deps"].append({"before": "k", "after": "g"})
    with pytest.raises(CyclicDependence):
        load_taskgraph(doc)


def test_load_self_dep():
    doc = single_task_doc()
    doc["deps"] = [{"before": "main", "after": "main"}]
    with pytest.raises(CyclicDependence):
        load_taskgraph(doc)


def test_load_multiple_roots():
    doc = {"tasks": [{"id": "a", "points": [[0]]}, {"id": "b", "points": [[0]]}]}
    with pytest.raises(MultipleRoots):
        load_taskgraph(doc)


def test_load_schema_errors():
    bad_docs = [
        "not json at all {",
        {"tasks": []},
        {"tasks": [{"id": "a/0", "points": [[0]]}]},
        {"tasks": [{"id": "a", "points": []}]},
        {"tasks": [{"id": "a", "points": [[0]]}, {"id": "a", "points": [[1]]}]},
        {"tasks": [{"id": "a", "points": [[0]]}], "parent": [{"parent": "a", "child": "zzz"}]},
        {"tasks": [{"id": "a", "points": [[0], [0, 1]]}]},
        {"tasks": [{"id": "a", "points": [[0]]}, {"id": "b", "points": [[0]]}],
         "parent": [{"parent": "a", "child": "b"}], "siblings": {"a": ["b", "c"]}},
    ]
    for doc in bad_docs:
        with pytest.raises(SchemaError):
            load_taskgraph(doc)


def test_load_parent_cycle():
    doc = {
        "tasks": [{"id": "r", "points": [[0]]}, {"id": "a", "points": [[0]]},
                  {"id": "b", "points": [[0]]}],
        "parent": [{"parent": "a", "child": "b"}, {"parent": "b", "child": "a"}],
    }
    with pytest.raises(SchemaError):
        load_taskgraph(doc)


# -- shard policy ---------------------------------------------------------------


def test_shard_local_when_single_target():
    t = IndexTask("a", ((0, 0), (0, 1)))
    decision = shard_policy(t, lambda p, s: (1, 0), (2, 2))
    assert decision == ShardLocal(1)


def test_shard_distribute_splits_minimum_class():
    t = IndexTask("a", tuple((i, j) for i in range(6) for j in range(6)))
    decision = shard_policy(t, BLOCK22, (6, 6))
    assert isinstance(decision, ShardDistribute)
    assert decision.left.id == "a/0" and decision.right.id == "a/1"
    # the minimum class is processor (0, 0): the 3x3 corner block
    assert set(decision.left.points) == {(i, j) for i in range(3) for j in range(3)}
    assert len(decision.right.points) == 27
    assert decision.left_node == 0


def test_shard_empty_task():
    with pytest.raises(EmptyTask):
        shard_policy(IndexTask("a", ()), BLOCK22, (2, 2))


def test_expand_terminates_one_leaf_per_processor():
    t = IndexTask("a", tuple((i, j) for i in range(6) for j in range(6)))
    tree = expand_shards(t, BLOCK22, (6, 6))
    assert len(tree.leaves) == 4
    assert sorted(tree.targets.values()) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    got = Counter()
    for leaf in tree.leaves:
        got.update(tree.subtasks[leaf].points)
    assert got == Counter(t.points)


# -- simulation -------------------------------------------------------------------


def test_lone_root_trace():
    g = load_taskgraph(single_task_doc())
    trace = run_to_quiescence(g, BLOCK22, GPU22)
    assert [(e.stage, e.task) for e in trace.entries] == [
        ("launched", "main"), ("executed", "main"),
    ]


def test_leaf_task_step_budget():
    doc = {
        "tasks": [{"id": "r", "points": [[0, 0]], "ispace": [2, 2]},
                  {"id": "leaf", "ispace": [2, 2]}],
        "parent": [{"parent": "r", "child": "leaf"}],
    }
    g = load_taskgraph(doc)
    trace = run_to_quiescence(g, BLOCK22, GPU22)
    # leaf spreads over 4 processors: enqueue + 3 distributes + per-leaf
    # local/map/launch/execute + root execute, plus the bootstrap entry
    assert trace.entries[-1].step <= 5 + 4 * 5
    assert trace.stages_of("leaf") == ["enqueued"]
    executed = [e.task for e in trace.entries if e.stage == "executed"]
    assert executed[-1] == "r"
    assert len(executed) == 5  # 4 fragments of "leaf" plus the root


def test_fghk_ordering():
    g = fghk_graph()
    trace = run_to_quiescence(g, BLOCK22, GPU22)
    stages = {(e.stage, e.task): e.step for e in trace.entries}
    for tid in ("g", "h", "k"):
        assert trace.stages_of(tid) == ["enqueued", "mapped", "launched", "executed"]
    assert stages[("executed", "g")] < stages[("launched", "k")]
    assert stages[("executed", "h")] < stages[("launched", "k")]
    executed = [e.task for e in trace.entries if e.stage == "executed"]
    assert executed[-1] == "f"
    assert check_trace(trace, g, BLOCK22) == []


def test_block_index_task_statistics():
    doc = {
        "tasks": [{"id": "r", "points": [[0, 0]], "ispace": [2, 2]},
                  {"id": "work", "ispace": [6, 6]}],
        "parent": [{"parent": "r", "child": "work"}],
    }
    g = load_taskgraph(doc)
    trace = run_to_quiescence(g, BLOCK22, GPU22)
    assert trace.proc_stats == {
        (0, 0): {"tasks": 1, "points": 9},
        (0, 1): {"tasks": 1, "points": 9},
        (1, 0): {"tasks": 1, "points": 9},
        (1, 1): {"tasks": 1, "points": 9},
    }
    assert check_trace(trace, g, BLOCK22) == []


def test_deterministic_replay():
    g = fghk_graph()
    t1 = run_to_quiescence(g, BLOCK22, GPU22)
    t2 = run_to_quiescence(g, BLOCK22, GPU22)
    assert t1.entries == t2.entries


def test_step_api_and_state():
    g = load_taskgraph(single_task_doc())
    sim = Simulator(g, BLOCK22, GPU22)
    assert sim.state().log[0].stage == "launched"
    assert sim.step() is True
    assert sim.step() is False
    assert sim.done


def test_stuck_on_cross_group_dependence_cycle():
    doc = {
        "tasks": [
            {"id": "r", "points": [[0, 0]], "ispace": [2, 2]},
            {"id": "p1", "points": [[0, 0]], "ispace": [2, 2]},
            {"id": "p2", "points": [[0, 0]], "ispace": [2, 2]},
            {"id": "c1", "points": [[0, 0]], "ispace": [2, 2]},
            {"id": "c2", "points": [[0, 0]], "ispace": [2, 2]},
        ],
        "parent": [
            {"parent": "r", "child": "p1"}, {"parent": "r", "child": "p2"},
            {"parent": "p1", "child": "c1"}, {"parent": "p2", "child": "c2"},
        ],
        "deps": [{"before": "c1", "after": "c2"}, {"before": "c2", "after": "c1"}],
    }
    g = load_taskgraph(doc)  # the cycle is not within one sibling group
    with pytest.raises(Stuck) as info:
        run_to_quiescence(g, BLOCK22, GPU22)
    assert "LAUNCH" in str(info.value)
    assert info.value.blocked


# -- random scheduler ---------------------------------------------------------------


def canonical_order_ok(trace: Trace) -> bool:
    order = {"enqueued": 0, "mapped": 1, "launched": 2, "executed": 3}
    by_task: dict[str, list[int]] = {}
    for e in trace.entries:
        by_task.setdefault(e.task, []).append(order[e.stage])
    return all(v == sorted(v) and len(set(v)) == len(v) for v in by_task.values())


def test_random_scheduler_invariants():
    rng = random.Random(1234)
    for _ in range(8):
        doc = random_graph_doc(rng, max_tasks=25)
        g = load_taskgraph(doc)
        baseline = run_to_quiescence(g, BLOCK22, GPU22)
        base_set = {(e.stage, e.task, e.node, e.proc) for e in baseline.entries}
        for seed in range(6):
            trace = run_to_quiescence(g, BLOCK22, GPU22, scheduler="random", seed=seed)
            assert canonical_order_ok(trace)
            assert check_trace(trace, g, BLOCK22) == []
            assert {(e.stage, e.task, e.node, e.proc) for e in trace.entries} == base_set


# -- checker -----------------------------------------------------------------------


def test_checker_rejects_premature_launch():
    g = fghk_graph()
    trace = run_to_quiescence(g, BLOCK22, GPU22)
    entries = list(trace.entries)
    launch_k = next(i for i, e in enumerate(entries) if e.stage == "launched" and e.task == "k")
    exec_g = next(i for i, e in enumerate(entries) if e.stage == "executed" and e.task == "g")
    assert exec_g < launch_k
    moved = entries[launch_k]
    reordered = entries[:exec_g] + [moved] + [
        e for e in entries[exec_g:] if e is not moved
    ]
    renumbered = [
        LogEntry(e.stage, e.task, e.node, e.proc, i) for i, e in enumerate(reordered)
    ]
    diags = check_trace(Trace(tuple(renumbered)), g, BLOCK22)
    assert any(d.code == "PremiseViolation" for d in diags)


def test_checker_rejects_wrong_processor():
    g = fghk_graph()
    trace = run_to_quiescence(g, BLOCK22, GPU22)
    entries = [
        LogEntry(e.stage, e.task, 1 - e.node, e.proc, e.step)
        if e.stage == "mapped" and e.task == "g" else e
        for e in trace.entries
    ]
    diags = check_trace(Trace(tuple(entries)), g, BLOCK22)
    assert any(d.code == "MappingMismatch" for d in diags)


def test_checker_rejects_unknown_task_and_bad_steps():
    g = fghk_graph()
    trace = run_to_quiescence(g, BLOCK22, GPU22)
    entries = list(trace.entries)
    entries.append(LogEntry("executed", "ghost", 0, 0, entries[-1].step + 1))
    entries.append(LogEntry("executed", "ghost2", 0, 0, 0))
    diags = check_trace(Trace(tuple(entries)), g, BLOCK22)
    codes = {d.code for d in diags}
    assert "UnknownTask" in codes
    assert "StepOrder" in codes


def test_checker_accepts_wire_records():
    g = fghk_graph()
    trace = run_to_quiescence(g, BLOCK22, GPU22)
    assert check_trace(trace.records(), g, BLOCK22) == []


def test_checker_rejects_root_fragments_and_root_mapping():
    g = fghk_graph()
    trace = run_to_quiescence(g, BLOCK22, GPU22)
    entries = list(trace.entries)
    last = entries[-1].step
    entries.append(LogEntry("mapped", "f/0", 0, 0, last + 1))
    entries.append(LogEntry("mapped", "f", 0, 0, last + 2))
    diags = check_trace(Trace(tuple(entries)), g, BLOCK22)
    codes = sorted(d.code for d in diags)
    assert "UnknownTask" in codes
    assert "PremiseViolation" in codes
