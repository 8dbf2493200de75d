"""Task graphs: index tasks, the parent forest, dependences, sibling order.

The JSON document layout:

    {
      "tasks":   [{"id": "g", "points": [[0, 0], [0, 1]]},
                  {"id": "h", "ispace": [2, 2]}],          # rectangular shorthand
      "parent":  [{"parent": "f", "child": "g"}, ...],
      "deps":    [{"before": "g", "after": "k"}, ...],      # k depends on g
      "siblings": {"f": ["g", "h", "k"]}                    # program order per parent
    }

Sub-task ids created by distribution extend the original id with "/<n>", so
user task ids may not contain "/".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..errors import CyclicDependence, MultipleRoots, SchemaError


@dataclass(frozen=True)
class IndexTask:
    """A task parameterized by a non-empty set of iteration points."""

    id: str
    points: tuple[tuple[int, ...], ...]


@dataclass
class TaskGraph:
    tasks: dict[str, IndexTask]
    root: str
    parent: dict[str, str]
    children: dict[str, tuple[str, ...]]  # program (sibling) order
    deps: frozenset[tuple[str, str]]  # (before, after)
    ispaces: dict[str, tuple[int, ...]]
    deps_before: dict[str, tuple[str, ...]] = field(default_factory=dict)
    deps_after: dict[str, tuple[str, ...]] = field(default_factory=dict)
    sibling_deps_before: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        before: dict[str, list[str]] = {t: [] for t in self.tasks}
        after: dict[str, list[str]] = {t: [] for t in self.tasks}
        sib: dict[str, list[str]] = {t: [] for t in self.tasks}
        for b, a in sorted(self.deps):
            before[a].append(b)
            after[b].append(a)
            if self.parent.get(a) is not None and self.parent.get(a) == self.parent.get(b):
                sib[a].append(b)
        self.deps_before = {t: tuple(v) for t, v in before.items()}
        self.deps_after = {t: tuple(v) for t, v in after.items()}
        self.sibling_deps_before = {t: tuple(v) for t, v in sib.items()}

    def earlier_siblings(self, tid: str) -> tuple[str, ...]:
        parent = self.parent.get(tid)
        if parent is None:
            return ()
        order = self.children[parent]
        return order[: order.index(tid)]


def _expand_ispace(extents) -> list[tuple[int, ...]]:
    pts = [()]
    for e in extents:
        pts = [p + (i,) for p in pts for i in range(e)]
    return pts


def load_taskgraph(document) -> TaskGraph:
    """Parse and validate a task-graph document (JSON text or a dict)."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise SchemaError("task graph document must be a JSON object")
    raw_tasks = document.get("tasks")
    if not isinstance(raw_tasks, list) or not raw_tasks:
        raise SchemaError("'tasks' must be a non-empty list")

    tasks: dict[str, IndexTask] = {}
    ispaces: dict[str, tuple[int, ...]] = {}
    for item in raw_tasks:
        if not isinstance(item, dict) or not isinstance(item.get("id"), str):
            raise SchemaError(f"task entries need a string 'id': {item!r}")
        tid = item["id"]
        if not tid or "/" in tid:
            raise SchemaError(f"task id {tid!r} is empty or contains '/'")
        if tid in tasks:
            raise SchemaError(f"duplicate task id {tid!r}")
        if "points" in item:
            raw_points = item["points"]
            if not isinstance(raw_points, list) or not raw_points:
                raise SchemaError(f"task {tid!r} has no points")
            points = []
            for p in raw_points:
                if not isinstance(p, list) or not all(isinstance(c, int) and c >= 0 for c in p):
                    raise SchemaError(f"bad point {p!r} in task {tid!r}")
                points.append(tuple(p))
            ranks = {len(p) for p in points}
            if len(ranks) != 1:
                raise SchemaError(f"task {tid!r} mixes point ranks {ranks}")
            if len(set(points)) != len(points):
                raise SchemaError(f"task {tid!r} repeats points")
            declared = item.get("ispace")
            if declared is not None:
                ispaces[tid] = tuple(declared)
            else:
                rank = len(points[0])
                ispaces[tid] = tuple(max(p[i] for p in points) + 1 for i in range(rank))
        elif "ispace" in item:
            extents = item["ispace"]
            if not isinstance(extents, list) or not extents or any(
                not isinstance(e, int) or e < 1 for e in extents
            ):
                raise SchemaError(f"task {tid!r} has bad ispace {extents!r}")
            points = _expand_ispace(extents)
            ispaces[tid] = tuple(extents)
        else:
            raise SchemaError(f"task {tid!r} needs 'points' or 'ispace'")
        tasks[tid] = IndexTask(tid, tuple(points))

    parent: dict[str, str] = {}
    for edge in document.get("parent", []):
        p, c = edge.get("parent"), edge.get("child")
        if p not in tasks or c not in tasks:
            raise SchemaError(f"parent edge references unknown task: {edge!r}")
        if c in parent:
            raise SchemaError(f"task {c!r} has two parents")
        parent[c] = p

    roots = [t for t in tasks if t not in parent]
    if len(roots) > 1:
        raise MultipleRoots(f"multiple root tasks: {sorted(roots)}")
    if not roots:
        raise SchemaError("parent relation has a cycle (no root task)")
    root = roots[0]
    for tid in tasks:
        seen = {tid}
        cur = tid
        while cur in parent:
            cur = parent[cur]
            if cur in seen:
                raise SchemaError(f"parent relation has a cycle through {cur!r}")
            seen.add(cur)

    children: dict[str, list[str]] = {t: [] for t in tasks}
    for tid in tasks:  # preserves tasks-list order as default program order
        if tid in parent:
            children[parent[tid]].append(tid)

    sibling_spec = document.get("siblings", {})
    if not isinstance(sibling_spec, dict):
        raise SchemaError("'siblings' must map parent id to an ordered id list")
    for p, order in sibling_spec.items():
        if p not in tasks:
            raise SchemaError(f"siblings entry for unknown task {p!r}")
        if sorted(order) != sorted(children[p]):
            raise SchemaError(
                f"siblings of {p!r} must be a permutation of its children {children[p]}"
            )
        children[p] = list(order)

    deps = set()
    for edge in document.get("deps", []):
        b, a = edge.get("before"), edge.get("after")
        if b not in tasks or a not in tasks:
            raise SchemaError(f"dep references unknown task: {edge!r}")
        if b == a:
            raise CyclicDependence(f"task {b!r} depends on itself")
        deps.add((b, a))

    # dependences restricted to any sibling group must be acyclic
    for p, group in children.items():
        group_set = set(group)
        local = [(b, a) for (b, a) in deps if b in group_set and a in group_set]
        _check_acyclic(local, group, p)

    return TaskGraph(
        tasks=tasks,
        root=root,
        parent=parent,
        children={p: tuple(c) for p, c in children.items()},
        deps=frozenset(deps),
        ispaces=ispaces,
    )


def _check_acyclic(edges, group, parent_id) -> None:
    succs: dict[str, list[str]] = {t: [] for t in group}
    indeg = {t: 0 for t in group}
    for b, a in edges:
        succs[b].append(a)
        indeg[a] += 1
    ready = [t for t in group if indeg[t] == 0]
    seen = 0
    while ready:
        t = ready.pop()
        seen += 1
        for s in succs[t]:
            indeg[s] -= 1
            if indeg[s] == 0:
                ready.append(s)
    if seen != len(group):
        raise CyclicDependence(
            f"dependences among children of {parent_id!r} form a cycle"
        )
