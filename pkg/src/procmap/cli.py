"""Command-line surface.

Subcommands: parse, map, decompose, commvol, simulate, sweep.  Every
subcommand emits a report whose primary payload is a flat list of records;
`--format json` wraps the records (plus any summary sections) in one JSON
object, `--format csv` writes the records as rows.  Tuples are rendered as
semicolon-joined strings and exact rationals as fraction strings in both
formats, so the two encodings carry identical records.

Exit codes: 0 success, 1 domain error (diagnostics on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from fractions import Fraction

from . import commvol as cv
from . import factorize as fz
from .dsl import compile_mapper, parse as parse_mapper, validate
from .dsl.validate import errors_of
from .errors import ProcMapError
from .spaces import MachineShape
from .tasksim import check_trace, load_taskgraph, run_to_quiescence
from .dsl import ast as dsl_ast


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.replace(";", ",").split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _machine(args) -> MachineShape:
    kind, nodes, procs = "GPU", 2, 2
    if args.machine_config:
        try:
            with open(args.machine_config) as fh:
                doc = json.load(fh)
            kind = doc.get("kind", kind)
            nodes = int(doc["nodes"])
            procs = int(doc["procs_per_node"])
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise ProcMapError(
                f"bad machine config {args.machine_config!r}: {exc}"
            ) from exc
    if args.machine is not None:
        try:
            raw_nodes, raw_procs = args.machine.lower().split("x")
            nodes, procs = int(raw_nodes), int(raw_procs)
        except (ValueError, TypeError) as exc:
            raise ProcMapError(f"bad --machine value {args.machine!r}: {exc}") from exc
    if args.kind is not None:
        kind = args.kind
    try:
        return MachineShape(kind, nodes, procs)
    except ValueError as exc:
        raise ProcMapError(str(exc)) from exc


def _join(values) -> str:
    return ";".join(str(v) for v in values)


def _frac(value: Fraction) -> str:
    return str(value)


def write_report(records, extras, args) -> None:
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        if args.format == "json":
            payload = {"records": records}
            payload.update(extras)
            json.dump(payload, out, indent=2)
            out.write("\n")
        else:
            fields: list[str] = []
            for r in records:
                for key in r:
                    if key not in fields:
                        fields.append(key)
            writer = csv.DictWriter(out, fieldnames=fields)
            writer.writeheader()
            for r in records:
                writer.writerow({k: ("" if v is None else v) for k, v in r.items()})
    finally:
        if args.out:
            out.close()


def _load_mapper(path: str):
    with open(path) as fh:
        source = fh.read()
    program = parse_mapper(source)
    diags = validate(program)
    for d in diags:
        print(f"{path}:{d}", file=sys.stderr)
    if errors_of(diags):
        raise ProcMapError(f"mapper {path!r} has validation errors")
    return program


# -- subcommands ------------------------------------------------------------------


def cmd_parse(args) -> int:
    program = _load_mapper(args.mapper)
    records = []
    for item in program.items:
        kind = type(item).__name__
        if isinstance(item, dsl_ast.GlobalBinding):
            records.append({"kind": kind, "name": item.name})
        elif isinstance(item, dsl_ast.FuncDef):
            records.append(
                {"kind": kind, "name": item.name, "params": _join(p.name for p in item.params)}
            )
        elif isinstance(item, dsl_ast.IndexTaskMap):
            records.append({"kind": kind, "task": item.task, "func": item.func})
        elif isinstance(item, dsl_ast.TaskMap):
            records.append({"kind": kind, "task": item.task, "procs": _join(item.procs)})
        elif isinstance(item, dsl_ast.DataMap):
            records.append({
                "kind": kind, "task": item.task, "region": item.region,
                "proc": item.proc, "memories": _join(item.memories),
            })
        elif isinstance(item, dsl_ast.DataLayout):
            parts = [
                f"{c.name}=={c.value}" if isinstance(c, dsl_ast.AlignConstraint) else c
                for c in item.constraints
            ]
            records.append({
                "kind": kind, "task": item.task, "region": item.region,
                "proc": item.proc, "constraints": _join(parts),
            })
        elif isinstance(item, dsl_ast.GarbageCollect):
            records.append({"kind": kind, "task": item.task, "arg": item.arg})
        elif isinstance(item, dsl_ast.Backpressure):
            records.append({"kind": kind, "task": item.task, "depth": item.depth})
    write_report(records, {"mapper": args.mapper}, args)
    return 0


def cmd_map(args) -> int:
    program = _load_mapper(args.mapper)
    machine = _machine(args)
    fn = compile_mapper(program, args.task, machine)
    records = []
    counts: dict[tuple[int, int], int] = {}
    points = [()]
    for extent in args.ispace:
        points = [p + (i,) for p in points for i in range(extent)]
    for pt in points:
        node, proc = fn(pt, args.ispace)
        records.append({"point": _join(pt), "node": node, "proc": proc})
        counts[(node, proc)] = counts.get((node, proc), 0) + 1
    proc_counts = [
        {"node": n, "proc": p, "points": c} for (n, p), c in sorted(counts.items())
    ]
    write_report(
        records,
        {"task": args.task, "ispace": _join(args.ispace), "proc_counts": proc_counts},
        args,
    )
    return 0


def _objective(args, k: int):
    if args.objective == "isotropic":
        return fz.Isotropic()
    halo = args.halo if args.halo is not None else (1,) * k
    if args.objective == "halo":
        return fz.AnisotropicHalo(halo)
    dims = frozenset(args.transpose_dims or ())
    return fz.WithTranspose(halo, dims)


def cmd_decompose(args) -> int:
    extents = args.extents
    objective = _objective(args, len(extents))
    best, best_score = fz.search_optimal(args.processors, extents, objective, strict=args.strict)
    greedy = fz.greedy_grid(args.processors, len(extents))
    greedy_score = fz.score(greedy, extents, objective)
    bound = fz.amgm_lower_bound(args.processors, extents)
    ratio = float(greedy_score / best_score) if best_score else 1.0
    record = {
        "processors": args.processors,
        "extents": _join(extents),
        "objective": args.objective,
        "optimal": _join(best),
        "optimal_score": _frac(best_score),
        "optimal_score_float": float(best_score),
        "optimal_workload": _join(fz.workload_vector(best, extents)),
        "greedy": _join(greedy),
        "greedy_score": _frac(greedy_score),
        "greedy_score_float": float(greedy_score),
        "amgm_bound": bound,
        "improvement_ratio": ratio,
    }
    write_report([record], {}, args)
    return 0


def cmd_commvol(args) -> int:
    grid = cv.BlockGrid(args.extents, args.grid)
    halo = args.halo if args.halo is not None else (1,) * grid.rank
    record = {
        "extents": _join(args.extents),
        "grid": _join(args.grid),
        "halo": _join(halo),
        "surface_volume": _frac(cv.surface_volume(grid)),
        "halo_volume": _frac(cv.halo_volume(grid, halo)),
    }
    if args.transpose_dims:
        record["transpose_dims"] = _join(args.transpose_dims)
        record["transpose_volumes"] = _join(
            _frac(cv.transpose_volume(grid, n)) for n in args.transpose_dims
        )
    if not args.no_oracle:
        record["oracle_count"] = cv.oracle_boundary_count(grid, halo)
    write_report([record], {}, args)
    return 0


def cmd_simulate(args) -> int:
    program = _load_mapper(args.mapper)
    machine = _machine(args)
    with open(args.graph) as fh:
        graph = load_taskgraph(fh.read())
    task = args.task
    if task is None:
        bindings = program.bindings()
        if len(bindings) != 1:
            raise ProcMapError(
                "mapper binds several tasks; pick one with --task "
                f"(bound: {sorted(bindings)})"
            )
        task = next(iter(bindings))
    mapping = compile_mapper(program, task, machine)
    scheduler = "random" if args.seed is not None else "deterministic"
    trace = run_to_quiescence(graph, mapping, machine, scheduler=scheduler, seed=args.seed)
    diags = check_trace(trace, graph, mapping)
    stats = [
        {"node": n, "proc": p, "tasks": s["tasks"], "points": s["points"]}
        for (n, p), s in sorted(trace.proc_stats.items())
    ]
    write_report(
        trace.records(),
        {"stats": stats, "diagnostics": [str(d) for d in diags]},
        args,
    )
    if diags:
        for d in diags:
            print(str(d), file=sys.stderr)
        return 1
    return 0


TABLE3_RATIOS = (1, 2, 4, 8, 16, 32)
TABLE3_AREAS = (10**6, 10**7, 10**8, 2 * 10**8, 4 * 10**8)
TABLE3_GPUS = (4, 8, 16, 32, 64, 128)


def sweep_configs(ratios, areas, gpus_list, gpus_per_node):
    """Model-predicted boundary volumes of optimal vs greedy grids per config.

    Aspect ratio 1:r with per-node area A on n nodes uses the iteration space
    x = round(sqrt(A * n / r)), y = r * x.  Volumes are the analytic closed
    form, not wall-clock measurements.
    """
    records = []
    for ratio in ratios:
        for area in areas:
            for gpus in gpus_list:
                nodes = max(1, gpus // gpus_per_node)
                x = max(1, round(math.sqrt(area * nodes / ratio)))
                y = x * ratio
                extents = (x, y)
                best, _ = fz.search_optimal(gpus, extents)
                greedy = fz.greedy_grid(gpus, 2)
                opt_vol = cv.surface_volume(cv.BlockGrid(extents, best))
                greedy_vol = cv.surface_volume(cv.BlockGrid(extents, greedy))
                vol_ratio = float(greedy_vol / opt_vol) if opt_vol else 1.0
                pct = 100.0 * float((greedy_vol - opt_vol) / greedy_vol) if greedy_vol else 0.0
                records.append({
                    "aspect_ratio": f"1:{ratio}",
                    "area_per_node": area,
                    "gpus": gpus,
                    "nodes": nodes,
                    "extents": _join(extents),
                    "optimal": _join(best),
                    "greedy": _join(greedy),
                    "optimal_volume": _frac(opt_vol),
                    "greedy_volume": _frac(greedy_vol),
                    "volume_ratio": vol_ratio,
                    "improvement_pct": pct,
                })
    return records


def sweep_groups(records):
    """Geometric-mean improvement grouped by each swept parameter."""
    groups = []
    for param in ("aspect_ratio", "area_per_node", "gpus"):
        values = []
        for r in records:
            if r[param] not in values:
                values.append(r[param])
        for value in values:
            ratios = [r["volume_ratio"] for r in records if r[param] == value]
            geomean = math.exp(sum(math.log(x) for x in ratios) / len(ratios))
            groups.append({
                "parameter": param,
                "value": value,
                "configs": len(ratios),
                "geomean_volume_ratio": geomean,
                "geomean_improvement_pct": 100.0 * (1.0 - 1.0 / geomean),
            })
    return groups


def cmd_sweep(args) -> int:
    ratios = args.ratios if args.ratios else TABLE3_RATIOS
    areas = args.areas if args.areas else TABLE3_AREAS
    gpus_list = args.gpus if args.gpus else TABLE3_GPUS
    records = sweep_configs(ratios, areas, gpus_list, args.gpus_per_node)
    groups = sweep_groups(records)
    extras = {
        "volumes": "model-predicted boundary element counts, not wall-clock",
        "groups": groups,
    }
    write_report(records, extras, args)
    return 0


# -- argument wiring --------------------------------------------------------------


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None, help="output file (default stdout)")


def _add_machine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--machine", default=None,
                   help="machine grid, NODESxPROCS (default 2x2)")
    p.add_argument("--kind", choices=("CPU", "GPU", "OMP"), default=None,
                   help="processor kind (default GPU)")
    p.add_argument("--machine-config", default=None,
                   help='JSON file with {"kind", "nodes", "procs_per_node"}')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="procmap",
        description="Mapping toolkit: transform processor spaces, optimize grid "
        "factorizations, model communication volume, and simulate task execution.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse and validate a mapper file")
    p.add_argument("mapper")
    _add_output_flags(p)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("map", help="evaluate a task's mapping over an iteration space")
    p.add_argument("mapper")
    p.add_argument("--task", required=True)
    p.add_argument("--ispace", type=_ints, required=True)
    _add_machine_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("decompose", help="search the optimal grid factorization")
    p.add_argument("processors", type=int)
    p.add_argument("--extents", type=_ints, required=True)
    p.add_argument("--objective", choices=("isotropic", "halo", "transpose"),
                   default="isotropic")
    p.add_argument("--halo", type=_ints, default=None)
    p.add_argument("--transpose-dims", type=_ints, default=None)
    p.add_argument("--strict", action="store_true",
                   help="only consider factorizations dividing the extents")
    _add_output_flags(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("commvol", help="communication volumes of a block grid")
    p.add_argument("--extents", type=_ints, required=True)
    p.add_argument("--grid", type=_ints, required=True)
    p.add_argument("--halo", type=_ints, default=None)
    p.add_argument("--transpose-dims", type=_ints, default=None)
    p.add_argument("--no-oracle", action="store_true")
    _add_output_flags(p)
    p.set_defaults(func=cmd_commvol)

    p = sub.add_parser("simulate", help="run the task-lifecycle simulator")
    p.add_argument("mapper")
    p.add_argument("--graph", required=True)
    p.add_argument("--task", default=None, help="IndexTaskMap task driving the run")
    p.add_argument("--seed", type=int, default=None,
                   help="use the seeded random scheduler")
    _add_machine_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="optimal vs greedy over a parameter grid")
    p.add_argument("--ratios", type=_ints, default=None,
                   help="aspect ratios r for 1:r (default: the full study grid)")
    p.add_argument("--areas", type=_ints, default=None)
    p.add_argument("--gpus", type=_ints, default=None)
    p.add_argument("--gpus-per-node", type=int, default=4)
    _add_output_flags(p)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ProcMapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
