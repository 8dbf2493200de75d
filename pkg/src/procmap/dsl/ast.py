"""AST node definitions and the source printer for the mapping DSL.

Node equality is structural: source positions are carried for diagnostics but
excluded from comparisons, so `parse(to_source(parse(src)))` yields a program
equal to `parse(src)`.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Node:
    line: int = field(default=0, compare=False, kw_only=True)
    col: int = field(default=0, compare=False, kw_only=True)


# -- expressions -----------------------------------------------------------


@dataclass(frozen=True)
class Var(Node):
    name: str


@dataclass(frozen=True)
class IntLit(Node):
    value: int


@dataclass(frozen=True)
class Call(Node):
    name: str
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class MachineExpr(Node):
    kind: str


@dataclass(frozen=True)
class Member(Node):
    obj: "Expr"
    name: str


@dataclass(frozen=True)
class MethodCall(Node):
    obj: "Expr"
    name: str
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Splat(Node):
    value: "Expr"


@dataclass(frozen=True)
class SliceArg(Node):
    lo: "Expr | None"
    hi: "Expr | None"


@dataclass(frozen=True)
class Index(Node):
    obj: "Expr"
    args: tuple["Expr | Splat | SliceArg", ...]


@dataclass(frozen=True)
class Ternary(Node):
    cond: "Expr"
    then: "Expr"
    other: "Expr"


@dataclass(frozen=True)
class TupleComprehension(Node):
    body: "Expr"
    var: str
    values: tuple[int, ...]


@dataclass(frozen=True)
class TupleLit(Node):
    items: tuple["Expr", ...]


Expr = (
    Var | IntLit | Call | MachineExpr | Member | MethodCall | BinOp
    | Index | Ternary | TupleComprehension | TupleLit
)


# -- statements ------------------------------------------------------------


@dataclass(frozen=True)
class Param(Node):
    type_name: str | None
    name: str


@dataclass(frozen=True)
class Assign(Node):
    target: str
    expr: Expr


@dataclass(frozen=True)
class Return(Node):
    expr: Expr


FuncStmt = Assign | Return


@dataclass(frozen=True)
class FuncDef(Node):
    name: str
    params: tuple[Param, ...]
    body: tuple[FuncStmt, ...]


@dataclass(frozen=True)
class IndexTaskMap(Node):
    task: str
    func: str


@dataclass(frozen=True)
class TaskMap(Node):
    task: str
    procs: tuple[str, ...]


@dataclass(frozen=True)
class DataMap(Node):
    task: str
    region: str
    proc: str
    memories: tuple[str, ...]


@dataclass(frozen=True)
class AlignConstraint(Node):
    name: str
    value: int


Constraint = str | AlignConstraint


@dataclass(frozen=True)
class DataLayout(Node):
    task: str
    region: str
    proc: str
    constraints: tuple[Constraint, ...]


@dataclass(frozen=True)
class GarbageCollect(Node):
    task: str
    arg: str


@dataclass(frozen=True)
class Backpressure(Node):
    task: str
    depth: int


Statement = (
    FuncDef | IndexTaskMap | TaskMap | DataMap | DataLayout
    | GarbageCollect | Backpressure
)


@dataclass(frozen=True)
class GlobalBinding(Node):
    name: str
    expr: Expr


TopLevel = Statement | GlobalBinding


@dataclass(frozen=True)
class MapperProgram:
    """Parsed mapper: top-level items in source order.

    Global `name = expr` bindings configure processor spaces and are kept
    apart from the statement list proper.
    """

    items: tuple[TopLevel, ...]

    @property
    def statements(self) -> tuple[Statement, ...]:
        return tuple(i for i in self.items if not isinstance(i, GlobalBinding))

    @property
    def globals(self) -> tuple[GlobalBinding, ...]:
        return tuple(i for i in self.items if isinstance(i, GlobalBinding))

    @property
    def functions(self) -> dict[str, FuncDef]:
        return {i.name: i for i in self.items if isinstance(i, FuncDef)}

    def bindings(self) -> dict[str, str]:
        """task -> mapping-function name, from IndexTaskMap statements."""
        return {i.task: i.func for i in self.items if isinstance(i, IndexTaskMap)}


# -- source printer ----------------------------------------------------------

_TERNARY, _CMP, _ADD, _MUL, _POSTFIX = 1, 2, 3, 4, 5


def _fmt(e, parent: int = 0) -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, Call):
        return f"{e.name}({', '.join(_fmt(a) for a in e.args)})"
    if isinstance(e, MachineExpr):
        return f"Machine({e.kind})"
    if isinstance(e, Member):
        return f"{_fmt(e.obj, _POSTFIX)}.{e.name}"
    if isinstance(e, MethodCall):
        args = ", ".join(_fmt(a) for a in e.args)
        return f"{_fmt(e.obj, _POSTFIX)}.{e.name}({args})"
    if isinstance(e, BinOp):
        prec = {"?": _TERNARY, ">": _CMP, "<": _CMP, "==": _CMP,
                "+": _ADD, "-": _ADD, "*": _MUL, "/": _MUL, "%": _MUL}[e.op]
        text = f"{_fmt(e.lhs, prec)} {e.op} {_fmt(e.rhs, prec + 1)}"
        return f"({text})" if prec < parent else text
    if isinstance(e, Index):
        return f"{_fmt(e.obj, _POSTFIX)}[{', '.join(_fmt_index_arg(a) for a in e.args)}]"
    if isinstance(e, Ternary):
        text = f"{_fmt(e.cond, _CMP)} ? {_fmt(e.then, _TERNARY)} : {_fmt(e.other, _TERNARY)}"
        return f"({text})" if _TERNARY < parent else text
    if isinstance(e, TupleComprehension):
        vals = ", ".join(str(v) for v in e.values)
        return f"tuple({_fmt(e.body)} for {e.var} in ({vals}))"
    if isinstance(e, TupleLit):
        if len(e.items) == 1:
            return f"({_fmt(e.items[0])},)"
        return f"({', '.join(_fmt(i) for i in e.items)})"
    raise TypeError(f"cannot print {e!r}")


def _fmt_index_arg(a) -> str:
    # ternaries must be parenthesized inside index arguments and slice
    # bounds, where ':' separates slice parts
    if isinstance(a, Splat):
        return f"*{_fmt(a.value, _POSTFIX)}"
    if isinstance(a, SliceArg):
        lo = _fmt(a.lo, _CMP) if a.lo is not None else ""
        hi = _fmt(a.hi, _CMP) if a.hi is not None else ""
        return f"{lo}:{hi}"
    return _fmt(a, _CMP)


def to_source(program: MapperProgram) -> str:
    """Render a program back to DSL source."""
    lines: list[str] = []
    for item in program.items:
        if isinstance(item, GlobalBinding):
            lines.append(f"{item.name} = {_fmt(item.expr)}")
        elif isinstance(item, FuncDef):
            params = ", ".join(
                f"{p.type_name} {p.name}" if p.type_name else p.name for p in item.params
            )
            lines.append(f"def {item.name}({params}):")
            for stmt in item.body:
                if isinstance(stmt, Assign):
                    lines.append(f"    {stmt.target} = {_fmt(stmt.expr)}")
                else:
                    lines.append(f"    return {_fmt(stmt.expr)}")
        elif isinstance(item, IndexTaskMap):
            lines.append(f"IndexTaskMap {item.task} {item.func}")
        elif isinstance(item, TaskMap):
            lines.append(f"Task {item.task} {' '.join(item.procs)}")
        elif isinstance(item, DataMap):
            lines.append(f"Region {item.task} {item.region} {item.proc} {' '.join(item.memories)}")
        elif isinstance(item, DataLayout):
            parts = [
                f"{c.name} == {c.value}" if isinstance(c, AlignConstraint) else c
                for c in item.constraints
            ]
            lines.append(f"Layout {item.task} {item.region} {item.proc} {' '.join(parts)}")
        elif isinstance(item, GarbageCollect):
            lines.append(f"GarbageCollect {item.task} {item.arg}")
        elif isinstance(item, Backpressure):
            lines.append(f"Backpressure {item.task} {item.depth}")
        else:
            raise TypeError(f"cannot print {item!r}")
    return "\n".join(lines) + "\n"
