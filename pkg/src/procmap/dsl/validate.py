"""Static checks over a parsed mapper program.

Errors make a program non-evaluable (unknown terminals, undefined names,
arity mismatches, unbound mapping functions).  Grammar extensions beyond the
core surface (tuple slices, tuple literals, comprehensions) are reported as
warnings at each use site.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import ast

PROCS = frozenset({"CPU", "GPU", "OMP"})
MEMORIES = frozenset({"SYSMEM", "FBMEM", "ZCMEM"})
LAYOUT_CONSTRAINTS = frozenset({"SOA", "AOS", "C_order", "F_order"})
PRIMITIVE_ARITY = {
    "split": 2, "merge": 2, "swap": 2, "reorder": 2, "slice": 3, "decompose": 2,
}
MEMBERS = frozenset({"size"})


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    line: int
    col: int

    def __str__(self):
        return f"{self.line}:{self.col}: {self.severity}: [{self.code}] {self.message}"


def errors_of(diags: list[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diags if d.severity == "error"]


class _Checker:
    def __init__(self, program: ast.MapperProgram):
        self.program = program
        self.functions = program.functions
        self.diags: list[Diagnostic] = []

    def error(self, code: str, message: str, node) -> None:
        self.diags.append(Diagnostic("error", code, message, node.line, node.col))

    def warn(self, code: str, message: str, node) -> None:
        self.diags.append(Diagnostic("warning", code, message, node.line, node.col))

    def run(self) -> list[Diagnostic]:
        scope: set[str] = set()
        for item in self.program.items:
            if isinstance(item, ast.GlobalBinding):
                self.check_expr(item.expr, scope)
                scope.add(item.name)
            elif isinstance(item, ast.FuncDef):
                self.check_funcdef(item, scope)
            else:
                self.check_statement(item)
        return self.diags

    # -- statements -----------------------------------------------------------

    def check_statement(self, st: ast.Statement) -> None:
        if isinstance(st, ast.IndexTaskMap):
            func = self.functions.get(st.func)
            if func is None:
                self.error("UnknownFunction", f"IndexTaskMap references undefined function {st.func!r}", st)
            elif len(func.params) != 2:
                self.error(
                    "MapperArity",
                    f"mapping function {st.func!r} must take (ipoint, ispace), has {len(func.params)} parameters",
                    st,
                )
        elif isinstance(st, ast.TaskMap):
            for p in st.procs:
                if p not in PROCS:
                    self.error("UnknownProcessor", f"unknown processor kind {p!r}", st)
        elif isinstance(st, ast.DataMap):
            if st.proc not in PROCS:
                self.error("UnknownProcessor", f"unknown processor kind {st.proc!r}", st)
            for m in st.memories:
                if m not in MEMORIES:
                    self.error("UnknownMemory", f"unknown memory kind {m!r}", st)
        elif isinstance(st, ast.DataLayout):
            if st.proc not in PROCS:
                self.error("UnknownProcessor", f"unknown processor kind {st.proc!r}", st)
            for c in st.constraints:
                if isinstance(c, ast.AlignConstraint):
                    if c.name != "Align":
                        self.error("UnknownConstraint", f"unknown constraint {c.name!r} with value", st)
                    elif c.value < 1:
                        self.error("UnknownConstraint", f"alignment must be positive, got {c.value}", st)
                elif c not in LAYOUT_CONSTRAINTS:
                    self.error("UnknownConstraint", f"unknown layout constraint {c!r}", st)
        # GarbageCollect and Backpressure carry free-form task/argument names

    # -- functions ------------------------------------------------------------

    def check_funcdef(self, func: ast.FuncDef, global_scope: set[str]) -> None:
        scope = set(global_scope)
        for p in func.params:
            scope.add(p.name)
        for stmt in func.body:
            if isinstance(stmt, ast.Assign):
                self.check_expr(stmt.expr, scope)
                scope.add(stmt.target)
            else:
                self.check_expr(stmt.expr, scope)

    # -- expressions -------------------------------------------------------------

    def check_expr(self, e, scope: set[str]) -> None:
        if isinstance(e, ast.Var):
            if e.name not in scope:
                self.error("UndefinedVariable", f"undefined variable {e.name!r}", e)
        elif isinstance(e, ast.IntLit):
            pass
        elif isinstance(e, ast.Call):
            func = self.functions.get(e.name)
            if func is None:
                self.error("UndefinedFunction", f"call to undefined function {e.name!r}", e)
            elif len(func.params) != len(e.args):
                self.error(
                    "ArityMismatch",
                    f"{e.name!r} takes {len(func.params)} arguments, got {len(e.args)}",
                    e,
                )
            for a in e.args:
                self.check_expr(a, scope)
        elif isinstance(e, ast.MachineExpr):
            if e.kind not in PROCS:
                self.error("UnknownProcessor", f"unknown processor kind {e.kind!r}", e)
        elif isinstance(e, ast.Member):
            if e.name not in MEMBERS:
                self.error("UnknownMember", f"unknown member {e.name!r}", e)
            self.check_expr(e.obj, scope)
        elif isinstance(e, ast.MethodCall):
            arity = PRIMITIVE_ARITY.get(e.name)
            if arity is None:
                self.error("UnknownPrimitive", f"unknown primitive {e.name!r}", e)
            elif len(e.args) != arity:
                self.error(
                    "PrimitiveArity",
                    f"primitive {e.name!r} takes {arity} arguments, got {len(e.args)}",
                    e,
                )
            self.check_expr(e.obj, scope)
            for a in e.args:
                self.check_expr(a, scope)
        elif isinstance(e, ast.BinOp):
            self.check_expr(e.lhs, scope)
            self.check_expr(e.rhs, scope)
        elif isinstance(e, ast.Index):
            self.check_expr(e.obj, scope)
            for a in e.args:
                if isinstance(a, ast.Splat):
                    self.check_expr(a.value, scope)
                elif isinstance(a, ast.SliceArg):
                    self.warn("extension", "tuple slice is an extension of the core grammar", a)
                    if a.lo is not None:
                        self.check_expr(a.lo, scope)
                    if a.hi is not None:
                        self.check_expr(a.hi, scope)
                else:
                    self.check_expr(a, scope)
        elif isinstance(e, ast.Ternary):
            self.check_expr(e.cond, scope)
            self.check_expr(e.then, scope)
            self.check_expr(e.other, scope)
        elif isinstance(e, ast.TupleComprehension):
            self.warn("extension", "tuple comprehension is an extension of the core grammar", e)
            self.check_expr(e.body, scope | {e.var})
        elif isinstance(e, ast.TupleLit):
            self.warn("extension", "tuple literal is an extension of the core grammar", e)
            for item in e.items:
                self.check_expr(item, scope)
        else:
            raise TypeError(f"unhandled expression {e!r}")


def validate(program: ast.MapperProgram) -> list[Diagnostic]:
    """Check a program; an empty error list means it is evaluable."""
    return _Checker(program).run()
