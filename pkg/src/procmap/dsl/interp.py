"""Evaluator turning mapping-function definitions into point -> processor maps.

Value kinds are Int, Tuple (of ints), Space, and ProcessorRef.  Arithmetic on
tuples is elementwise with scalar broadcast; `/` is floor division and `%` the
non-negative remainder for non-negative operands.  Indexing a space with a
full-rank index resolves it to a base (node, proc) pair; `space[i]` on a
higher-rank space reads the extent of dimension i, and slicing a space slices
its shape tuple.

`compile_mapper` additionally caches the point-independent prefix of a
function body per iteration space, so transform chains built from `ispace`
are constructed once and reused across points.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import EvalError, NoBinding, ProcMapError
from ..factorize import search_optimal
from ..spaces import MachineShape, ProcSpace
from . import ast

_MAX_CALL_DEPTH = 64


@dataclass(frozen=True)
class ProcRef:
    """A fully resolved processor: base machine coordinates."""

    node: int
    proc: int


def _type_name(v) -> str:
    if isinstance(v, bool) or isinstance(v, int):
        return "Int"
    if isinstance(v, tuple):
        return "Tuple"
    if isinstance(v, ProcSpace):
        return "Space"
    if isinstance(v, ProcRef):
        return "ProcessorRef"
    return type(v).__name__


class Evaluator:
    """Evaluates expressions of one program against one machine."""

    def __init__(self, program: ast.MapperProgram, machine: MachineShape):
        self.program = program
        self.machine = machine
        self.functions = program.functions
        self.globals: dict[str, object] = {}
        for g in program.globals:
            self.globals[g.name] = self.eval_expr(g.expr, {}, 0)

    # -- entry points ---------------------------------------------------------

    def run_mapping(self, func_name: str, ipoint, ispace) -> tuple[int, int]:
        func = self.functions.get(func_name)
        if func is None:
            raise EvalError(f"undefined mapping function {func_name!r}")
        if len(func.params) != 2:
            raise EvalError(
                f"mapping function {func_name!r} must take (ipoint, ispace)"
            )
        result = self.call_function(func, [tuple(ipoint), tuple(ispace)], 0)
        return self._as_processor(result, func_name)

    @staticmethod
    def _as_processor(result, func_name: str) -> tuple[int, int]:
        if not isinstance(result, ProcRef):
            raise EvalError(
                f"mapping function {func_name!r} returned {_type_name(result)}, "
                "expected a processor reference"
            )
        return result.node, result.proc

    def call_function(self, func: ast.FuncDef, args: list, depth: int):
        if depth > _MAX_CALL_DEPTH:
            raise EvalError(f"call depth exceeded in {func.name!r}")
        if len(args) != len(func.params):
            raise EvalError(
                f"{func.name!r} takes {len(func.params)} arguments, got {len(args)}"
            )
        env = {p.name: a for p, a in zip(func.params, args)}
        return self.exec_body(func.body, env, depth)

    def exec_body(self, body, env: dict, depth: int):
        for stmt in body:
            if isinstance(stmt, ast.Assign):
                env[stmt.target] = self.eval_expr(stmt.expr, env, depth)
            else:
                return self.eval_expr(stmt.expr, env, depth)
        raise EvalError("function body ended without a return")

    # -- expression evaluation ---------------------------------------------------

    def eval_expr(self, e, env: dict, depth: int):
        if isinstance(e, ast.Var):
            if e.name in env:
                return env[e.name]
            if e.name in self.globals:
                return self.globals[e.name]
            raise EvalError(f"undefined variable {e.name!r}")
        if isinstance(e, ast.IntLit):
            return e.value
        if isinstance(e, ast.BinOp):
            lhs = self.eval_expr(e.lhs, env, depth)
            rhs = self.eval_expr(e.rhs, env, depth)
            return _binop(e.op, lhs, rhs)
        if isinstance(e, ast.Index):
            return self._index(e, env, depth)
        if isinstance(e, ast.Member):
            obj = self.eval_expr(e.obj, env, depth)
            if e.name == "size" and isinstance(obj, ProcSpace):
                return obj.shape
            raise EvalError(f"no member {e.name!r} on {_type_name(obj)}")
        if isinstance(e, ast.MethodCall):
            return self._primitive(e, env, depth)
        if isinstance(e, ast.MachineExpr):
            if e.kind != self.machine.kind:
                raise EvalError(
                    f"machine provides {self.machine.kind}, mapper asks for {e.kind}"
                )
            return ProcSpace.of(self.machine)
        if isinstance(e, ast.Call):
            func = self.functions.get(e.name)
            if func is None:
                raise EvalError(f"call to undefined function {e.name!r}")
            args = [self.eval_expr(a, env, depth) for a in e.args]
            return self.call_function(func, args, depth + 1)
        if isinstance(e, ast.Ternary):
            cond = self.eval_expr(e.cond, env, depth)
            if not isinstance(cond, int):
                raise EvalError(f"ternary condition is {_type_name(cond)}, expected Int")
            branch = e.then if cond != 0 else e.other
            return self.eval_expr(branch, env, depth)
        if isinstance(e, ast.TupleComprehension):
            items = []
            inner = dict(env)
            for v in e.values:
                inner[e.var] = v
                item = self.eval_expr(e.body, inner, depth)
                if not isinstance(item, int):
                    raise EvalError(
                        f"comprehension element is {_type_name(item)}, expected Int"
                    )
                items.append(item)
            return tuple(items)
        if isinstance(e, ast.TupleLit):
            items = []
            for node in e.items:
                item = self.eval_expr(node, env, depth)
                if not isinstance(item, int):
                    raise EvalError(f"tuple element is {_type_name(item)}, expected Int")
                items.append(item)
            return tuple(items)
        raise EvalError(f"cannot evaluate {type(e).__name__}")

    def _primitive(self, e: ast.MethodCall, env: dict, depth: int):
        obj = self.eval_expr(e.obj, env, depth)
        if not isinstance(obj, ProcSpace):
            raise EvalError(f"transformation {e.name!r} applies to a Space, got {_type_name(obj)}")
        args = [self.eval_expr(a, env, depth) for a in e.args]
        arity = {"split": 2, "merge": 2, "swap": 2, "reorder": 2, "slice": 3, "decompose": 2}
        if e.name not in arity:
            raise EvalError(f"unknown primitive {e.name!r}")
        if len(args) != arity[e.name]:
            raise EvalError(f"primitive {e.name!r} takes {arity[e.name]} arguments")
        try:
            if e.name == "decompose":
                dim = _require_int(args[0], "decompose dimension")
                extents = args[1]
                if not isinstance(extents, tuple):
                    raise EvalError(
                        f"decompose extents must be a Tuple, got {_type_name(extents)}"
                    )
                if not 0 <= dim < obj.rank:
                    raise EvalError(f"dimension {dim} out of range for rank {obj.rank}")
                factors, _ = search_optimal(obj.shape[dim], extents)
                return obj.decompose(dim, factors)
            ints = [_require_int(a, f"argument of {e.name}") for a in args]
            if e.name == "split":
                return obj.split(*ints)
            if e.name == "merge":
                return obj.merge(*ints)
            if e.name == "slice":
                return obj.slice(*ints)
            return obj.swap(*ints)  # reorder aliases swap
        except ProcMapError as exc:
            if isinstance(exc, EvalError):
                raise
            raise EvalError(f"{e.name}: {exc}") from exc

    def _index(self, e: ast.Index, env: dict, depth: int):
        obj = self.eval_expr(e.obj, env, depth)
        if len(e.args) == 1 and isinstance(e.args[0], ast.SliceArg):
            sl = e.args[0]
            lo = self._slice_bound(sl.lo, env, depth)
            hi = self._slice_bound(sl.hi, env, depth)
            seq = obj.shape if isinstance(obj, ProcSpace) else obj
            if not isinstance(seq, tuple):
                raise EvalError(f"cannot slice {_type_name(obj)}")
            return seq[lo:hi]
        if isinstance(obj, tuple):
            if len(e.args) != 1:
                raise EvalError("tuples take a single index")
            i = self.eval_expr(e.args[0], env, depth)
            i = _require_int(i, "tuple index")
            if not -len(obj) <= i < len(obj):
                raise EvalError(f"index {i} out of range for tuple of rank {len(obj)}")
            return obj[i]
        if isinstance(obj, ProcSpace):
            return self._index_space(obj, e, env, depth)
        raise EvalError(f"cannot index {_type_name(obj)}")

    def _slice_bound(self, bound, env, depth):
        if bound is None:
            return None
        return _require_int(self.eval_expr(bound, env, depth), "slice bound")

    def _index_space(self, space: ProcSpace, e: ast.Index, env: dict, depth: int):
        coords: list[int] = []
        single_value = None
        for a in e.args:
            if isinstance(a, ast.Splat):
                v = self.eval_expr(a.value, env, depth)
                if not isinstance(v, tuple):
                    raise EvalError(f"splat needs a Tuple, got {_type_name(v)}")
                coords.extend(v)
            elif isinstance(a, ast.SliceArg):
                raise EvalError("slice cannot be combined with other index arguments")
            else:
                v = self.eval_expr(a, env, depth)
                if len(e.args) == 1:
                    single_value = v
                if isinstance(v, tuple):
                    if len(e.args) != 1:
                        raise EvalError("a Tuple index must be the only index argument")
                    coords.extend(v)
                else:
                    coords.append(_require_int(v, "space index"))
        if len(e.args) == 1 and isinstance(single_value, int) and space.rank > 1:
            # partial scalar index on a multi-dimensional space reads the extent
            i = single_value
            if not 0 <= i < space.rank:
                raise EvalError(f"dimension {i} out of range for rank {space.rank}")
            return space.shape[i]
        if len(coords) != space.rank:
            raise EvalError(
                f"space of rank {space.rank} indexed with {len(coords)} coordinates"
            )
        try:
            node, proc = space.resolve(tuple(coords))
        except ProcMapError as exc:
            raise EvalError(str(exc)) from exc
        return ProcRef(node, proc)


def _require_int(v, what: str) -> int:
    if not isinstance(v, int):
        raise EvalError(f"{what} is {_type_name(v)}, expected Int")
    return v


def _binop(op: str, a, b):
    if isinstance(a, tuple) or isinstance(b, tuple):
        if isinstance(a, tuple) and isinstance(b, tuple):
            if len(a) != len(b):
                raise EvalError(f"rank mismatch: {len(a)} vs {len(b)}")
            pairs = zip(a, b)
        elif isinstance(a, tuple):
            if not isinstance(b, int):
                raise EvalError(f"cannot combine Tuple with {_type_name(b)}")
            pairs = ((x, b) for x in a)
        else:
            if not isinstance(a, int):
                raise EvalError(f"cannot combine {_type_name(a)} with Tuple")
            pairs = ((a, y) for y in b)
        return tuple(_scalar_op(op, x, y) for x, y in pairs)
    if isinstance(a, int) and isinstance(b, int):
        return _scalar_op(op, a, b)
    raise EvalError(f"operator {op!r} undefined on {_type_name(a)} and {_type_name(b)}")


def _scalar_op(op: str, a: int, b: int) -> int:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            raise EvalError("division by zero")
        return a // b
    if op == "%":
        if b == 0:
            raise EvalError("modulo by zero")
        return a % b
    if op == ">":
        return int(a > b)
    if op == "<":
        return int(a < b)
    if op == "==":
        return int(a == b)
    raise EvalError(f"unknown operator {op!r}")


def eval_mapping(
    program: ast.MapperProgram,
    func: str,
    ipoint,
    ispace,
    machine: MachineShape,
) -> tuple[int, int]:
    """Evaluate one mapping function at one iteration point."""
    return Evaluator(program, machine).run_mapping(func, ipoint, ispace)


def _free_vars(e, bound: set[str], out: set[str]) -> None:
    if isinstance(e, ast.Var):
        if e.name not in bound:
            out.add(e.name)
    elif isinstance(e, (ast.IntLit, ast.MachineExpr)):
        pass
    elif isinstance(e, ast.Call):
        for a in e.args:
            _free_vars(a, bound, out)
    elif isinstance(e, (ast.Member,)):
        _free_vars(e.obj, bound, out)
    elif isinstance(e, ast.MethodCall):
        _free_vars(e.obj, bound, out)
        for a in e.args:
            _free_vars(a, bound, out)
    elif isinstance(e, ast.BinOp):
        _free_vars(e.lhs, bound, out)
        _free_vars(e.rhs, bound, out)
    elif isinstance(e, ast.Index):
        _free_vars(e.obj, bound, out)
        for a in e.args:
            if isinstance(a, ast.Splat):
                _free_vars(a.value, bound, out)
            elif isinstance(a, ast.SliceArg):
                if a.lo is not None:
                    _free_vars(a.lo, bound, out)
                if a.hi is not None:
                    _free_vars(a.hi, bound, out)
            else:
                _free_vars(a, bound, out)
    elif isinstance(e, ast.Ternary):
        _free_vars(e.cond, bound, out)
        _free_vars(e.then, bound, out)
        _free_vars(e.other, bound, out)
    elif isinstance(e, ast.TupleComprehension):
        _free_vars(e.body, bound | {e.var}, out)
    elif isinstance(e, ast.TupleLit):
        for item in e.items:
            _free_vars(item, bound, out)
    else:
        raise TypeError(f"unhandled expression {e!r}")


class MappingFunction:
    """Compiled point -> (node, proc) map for one task binding.

    Body statements that do not depend on the iteration point (typically the
    transform-chain construction) are evaluated once per distinct iteration
    space and reused for every point.
    """

    def __init__(self, evaluator: Evaluator, func: ast.FuncDef):
        self.evaluator = evaluator
        self.func = func
        self._plan = self._analyze(func)
        self._prefix_cache: dict[tuple, dict] = {}

    @staticmethod
    def _analyze(func: ast.FuncDef):
        body = func.body
        if not body or not isinstance(body[-1], ast.Return):
            return None
        if any(isinstance(s, ast.Return) for s in body[:-1]):
            return None
        point_param = func.params[0].name
        tainted = {point_param}
        prefix: list[ast.Assign] = []
        suffix: list[ast.Assign] = []
        for stmt in body[:-1]:
            reads: set[str] = set()
            _free_vars(stmt.expr, set(), reads)
            if reads & tainted or stmt.target in tainted:
                tainted.add(stmt.target)
                suffix.append(stmt)
            else:
                prefix.append(stmt)
        return prefix, suffix, body[-1].expr

    def __call__(self, ipoint, ispace) -> tuple[int, int]:
        ipoint = tuple(ipoint)
        ispace = tuple(ispace)
        if self._plan is None:
            return self.evaluator.run_mapping(self.func.name, ipoint, ispace)
        prefix, suffix, ret = self._plan
        base = self._prefix_cache.get(ispace)
        if base is None:
            base = {self.func.params[1].name: ispace}
            for stmt in prefix:
                base[stmt.target] = self.evaluator.eval_expr(stmt.expr, base, 0)
            self._prefix_cache[ispace] = base
        env = dict(base)
        env[self.func.params[0].name] = ipoint
        for stmt in suffix:
            env[stmt.target] = self.evaluator.eval_expr(stmt.expr, env, 0)
        result = self.evaluator.eval_expr(ret, env, 0)
        return Evaluator._as_processor(result, self.func.name)


def compile_mapper(
    program: ast.MapperProgram, task: str, machine: MachineShape
) -> MappingFunction:
    """Build the mapping function the IndexTaskMap statement binds to a task."""
    bindings = program.bindings()
    if task not in bindings:
        raise NoBinding(f"task {task!r} has no IndexTaskMap statement")
    func = program.functions.get(bindings[task])
    if func is None:
        raise EvalError(f"task {task!r} is bound to undefined function {bindings[task]!r}")
    if len(func.params) != 2:
        raise EvalError(f"mapping function {func.name!r} must take (ipoint, ispace)")
    return MappingFunction(Evaluator(program, machine), func)
