"""Recursive-descent parser producing a MapperProgram.

Operator precedence, loosest first: ternary, comparisons (> < ==), additive
(+ -), multiplicative (* / %), then postfix (member access, method call,
indexing).  A ternary directly inside an index argument must be parenthesized
since `:` separates slice bounds there.
"""

from __future__ import annotations

from ..errors import MapperSyntaxError
from . import ast
from .lexer import Token, tokenize

_STATEMENT_KEYWORDS = {
    "Task", "Region", "Layout", "IndexTaskMap", "GarbageCollect", "Backpressure",
}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    # -- token helpers ------------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def advance(self) -> Token:
        tok = self.toks[self.i]
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def at(self, kind: str, value: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (value is None or tok.value == value)

    def expect(self, kind: str, value: str | None = None) -> Token:
        tok = self.peek()
        if not self.at(kind, value):
            want = value if value is not None else kind
            raise MapperSyntaxError(
                f"expected {want!r}, found {tok.value or tok.kind!r}",
                tok.line, tok.col, expected=str(want),
            )
        return self.advance()

    def expect_name(self) -> Token:
        tok = self.peek()
        if tok.kind != "NAME":
            raise MapperSyntaxError(
                f"expected identifier, found {tok.value or tok.kind!r}",
                tok.line, tok.col, expected="identifier",
            )
        return self.advance()

    def skip_newlines(self) -> None:
        while self.at("NEWLINE"):
            self.advance()

    def end_statement(self) -> None:
        if self.at("OP", ";"):
            self.advance()
        if self.at("NEWLINE"):
            self.advance()
        elif not self.at("EOF"):
            tok = self.peek()
            raise MapperSyntaxError(
                f"unexpected {tok.value!r} at end of statement", tok.line, tok.col
            )

    # -- program ---------------------------------------------------------------

    def parse_program(self) -> ast.MapperProgram:
        items: list[ast.TopLevel] = []
        seen_funcs: set[str] = set()
        self.skip_newlines()
        while not self.at("EOF"):
            tok = self.peek()
            if tok.kind == "KEYWORD" and tok.value == "def":
                func = self.parse_funcdef()
                if func.name in seen_funcs:
                    raise MapperSyntaxError(
                        f"duplicate function definition {func.name!r}",
                        func.line, func.col,
                    )
                seen_funcs.add(func.name)
                items.append(func)
            elif tok.kind == "KEYWORD" and tok.value in _STATEMENT_KEYWORDS:
                items.append(self.parse_statement())
            elif tok.kind == "NAME" and self.peek(1).kind == "OP" and self.peek(1).value == "=":
                items.append(self.parse_global())
            else:
                raise MapperSyntaxError(
                    f"expected a statement, found {tok.value or tok.kind!r}",
                    tok.line, tok.col, expected="statement",
                )
            self.skip_newlines()
        return ast.MapperProgram(tuple(items))

    def parse_global(self) -> ast.GlobalBinding:
        name = self.expect_name()
        self.expect("OP", "=")
        expr = self.parse_expr()
        self.end_statement()
        return ast.GlobalBinding(name.value, expr, line=name.line, col=name.col)

    def parse_statement(self) -> ast.Statement:
        tok = self.advance()
        if tok.value == "IndexTaskMap":
            task = self.expect_name().value
            func = self.expect_name().value
            self.end_statement()
            return ast.IndexTaskMap(task, func, line=tok.line, col=tok.col)
        if tok.value == "Task":
            task = self.expect_name().value
            procs = [self.expect_name().value]
            while self.at("NAME"):
                procs.append(self.advance().value)
            self.end_statement()
            return ast.TaskMap(task, tuple(procs), line=tok.line, col=tok.col)
        if tok.value == "Region":
            task = self.expect_name().value
            region = self.expect_name().value
            proc = self.expect_name().value
            mems = [self.expect_name().value]
            while self.at("NAME"):
                mems.append(self.advance().value)
            self.end_statement()
            return ast.DataMap(task, region, proc, tuple(mems), line=tok.line, col=tok.col)
        if tok.value == "Layout":
            task = self.expect_name().value
            region = self.expect_name().value
            proc = self.expect_name().value
            constraints = [self.parse_constraint()]
            while self.at("NAME"):
                constraints.append(self.parse_constraint())
            self.end_statement()
            return ast.DataLayout(
                task, region, proc, tuple(constraints), line=tok.line, col=tok.col
            )
        if tok.value == "GarbageCollect":
            task = self.expect_name().value
            arg = self.expect_name().value
            self.end_statement()
            return ast.GarbageCollect(task, arg, line=tok.line, col=tok.col)
        if tok.value == "Backpressure":
            task = self.expect_name().value
            depth = int(self.expect("INT").value)
            self.end_statement()
            return ast.Backpressure(task, depth, line=tok.line, col=tok.col)
        raise MapperSyntaxError(f"unknown statement {tok.value!r}", tok.line, tok.col)

    def parse_constraint(self):
        name = self.expect_name()
        if self.at("OP", "=="):
            self.advance()
            value = int(self.expect("INT").value)
            return ast.AlignConstraint(name.value, value, line=name.line, col=name.col)
        return name.value

    def parse_funcdef(self) -> ast.FuncDef:
        def_tok = self.expect("KEYWORD", "def")
        name = self.expect_name()
        self.expect("OP", "(")
        params = [self.parse_param()]
        while self.at("OP", ","):
            self.advance()
            params.append(self.parse_param())
        self.expect("OP", ")")
        self.expect("OP", ":")
        self.expect("NEWLINE")
        body: list[ast.FuncStmt] = []
        while True:
            self.skip_newlines()
            tok = self.peek()
            if tok.kind == "EOF" or tok.col <= def_tok.col:
                break
            body.append(self.parse_funcstmt())
        if not body:
            raise MapperSyntaxError(
                f"function {name.value!r} has an empty body", def_tok.line, def_tok.col
            )
        return ast.FuncDef(
            name.value, tuple(params), tuple(body), line=def_tok.line, col=def_tok.col
        )

    def parse_param(self) -> ast.Param:
        first = self.peek()
        if first.kind == "NAME" and self.peek(1).kind == "NAME":
            type_name = self.advance().value
            name = self.advance()
            return ast.Param(type_name, name.value, line=first.line, col=first.col)
        name = self.expect_name()
        return ast.Param(None, name.value, line=name.line, col=name.col)

    def parse_funcstmt(self) -> ast.FuncStmt:
        tok = self.peek()
        if tok.kind == "KEYWORD" and tok.value == "return":
            self.advance()
            expr = self.parse_expr()
            self.end_statement()
            return ast.Return(expr, line=tok.line, col=tok.col)
        target = self.expect_name()
        self.expect("OP", "=")
        expr = self.parse_expr()
        self.end_statement()
        return ast.Assign(target.value, expr, line=target.line, col=target.col)

    # -- expressions -------------------------------------------------------------

    def parse_expr(self, no_ternary: bool = False) -> ast.Expr:
        cond = self.parse_cmp()
        if self.at("OP", "?"):
            tok = self.peek()
            if no_ternary:
                raise MapperSyntaxError(
                    "parenthesize a ternary used inside an index", tok.line, tok.col
                )
            self.advance()
            then = self.parse_expr()
            self.expect("OP", ":")
            other = self.parse_expr(no_ternary)
            return ast.Ternary(cond, then, other, line=tok.line, col=tok.col)
        return cond

    def parse_cmp(self) -> ast.Expr:
        lhs = self.parse_add()
        while self.peek().kind == "OP" and self.peek().value in (">", "<", "=="):
            op = self.advance()
            rhs = self.parse_add()
            lhs = ast.BinOp(op.value, lhs, rhs, line=op.line, col=op.col)
        return lhs

    def parse_add(self) -> ast.Expr:
        lhs = self.parse_mul()
        while self.peek().kind == "OP" and self.peek().value in ("+", "-"):
            op = self.advance()
            rhs = self.parse_mul()
            lhs = ast.BinOp(op.value, lhs, rhs, line=op.line, col=op.col)
        return lhs

    def parse_mul(self) -> ast.Expr:
        lhs = self.parse_postfix()
        while self.peek().kind == "OP" and self.peek().value in ("*", "/", "%"):
            op = self.advance()
            rhs = self.parse_postfix()
            lhs = ast.BinOp(op.value, lhs, rhs, line=op.line, col=op.col)
        return lhs

    def parse_postfix(self) -> ast.Expr:
        expr = self.parse_primary()
        while True:
            if self.at("OP", "."):
                dot = self.advance()
                name = self.expect_name().value
                if self.at("OP", "("):
                    self.advance()
                    args = self.parse_call_args()
                    expr = ast.MethodCall(expr, name, args, line=dot.line, col=dot.col)
                else:
                    expr = ast.Member(expr, name, line=dot.line, col=dot.col)
            elif self.at("OP", "["):
                bracket = self.advance()
                args = [self.parse_index_arg()]
                while self.at("OP", ","):
                    self.advance()
                    args.append(self.parse_index_arg())
                self.expect("OP", "]")
                expr = ast.Index(expr, tuple(args), line=bracket.line, col=bracket.col)
            else:
                return expr

    def parse_call_args(self) -> tuple[ast.Expr, ...]:
        # opening paren already consumed; at least one argument
        args = [self.parse_expr()]
        while self.at("OP", ","):
            self.advance()
            args.append(self.parse_expr())
        self.expect("OP", ")")
        return tuple(args)

    def parse_index_arg(self):
        tok = self.peek()
        if self.at("OP", "*"):
            self.advance()
            return ast.Splat(self.parse_postfix(), line=tok.line, col=tok.col)
        if self.at("OP", ":"):
            self.advance()
            hi = None if self.at("OP", "]") or self.at("OP", ",") else self.parse_expr(True)
            return ast.SliceArg(None, hi, line=tok.line, col=tok.col)
        lo = self.parse_expr(no_ternary=True)
        if self.at("OP", ":"):
            self.advance()
            hi = None if self.at("OP", "]") or self.at("OP", ",") else self.parse_expr(True)
            return ast.SliceArg(lo, hi, line=tok.line, col=tok.col)
        return lo

    def parse_primary(self) -> ast.Expr:
        tok = self.peek()
        if tok.kind == "INT":
            self.advance()
            return ast.IntLit(int(tok.value), line=tok.line, col=tok.col)
        if tok.kind == "OP" and tok.value == "-" and self.peek(1).kind == "INT":
            self.advance()
            lit = self.advance()
            return ast.IntLit(-int(lit.value), line=tok.line, col=tok.col)
        if tok.kind == "KEYWORD" and tok.value == "Machine":
            self.advance()
            self.expect("OP", "(")
            kind = self.expect_name().value
            self.expect("OP", ")")
            return ast.MachineExpr(kind, line=tok.line, col=tok.col)
        if tok.kind == "KEYWORD" and tok.value == "tuple":
            return self.parse_comprehension()
        if tok.kind == "NAME":
            self.advance()
            if self.at("OP", "("):
                self.advance()
                args = self.parse_call_args()
                return ast.Call(tok.value, args, line=tok.line, col=tok.col)
            return ast.Var(tok.value, line=tok.line, col=tok.col)
        if tok.kind == "OP" and tok.value == "(":
            self.advance()
            first = self.parse_expr()
            if self.at("OP", ","):
                items = [first]
                while self.at("OP", ","):
                    self.advance()
                    if self.at("OP", ")"):
                        break
                    items.append(self.parse_expr())
                self.expect("OP", ")")
                return ast.TupleLit(tuple(items), line=tok.line, col=tok.col)
            self.expect("OP", ")")
            return first
        raise MapperSyntaxError(
            f"expected an expression, found {tok.value or tok.kind!r}",
            tok.line, tok.col, expected="expression",
        )

    def parse_comprehension(self) -> ast.TupleComprehension:
        tok = self.expect("KEYWORD", "tuple")
        self.expect("OP", "(")
        body = self.parse_expr()
        self.expect("KEYWORD", "for")
        var = self.expect_name().value
        self.expect("KEYWORD", "in")
        self.expect("OP", "(")
        values = [self.parse_int_literal()]
        while self.at("OP", ","):
            self.advance()
            if self.at("OP", ")"):
                break
            values.append(self.parse_int_literal())
        self.expect("OP", ")")
        self.expect("OP", ")")
        return ast.TupleComprehension(body, var, tuple(values), line=tok.line, col=tok.col)

    def parse_int_literal(self) -> int:
        if self.at("OP", "-"):
            self.advance()
            return -int(self.expect("INT").value)
        return int(self.expect("INT").value)


def parse(source: str) -> ast.MapperProgram:
    """Parse DSL source text into a MapperProgram.

    Raises MapperSyntaxError with line/column on malformed input or a
    duplicate function definition.
    """
    return _Parser(tokenize(source)).parse_program()
