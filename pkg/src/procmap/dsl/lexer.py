"""Line-oriented tokenizer for the mapping DSL.

Statements are one per line; newlines inside open brackets are suppressed so
long expressions can wrap.  `#` starts a comment running to end of line.
Positions are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import MapperSyntaxError

KEYWORDS = frozenset({
    "def", "return", "Machine", "tuple", "for", "in",
    "Task", "Region", "Layout", "IndexTaskMap", "GarbageCollect", "Backpressure",
})

_TWO_CHAR = ("==",)
_ONE_CHAR = "()[],:;.*/%+-?<>="
_OPEN, _CLOSE = "([", ")]"


@dataclass(frozen=True)
class Token:
    kind: str  # NAME | KEYWORD | INT | OP | NEWLINE | EOF
    value: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    depth = 0
    for lineno, raw in enumerate(source.splitlines(), start=1):
        i = 0
        line_had_tokens = False
        n = len(raw)
        while i < n:
            ch = raw[i]
            if ch in " \t":
                i += 1
                continue
            if ch == "#":
                break
            col = i + 1
            if raw.startswith(_TWO_CHAR[0], i):
                tokens.append(Token("OP", "==", lineno, col))
                i += 2
            elif ch.isdigit():
                j = i
                while j < n and raw[j].isdigit():
                    j += 1
                tokens.append(Token("INT", raw[i:j], lineno, col))
                i = j
            elif ch.isalpha() or ch == "_":
                j = i
                while j < n and (raw[j].isalnum() or raw[j] == "_"):
                    j += 1
                word = raw[i:j]
                kind = "KEYWORD" if word in KEYWORDS else "NAME"
                tokens.append(Token(kind, word, lineno, col))
                i = j
            elif ch in _ONE_CHAR:
                if ch in _OPEN:
                    depth += 1
                elif ch in _CLOSE:
                    depth = max(0, depth - 1)
                tokens.append(Token("OP", ch, lineno, col))
                i += 1
            else:
                raise MapperSyntaxError(f"unexpected character {ch!r}", lineno, col)
            line_had_tokens = True
        if line_had_tokens and depth == 0:
            tokens.append(Token("NEWLINE", "", lineno, len(raw) + 1))
    last_line = source.count("\n") + 1
    tokens.append(Token("EOF", "", last_line + 1, 1))
    return tokens
