"""A small S-expression reader that remembers source positions."""

from __future__ import annotations

from dataclasses import dataclass, field


class ParseError(Exception):
    """Raised for malformed input; carries a 1-based line/column."""

    def __init__(self, message: str, line: int = 0, col: int = 0, source: str = ""):
        self.message = message
        self.line = line
        self.col = col
        self.source = source
        where = f"{source}:" if source else ""
        if line:
            where += f"{line}:{col}: "
        super().__init__(f"{where}{message}")


@dataclass(frozen=True)
class Sym:
    text: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class SList:
    items: tuple
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    def __iter__(self):
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]

    def head(self) -> str | None:
        if self.items and isinstance(self.items[0], Sym):
            return self.items[0].text.lower()
        return None

    def __str__(self) -> str:
        return "(" + " ".join(str(x) for x in self.items) + ")"


SExpr = "Sym | SList"


def _tokens(text: str, source: str):
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line, col = line + 1, 1
            i += 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if c == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c in "()":
            yield c, line, col
            i += 1
            col += 1
            continue
        if c == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise ParseError("unterminated quoted symbol", line, col, source)
            yield text[i + 1:j], line, col
            col += j + 1 - i
            i = j + 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in "();":
            j += 1
        yield text[i:j], line, col
        col += j - i
        i = j


def read_all(text: str, source: str = "") -> list:
    """Parse every top-level expression in ``text``."""
    stack: list[list] = [[]]
    opens: list[tuple[int, int]] = []
    for tok, line, col in _tokens(text, source):
        if tok == "(":
            stack.append([])
            opens.append((line, col))
        elif tok == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", line, col, source)
            items = stack.pop()
            oline, ocol = opens.pop()
            stack[-1].append(SList(tuple(items), oline, ocol))
        else:
            stack[-1].append(Sym(tok, line, col))
    if len(stack) != 1:
        line, col = opens[-1]
        raise ParseError("unbalanced '('", line, col, source)
    return stack[0]


def read_one(text: str, source: str = ""):
    exprs = read_all(text, source)
    if len(exprs) != 1:
        raise ParseError(f"expected exactly one expression, found {len(exprs)}", 1, 1, source)
    return exprs[0]


def error_at(node, message: str, source: str = "") -> ParseError:
    return ParseError(message, getattr(node, "line", 0), getattr(node, "col", 0), source)
