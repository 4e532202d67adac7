"""Parse S-expressions into terms and formulas.

Variables are written ``?x``; any other bare symbol in term position is a
constant.  A :class:`Scope` says which predicate, action and numeric
symbols are legal; with ``strict=False`` unknown predicates are accepted
(used for ad-hoc task files).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .logic import (
    ACTION, FALSE, TRUE, And, Atom, Const, Count, Eq, Exists, Fn, Forall,
    Frozen, Iff, Imply, Not, NumCmp, NumVar, Or, Pending, Poss, SortError,
    Tc, Var,
)
from .sexpr import ParseError, SList, Sym, error_at, read_one

NUM_OPS = ("=", ">")
RESERVED = {"and", "or", "not", "imply", "iff", "forall", "exists", "tc", "count",
            "true", "false", "=", ">", "poss", "after", "frozen"}


@dataclass
class Scope:
    predicates: dict = field(default_factory=dict)   # name -> arity
    actions: dict = field(default_factory=dict)      # name -> arity
    numvars: set = field(default_factory=set)
    strict: bool = True
    source: str = ""
    generated_names: bool = False    # accept '!' in variable names

    def err(self, node, msg: str) -> ParseError:
        return error_at(node, msg, self.source)


def _int(node) -> int | None:
    if isinstance(node, Sym):
        try:
            return int(node.text)
        except ValueError:
            return None
    return None


def parse_var(node, scope: Scope) -> Var:
    if not isinstance(node, Sym) or not node.text.startswith("?") or len(node.text) < 2:
        raise scope.err(node, f"expected a variable, got {node}")
    name = node.text[1:]
    if "!" in name and not scope.generated_names:
        raise scope.err(node, f"'!' is reserved for generated names: {node}")
    return Var(name)


def parse_var_list(node, scope: Scope) -> tuple:
    if not isinstance(node, SList):
        raise scope.err(node, "expected a parenthesised variable list")
    vs = tuple(parse_var(v, scope) for v in node)
    if len(set(vs)) != len(vs):
        raise scope.err(node, "duplicate variable in binder")
    return vs


def parse_term(node, scope: Scope):
    if isinstance(node, Sym):
        t = node.text
        if t.startswith("?"):
            return parse_var(node, scope)
        if t in scope.numvars:
            return NumVar(t)
        if _int(node) is not None:
            raise scope.err(node, f"integer {t} is not an object term")
        if t.lower() in RESERVED:
            raise scope.err(node, f"reserved word {t!r} used as a term")
        return Const(t)
    head = node.head()
    if head is None:
        raise scope.err(node, "malformed term")
    if head == "count":
        if len(node) != 3:
            raise scope.err(node, "count expects (count (?x...) formula)")
        vs = parse_var_list(node[1], scope)
        if len(vs) != 1:
            raise scope.err(node[1], "counting over tuples is not supported; use one variable")
        body = parse_formula(node[2], scope)
        return Count(vs, body)
    name = node[0].text
    if name in scope.actions:
        arity = scope.actions[name]
        if arity != len(node) - 1:
            raise scope.err(node, f"action {name} expects {arity} argument(s), got {len(node) - 1}")
        return Fn(name, tuple(parse_term(a, scope) for a in node.items[1:]), ACTION)
    raise scope.err(node, f"unknown function symbol {name!r}")


def _parse_num_lhs(node, scope: Scope):
    if isinstance(node, SList) and node.head() == "count":
        return parse_term(node, scope)
    if isinstance(node, Sym) and node.text in scope.numvars:
        return NumVar(node.text)
    return None


def parse_formula(node, scope: Scope):
    if isinstance(node, Sym):
        t = node.text
        if t.lower() == "true":
            return TRUE
        if t.lower() == "false":
            return FALSE
        if t.startswith("?") or _int(node) is not None:
            raise scope.err(node, f"expected a formula, got {t}")
        return _atom(node, t, (), scope)
    head = node.head()
    if head is None:
        raise scope.err(node, "malformed formula")
    args = node.items[1:]
    if head == "not":
        _arity(node, 1, scope)
        return Not(parse_formula(args[0], scope))
    if head == "and":
        return And(tuple(parse_formula(a, scope) for a in args)) if len(args) > 1 else (
            parse_formula(args[0], scope) if args else TRUE)
    if head == "or":
        return Or(tuple(parse_formula(a, scope) for a in args)) if len(args) > 1 else (
            parse_formula(args[0], scope) if args else FALSE)
    if head in ("imply", "=>"):
        _arity(node, 2, scope)
        return Imply(parse_formula(args[0], scope), parse_formula(args[1], scope))
    if head == "iff":
        _arity(node, 2, scope)
        return Iff(parse_formula(args[0], scope), parse_formula(args[1], scope))
    if head in ("forall", "exists"):
        _arity(node, 2, scope)
        vs = parse_var_list(args[0], scope)
        body = parse_formula(args[1], scope)
        return (Forall if head == "forall" else Exists)(vs, body)
    if head == "tc":
        if len(args) != 4:
            raise scope.err(node, "tc expects (tc (?x ?y) formula u v)")
        vs = parse_var_list(args[0], scope)
        if len(vs) != 2:
            raise scope.err(args[0], "tc binds exactly two variables")
        body = parse_formula(args[1], scope)
        return Tc(vs[0], vs[1], body, parse_term(args[2], scope), parse_term(args[3], scope))
    if head in NUM_OPS:
        _arity(node, 2, scope)
        lhs = _parse_num_lhs(args[0], scope)
        if lhs is not None:
            value = _int(args[1])
            if value is None or value < 0:
                raise scope.err(args[1], "numeric comparisons take a non-negative integer literal")
            return NumCmp(head, lhs, value)
        if head == ">":
            raise scope.err(node, "'>' only compares a count or numeric variable with an integer")
        a, b = parse_term(args[0], scope), parse_term(args[1], scope)
        try:
            return _eq(a, b)
        except SortError as e:
            raise scope.err(node, str(e)) from None
    if head == "poss":
        _arity(node, 1, scope)
        t = parse_term(args[0], scope)
        if not isinstance(t, Fn):
            raise scope.err(node, "poss expects an action term")
        return Poss(t)
    if head == "after":
        _arity(node, 2, scope)
        t = parse_term(args[0], scope)
        if not isinstance(t, Fn):
            raise scope.err(node, "after expects an action term")
        return Pending(t, parse_formula(args[1], scope))
    if head == "frozen":
        _arity(node, 1, scope)
        return Frozen(parse_formula(args[0], scope))
    if head in ("star", "while", "if", "when"):
        raise scope.err(node, f"'{head}' is not part of the formula language")
    name = node[0].text
    return _atom(node, name, tuple(parse_term(a, scope) for a in args), scope)


def _eq(a, b):
    if a.sort != b.sort:
        raise SortError(f"cannot equate {a} ({a.sort}) with {b} ({b.sort})")
    return Eq(a, b)


def _atom(node, name: str, args: tuple, scope: Scope) -> Atom:
    if name in scope.predicates:
        arity = scope.predicates[name]
        if arity != len(args):
            raise scope.err(node, f"predicate {name} expects {arity} argument(s), got {len(args)}")
    elif scope.strict:
        raise scope.err(node, f"unknown predicate {name!r}")
    for a in args:
        if getattr(a, "sort", None) != "object":
            raise scope.err(node, f"predicate {name} applied to non-object term {a}")
    return Atom(name, args)


def _arity(node, n: int, scope: Scope) -> None:
    if len(node) - 1 != n:
        raise scope.err(node, f"'{node.head()}' expects {n} argument(s), got {len(node) - 1}")


def formula_from_text(text: str, scope: Scope | None = None):
    scope = scope or Scope(strict=False)
    return parse_formula(read_one(text, scope.source), scope)
