"""Qualitative numerical planning problems.

Literals are ``F``, ``(not F)``, ``(= n 0)`` and ``(> n 0)``; effects set a
boolean feature or increment/decrement a numeric variable by an unknown
positive amount.  Actions are parameterless.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .logic import Atom, Not, NumCmp, NumVar, conj, to_sexpr
from .sexpr import ParseError, SList, Sym, error_at, read_all

SET_TRUE = "set-true"
SET_FALSE = "set-false"
FRAME = "frame"
INC = "inc"
DEC = "dec"


@dataclass(frozen=True)
class QnpAction:
    name: str
    pre: tuple = ()                 # literal formulas
    bool_effects: tuple = ()        # (feature, value) pairs
    num_effects: tuple = ()         # (variable, INC|DEC) pairs

    @property
    def precondition(self):
        return conj(*self.pre)


@dataclass
class QnpProblem:
    name: str
    bools: tuple = ()
    nums: tuple = ()
    init: tuple = ()
    goal: tuple = ()
    actions: list = field(default_factory=list)

    @property
    def init_formula(self):
        return conj(*self.init)

    @property
    def goal_formula(self):
        return conj(*self.goal)

    def action(self, name: str) -> QnpAction:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(name)


def hl_ssa_literals(action: QnpAction, qnp: QnpProblem) -> dict:
    """What ``action`` does to each feature and numeric variable."""
    out = {}
    effects = dict(action.bool_effects)
    for f in qnp.bools:
        if f in effects:
            out[f] = SET_TRUE if effects[f] else SET_FALSE
        else:
            out[f] = FRAME
    nums = dict(action.num_effects)
    for n in qnp.nums:
        out[n] = nums.get(n, FRAME)
    return out


# ---------------------------------------------------------------- parsing


class _Reader:
    def __init__(self, bools, nums, source):
        self.bools, self.nums, self.source = set(bools), set(nums), source

    def err(self, node, msg):
        return error_at(node, msg, self.source)

    def literal(self, node):
        if isinstance(node, Sym):
            if node.text not in self.bools:
                raise self.err(node, f"unknown boolean feature {node.text!r}")
            return Atom(node.text)
        head = node.head()
        if head == "not" and len(node) == 2:
            inner = node[1]
            if isinstance(inner, SList) and inner.head() == "=":
                lit = self.literal(inner)
                return NumCmp(">", lit.lhs, 0)
            return Not(self.literal(inner))
        if head in ("=", ">") and len(node) == 3:
            n, zero = node[1], node[2]
            if not isinstance(n, Sym) or n.text not in self.nums:
                raise self.err(node, f"unknown numeric variable {n}")
            if not isinstance(zero, Sym) or zero.text != "0":
                raise self.err(node, "numeric literals compare with 0 only")
            return NumCmp(head, NumVar(n.text), 0)
        raise self.err(node, f"malformed literal {node}")

    def effect(self, node):
        if isinstance(node, SList) and node.head() in ("inc", "dec"):
            if len(node) != 2 or not isinstance(node[1], Sym) or node[1].text not in self.nums:
                raise self.err(node, f"({node.head()} n) needs a declared numeric variable")
            return ("num", node[1].text, node.head())
        lit = self.literal(node)
        if isinstance(lit, NumCmp):
            raise self.err(node, "numeric effects are written (inc n) or (dec n)")
        if isinstance(lit, Not):
            return ("bool", lit.arg.pred, False)
        return ("bool", lit.pred, True)


def _symbols(node, what, source):
    out = []
    for s in node.items[1:]:
        if not isinstance(s, Sym):
            raise error_at(s, f"expected a {what} name", source)
        if s.text in out:
            raise error_at(s, f"{what} {s.text} declared twice", source)
        out.append(s.text)
    return tuple(out)


def parse_qnp(text: str, source: str = "") -> QnpProblem:
    exprs = read_all(text, source)
    if len(exprs) != 1 or not isinstance(exprs[0], SList) or exprs[0].head() != "qnp":
        raise ParseError("expected a single (qnp NAME ...) form", 1, 1, source)
    top = exprs[0]
    if len(top) < 2 or not isinstance(top[1], Sym):
        raise error_at(top, "qnp needs a name", source)
    sections = {}
    actions = []
    for sec in top.items[2:]:
        if not isinstance(sec, SList) or sec.head() is None:
            raise error_at(sec, "expected a (:section ...) form", source)
        h = sec.head()
        if h == ":action":
            actions.append(sec)
        elif h in (":bools", ":nums", ":init", ":goal"):
            if h in sections:
                raise error_at(sec, f"duplicate {h} section", source)
            sections[h] = sec
        else:
            raise error_at(sec, f"unknown qnp section {h}", source)
    bools = _symbols(sections[":bools"], "feature", source) if ":bools" in sections else ()
    nums = _symbols(sections[":nums"], "numeric variable", source) if ":nums" in sections else ()
    clash = set(bools) & set(nums)
    if clash:
        raise ParseError(f"{sorted(clash)} declared both boolean and numeric", 1, 1, source)
    rd = _Reader(bools, nums, source)
    init = tuple(rd.literal(x) for x in sections[":init"].items[1:]) if ":init" in sections else ()
    goal = tuple(rd.literal(x) for x in sections[":goal"].items[1:]) if ":goal" in sections else ()

    parsed = []
    for node in actions:
        if len(node) < 2 or not isinstance(node[1], Sym):
            raise error_at(node, "action needs a name", source)
        name = node[1].text
        if any(a.name == name for a in parsed):
            raise error_at(node, f"action {name} defined twice", source)
        fields = {}
        rest = node.items[2:]
        if len(rest) % 2:
            raise error_at(node, "expected :pre (...) :eff (...)", source)
        for k, v in zip(rest[0::2], rest[1::2]):
            if not isinstance(k, Sym) or k.text.lower() not in (":pre", ":eff"):
                raise error_at(k, f"unknown action field {k}", source)
            if not isinstance(v, SList):
                raise error_at(v, f"{k.text} expects a parenthesised list", source)
            fields[k.text.lower()] = v
        pre = tuple(rd.literal(x) for x in fields.get(":pre", SList(())))
        bool_eff, num_eff = {}, {}
        for e in fields.get(":eff", SList(())):
            kind, sym, val = rd.effect(e)
            target = bool_eff if kind == "bool" else num_eff
            if sym in target and target[sym] != val:
                raise error_at(e, f"conflicting effects on {sym} in action {name}", source)
            target[sym] = val
        parsed.append(QnpAction(name, pre, tuple(bool_eff.items()), tuple(num_eff.items())))
    return QnpProblem(top[1].text, bools, nums, init, goal, parsed)


def load_qnp(path) -> QnpProblem:
    path = Path(path)
    return parse_qnp(path.read_text(), str(path))


def _lit_sexpr(lit) -> str:
    if isinstance(lit, NumCmp):
        return f"({lit.op} {lit.lhs.name} 0)"
    return to_sexpr(lit)


def qnp_sexpr(q: QnpProblem) -> str:
    lines = [f"(qnp {q.name}",
             f"  (:bools {' '.join(q.bools)})",
             f"  (:nums {' '.join(q.nums)})",
             f"  (:init {' '.join(_lit_sexpr(x) for x in q.init)})",
             f"  (:goal {' '.join(_lit_sexpr(x) for x in q.goal)})"]
    for a in q.actions:
        effs = [f if v else f"(not {f})" for f, v in a.bool_effects]
        effs += [f"({d} {n})" for n, d in a.num_effects]
        lines.append(f"  (:action {a.name} :pre ({' '.join(_lit_sexpr(x) for x in a.pre)}) "
                     f":eff ({' '.join(effs)}))")
    return "\n".join(lines) + ")\n"
