"""Iteration-free Golog programs and refinement mappings.

A refinement mapping sends each high-level action to a low-level program,
each high-level boolean feature to a formula and each numeric variable to
a counting term.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .logic import (
    And, Atom, Count, Exists, Fn, Forall, Iff, Imply, Not, NumCmp, NumVar, Or,
    all_var_names, free_vars, fresh_var, map_children, substitute,
)
from .sexpr import ParseError, SList, Sym, error_at, read_all
from .syntax import Scope, parse_formula, parse_term, parse_var_list


@dataclass(frozen=True)
class Act:
    action: Fn

    def __str__(self):
        return program_sexpr(self)


@dataclass(frozen=True)
class Test:
    cond: object

    def __str__(self):
        return program_sexpr(self)


@dataclass(frozen=True)
class Seq:
    parts: tuple

    def __str__(self):
        return program_sexpr(self)


@dataclass(frozen=True)
class Choice:
    left: object
    right: object

    def __str__(self):
        return program_sexpr(self)


@dataclass(frozen=True)
class Pick:
    vars: tuple
    body: object

    def __str__(self):
        return program_sexpr(self)


PROGRAM_TYPES = (Act, Test, Seq, Choice, Pick)


class MappingError(ValueError):
    pass


def program_sexpr(p) -> str:
    from .logic import term_sexpr, to_sexpr
    if isinstance(p, Act):
        args = " ".join(term_sexpr(a) for a in p.action.args)
        return f"(act {p.action.name}{' ' + args if args else ''})"
    if isinstance(p, Test):
        return f"(test {to_sexpr(p.cond)})"
    if isinstance(p, Seq):
        return "(seq " + " ".join(program_sexpr(q) for q in p.parts) + ")"
    if isinstance(p, Choice):
        return f"(choice {program_sexpr(p.left)} {program_sexpr(p.right)})"
    if isinstance(p, Pick):
        vs = " ".join(term_sexpr(v) for v in p.vars)
        return f"(pick ({vs}) {program_sexpr(p.body)})"
    raise TypeError(f"not a program: {p!r}")


def assert_iteration_free(p) -> None:
    """Raise if ``p`` contains anything but act/test/seq/choice/pick."""
    if isinstance(p, Act) or isinstance(p, Test):
        return
    if isinstance(p, Seq):
        for q in p.parts:
            assert_iteration_free(q)
    elif isinstance(p, Choice):
        assert_iteration_free(p.left)
        assert_iteration_free(p.right)
    elif isinstance(p, Pick):
        assert_iteration_free(p.body)
    else:
        raise MappingError(f"unsupported program construct {type(p).__name__}")


def program_free_vars(p) -> frozenset:
    if isinstance(p, Act):
        return free_vars(p.action)
    if isinstance(p, Test):
        return free_vars(p.cond)
    if isinstance(p, Seq):
        out = frozenset()
        for q in p.parts:
            out |= program_free_vars(q)
        return out
    if isinstance(p, Choice):
        return program_free_vars(p.left) | program_free_vars(p.right)
    if isinstance(p, Pick):
        return program_free_vars(p.body) - frozenset(p.vars)
    raise TypeError(f"not a program: {p!r}")


def program_var_names(p) -> set:
    if isinstance(p, Act):
        return all_var_names(p.action)
    if isinstance(p, Test):
        return all_var_names(p.cond)
    if isinstance(p, Seq):
        return set().union(*(program_var_names(q) for q in p.parts))
    if isinstance(p, Choice):
        return program_var_names(p.left) | program_var_names(p.right)
    return {v.name for v in p.vars} | program_var_names(p.body)


def substitute_program(p, binding: dict):
    """Capture-avoiding substitution of free variables in a program."""
    binding = {k: v for k, v in binding.items() if k != v and k in program_free_vars(p)}
    if not binding:
        return p
    if isinstance(p, Act):
        return Act(substitute(p.action, binding))
    if isinstance(p, Test):
        return Test(substitute(p.cond, binding))
    if isinstance(p, Seq):
        return Seq(tuple(substitute_program(q, binding) for q in p.parts))
    if isinstance(p, Choice):
        return Choice(substitute_program(p.left, binding), substitute_program(p.right, binding))
    incoming = set()
    for t in binding.values():
        incoming |= {v.name for v in free_vars(t)}
    avoid = incoming | program_var_names(p) | {k.name for k in binding}
    renamed, new_vars = {}, []
    for v in p.vars:
        if v.name in incoming:
            nv = fresh_var(v, avoid)
            avoid.add(nv.name)
            renamed[v] = nv
            new_vars.append(nv)
        else:
            new_vars.append(v)
    inner = {k: t for k, t in binding.items() if k not in p.vars}
    body = substitute_program(p.body, renamed) if renamed else p.body
    return Pick(tuple(new_vars), substitute_program(body, inner))


@dataclass
class RefinementMapping:
    action_map: dict = field(default_factory=dict)   # HL action -> (params, Program)
    prop_map: dict = field(default_factory=dict)     # boolean feature -> Formula
    num_map: dict = field(default_factory=dict)      # numeric variable -> Count

    def check_covers(self, qnp) -> None:
        """Every HL symbol needs exactly one entry, and nothing extra."""
        problems = []
        for kind, have, want in (("feature", self.prop_map, qnp.bools),
                                 ("numeric variable", self.num_map, qnp.nums),
                                 ("action", self.action_map, [a.name for a in qnp.actions])):
            for name in want:
                if name not in have:
                    problems.append(f"no mapping for {kind} {name}")
            for name in have:
                if name not in want:
                    problems.append(f"mapping for unknown {kind} {name}")
        for a in qnp.actions:
            if a.name in self.action_map and self.action_map[a.name][0]:
                problems.append(f"action {a.name} is parameterless at the high level "
                                f"but its refinement takes parameters")
        if problems:
            raise MappingError("; ".join(problems))


def map_formula(m: RefinementMapping, phi):
    """Replace high-level features and numeric variables by their definitions."""
    if isinstance(phi, Atom) and not phi.args and phi.pred in m.prop_map:
        return m.prop_map[phi.pred]
    if isinstance(phi, Atom):
        raise MappingError(f"unmapped high-level symbol {phi.pred}")
    if isinstance(phi, NumCmp):
        if isinstance(phi.lhs, NumVar):
            if phi.lhs.name not in m.num_map:
                raise MappingError(f"unmapped numeric variable {phi.lhs.name}")
            return NumCmp(phi.op, m.num_map[phi.lhs.name], phi.value)
        return phi
    if isinstance(phi, (Not, And, Or, Imply, Iff, Forall, Exists)):
        return map_children(phi, lambda c: map_formula(m, c))
    return phi


def map_action(m: RefinementMapping, name: str, args=()):
    if name not in m.action_map:
        raise MappingError(f"unmapped high-level action {name}")
    params, prog = m.action_map[name]
    if len(params) != len(args):
        raise MappingError(f"action {name} expects {len(params)} argument(s), got {len(args)}")
    return substitute_program(prog, dict(zip(params, args)))


# ---------------------------------------------------------------- parsing


def parse_program(node, scope: Scope):
    if not isinstance(node, SList) or node.head() is None:
        raise scope.err(node, f"expected a program, got {node}")
    head = node.head()
    args = node.items[1:]
    if head == "act":
        if not args or not isinstance(args[0], Sym):
            raise scope.err(node, "act expects (act NAME term...)")
        name = args[0].text
        if name not in scope.actions:
            raise scope.err(node, f"unknown low-level action {name!r}")
        if scope.actions[name] != len(args) - 1:
            raise scope.err(node, f"action {name} expects {scope.actions[name]} argument(s), got {len(args) - 1}")
        terms = tuple(parse_term(a, scope) for a in args[1:])
        for t in terms:
            if t.sort != "object":
                raise scope.err(node, f"action argument {t} is not an object term")
        return Act(Fn(name, terms))
    if head == "test":
        if len(args) != 1:
            raise scope.err(node, "test expects one formula")
        return Test(parse_formula(args[0], scope))
    if head == "seq":
        if not args:
            raise scope.err(node, "empty seq")
        parts = tuple(parse_program(a, scope) for a in args)
        return parts[0] if len(parts) == 1 else Seq(parts)
    if head == "choice":
        if len(args) < 2:
            raise scope.err(node, "choice needs at least two branches")
        progs = [parse_program(a, scope) for a in args]
        out = progs[-1]
        for p in reversed(progs[:-1]):
            out = Choice(p, out)
        return out
    if head == "pick":
        if len(args) != 2:
            raise scope.err(node, "pick expects (pick (?x...) program)")
        vs = parse_var_list(args[0], scope)
        return Pick(vs, parse_program(args[1], scope))
    if head in ("star", "while", "loop", "iter", "if", "proc"):
        raise scope.err(node, f"'{head}' is not allowed: refinements must be iteration-free")
    raise scope.err(node, f"unknown program construct {head!r}")


def parse_mapping(text: str, bat, source: str = "") -> RefinementMapping:
    exprs = read_all(text, source)
    if len(exprs) != 1 or not isinstance(exprs[0], SList) or exprs[0].head() != "map":
        raise ParseError("expected a single (map ...) form", 1, 1, source)
    scope = bat.scope(source)
    m = RefinementMapping()
    for entry in exprs[0].items[1:]:
        if not isinstance(entry, SList) or entry.head() not in (":fluent", ":num", ":action"):
            raise error_at(entry, "expected (:fluent ...), (:num ...) or (:action ...)", source)
        kind = entry.head()
        if len(entry) < 3 or not isinstance(entry[1], Sym):
            raise error_at(entry, f"malformed {kind} entry", source)
        name = entry[1].text
        if name in m.prop_map or name in m.num_map or name in m.action_map:
            raise error_at(entry, f"{name} is mapped twice", source)
        if kind == ":fluent":
            if len(entry) != 3:
                raise error_at(entry, "expected (:fluent NAME formula)", source)
            phi = parse_formula(entry[2], scope)
            if free_vars(phi):
                raise error_at(entry, f"definition of {name} must be closed", source)
            m.prop_map[name] = phi
        elif kind == ":num":
            if len(entry) != 3:
                raise error_at(entry, "expected (:num NAME (count (?x) formula))", source)
            t = parse_term(entry[2], scope)
            if not isinstance(t, Count):
                raise error_at(entry, f"numeric variable {name} must map to a counting term", source)
            if free_vars(t):
                raise error_at(entry, f"definition of {name} must be closed", source)
            m.num_map[name] = t
        else:
            if len(entry) != 4:
                raise error_at(entry, "expected (:action NAME (?params...) program)", source)
            params = parse_var_list(entry[2], scope)
            prog = parse_program(entry[3], scope)
            stray = program_free_vars(prog) - set(params)
            if stray:
                raise error_at(entry, f"refinement of {name} has free variables "
                               f"{sorted('?' + v.name for v in stray)}", source)
            m.action_map[name] = (params, prog)
    return m


def load_mapping(path, bat) -> RefinementMapping:
    path = Path(path)
    return parse_mapping(path.read_text(), bat, str(path))
