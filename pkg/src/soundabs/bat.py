"""Compile STRIPS-like domain files into basic action theories.

Successor-state axioms take Reiter's closed form

    P(x, do(a, s))  <->  gamma+(x, a)  |  (P(x, s) & ~gamma-(x, a))

where gamma+ (gamma-) is a disjunction over the actions that add (delete)
P.  When an effect's arguments are distinct action parameters the
parameters are renamed to the fluent's own arguments, so the delete
condition of ``on`` under ``unstack(?x ?y)`` reads ``a = unstack(x, y)``
rather than an existential over fresh names.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .logic import (
    ACTION, FALSE, TRUE, Atom, Const, Fn, SymbolTable, Var, conj, constants,
    disj, eq, exists, free_vars, fresh_var, neg,
)
from .sexpr import ParseError, SList, Sym, error_at, read_all
from .syntax import Scope, parse_formula, parse_var_list

ACTION_VAR = Var("a", ACTION)


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple
    precondition: object
    add: tuple = ()
    delete: tuple = ()

    def term(self, args=None) -> Fn:
        return Fn(self.name, tuple(args) if args is not None else self.params)


@dataclass(frozen=True)
class SuccessorStateAxiom:
    fluent: str
    params: tuple
    positive: object
    negative: object

    @property
    def body(self):
        frame = conj(Atom(self.fluent, self.params), neg(self.negative))
        return disj(self.positive, frame)


@dataclass(frozen=True)
class StateConstraintSet:
    formulas: tuple = ()

    def conjunction(self):
        return constraint_conjunction(self)


@dataclass
class DomainSpec:
    name: str
    predicates: dict                      # name -> tuple of formal Vars
    actions: list
    constants: set = field(default_factory=set)
    init: object = TRUE
    goal: object = TRUE
    source: str = ""


@dataclass
class BasicActionTheory:
    name: str
    symbols: SymbolTable
    formals: dict                         # fluent -> tuple of Vars
    schemas: dict                         # action -> ActionSchema
    ssas: dict                            # fluent -> SuccessorStateAxiom
    init: object = TRUE
    goal: object = TRUE
    constraints: StateConstraintSet = field(default_factory=StateConstraintSet)

    @property
    def preconditions(self) -> dict:
        return {n: (s.params, s.precondition) for n, s in self.schemas.items()}

    def scope(self, source: str = "", numvars=(), extra_predicates=None) -> Scope:
        preds = dict(self.symbols.fluents)
        if extra_predicates:
            preds.update(extra_predicates)
        return Scope(predicates=preds, actions=dict(self.symbols.actions),
                     numvars=set(numvars), source=source)

    def rigid(self) -> set:
        """Fluents that no action changes."""
        return {f for f, ax in self.ssas.items()
                if ax.positive == FALSE and ax.negative == FALSE}

    def with_constraints(self, sc: StateConstraintSet) -> "BasicActionTheory":
        return BasicActionTheory(self.name, self.symbols, self.formals, self.schemas,
                                 self.ssas, self.init, self.goal, sc)

    def all_constants(self) -> set:
        out = set(Const(c) for c in self.symbols.constants)
        for s in self.schemas.values():
            out |= constants(s.precondition)
            for e in s.add + s.delete:
                out |= constants(e)
        out |= constants(self.init) | constants(self.goal)
        for c in self.constraints.formulas:
            out |= constants(c)
        return out


class DomainError(ValueError):
    pass


# ---------------------------------------------------------------- parsing


def _keyword_fields(node: SList, start: int, source: str) -> dict:
    out = {}
    items = node.items[start:]
    if len(items) % 2:
        raise error_at(node, "expected :keyword value pairs", source)
    for k, v in zip(items[0::2], items[1::2]):
        if not (isinstance(k, Sym) and k.text.startswith(":")):
            raise error_at(k, f"expected a :keyword, got {k}", source)
        out[k.text.lower()] = v
    return out


def parse_domain(text: str, source: str = "") -> DomainSpec:
    exprs = read_all(text, source)
    if len(exprs) != 1 or not isinstance(exprs[0], SList) or exprs[0].head() not in ("domain", "define"):
        raise ParseError("expected a single (domain NAME ...) form", 1, 1, source)
    top = exprs[0]
    if len(top) < 2 or not isinstance(top[1], Sym):
        raise error_at(top, "domain needs a name", source)
    name = top[1].text
    predicates: dict = {}
    consts: set = set()
    raw_actions, init_node, goal_node = [], None, None
    for sec in top.items[2:]:
        if not isinstance(sec, SList) or not sec.head():
            raise error_at(sec, "expected a (:section ...) form", source)
        kw = sec.head()
        if kw == ":predicates":
            for p in sec.items[1:]:
                if isinstance(p, Sym):
                    p = SList((p,), p.line, p.col)
                if not isinstance(p, SList) or not p.head():
                    raise error_at(p, "malformed predicate declaration", source)
                pname = p[0].text
                if pname in predicates:
                    raise error_at(p, f"predicate {pname} declared twice", source)
                predicates[pname] = parse_var_list(SList(p.items[1:], p.line, p.col),
                                                   Scope(source=source))
        elif kw == ":constants":
            for c in sec.items[1:]:
                if not isinstance(c, Sym) or c.text.startswith("?"):
                    raise error_at(c, "constants are bare symbols", source)
                consts.add(c.text)
        elif kw == ":action":
            raw_actions.append(sec)
        elif kw == ":init":
            init_node = sec
        elif kw == ":goal":
            goal_node = sec
        elif kw in (":requirements", ":types"):
            continue
        else:
            raise error_at(sec, f"unknown domain section {kw}", source)

    action_arity = {}
    for a in raw_actions:
        if len(a) < 2 or not isinstance(a[1], Sym):
            raise error_at(a, "action needs a name", source)
        f = _keyword_fields(a, 2, source)
        params = f.get(":parameters", SList(()))
        action_arity[a[1].text] = len(params)
    scope = Scope(predicates={p: len(v) for p, v in predicates.items()},
                  actions=action_arity, source=source)
    for n in action_arity:
        if n in predicates:
            raise ParseError(f"{n!r} is declared both as a predicate and an action", 1, 1, source)

    actions = [_parse_action(a, scope, source) for a in raw_actions]

    def section_formula(sec):
        if sec is None:
            return TRUE
        if len(sec) != 2:
            raise error_at(sec, f"{sec.head()} expects exactly one formula", source)
        phi = parse_formula(sec[1], scope)
        if free_vars(phi):
            names = ", ".join(sorted("?" + v.name for v in free_vars(phi)))
            raise error_at(sec, f"{sec.head()} formula has free variables {names}", source)
        return phi

    init = section_formula(init_node)
    goal = section_formula(goal_node)
    return DomainSpec(name, predicates, actions, consts, init, goal, source)


def _parse_action(node: SList, scope: Scope, source: str) -> ActionSchema:
    name = node[1].text
    f = _keyword_fields(node, 2, source)
    unknown = set(f) - {":parameters", ":precondition", ":effect"}
    if unknown:
        raise error_at(node, f"unknown action field(s) {sorted(unknown)}", source)
    params = parse_var_list(f.get(":parameters", SList(())), scope)
    pre = parse_formula(f[":precondition"], scope) if ":precondition" in f else TRUE
    stray = free_vars(pre) - set(params)
    if stray:
        raise error_at(node, f"precondition of {name} mentions non-parameters "
                       f"{sorted('?' + v.name for v in stray)}", source)
    add, delete = [], []
    eff = f.get(":effect")
    if eff is not None:
        lits = eff.items[1:] if isinstance(eff, SList) and eff.head() == "and" else [eff]
        for lit in lits:
            if isinstance(lit, SList) and lit.head() in ("when", "forall", "oneof", "increase", "decrease"):
                raise error_at(lit, f"'{lit.head()}' effects are not supported (STRIPS effects only)", source)
            positive = True
            if isinstance(lit, SList) and lit.head() == "not":
                if len(lit) != 2:
                    raise error_at(lit, "malformed negative effect", source)
                positive, lit = False, lit[1]
            atom = parse_formula(lit, scope)
            if not isinstance(atom, Atom):
                raise error_at(lit, "effects must be (possibly negated) fluent atoms", source)
            stray = free_vars(atom) - set(params)
            if stray:
                raise error_at(lit, f"effect mentions non-parameters {sorted('?' + v.name for v in stray)}", source)
            (add if positive else delete).append(atom)
    return ActionSchema(name, params, pre, tuple(add), tuple(delete))


def parse_constraints(text: str, bat: BasicActionTheory, source: str = "") -> StateConstraintSet:
    exprs = read_all(text, source)
    if len(exprs) != 1 or not isinstance(exprs[0], SList) or exprs[0].head() != "constraints":
        raise ParseError("expected a single (constraints formula ...) form", 1, 1, source)
    scope = bat.scope(source)
    out = []
    for item in exprs[0].items[1:]:
        phi = parse_formula(item, scope)
        if free_vars(phi):
            raise error_at(item, "state constraints must be closed formulas", source)
        out.append(phi)
    return StateConstraintSet(tuple(out))


# ------------------------------------------------------------ compilation


def _effect_condition(schema: ActionSchema, atom: Atom, formals: tuple):
    """The condition on ``a`` under which ``schema`` produces ``atom`` at ``formals``."""
    mapping: dict = {}
    equalities = []
    for formal, arg in zip(formals, atom.args):
        if isinstance(arg, Var) and arg not in mapping:
            mapping[arg] = formal
        elif isinstance(arg, Var):
            equalities.append(eq(formal, mapping[arg]))
        else:
            equalities.append(eq(formal, arg))
    avoid = {v.name for v in formals} | {ACTION_VAR.name}
    rest = []
    for p in schema.params:
        if p not in mapping:
            nv = p if p.name not in avoid else fresh_var(p, avoid | {q.name for q in schema.params})
            avoid.add(nv.name)
            mapping[p] = nv
            rest.append(nv)
    action = Fn(schema.name, tuple(mapping[p] for p in schema.params))
    return exists(rest, conj(eq(ACTION_VAR, action), *equalities))


def compile_domain(spec: DomainSpec) -> BasicActionTheory:
    symbols = SymbolTable()
    for p, formals in spec.predicates.items():
        symbols.declare("fluent", p, len(formals))
    seen = set()
    for a in spec.actions:
        if a.name in seen:
            raise DomainError(f"action {a.name} defined twice")
        seen.add(a.name)
        try:
            symbols.declare("action", a.name, len(a.params))
        except ValueError as e:
            raise DomainError(str(e)) from None
    consts = set(spec.constants)
    for phi in [spec.init, spec.goal] + [a.precondition for a in spec.actions]:
        consts |= {c.name for c in constants(phi)}
    for a in spec.actions:
        for e in a.add + a.delete:
            consts |= {c.name for c in constants(e)}
    for c in sorted(consts):
        try:
            symbols.declare("constant", c)
        except ValueError as e:
            raise DomainError(str(e)) from None

    ssas = {}
    for p, formals in spec.predicates.items():
        pos, negs = [], []
        for a in spec.actions:
            for e in a.add:
                if e.pred == p:
                    pos.append(_effect_condition(a, e, formals))
            for e in a.delete:
                if e.pred == p:
                    negs.append(_effect_condition(a, e, formals))
        ssas[p] = SuccessorStateAxiom(p, formals, disj(*pos), disj(*negs))

    schemas = {a.name: a for a in spec.actions}
    return BasicActionTheory(spec.name, symbols, dict(spec.predicates), schemas, ssas,
                             spec.init, spec.goal)


def constraint_conjunction(sc: StateConstraintSet):
    return conj(*sc.formulas)


def load_domain(path, constraints_path=None) -> BasicActionTheory:
    path = Path(path)
    bat = compile_domain(parse_domain(path.read_text(), str(path)))
    if constraints_path is not None:
        cp = Path(constraints_path)
        bat = bat.with_constraints(parse_constraints(cp.read_text(), bat, str(cp)))
    return bat
