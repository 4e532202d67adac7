"""SMT-LIB2 encoding of verification tasks and the solver driver.

A task is valid iff its negation is unsatisfiable.  The negation is put in
negation normal form and its outermost existentials are replaced by fresh
constants.  Each transitive-closure atom becomes an uninterpreted
predicate constrained by first-order consequences of being the reflexive
transitive closure of its body; minimality, which is not first-order, is
approximated by a finite set of induction instances.  Every emitted axiom
is true of the genuine closure, so ``unsat`` always means valid.  A ``sat``
answer on a task with closure atoms may come from a model where the
predicate is larger than the real closure, so such models are replayed
through the oracle before a task is reported as refuted.
"""

from __future__ import annotations

import os
import re
import shlex
import subprocess
import time
from dataclasses import dataclass, field

from .logic import (
    And, Atom, Bottom, Const, Count, Eq, Exists, Fn, Forall, Frozen, Iff, Imply,
    Not, NumCmp, NumVar, Or, Pending, Poss, Tc, Top, Var, canonical, conj,
    constants, disj, exists, forall, free_vars, imply, map_children, neg, nnf,
    subformulas, substitute,
)
from .sexpr import ParseError, SList, Sym, read_all

SORT = "Obj"
DEFAULT_SOLVER = "z3 -in"
DEFAULT_TIMEOUT = 10.0

VALID, REFUTED, UNKNOWN = "Valid", "Refuted", "Unknown"

_SIMPLE = re.compile(r"^[A-Za-z~!@$%^&*_+=<>.?/\-][A-Za-z0-9~!@$%^&*_+=<>.?/\-]*$")
_RESERVED = {
    "_", "!", "as", "let", "exists", "forall", "match", "par", "true", "false",
    "not", "and", "or", "xor", "=>", "=", "distinct", "ite", "Bool", SORT,
    "assert", "check-sat", "declare-fun", "declare-const", "define-fun",
    "declare-sort", "push", "pop", "NUMERAL", "DECIMAL", "STRING",
}


class EncodingError(ValueError):
    pass


def smt_symbol(name: str) -> str:
    if _SIMPLE.match(name) and name not in _RESERVED:
        return name
    if "|" in name or "\\" in name:
        raise EncodingError(f"symbol {name!r} cannot be written in SMT-LIB")
    return f"|{name}|"


# ------------------------------------------------------------ printing


def _term(t) -> str:
    if isinstance(t, Var):
        return smt_symbol("?" + t.name)
    if isinstance(t, Const):
        return smt_symbol(t.name)
    raise EncodingError(f"term {t} has no first-order encoding")


def smt_formula(phi) -> str:
    if isinstance(phi, Top):
        return "true"
    if isinstance(phi, Bottom):
        return "false"
    if isinstance(phi, Atom):
        if not phi.args:
            return smt_symbol(phi.pred)
        return f"({smt_symbol(phi.pred)} {' '.join(_term(a) for a in phi.args)})"
    if isinstance(phi, Eq):
        return f"(= {_term(phi.lhs)} {_term(phi.rhs)})"
    if isinstance(phi, Not):
        return f"(not {smt_formula(phi.arg)})"
    if isinstance(phi, And):
        return f"(and {' '.join(smt_formula(a) for a in phi.args)})"
    if isinstance(phi, Or):
        return f"(or {' '.join(smt_formula(a) for a in phi.args)})"
    if isinstance(phi, Imply):
        return f"(=> {smt_formula(phi.lhs)} {smt_formula(phi.rhs)})"
    if isinstance(phi, Iff):
        return f"(= {smt_formula(phi.lhs)} {smt_formula(phi.rhs)})"
    if isinstance(phi, (Forall, Exists)):
        kw = "forall" if isinstance(phi, Forall) else "exists"
        binds = " ".join(f"({_term(v)} {SORT})" for v in phi.vars)
        return f"({kw} ({binds}) {smt_formula(phi.body)})"
    raise EncodingError(f"cannot encode {phi!r}")


# ------------------------------------------------------- skolemization


def skolemize(phi, taken: set):
    """Replace existentials not under a universal by fresh constants.

    ``phi`` must be in negation normal form.

    Returns the new formula and the introduced constants, in order.
    """
    introduced = []

    def walk(f):
        if isinstance(f, And):
            return conj(*[walk(a) for a in f.args])
        if isinstance(f, Or):
            return disj(*[walk(a) for a in f.args])
        if isinstance(f, Exists):
            binding = {}
            for v in f.vars:
                k = len(taken) + 1
                name = f"sk!{k}!{v.name.split('!')[0]}"
                while name in taken:
                    k += 1
                    name = f"sk!{k}!{v.name.split('!')[0]}"
                taken.add(name)
                c = Const(name)
                introduced.append(c)
                binding[v] = c
            return walk(substitute(f.body, binding, check=False))
        return f

    return walk(phi), introduced


# ---------------------------------------------------- closure handling


@dataclass
class TcObligation:
    name: str
    params: tuple        # free variables of the body other than x, y
    x: Var
    y: Var
    body: object         # with inner closure atoms already replaced
    axioms: list = field(default_factory=list)
    minimality: list = field(default_factory=list)

    def atom(self, u, v, params=None) -> Atom:
        return Atom(self.name, tuple(params if params is not None else self.params) + (u, v))


class _TcTable:
    def __init__(self, taken: set):
        self.by_key: dict = {}
        self.order: list = []
        self.taken = taken

    def replace(self, phi):
        """Bottom-up replacement of closure atoms by predicate atoms."""
        if isinstance(phi, Tc):
            body = self.replace(phi.body)
            params = tuple(sorted(free_vars(body) - {phi.x, phi.y}, key=lambda v: v.name))
            ob = self._obligation(phi.x, phi.y, body, params)
            return ob.atom(phi.u, phi.v, params)
        if isinstance(phi, (Var, Const, Top, Bottom, Atom, Eq)):
            return phi
        return map_children(phi, self.replace)

    def _obligation(self, x, y, body, params) -> TcObligation:
        slots = {x: Var("#x"), y: Var("#y")}
        for i, p in enumerate(params):
            slots[p] = Var(f"#p{i}")
        key = str(canonical(substitute(body, slots, check=False)))
        ob = self.by_key.get(key)
        if ob is not None:
            return ob
        k = len(self.order) + 1
        name = f"tc!{k}"
        while name in self.taken:
            k += 1
            name = f"tc!{k}"
        self.taken.add(name)
        ob = TcObligation(name, params, x, y, body)
        self.by_key[key] = ob
        self.order.append(ob)
        return ob


def _chi(ob: TcObligation, a, b, params=None):
    binding = {ob.x: a, ob.y: b}
    if params is not None:
        binding.update(zip(ob.params, params))
    return substitute(ob.body, binding, check=False)


def _fresh_vars(ob: TcObligation, n: int) -> list:
    used = {v.name for v in free_vars(ob.body)} | {ob.x.name, ob.y.name}
    out = []
    i = 0
    while len(out) < n:
        i += 1
        name = f"t!{i}"
        if name not in used:
            out.append(Var(name))
    return out


def closure_axioms(ob: TcObligation) -> list:
    """First-order facts about the reflexive transitive closure of the body."""
    a, b, c = _fresh_vars(ob, 3)
    p = ob.params

    def P(u, v):
        return ob.atom(u, v)

    def chi(u, v):
        return _chi(ob, u, v)

    def close(vs, f):
        return forall(list(p) + list(vs), f)

    return [
        ("reflexive", close([a], P(a, a))),
        ("base", close([a, b], imply(chi(a, b), P(a, b)))),
        ("extend right", close([a, b, c], imply(conj(P(a, b), chi(b, c)), P(a, c)))),
        ("extend left", close([a, b, c], imply(conj(chi(a, b), P(b, c)), P(a, c)))),
        ("transitive", close([a, b, c], imply(conj(P(a, b), P(b, c)), P(a, c)))),
        ("first step", close([a, b], imply(P(a, b), disj(Eq(a, b), exists([c], conj(chi(a, c), P(c, b))))))),
        ("last step", close([a, b], imply(P(a, b), disj(Eq(a, b), exists([c], conj(P(a, c), chi(c, b))))))),
    ]


def induction_instance(ob: TcObligation, psi, left: bool):
    """``psi`` closed under reflexivity and steps implies it contains the closure.

    ``psi`` is a function from two terms to a formula.
    """
    a, b, c = _fresh_vars(ob, 3)
    base = forall([a], psi(a, a))
    if left:
        step = forall([a, b, c], imply(conj(_chi(ob, a, b), psi(b, c)), psi(a, c)))
    else:
        step = forall([a, b, c], imply(conj(psi(a, b), _chi(ob, b, c)), psi(a, c)))
    return imply(conj(base, step), forall([a, b], imply(ob.atom(a, b), psi(a, b))))


def minimality_candidates(ob: TcObligation, others: list, terms: list) -> list:
    """Induction hypotheses built from another closure predicate and constants."""
    out = []
    for q in others:
        if q is ob or q.params:
            continue
        out.append((f"{q.name}", lambda u, v, q=q: q.atom(u, v)))
        for t in terms:
            out.append((f"u={t.name}|{q.name}", lambda u, v, q=q, t=t: disj(Eq(u, t), q.atom(u, v))))
            out.append((f"v={t.name}|{q.name}", lambda u, v, q=q, t=t: disj(Eq(v, t), q.atom(u, v))))
            out.append((f"u!={t.name}|{q.name}", lambda u, v, q=q, t=t: disj(neg(Eq(u, t)), q.atom(u, v))))
            out.append((f"v!={t.name}|{q.name}", lambda u, v, q=q, t=t: disj(neg(Eq(v, t)), q.atom(u, v))))
    return out


# ----------------------------------------------------------- encoding


@dataclass
class Encoding:
    script: str
    closures: list
    skolems: list
    has_tc: bool


def _check_pure(phi) -> None:
    for n in subformulas(phi):
        if isinstance(n, (Count, NumCmp, NumVar)):
            raise EncodingError("counting term left in a task formula")
        if isinstance(n, (Pending, Poss, Frozen)):
            raise EncodingError(f"internal marker {type(n).__name__} left in a task formula")
        if isinstance(n, Fn):
            raise EncodingError(f"action term {n} left in a task formula")


def encode(task, domain_constants=(), comment: str | None = None,
           minimality: bool = True) -> Encoding:
    """SMT-LIB2 script whose unsatisfiability shows the task formula valid."""
    phi = task.formula
    if free_vars(phi):
        raise EncodingError(f"{task.id}: formula is not closed")
    _check_pure(phi)

    taken = {c.name for c in constants(phi)} | set(domain_constants)
    for n in subformulas(phi):
        if isinstance(n, Atom):
            taken.add(n.pred)
    negated, skolems = skolemize(nnf(neg(phi)), taken)

    table = _TcTable(taken)
    body = table.replace(negated)
    closures = table.order

    named = sorted({c.name for c in constants(phi)} | set(domain_constants))
    tc_terms = set()
    for ob in closures:
        tc_terms |= constants(ob.body)
    for n in subformulas(body):
        if isinstance(n, Atom) and any(n.pred == ob.name for ob in closures):
            tc_terms |= {a for a in n.args if isinstance(a, Const)}
    tc_terms |= set(skolems)
    terms = sorted(tc_terms, key=lambda c: c.name)

    axioms = []
    for ob in closures:
        for label, ax in closure_axioms(ob):
            axioms.append((f"{ob.name} {label}", ax))
    for ob in closures:
        if ob.params or not minimality:
            continue
        for label, psi in minimality_candidates(ob, closures, terms):
            for left in (False, True):
                side = "left" if left else "right"
                axioms.append((f"{ob.name} induction {side} on {label}",
                               induction_instance(ob, psi, left)))

    preds: dict = {}
    for f in [body] + [ax for _, ax in axioms]:
        for n in subformulas(f):
            if isinstance(n, Atom):
                preds[n.pred] = len(n.args)
    all_consts = sorted(set(named) | {c.name for c in skolems}
                        | {c.name for _, ax in axioms for c in constants(ax)})

    lines = [f"; {comment or task.id}", "(set-logic UF)", f"(declare-sort {SORT} 0)"]
    for p in sorted(preds):
        args = " ".join([SORT] * preds[p])
        lines.append(f"(declare-fun {smt_symbol(p)} ({args}) Bool)")
    for c in all_consts:
        lines.append(f"(declare-fun {smt_symbol(c)} () {SORT})")
    if len(named) > 1:
        lines.append(f"(assert (distinct {' '.join(smt_symbol(c) for c in named)}))")
    for label, ax in axioms:
        lines.append(f"; {label}")
        lines.append(f"(assert {smt_formula(ax)})")
    lines.append("; negated task")
    lines.append(f"(assert {smt_formula(body)})")
    lines.append("(check-sat)")
    return Encoding("\n".join(lines) + "\n", closures, skolems, bool(closures))


# -------------------------------------------------------------- solver


@dataclass
class SolverConfig:
    command: str = DEFAULT_SOLVER
    timeout: float = DEFAULT_TIMEOUT

    @classmethod
    def from_env(cls, command: str | None = None, timeout: float | None = None) -> "SolverConfig":
        cmd = command or os.environ.get("SOUNDABS_SOLVER") or DEFAULT_SOLVER
        return cls(cmd, DEFAULT_TIMEOUT if timeout is None else timeout)


@dataclass
class SolverVerdict:
    status: str                  # unsat | sat | unknown | timeout | error
    model: str = ""
    wall_ms: float = 0.0
    detail: str = ""


def run_solver(script: str, cfg: SolverConfig, want_model: bool = True) -> SolverVerdict:
    if want_model:
        script = script + "(get-model)\n"
    try:
        argv = shlex.split(cfg.command)
    except ValueError as e:
        return SolverVerdict("error", detail=f"bad solver command: {e}")
    start = time.perf_counter()
    try:
        proc = subprocess.run(argv, input=script, capture_output=True, text=True,
                              timeout=cfg.timeout)
    except subprocess.TimeoutExpired:
        return SolverVerdict("timeout", wall_ms=(time.perf_counter() - start) * 1000,
                             detail=f"no answer within {cfg.timeout}s")
    except OSError as e:
        return SolverVerdict("error", detail=f"cannot run solver {argv[0] if argv else ''!r}: {e}")
    elapsed = (time.perf_counter() - start) * 1000
    out = proc.stdout.strip()
    first, _, rest = out.partition("\n")
    status = first.strip()
    if status in ("sat", "unsat", "unknown"):
        return SolverVerdict(status, rest if status == "sat" else "", elapsed)
    detail = (proc.stderr.strip() or out)[:500]
    return SolverVerdict("error", wall_ms=elapsed, detail=f"unexpected solver output: {detail}")


# ------------------------------------------------------- model replay


class ModelError(ValueError):
    pass


def parse_model(text: str) -> tuple:
    """Universe and function definitions of a ``(get-model)`` answer."""
    try:
        exprs = read_all(text)
    except ParseError as e:
        raise ModelError(f"unreadable model: {e}") from None
    if not exprs:
        raise ModelError("empty model")
    top = exprs[0]
    if isinstance(top, SList) and top.head() == "model":
        top = SList(top.items[1:])
    universe = sorted(set(re.findall(rf"{SORT}!val!\d+", text)), key=lambda s: int(s.rsplit("!", 1)[1]))
    defs = {}
    for item in top:
        if isinstance(item, SList) and item.head() == "define-fun" and len(item) == 5:
            name = item[1].text
            params = [p[0].text for p in item[2]]
            defs[name] = (params, item[4])
    return universe, defs


class _ModelEval:
    def __init__(self, universe, defs):
        self.universe = universe
        self.defs = defs
        self._cache: dict = {}

    def call(self, name, args):
        key = (name, tuple(args))
        if key in self._cache:
            return self._cache[key]
        params, body = self.defs[name]
        val = self.ev(body, dict(zip(params, args)))
        self._cache[key] = val
        return val

    def ev(self, e, env):
        if isinstance(e, Sym):
            t = e.text
            if t in env:
                return env[t]
            if t == "true":
                return True
            if t == "false":
                return False
            if t in self.defs:
                return self.call(t, ())
            if t in self.universe:
                return t
            raise ModelError(f"unknown symbol {t} in model")
        head = e.items[0]
        if isinstance(head, SList):
            if head.head() == "_" or head.head() == "as":
                raise ModelError(f"unsupported model term {e}")
        op = head.text
        args = e.items[1:]
        if op == "ite":
            return self.ev(args[1], env) if self.ev(args[0], env) else self.ev(args[2], env)
        if op == "and":
            return all(self.ev(a, env) for a in args)
        if op == "or":
            return any(self.ev(a, env) for a in args)
        if op == "not":
            return not self.ev(args[0], env)
        if op == "=>":
            return (not self.ev(args[0], env)) or self.ev(args[1], env)
        if op == "=":
            vals = [self.ev(a, env) for a in args]
            return all(v == vals[0] for v in vals)
        if op == "distinct":
            vals = [self.ev(a, env) for a in args]
            return len(set(vals)) == len(vals)
        if op == "let":
            inner = dict(env)
            for binding in args[0]:
                inner[binding[0].text] = self.ev(binding[1], env)
            return self.ev(args[1], inner)
        if op in self.defs:
            return self.call(op, [self.ev(a, env) for a in args])
        raise ModelError(f"unsupported model operator {op}")


def model_to_state(model_text: str, bat, named_constants) -> tuple:
    """Turn a solver model into (objects, state) for the oracle.

    Universe elements denoted by a named constant take that constant's name.
    Predicates the model leaves undefined are taken to be empty.
    """
    import itertools

    universe, defs = parse_model(model_text)
    if not universe:
        universe = [f"{SORT}!val!0"]
    ev = _ModelEval(universe, defs)
    rename = {}
    for c in named_constants:
        sym = c
        if sym not in defs:
            continue
        elem = ev.call(sym, ())
        if elem in rename:
            raise ModelError(f"constants {rename[elem]} and {c} share an element")
        rename[elem] = c
    names = {e: rename.get(e, f"o{i}") for i, e in enumerate(universe)}
    for c in named_constants:
        if c not in rename.values():
            # unconstrained constant: give it its own element
            extra = f"{SORT}!free!{c}"
            universe.append(extra)
            names[extra] = c
    state = set()
    for pred, arity in bat.symbols.fluents.items():
        if pred not in defs:
            continue
        for combo in itertools.product(universe, repeat=arity):
            if any(e not in ev.universe for e in combo):
                continue
            if ev.call(pred, list(combo)):
                state.add((pred,) + tuple(names[e] for e in combo))
    return tuple(names[e] for e in universe), frozenset(state)


# ------------------------------------------------------ classification


@dataclass
class TaskResult:
    task_id: str
    classification: str
    verdict: SolverVerdict
    downgraded: bool = False
    note: str = ""


def classify(task, verdict: SolverVerdict, bat=None, has_tc: bool | None = None) -> TaskResult:
    """Turn a solver answer into Valid / Refuted / Unknown.

    A ``sat`` answer on a task with closure atoms only refutes the task if
    the model, read as a finite structure with the real closure, falsifies
    the task formula.
    """
    if has_tc is None:
        has_tc = any(isinstance(n, Tc) for n in subformulas(task.formula))
    if verdict.status == "unsat":
        return TaskResult(task.id, VALID, verdict)
    if verdict.status in ("unknown", "timeout", "error"):
        return TaskResult(task.id, UNKNOWN, verdict, note=verdict.detail or verdict.status)
    if not has_tc:
        return TaskResult(task.id, REFUTED, verdict, note="solver found a countermodel")
    if bat is None:
        return TaskResult(task.id, UNKNOWN, verdict, downgraded=True,
                          note="countermodel involves closure predicates and was not replayed")
    from .oracle import Evaluator, OracleError
    named = sorted({c.name for c in constants(task.formula)} | set(bat.symbols.constants))
    try:
        objects, state = model_to_state(verdict.model, bat, named)
        ok = Evaluator(objects, bat).holds(task.formula, state)
    except (ModelError, OracleError, KeyError, IndexError) as e:
        return TaskResult(task.id, UNKNOWN, verdict, downgraded=True,
                          note=f"countermodel could not be replayed: {e}")
    if not ok:
        atoms = " ".join("(" + " ".join(a) + ")" for a in sorted(state))
        return TaskResult(task.id, REFUTED, verdict,
                          note=f"finite countermodel over {' '.join(objects)}: {atoms}")
    return TaskResult(task.id, UNKNOWN, verdict, downgraded=True,
                      note="solver model relies on a non-minimal closure; task may still be valid")


def discharge(task, bat, cfg: SolverConfig, emit_path=None) -> tuple:
    """Encode, solve and classify one task; returns (TaskResult, Encoding)."""
    enc = encode(task, sorted(bat.symbols.constants))
    if emit_path is not None:
        with open(emit_path, "w") as fh:
            fh.write(enc.script)
    verdict = run_solver(enc.script, cfg)
    return classify(task, verdict, bat, enc.has_tc), enc
