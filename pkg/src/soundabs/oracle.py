"""Brute-force semantics over finite instances.

States are frozensets of ground atoms ``(pred, arg1, ..., argk)`` over a
named universe.  Formulas are evaluated exactly: quantifiers range over the
universe, counting terms are counted and transitive-closure atoms are
computed as a fixpoint of the step relation.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from pathlib import Path

from .golog import Act, Choice, Pick, Seq, Test
from .logic import (
    And, Atom, Bottom, Const, Count, Eq, Exists, Fn, Forall, Frozen, Iff, Imply,
    Not, NumCmp, NumVar, Or, Pending, Poss, Tc, Top, Var, free_vars,
)
from .sexpr import ParseError, SList, Sym, error_at, read_all


@dataclass(frozen=True)
class FiniteInstance:
    objects: tuple
    init: frozenset
    name: str = ""

    def __post_init__(self):
        if len(set(self.objects)) != len(self.objects):
            raise ValueError("duplicate object names")


class OracleError(ValueError):
    pass


# --------------------------------------------------------- closure


def closure_fixpoint(rel: set, universe, u) -> set:
    """Objects reachable from ``u`` in zero or more steps (iterate to fixpoint)."""
    reach = {u}
    while True:
        new = {b for (a, b) in rel if a in reach} - reach
        if not new:
            return reach
        reach |= new


def closure_squaring(rel: set, universe) -> set:
    """Reflexive transitive closure by repeated squaring of I ∪ R."""
    m = set(rel) | {(a, a) for a in universe}
    while True:
        succ: dict = {}
        for a, b in m:
            succ.setdefault(a, set()).add(b)
        sq = {(a, c) for a, b in m for c in succ.get(b, ())}
        if sq <= m:
            return m
        m |= sq


def closure_paths(rel: set, universe, u, v) -> bool:
    """Search simple paths from ``u`` for one ending at ``v``."""
    succ: dict = {}
    for a, b in rel:
        succ.setdefault(a, []).append(b)

    def dfs(node, seen):
        if node == v:
            return True
        for nxt in succ.get(node, ()):
            if nxt not in seen and dfs(nxt, seen | {nxt}):
                return True
        return False

    return dfs(u, {u})


# ------------------------------------------------------- evaluation


class Evaluator:
    """Evaluate formulas over one instance; ``bat`` is needed for Poss/Pending."""

    def __init__(self, objects, bat=None, closure: str = "fixpoint"):
        self.objects = tuple(objects)
        self.bat = bat
        self.closure = closure
        self._tc_cache: dict = {}

    def term(self, t, env):
        if isinstance(t, Var):
            try:
                return env[t]
            except KeyError:
                raise OracleError(f"unbound variable ?{t.name}") from None
        if isinstance(t, Const):
            if t.name not in self.objects:
                raise OracleError(f"constant {t.name} is not an object of the instance")
            return t.name
        if isinstance(t, Fn):
            return Fn(t.name, tuple(Const(self.term(a, env)) for a in t.args))
        raise OracleError(f"cannot evaluate term {t}")

    def count(self, c: Count, state, env, origin) -> int:
        n = 0
        for combo in itertools.product(self.objects, repeat=len(c.vars)):
            inner = dict(env)
            inner.update(zip(c.vars, combo))
            if self.holds(c.body, state, inner, origin):
                n += 1
        return n

    def holds(self, phi, state, env=None, origin=None) -> bool:
        env = env or {}
        origin = state if origin is None else origin
        return self._holds(phi, state, env, origin)

    def _holds(self, phi, state, env, origin) -> bool:
        if isinstance(phi, Top):
            return True
        if isinstance(phi, Bottom):
            return False
        if isinstance(phi, Atom):
            return (phi.pred,) + tuple(self.term(a, env) for a in phi.args) in state
        if isinstance(phi, Eq):
            return self.term(phi.lhs, env) == self.term(phi.rhs, env)
        if isinstance(phi, Not):
            return not self._holds(phi.arg, state, env, origin)
        if isinstance(phi, And):
            return all(self._holds(a, state, env, origin) for a in phi.args)
        if isinstance(phi, Or):
            return any(self._holds(a, state, env, origin) for a in phi.args)
        if isinstance(phi, Imply):
            return (not self._holds(phi.lhs, state, env, origin)) or self._holds(phi.rhs, state, env, origin)
        if isinstance(phi, Iff):
            return self._holds(phi.lhs, state, env, origin) == self._holds(phi.rhs, state, env, origin)
        if isinstance(phi, (Forall, Exists)):
            test = all if isinstance(phi, Forall) else any
            def branch(combo):
                inner = dict(env)
                inner.update(zip(phi.vars, combo))
                return self._holds(phi.body, state, inner, origin)
            return test(branch(c) for c in itertools.product(self.objects, repeat=len(phi.vars)))
        if isinstance(phi, Tc):
            return self._tc(phi, state, env, origin)
        if isinstance(phi, NumCmp):
            if isinstance(phi.lhs, NumVar):
                raise OracleError(f"high-level numeric variable {phi.lhs.name} has no low-level value")
            n = self.count(phi.lhs, state, env, origin)
            return n == phi.value if phi.op == "=" else n > phi.value
        if isinstance(phi, Poss):
            return self.possible(self.term(phi.action, env), state)
        if isinstance(phi, Pending):
            act = self.term(phi.action, env)
            return self._holds(phi.body, apply_effects(self._need_bat(), state, act), env, origin)
        if isinstance(phi, Frozen):
            return self._holds(phi.body, origin, env, origin)
        raise OracleError(f"cannot evaluate {phi!r}")

    def _need_bat(self):
        if self.bat is None:
            raise OracleError("evaluating actions needs a domain")
        return self.bat

    def possible(self, action: Fn, state) -> bool:
        schema = self._need_bat().schemas[action.name]
        env = {p: a.name for p, a in zip(schema.params, action.args)}
        return self.holds(schema.precondition, state, env)

    def tc_relation(self, phi: Tc, state, env, origin) -> set:
        rel = set()
        for a in self.objects:
            for b in self.objects:
                inner = dict(env)
                inner[phi.x], inner[phi.y] = a, b
                if self._holds(phi.body, state, inner, origin):
                    rel.add((a, b))
        return rel

    def _tc(self, phi: Tc, state, env, origin) -> bool:
        u, v = self.term(phi.u, env), self.term(phi.v, env)
        ctx = tuple(sorted(((k.name, env[k]) for k in free_vars(phi.body) - {phi.x, phi.y}
                            if k in env)))
        key = (phi.x, phi.y, phi.body, ctx, state, origin)
        rel = self._tc_cache.get(key)
        if rel is None:
            rel = self.tc_relation(phi, state, env, origin)
            self._tc_cache[key] = rel
        if self.closure == "squaring":
            return (u, v) in closure_squaring(rel, self.objects)
        if self.closure == "paths":
            return closure_paths(rel, self.objects, u, v)
        return v in closure_fixpoint(rel, self.objects, u)


def eval_formula(phi, instance: FiniteInstance, state, bat=None, env=None,
                 closure: str = "fixpoint") -> bool:
    return Evaluator(instance.objects, bat, closure).holds(phi, state, env)


# ------------------------------------------------------ transitions


def ground_actions(bat, objects):
    for name, schema in sorted(bat.schemas.items()):
        for combo in itertools.product(objects, repeat=len(schema.params)):
            yield Fn(name, tuple(Const(c) for c in combo))


def _ground_atom(atom: Atom, env) -> tuple:
    out = [atom.pred]
    for a in atom.args:
        out.append(env[a] if isinstance(a, Var) else a.name)
    return tuple(out)


def apply_effects(bat, state, action: Fn) -> frozenset:
    """STRIPS update without checking the precondition: deletes, then adds."""
    schema = bat.schemas[action.name]
    env = {p: a.name for p, a in zip(schema.params, action.args)}
    out = set(state)
    for d in schema.delete:
        out.discard(_ground_atom(d, env))
    for a in schema.add:
        out.add(_ground_atom(a, env))
    return frozenset(out)


def step(bat, instance: FiniteInstance, state, action: Fn):
    """Successor state, or None when the precondition fails."""
    if not Evaluator(instance.objects, bat).possible(action, state):
        return None
    return apply_effects(bat, state, action)


def executions(bat, instance: FiniteInstance, state, program, env=None) -> set:
    """Terminal states of every execution of ``program`` from ``state``."""
    ev = Evaluator(instance.objects, bat)
    return _execs(ev, bat, state, program, env or {})


def _execs(ev: Evaluator, bat, state, prog, env) -> set:
    if isinstance(prog, Act):
        act = ev.term(prog.action, env)
        if not ev.possible(act, state):
            return set()
        return {apply_effects(bat, state, act)}
    if isinstance(prog, Test):
        return {state} if ev.holds(prog.cond, state, env) else set()
    if isinstance(prog, Seq):
        current = {state}
        for part in prog.parts:
            nxt = set()
            for s in current:
                nxt |= _execs(ev, bat, s, part, env)
            current = nxt
        return current
    if isinstance(prog, Choice):
        return _execs(ev, bat, state, prog.left, env) | _execs(ev, bat, state, prog.right, env)
    if isinstance(prog, Pick):
        out = set()
        for combo in itertools.product(ev.objects, repeat=len(prog.vars)):
            inner = dict(env)
            inner.update(zip(prog.vars, combo))
            out |= _execs(ev, bat, state, prog.body, inner)
        return out
    raise OracleError(f"unsupported program {prog!r}")


def reachable_states(bat, instance: FiniteInstance, depth: int | None = None) -> set:
    """States reachable from the instance's initial state by low-level actions."""
    depth = 3 * len(instance.objects) if depth is None else depth
    actions = list(ground_actions(bat, instance.objects))
    seen = {instance.init}
    frontier = deque([(instance.init, 0)])
    while frontier:
        s, d = frontier.popleft()
        if d >= depth:
            continue
        for a in actions:
            t = step(bat, instance, s, a)
            if t is not None and t not in seen:
                seen.add(t)
                frontier.append((t, d + 1))
    return seen


def refined_reachable_states(bat, instance: FiniteInstance, programs, depth: int | None = None) -> set:
    """States reachable by executing any of the given closed programs repeatedly."""
    depth = 3 * len(instance.objects) if depth is None else depth
    seen = {instance.init}
    frontier = deque([(instance.init, 0)])
    while frontier:
        s, d = frontier.popleft()
        if d >= depth:
            continue
        for p in programs:
            for t in executions(bat, instance, s, p):
                if t not in seen:
                    seen.add(t)
                    frontier.append((t, d + 1))
    return seen


@dataclass
class Witness:
    instance: FiniteInstance
    state: frozenset

    def describe(self) -> str:
        atoms = " ".join("(" + " ".join(a) + ")" for a in sorted(self.state))
        return f"objects {' '.join(self.instance.objects)}; state {atoms or '(empty)'}"


def check_validity_finite(phi, family, bat=None):
    """Check ``phi`` in every given state.

    ``family`` yields ``(instance, states)`` pairs.  Returns ``(True, None)``
    or ``(False, Witness)`` for the first failing state.
    """
    if free_vars(phi):
        raise OracleError("formula must be closed")
    for instance, states in family:
        ev = Evaluator(instance.objects, bat)
        for s in sorted(states, key=lambda st: sorted(st)):
            if not ev.holds(phi, s):
                return False, Witness(instance, s)
    return True, None



def check_abstraction_finite(bat, qnp, m, family) -> dict:
    """Check each soundness condition by running the refinements.

    This route never regresses a formula: executability, effects and counts
    are read off the states each refinement actually produces.  Returns a
    map from task id to ``None`` (holds) or the first failing ``Witness``.
    """
    from .golog import map_action, map_formula
    from .qnp import DEC, FRAME, INC, SET_FALSE, SET_TRUE, hl_ssa_literals

    sc = bat.constraints.conjunction()
    progs = {a.name: map_action(m, a.name) for a in qnp.actions}
    ids = ["task1:init"]
    for a in qnp.actions:
        ids.append(f"task2:{a.name}")
    for a in qnp.actions:
        ids += [f"task3:{a.name}:{f}" for f in qnp.bools]
        ids += [f"task4:{a.name}:{n}" for n in qnp.nums]
    ids.append("task5:goal")
    result = dict.fromkeys(ids)

    def fail(task_id, instance, state):
        if result[task_id] is None:
            result[task_id] = Witness(instance, state)

    hl_init = map_formula(m, qnp.init_formula)
    hl_goal = map_formula(m, qnp.goal_formula)
    for instance, states in family:
        ev = Evaluator(instance.objects, bat)

        def members(count, state):
            return frozenset(o for o in instance.objects
                             if ev.holds(count.body, state, {count.vars[0]: o}))

        for s in sorted(states, key=sorted):
            if ev.holds(bat.init, s) and not ev.holds(hl_init, s):
                fail("task1:init", instance, s)
            if not ev.holds(sc, s):
                continue
            if ev.holds(hl_goal, s) and not ev.holds(bat.goal, s):
                fail("task5:goal", instance, s)
            for a in qnp.actions:
                outs = executions(bat, instance, s, progs[a.name])
                if bool(outs) != ev.holds(map_formula(m, a.precondition), s):
                    fail(f"task2:{a.name}", instance, s)
                if not outs:
                    continue
                effects = hl_ssa_literals(a, qnp)
                for f in qnp.bools:
                    before = ev.holds(m.prop_map[f], s)
                    want = {SET_TRUE: True, SET_FALSE: False, FRAME: before}[effects[f]]
                    if any(ev.holds(m.prop_map[f], t) != want for t in outs):
                        fail(f"task3:{a.name}:{f}", instance, s)
                for n in qnp.nums:
                    count = m.num_map[n]
                    old = members(count, s)
                    for t in outs:
                        new = members(count, t)
                        if effects[n] == INC:
                            ok = old < new and len(new - old) == 1
                        elif effects[n] == DEC:
                            ok = new < old and len(old - new) == 1
                        else:
                            ok = new == old
                        if not ok:
                            fail(f"task4:{a.name}:{n}", instance, s)
                            break
    return result


# --------------------------------------------------------- instances


def parse_instance(text: str, source: str = "") -> FiniteInstance:
    exprs = read_all(text, source)
    if len(exprs) != 1 or not isinstance(exprs[0], SList) or exprs[0].head() != "instance":
        raise ParseError("expected (instance NAME (:objects ...) (:init atom...))", 1, 1, source)
    top = exprs[0]
    name = top[1].text if len(top) > 1 and isinstance(top[1], Sym) else ""
    objects, atoms = (), set()
    for sec in top.items[2:]:
        if not isinstance(sec, SList):
            raise error_at(sec, "expected a section", source)
        if sec.head() == ":objects":
            objects = tuple(s.text for s in sec.items[1:])
        elif sec.head() == ":init":
            for a in sec.items[1:]:
                if isinstance(a, Sym):
                    atoms.add((a.text,))
                elif all(isinstance(x, Sym) for x in a):
                    atoms.add(tuple(x.text for x in a))
                else:
                    raise error_at(a, "initial atoms must be ground", source)
        else:
            raise error_at(sec, f"unknown instance section {sec.head()}", source)
    for atom in atoms:
        for arg in atom[1:]:
            if arg not in objects:
                raise ParseError(f"atom {atom} mentions unknown object {arg}", 1, 1, source)
    return FiniteInstance(objects, frozenset(atoms), name)


def load_instance(path, bat=None) -> FiniteInstance:
    path = Path(path)
    inst = parse_instance(path.read_text(), str(path))
    if bat is not None:
        check_instance(inst, bat)
    return inst


def check_instance(inst: FiniteInstance, bat) -> None:
    for atom in inst.init:
        arity = bat.symbols.fluents.get(atom[0])
        if arity is None or arity != len(atom) - 1:
            raise OracleError(f"initial atom {atom} does not match a declared fluent")
    if not eval_formula(bat.init, inst, inst.init, bat):
        raise OracleError(f"instance {inst.name or '?'} does not satisfy the domain's initial formula")


def instance_sexpr(inst: FiniteInstance) -> str:
    atoms = " ".join("(" + " ".join(a) + ")" for a in sorted(inst.init))
    return f"(instance {inst.name or 'anon'} (:objects {' '.join(inst.objects)}) (:init {atoms}))\n"
