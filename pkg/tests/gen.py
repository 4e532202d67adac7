"""Random formulas, programs and states for the property suites."""

import itertools
import random

from soundabs.golog import Act, Choice, Pick, Seq, Test
from soundabs.logic import (
    And, Atom, Const, Count, Eq, Exists, Fn, Forall, Iff, Imply, Not, NumCmp, Or,
    Tc, Var,
)
from soundabs.oracle import FiniteInstance


class Gen:
    """Draws random syntax over the fluents, actions and constants of a theory."""

    def __init__(self, bat, rng: random.Random):
        self.bat = bat
        self.rng = rng
        self.fluents = sorted(bat.symbols.fluents.items())
        self.binary = [f for f, n in self.fluents if n == 2]
        self.consts = sorted(bat.symbols.constants)
        self.counter = 0

    def var(self):
        self.counter += 1
        return Var(f"v{self.counter}")

    def term(self, scope):
        pool = list(scope) + [Const(c) for c in self.consts]
        return self.rng.choice(pool)

    def atom(self, scope):
        name, arity = self.rng.choice(self.fluents)
        return Atom(name, tuple(self.term(scope) for _ in range(arity)))

    def formula(self, scope=(), depth=3, quantifiers=True):
        r = self.rng.random()
        if depth <= 0 or r < 0.25:
            if scope and self.rng.random() < 0.15:
                return Eq(self.term(scope), self.term(scope))
            if not scope and not self.consts:
                return self._closed_leaf(quantifiers)
            return self.atom(scope)
        r = self.rng.random()

        def sub():
            return self.formula(scope, depth - 1, quantifiers)

        if r < 0.15:
            return Not(sub())
        if r < 0.35:
            return And((sub(), sub()))
        if r < 0.5:
            return Or((sub(), sub()))
        if r < 0.55:
            return Imply(sub(), sub())
        if r < 0.6:
            return Iff(sub(), sub())
        if not quantifiers:
            return self.atom(scope) if scope or self.consts else sub()
        if r < 0.75:
            v = self.var()
            return Exists((v,), self.formula(scope + (v,), depth - 1))
        if r < 0.88:
            v = self.var()
            return Forall((v,), self.formula(scope + (v,), depth - 1))
        if r < 0.95 and self.binary:
            return self.tc(scope)
        v = self.var()
        return NumCmp(self.rng.choice(("=", ">")),
                      Count((v,), self.formula(scope + (v,), 1, False)),
                      self.rng.choice((0, 1)))

    def _closed_leaf(self, quantifiers):
        v = self.var()
        return Exists((v,), self.atom((v,)))

    def tc(self, scope):
        x, y = self.var(), self.var()
        rel = Atom(self.rng.choice(self.binary), (x, y))
        if self.rng.random() < 0.4:
            extra = self.formula(scope + (x, y), 1, False)
            body = And((rel, extra)) if self.rng.random() < 0.5 else Or((rel, extra))
        else:
            body = rel
        if not scope and not self.consts:
            u, v = self.var(), self.var()
            return Exists((u, v), Tc(x, y, body, u, v))
        return Tc(x, y, body, self.term(scope), self.term(scope))

    def action(self, scope):
        name = self.rng.choice(sorted(self.bat.schemas))
        n = len(self.bat.schemas[name].params)
        return Fn(name, tuple(self.term(scope) for _ in range(n)))

    def program(self, scope=(), depth=3):
        r = self.rng.random()
        if depth <= 0 or r < 0.3:
            if (scope or self.consts) and self.rng.random() < 0.75:
                return Act(self.action(scope))
            return Test(self.formula(scope, 1))
        if r < 0.55:
            return Seq((self.program(scope, depth - 1), self.program(scope, depth - 1)))
        if r < 0.75:
            return Choice(self.program(scope, depth - 1), self.program(scope, depth - 1))
        if r < 0.85:
            return Test(self.formula(scope, 2))
        v = self.var()
        return Pick((v,), self.program(scope + (v,), depth - 1))


def ground_atoms(bat, objects):
    for name, arity in sorted(bat.symbols.fluents.items()):
        for args in itertools.product(objects, repeat=arity):
            yield (name,) + args


def random_instance(bat, rng: random.Random, size: int, density: float = 0.3):
    """Every domain constant is an object; O1, O2... fill up to ``size``."""
    consts = sorted(bat.symbols.constants)
    objs = tuple(consts + [f"O{i}" for i in range(1, size - len(consts) + 1)])
    atoms = frozenset(a for a in ground_atoms(bat, objs) if rng.random() < density)
    return FiniteInstance(objs, atoms, "random")


PROPERTY_DOMAINS = ("clear_a", "on_ab", "get_last", "gripper", "corner")


def regression_disagreements(bat, rng, trials, sizes=(2, 4)):
    """Compare both extended regressions with execution enumeration.

    Returns (checked, with_executions, disagreements).  A triple counts as
    having executions when the program can run from the sampled state.
    """
    from soundabs.oracle import Evaluator, executions
    from soundabs.regression import RegressionContext, regress_exist, regress_univ

    checked = live = 0
    bad = []
    for _ in range(trials):
        g = Gen(bat, rng)
        phi = g.formula((), 3)
        delta = g.program((), 3)
        inst = random_instance(bat, rng, rng.randint(*sizes), rng.choice((0.25, 0.4, 0.55)))
        ctx = RegressionContext(bat)
        ev = Evaluator(inst.objects, bat)
        outs = executions(bat, inst, inst.init, delta)
        some = any(ev.holds(phi, s) for s in outs)
        every = all(ev.holds(phi, s) for s in outs)
        if ev.holds(regress_exist(ctx, phi, delta), inst.init) != some:
            bad.append(("exist", phi, delta, inst))
        if ev.holds(regress_univ(ctx, phi, delta), inst.init) != every:
            bad.append(("univ", phi, delta, inst))
        checked += 1
        live += bool(outs)
    return checked, live, bad



def oracle_family(name, bat, programs, size=4):
    """Instances of a bundled problem with the states its refinements reach."""
    from soundabs.corpus import instances
    from soundabs.oracle import refined_reachable_states

    return [(inst, refined_reachable_states(bat, inst, programs))
            for inst in instances(name, size, bat)]


def _negate_literal(lit):
    from soundabs.logic import Not, NumCmp

    if isinstance(lit, Not):
        return lit.arg
    if isinstance(lit, NumCmp):
        return NumCmp(">" if lit.op == "=" else "=", lit.lhs, lit.value)
    return Not(lit)


def mutants(qnp, m):
    """Deterministic broken variants of an abstraction: (label, qnp, mapping)."""
    from dataclasses import replace

    from soundabs.qnp import DEC, INC

    def with_action(i, new):
        acts = list(qnp.actions)
        acts[i] = new
        return replace(qnp, actions=acts)

    out = []
    for i, a in enumerate(qnp.actions):
        if a.pre:
            out.append((f"{a.name}: drop precondition {a.pre[0]}",
                        with_action(i, replace(a, pre=a.pre[1:])), m))
            out.append((f"{a.name}: negate precondition {a.pre[-1]}",
                        with_action(i, replace(a, pre=a.pre[:-1] + (_negate_literal(a.pre[-1]),))), m))
        if a.bool_effects:
            (f, val), *rest = a.bool_effects
            out.append((f"{a.name}: flip effect on {f}",
                        with_action(i, replace(a, bool_effects=((f, not val), *rest))), m))
        elif qnp.bools:
            f = qnp.bools[0]
            out.append((f"{a.name}: spurious effect on {f}",
                        with_action(i, replace(a, bool_effects=((f, True),))), m))
        if a.num_effects:
            (n, eff), *rest = a.num_effects
            other = DEC if eff == INC else INC
            out.append((f"{a.name}: {eff} {n} becomes {other}",
                        with_action(i, replace(a, num_effects=((n, other), *rest))), m))
            out.append((f"{a.name}: drop {eff} {n}",
                        with_action(i, replace(a, num_effects=tuple(rest))), m))
    if len(qnp.actions) >= 2:
        a, b = qnp.actions[0].name, qnp.actions[1].name
        swapped = dict(m.action_map)
        swapped[a], swapped[b] = m.action_map[b], m.action_map[a]
        out.append((f"swap refinements of {a} and {b}", qnp, replace(m, action_map=swapped)))
    for j, lit in enumerate(qnp.goal):
        goal = qnp.goal[:j] + (_negate_literal(lit),) + qnp.goal[j + 1:]
        out.append((f"goal literal {lit} negated", replace(qnp, goal=goal), m))
    if qnp.init:
        init = (_negate_literal(qnp.init[0]),) + qnp.init[1:]
        out.append((f"init literal {qnp.init[0]} negated", replace(qnp, init=init), m))
    return out


MUTATION_DOMAINS = ("clear_a", "get_last", "find_a", "corner", "gripper", "logistics")


def mutation_sweep(names, timeout=5.0, jobs=4, size=4):
    """Verify every mutant of the named problems and compare with the oracle.

    Yields (problem, label, oracle_failures, aggregate) per mutant.  The
    oracle explores states reached by the mutant's own refinements.
    """
    from soundabs.cli import RunConfig, verify
    from soundabs.corpus import load_problem
    from soundabs.golog import map_action
    from soundabs.oracle import check_abstraction_finite
    from soundabs.smt import SolverConfig

    cfg = RunConfig(None, None, None, solver=SolverConfig(timeout=timeout), jobs=jobs)
    for name in names:
        bat, qnp, m = load_problem(name)
        families = {}
        for label, q2, m2 in mutants(qnp, m):
            key = tuple(sorted((k, repr(v)) for k, v in m2.action_map.items()))
            if key not in families:
                families[key] = oracle_family(name, bat, [map_action(m2, a.name) for a in q2.actions], size)
            family = families[key]
            checked = check_abstraction_finite(bat, q2, m2, family)
            failures = [task_id for task_id, w in checked.items() if w is not None]
            report = verify(cfg, inputs=(bat, q2, m2))
            yield name, label, failures, report.aggregate


def all_block_states(objects):
    """Every well-formed blocks state over ``objects`` with A on the table."""
    objs = list(objects)
    for held in [None] + objs:
        rest = [o for o in objs if o != held]
        for below in itertools.product([None] + rest, repeat=len(rest)):
            support = dict(zip(rest, below))
            if any(support[o] == o for o in rest):
                continue
            if len({v for v in below if v is not None}) < len([v for v in below if v is not None]):
                continue
            # reject cycles
            ok = True
            for o in rest:
                seen, cur = set(), o
                while cur is not None and ok:
                    if cur in seen:
                        ok = False
                    seen.add(cur)
                    cur = support.get(cur)
            if not ok:
                continue
            atoms = set()
            for o in rest:
                atoms.add(("on", o, support[o]) if support[o] else ("ontable", o))
                if o not in support.values():
                    atoms.add(("clear", o))
            if held:
                atoms |= {("holding", held), ("clear", held)}
            yield frozenset(atoms)
