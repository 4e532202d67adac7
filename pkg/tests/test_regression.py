import random

import pytest
from hypothesis import given, settings, strategies as st

from gen import PROPERTY_DOMAINS, Gen, random_instance, regression_disagreements
from soundabs.corpus import instances, load_problem
from soundabs.golog import Act, Choice, Pick, Test as Check, map_action
from soundabs.logic import (
    TRUE, Atom, Const, Fn, NumCmp, Pending, Poss, Var, alpha_equal, canonical, conj, imply,
    neg, subformulas,
)
from soundabs.oracle import Evaluator, FiniteInstance, executions, ground_actions, reachable_states, step
from soundabs.regression import (
    RegressionContext, exec_condition, regress_exist, regress_step, regress_univ,
)

A, B, C = Const("A"), Const("B"), Const("C")


def ctx_for(bat):
    return RegressionContext(bat)


# ---------------------------------------------------------------- goldens


def test_closure_regressed_through_unstack(clear_a_bat, parse):
    phi = parse("(tc (?x ?y) (on ?x ?y) ?w C)")
    out = regress_step(ctx_for(clear_a_bat), Pending(Fn("unstack", (A, B)), phi))
    want = parse("(tc (?x ?y) (and (on ?x ?y) (or (not (= ?x A)) (not (= ?y B)))) ?w C)")
    assert alpha_equal(out, want)
    assert canonical(out) == canonical(want)


def test_poss_of_mt(clear_a_bat, parse):
    out = regress_step(ctx_for(clear_a_bat), Poss(Fn("mt", (B,))))
    assert out == parse("(and (clear B) (not (ontable B)))")


def test_deleted_atom_regresses_to_false(clear_a_bat):
    out = regress_step(ctx_for(clear_a_bat), Pending(Fn("unstack", (A, B)), Atom("on", (A, B))))
    assert out.__class__.__name__ == "Bottom"


def test_exist_and_univ_clauses(clear_a_bat, parse):
    ctx = ctx_for(clear_a_bat)
    phi, psi = parse("(clear A)"), parse("(holding B)")
    assert regress_exist(ctx, phi, Check(psi)) == conj(psi, phi)
    assert regress_univ(ctx, phi, Check(psi)) == imply(psi, phi)
    d1, d2 = Check(psi), Check(parse("(ontable A)"))
    both = regress_exist(ctx, phi, Choice(d1, d2))
    assert canonical(both) == canonical(parse("(or (and (holding B) (clear A)) (and (ontable A) (clear A)))"))


def test_exec_condition_of_mt(clear_a_bat, parse):
    x = Var("x")
    assert exec_condition(ctx_for(clear_a_bat), Act(Fn("mt", (x,)))) == parse("(and (clear ?x) (not (ontable ?x)))")
    psi = parse("(holding A)")
    assert exec_condition(ctx_for(clear_a_bat), Check(psi)) == psi


def test_universal_regression_of_true(clear_a_bat, parse):
    delta = Choice(Check(parse("(clear A)")), Pick((Var("z"),), Check(parse("(holding ?z)"))))
    assert regress_univ(ctx_for(clear_a_bat), TRUE, delta) == TRUE


def test_fresh_names_do_not_collide(clear_a, parse):
    bat, _, m = clear_a
    ctx = ctx_for(bat)
    taken = {"x", "x!1", "x!2"}
    assert ctx.fresh(Var("x!1"), taken).name not in taken
    # an input that already uses a generated-looking name keeps its meaning
    phi = parse("(exists (?x!1) (holding ?x!1))", generated_names=True)
    out = regress_univ(ctx, phi, map_action(m, "pickabove"))
    tower = frozenset({("ontable", "A"), ("on", "B", "A"), ("clear", "B")})
    inst = FiniteInstance(("A", "B"), tower)
    assert Evaluator(inst.objects, bat).holds(out, tower)


def _no_regression_residue(phi):
    return not any(isinstance(f, (Poss, Pending)) for f in subformulas(phi))


# ------------------------------------------- bundled refinement programs

def _bundled_cases():
    for name in ("clear_a", "get_last", "find_a", "on_ab"):
        bat, qnp, m = load_problem(name)
        progs = [(a.name, map_action(m, a.name)) for a in qnp.actions]
        targets = list(m.prop_map.values()) + [neg(f) for f in m.prop_map.values()]
        for count in m.num_map.values():
            targets += [NumCmp("=", count, 0), NumCmp(">", count, 1)]
        yield pytest.param(bat, progs, targets, id=name)


@pytest.mark.parametrize("bat, progs, targets", list(_bundled_cases()))
def test_bundled_programs_match_execution(bat, progs, targets):
    """Both extended regressions agree with execution on reachable states."""
    insts = list(instances(bat.name.replace("-", "_"), 4, bat))[:12]
    for inst in insts:
        states = sorted(reachable_states(bat, inst, 2), key=sorted)[:8]
        ev = Evaluator(inst.objects, bat)
        for label, delta in progs:
            for phi in targets:
                ctx = ctx_for(bat)
                ex, un = regress_exist(ctx, phi, delta), regress_univ(ctx, phi, delta)
                assert _no_regression_residue(ex) and _no_regression_residue(un)
                for s in states:
                    outs = executions(bat, inst, s, delta)
                    assert ev.holds(ex, s) == any(ev.holds(phi, t) for t in outs), (label, phi)
                    assert ev.holds(un, s) == all(ev.holds(phi, t) for t in outs), (label, phi)


# --------------------------------------------------- one-step regression

FORMULAS = [
    "(clear A)", "(on B A)", "(exists (?x) (holding ?x))",
    "(forall (?x) (imply (on ?x A) (clear ?x)))",
    "(tc (?u ?v) (on ?u ?v) B A)",
    "(exists (?x ?z) (and (on ?x ?z) (tc (?u ?v) (on ?u ?v) ?z A)))",
    "(= (count (?x) (ontable ?x)) 1)",
    "(> (count (?x) (exists (?z) (and (on ?x ?z) (tc (?u ?v) (on ?u ?v) ?z A)))) 1)",
]


def test_one_step_regression_exhaustive(clear_a_bat, parse):
    """Regressed formula before the action = formula after it, for every
    ground action on states reachable within three steps."""
    bat = clear_a_bat
    phis = [parse(t) for t in FORMULAS]
    for inst in instances("clear_a", 4, bat):
        ev = Evaluator(inst.objects, bat)
        for s in reachable_states(bat, inst, 3):
            for act in ground_actions(bat, inst.objects):
                after = step(bat, inst, s, act)
                if after is None:
                    assert not ev.holds(regress_step(ctx_for(bat), Poss(act)), s)
                    continue
                for phi in phis:
                    out = regress_step(ctx_for(bat), Pending(act, phi))
                    assert ev.holds(out, s) == ev.holds(phi, after), (act, phi)


# ------------------------------------------------------------ properties


@pytest.mark.parametrize("name", PROPERTY_DOMAINS)
def test_random_regression_triples(name):
    bat = load_problem(name)[0]
    checked, live, bad = regression_disagreements(bat, random.Random(f"unit-{name}"), 60)
    assert not bad, bad[:1]
    assert live > 0


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 10**9))
def test_duality(clear_a_bat, seed):
    rng = random.Random(seed)
    g = Gen(clear_a_bat, rng)
    phi, delta = g.formula((), 2), g.program((), 3)
    inst = random_instance(clear_a_bat, rng, rng.randint(1, 3), 0.4)
    ev = Evaluator(inst.objects, clear_a_bat)
    ctx = ctx_for(clear_a_bat)
    univ = regress_univ(ctx, phi, delta)
    dual = neg(regress_exist(ctx, neg(phi), delta))
    assert ev.holds(univ, inst.init) == ev.holds(dual, inst.init)


def test_harness_detects_a_broken_axiom(clear_a_bat):
    """A wrong successor-state axiom must produce disagreements."""
    from dataclasses import replace
    ssas = dict(clear_a_bat.ssas)
    on = ssas["on"]
    ssas["on"] = replace(on, negative=on.positive)     # unstack no longer deletes on
    broken = replace(clear_a_bat, ssas=ssas)
    rng = random.Random(7)
    found = 0
    for _ in range(40):
        _, _, bad = regression_disagreements(broken, rng, 10)
        found += len(bad)
        if found:
            break
    assert found
