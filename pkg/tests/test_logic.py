import random

import pytest
from hypothesis import given, settings, strategies as st

from gen import Gen, random_instance
from soundabs.logic import (
    ACTION, FALSE, TRUE, Atom, Const, Count, Eq, Exists, Fn, NumCmp, SortError, Tc, Var,
    alpha_equal, canonical, conj, free_vars, nnf, simplify, substitute, to_sexpr,
    una_simplify,
)
from soundabs.oracle import Evaluator
from soundabs.syntax import formula_from_text

x, y, z = Var("x"), Var("y"), Var("z")
A, B, C = Const("A"), Const("B"), Const("C")


def test_substitute_replaces_free_occurrence(parse):
    assert substitute(parse("(on ?x ?y)"), {x: A}) == Atom("on", (A, y))


def test_substitute_avoids_capture(parse):
    out = substitute(parse("(exists (?x) (on ?x ?y))"), {y: x})
    assert isinstance(out, Exists)
    bound = out.vars[0]
    assert bound != x
    assert out.body == Atom("on", (bound, x))
    assert free_vars(out) == {x}


def test_substitute_into_closure_arguments(parse):
    phi = parse("(tc (?u ?v) (on ?u ?v) ?x C)")
    out = substitute(phi, {x: B})
    assert out == Tc(phi.x, phi.y, phi.body, B, C)


def test_substitute_rejects_sort_mismatch():
    with pytest.raises(SortError):
        substitute(Atom("on", (x, y)), {x: Fn("mt", (A,))})


def test_unique_names_for_actions():
    a = Fn("unstack", (A, B))
    assert una_simplify(Eq(a, a)) == TRUE
    assert una_simplify(Eq(Fn("unstack", (x, y)), Fn("mt", (z,)))) == FALSE
    same_name = una_simplify(Eq(Fn("unstack", (x, y)), Fn("unstack", (A, B))))
    assert canonical(same_name) == canonical(conj(Eq(x, A), Eq(y, B)))


def test_ssa_instance_collapses(clear_a_bat):
    ssa = clear_a_bat.ssas["on"]
    act = Fn("unstack", (A, B))
    binding = dict(zip(ssa.params, (A, B)))
    binding[Var("a", ACTION)] = act
    assert simplify(substitute(ssa.body, binding)) == FALSE


def test_free_vars(parse):
    assert free_vars(parse("(on ?x ?y)")) == {x, y}
    assert free_vars(parse("(exists (?x) (on ?x ?y))")) == {y}
    count = Count((x,), parse("(exists (?z) (and (on ?x ?z) (tc (?u ?v) (on ?u ?v) ?z A)))"))
    assert free_vars(count) == frozenset()
    assert free_vars(parse("(tc (?u ?v) (and (on ?u ?v) (clear ?w)) ?x A)")) == {x, Var("w")}


def test_alpha_equal_ignores_bound_names(parse):
    assert alpha_equal(parse("(forall (?p) (on ?p A))"), parse("(forall (?q) (on ?q A))"))
    assert not alpha_equal(parse("(forall (?p) (on ?p A))"), parse("(forall (?q) (on A ?q))"))


def test_canonical_is_order_insensitive(parse):
    a = parse("(and (clear A) (or (on A B) (holding B)))")
    b = parse("(and (or (holding B) (on A B)) (clear A))")
    assert canonical(a) == canonical(b)


def test_sexpr_round_trip(parse):
    text = ("(forall (?x) (imply (exists (?z) (and (on ?x ?z) (tc (?u ?v) (on ?u ?v) ?z A))) "
            "(not (= ?x A))))")
    phi = parse(text)
    assert parse(to_sexpr(phi)) == phi


# ------------------------------------------------------------ properties


def _random_case(bat, seed, depth=3):
    rng = random.Random(seed)
    g = Gen(bat, rng)
    return g, g.formula((), depth), random_instance(bat, rng, rng.randint(1, 4))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_simplify_preserves_truth(clear_a_bat, seed):
    _, phi, inst = _random_case(clear_a_bat, seed)
    ev = Evaluator(inst.objects, clear_a_bat)
    assert ev.holds(simplify(phi), inst.init) == ev.holds(phi, inst.init)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_simplify_is_idempotent(clear_a_bat, seed):
    _, phi, _ = _random_case(clear_a_bat, seed)
    once = simplify(phi)
    assert simplify(once) == once


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_nnf_and_canonical_preserve_truth(clear_a_bat, seed):
    _, phi, inst = _random_case(clear_a_bat, seed)
    ev = Evaluator(inst.objects, clear_a_bat)
    expected = ev.holds(phi, inst.init)
    assert ev.holds(nnf(phi), inst.init) == expected
    assert ev.holds(canonical(phi), inst.init) == expected


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_print_parse_round_trip(clear_a_bat, seed):
    _, phi, _ = _random_case(clear_a_bat, seed)
    assert formula_from_text(to_sexpr(phi), clear_a_bat.scope()) == phi


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_substituting_a_constant_removes_only_that_variable(clear_a_bat, seed):
    rng = random.Random(seed)
    g = Gen(clear_a_bat, rng)
    scope = (Var("p"), Var("q"))
    phi = g.formula(scope, 3)
    target = rng.choice(scope)
    assert free_vars(substitute(phi, {target: A})) == free_vars(phi) - {target}


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_substitution_commutes_with_evaluation(clear_a_bat, seed):
    rng = random.Random(seed)
    g = Gen(clear_a_bat, rng)
    p = Var("p")
    phi = g.formula((p,), 3)
    inst = random_instance(clear_a_bat, rng, rng.randint(1, 4))
    ev = Evaluator(inst.objects, clear_a_bat)
    obj = rng.choice(inst.objects)
    assert ev.holds(substitute(phi, {p: Const(obj)}), inst.init) == ev.holds(phi, inst.init, {p: obj})


def test_count_comparisons_parse(parse):
    phi = parse("(= (count (?x) (on ?x A)) 0)")
    assert isinstance(phi, NumCmp) and phi.op == "=" and phi.value == 0


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_canonical_ignores_operand_order_with_binders(clear_a_bat, seed):
    rng = random.Random(seed)
    g = Gen(clear_a_bat, rng)
    parts = [g.formula((), 2) for _ in range(3)]
    shuffled = parts[:]
    rng.shuffle(shuffled)
    assert canonical(conj(*parts)) == canonical(conj(*shuffled))
