"""Broken abstractions must never verify."""

import pytest

from conftest import needs_solver
from gen import MUTATION_DOMAINS, mutants, mutation_sweep, oracle_family
from soundabs.corpus import load_problem
from soundabs.golog import map_action
from soundabs.oracle import check_abstraction_finite, check_validity_finite
from soundabs.vcgen import generate_tasks


def test_enough_distinct_mutants():
    total = 0
    for name in MUTATION_DOMAINS:
        _, qnp, m = load_problem(name)
        found = mutants(qnp, m)
        labels = [label for label, _, _ in found]
        assert len(set(labels)) == len(labels)
        for _, q2, m2 in found:
            assert (q2, m2) != (qnp, m)
        total += len(found)
    assert total >= 20


@pytest.mark.parametrize("name", ["clear_a", "find_a", "logistics"])
def test_oracle_routes_agree_on_mutants(name):
    """Running refinements and evaluating the generated formulas give the
    same verdict for every task of every mutant."""
    bat, qnp, m = load_problem(name)
    for label, q2, m2 in [("original", qnp, m)] + mutants(qnp, m):
        family = oracle_family(name, bat, [map_action(m2, a.name) for a in q2.actions])
        by_execution = check_abstraction_finite(bat, q2, m2, family)
        for task in generate_tasks(bat, q2, m2):
            ok, _ = check_validity_finite(task.formula, family, bat)
            assert ok == (by_execution[task.id] is None), (label, task.id)


@needs_solver
@pytest.mark.parametrize("name", ["find_a", "logistics"])
def test_broken_mutants_do_not_verify(name):
    caught = 0
    for _, label, failures, verdict in mutation_sweep([name], timeout=5.0):
        if failures:
            assert verdict != "True", label
            caught += 1
    assert caught >= 10
