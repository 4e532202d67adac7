"""Acceptance criteria, one test each.

Every test prints a PASS/FAIL line, and the lines are repeated in the
terminal summary.  A missing solver makes the solver-backed criteria fail
rather than skip.  Run on its own with ``pytest tests/test_acceptance.py``.
"""

import random
import time

import pytest

from conftest import ACCEPTANCE_LINES
from gen import (
    MUTATION_DOMAINS, PROPERTY_DOMAINS, all_block_states, mutation_sweep, oracle_family,
    regression_disagreements,
)
from soundabs.cli import RunConfig, verify
from soundabs.corpus import load_problem
from soundabs.golog import map_action
from soundabs.logic import Const, Fn, Pending, alpha_equal, canonical
from soundabs.oracle import Evaluator, check_validity_finite
from soundabs.regression import RegressionContext, regress_step
from soundabs.smt import VALID, SolverConfig
from soundabs.vcgen import generate_tasks

BREADTH = ("get_last", "find_a", "corner", "gripper", "logistics", "on_ab")


def record(criterion, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def reports():
    cache = {}

    def get(name):
        if name not in cache:
            cfg = RunConfig(None, None, None, solver=SolverConfig(timeout=10.0), jobs=1)
            cache[name] = verify(cfg, inputs=load_problem(name))
        return cache[name]
    return get


def _not_valid(report):
    return [f"{t.id}={t.status}({t.note or t.solver})" for t in report.tasks if t.status != VALID]


def test_clear_a_end_to_end(reports):
    report = reports("clear_a")
    seconds = report.wall_ms / 1000
    ok = report.aggregate == "True" and not _not_valid(report) and seconds <= 60
    record("ClearA end-to-end", ok,
           f"aggregate {report.aggregate}, {len(report.tasks)} tasks, {seconds:.2f}s "
           f"(limit 60s at 10s/task) {' '.join(_not_valid(report))}".rstrip())


def test_breadth(reports):
    verdicts = {name: reports(name) for name in BREADTH}
    bad = {n: _not_valid(r) for n, r in verdicts.items() if r.aggregate != "True"}
    summary = ", ".join(f"{n}={r.aggregate}" for n, r in verdicts.items())
    record("Table 1 breadth", not bad, summary + (f"; failing {bad}" if bad else ""))


def test_closure_regression_golden(parse):
    bat = load_problem("clear_a")[0]
    phi = parse("(tc (?x ?y) (on ?x ?y) ?x C)")
    out = regress_step(RegressionContext(bat), Pending(Fn("unstack", (Const("A"), Const("B"))), phi))
    want = parse("(tc (?x ?y) (and (on ?x ?y) (or (not (= ?x A)) (not (= ?y B)))) ?x C)")
    record("TC regression golden", alpha_equal(out, want), f"got {out}")


INIT_GOLDEN = """
(imply (and (exists (?x) (exists (?z) (and (on ?x ?z) (tc (?u ?v) (on ?u ?v) ?z A))))
            (ontable A)
            (forall (?x) (not (holding ?x))))
       (and (not (exists (?x) (holding ?x)))
            (exists (?x ?z) (and (on ?x ?z) (tc (?u ?v) (on ?u ?v) ?z A)))))
"""


def test_init_task_golden(clear_a, parse):
    bat = clear_a[0]
    task = generate_tasks(*clear_a).by_id("task1:init").formula
    golden = parse(INIT_GOLDEN)
    syntactic = canonical(task) == canonical(golden)
    states = mismatches = 0
    for n in range(1, 5):
        objs = ("A",) + tuple(f"B{i}" for i in range(1, n))
        ev = Evaluator(objs, bat)
        for s in all_block_states(objs):
            states += 1
            mismatches += ev.holds(task, s) != ev.holds(golden, s)
    record("Task-1 golden", syntactic and states and not mismatches,
           f"normal forms {'equal' if syntactic else 'differ'}; "
           f"{mismatches} disagreements over {states} states of 1-4 blocks")


def test_regression_properties():
    start = time.perf_counter()
    checked = live = 0
    bad = []
    per_domain = 400
    for name in PROPERTY_DOMAINS:
        bat = load_problem(name)[0]
        c, l, b = regression_disagreements(bat, random.Random(f"acceptance-{name}"), per_domain, (1, 4))
        checked, live, bad = checked + c, live + l, bad + b
    seconds = time.perf_counter() - start
    ok = checked >= 500 and live >= 500 and not bad and seconds <= 300
    record("Regression property suite", ok,
           f"{checked} triples ({live} with executions) over {len(PROPERTY_DOMAINS)} domains, "
           f"{len(bad)} disagreements, {seconds:.1f}s (limit 300s)")


def test_mutations_never_verify():
    start = time.perf_counter()
    total = violated = unsound = refuted = 0
    escaped = []
    for name, label, failures, verdict in mutation_sweep(MUTATION_DOMAINS, timeout=5.0):
        total += 1
        if failures:
            violated += 1
            refuted += verdict == "False"
            if verdict == "True":
                unsound += 1
                escaped.append(f"{name}/{label}")
    seconds = time.perf_counter() - start
    ok = total >= 20 and violated >= 20 and not unsound and seconds <= 600
    record("Soundness of verdicts", ok,
           f"{total} mutants, {violated} with oracle violations: {refuted} False, "
           f"{violated - refuted - unsound} Unknown, {unsound} True; {seconds:.1f}s (limit 600s)"
           + (f"; escaped {escaped}" if escaped else ""))


def test_closure_axiom_safety(reports):
    confirmed = 0
    refuted_by_oracle = []
    for name in ("clear_a",) + BREADTH:
        bat, qnp, m = load_problem(name)
        family = oracle_family(name, bat, [map_action(m, a.name) for a in qnp.actions])
        valid = {t.id for t in reports(name).tasks if t.status == VALID}
        for task in generate_tasks(bat, qnp, m):
            if task.id not in valid:
                continue
            ok, witness = check_validity_finite(task.formula, family, bat)
            if ok:
                confirmed += 1
            else:
                refuted_by_oracle.append(f"{name}/{task.id}: {witness.describe()}")
    record("TC-axiom safety", confirmed > 0 and not refuted_by_oracle,
           f"{confirmed} Valid tasks confirmed on bundled instances up to 4 objects"
           + (f"; contradicted {refuted_by_oracle}" if refuted_by_oracle else ""))


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
