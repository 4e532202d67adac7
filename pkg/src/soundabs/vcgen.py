"""Verification conditions for a sound abstraction.

For a QNP, a low-level theory and a refinement mapping this produces one
initial-state task, one executability task per action, one effect task per
(action, feature) and per (action, numeric variable) pair, and a goal task.
Every task is a closed first-order formula with transitive closure and no
counting terms; it is valid iff the corresponding condition holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .golog import map_action, map_formula
from .logic import (
    Count, Eq, Frozen, NumCmp, NumVar, Var, all_var_names, conj, exists,
    forall, free_vars, fresh_var, iff, imply, map_children, neg, pretty,
    substitute, to_sexpr,
)
from .qnp import DEC, FRAME, INC, SET_FALSE, SET_TRUE, hl_ssa_literals
from .regression import RegressionContext, exec_condition, regress_univ

INIT, EXEC, BOOL_EFFECT, NUM_EFFECT, GOAL = "Init", "Exec", "BoolEffect", "NumEffect", "Goal"


class VcError(ValueError):
    pass


@dataclass(frozen=True)
class VerificationTask:
    id: str
    kind: str
    formula: object
    provenance: str = ""


@dataclass
class TaskSuite:
    tasks: list = field(default_factory=list)
    theory: object = None

    def __iter__(self):
        return iter(self.tasks)

    def __len__(self):
        return len(self.tasks)

    def by_id(self, task_id: str) -> VerificationTask:
        for t in self.tasks:
            if t.id == task_id:
                return t
        raise KeyError(task_id)


# ----------------------------------------------------------- helpers


def eliminate_counting(phi):
    """Rewrite ``#x.f = 0`` to ``~exists x. f`` and ``#x.f > 0`` to ``exists x. f``."""
    if isinstance(phi, NumCmp):
        if isinstance(phi.lhs, NumVar):
            raise VcError(f"unmapped numeric variable {phi.lhs.name}")
        if phi.value != 0:
            raise VcError(f"unsupported comparison {to_sexpr(phi)}: only = 0 and > 0 are allowed")
        body = eliminate_counting(phi.lhs.body)
        ex = exists(phi.lhs.vars, body)
        return neg(ex) if phi.op == "=" else ex
    if isinstance(phi, Count):
        raise VcError(f"counting term {to_sexpr(phi)} outside a comparison")
    return map_children(phi, eliminate_counting)


def thaw(phi):
    """Drop ``Frozen`` markers once regression is finished."""
    if isinstance(phi, Frozen):
        return thaw(phi.body)
    return map_children(phi, thaw)


def build_psi(count: Count, direction: str):
    """Post-state condition for a change of the count by exactly one.

    Pre-state occurrences of the counted formula are wrapped in ``Frozen``
    so regression leaves them alone; the unwrapped ones are regressed.
    """
    if len(count.vars) != 1:
        raise VcError("only single-variable counting terms are supported")
    x = count.vars[0]
    body = count.body
    y = fresh_var(Var("y", x.sort), all_var_names(body) | {x.name})
    body_y = substitute(body, {x: y})
    before_x, after_x = Frozen(body), body
    before_y, after_y = Frozen(body_y), body_y
    if direction == FRAME:
        return forall([x], iff(after_x, before_x))
    if direction == INC:
        gained = lambda b, a: conj(neg(b), a)
        return conj(
            exists([x], gained(before_x, after_x)),
            forall([x], imply(before_x, after_x)),
            forall([x, y], imply(conj(gained(before_x, after_x), gained(before_y, after_y)),
                                 Eq(x, y))))
    if direction == DEC:
        lost = lambda b, a: conj(b, neg(a))
        return conj(
            exists([x], lost(before_x, after_x)),
            forall([x], imply(after_x, before_x)),
            forall([x, y], imply(conj(lost(before_x, after_x), lost(before_y, after_y)),
                                 Eq(x, y))))
    raise VcError(f"unknown numeric effect {direction!r}")


def _closed(task: VerificationTask) -> VerificationTask:
    fv = free_vars(task.formula)
    if fv:
        raise VcError(f"{task.id}: generated formula has free variables "
                      f"{sorted('?' + v.name for v in fv)}")
    return task


def _hl_action(qnp, mapping, name):
    a = qnp.action(name)
    return a, map_action(mapping, name, ())


# -------------------------------------------------------------- tasks


def gen_task_init(bat, qnp, m) -> VerificationTask:
    target = eliminate_counting(map_formula(m, qnp.init_formula))
    return _closed(VerificationTask(
        "task1:init", INIT, imply(bat.init, target),
        "low-level initial formula entails the mapped high-level initial state"))


def gen_task_exec(bat, sc, qnp, m, name: str) -> VerificationTask:
    a, prog = _hl_action(qnp, m, name)
    ctx = RegressionContext(bat)
    pre = exec_condition(ctx, prog)
    hl_pre = eliminate_counting(map_formula(m, a.precondition))
    f = imply(sc, iff(pre, hl_pre))
    return _closed(VerificationTask(
        f"task2:{name}", EXEC, f,
        f"refinement of {name} is executable exactly when its mapped precondition holds"))


def gen_task_booleff(bat, sc, qnp, m, name: str, feature: str, effect: str) -> VerificationTask:
    a, prog = _hl_action(qnp, m, name)
    ctx = RegressionContext(bat)
    pre = exec_condition(ctx, prog)
    phi = eliminate_counting(m.prop_map[feature])
    if effect == SET_TRUE:
        goal = regress_univ(ctx, phi, prog)
    elif effect == SET_FALSE:
        goal = regress_univ(ctx, neg(phi), prog)
    elif effect == FRAME:
        goal = conj(imply(phi, regress_univ(ctx, phi, prog)),
                    imply(neg(phi), regress_univ(ctx, neg(phi), prog)))
    else:
        raise VcError(f"unknown boolean effect {effect!r}")
    f = imply(conj(sc, pre), goal)
    return _closed(VerificationTask(
        f"task3:{name}:{feature}", BOOL_EFFECT, f,
        f"every execution of the refinement of {name} gives {feature} its {effect} value"))


def gen_task_numeff(bat, sc, qnp, m, name: str, var: str, effect: str) -> VerificationTask:
    a, prog = _hl_action(qnp, m, name)
    ctx = RegressionContext(bat)
    pre = exec_condition(ctx, prog)
    count = m.num_map[var]
    count = Count(count.vars, eliminate_counting(count.body))
    psi = build_psi(count, effect)
    goal = thaw(regress_univ(ctx, psi, prog))
    f = imply(conj(sc, pre), goal)
    return _closed(VerificationTask(
        f"task4:{name}:{var}", NUM_EFFECT, f,
        f"every execution of the refinement of {name} changes {var} as {effect}"))


def gen_task_goal(bat, sc, qnp, m) -> VerificationTask:
    hl_goal = eliminate_counting(map_formula(m, qnp.goal_formula))
    return _closed(VerificationTask(
        "task5:goal", GOAL, imply(conj(sc, hl_goal), bat.goal),
        "mapped high-level goal entails the low-level goal"))


def generate_tasks(bat, qnp, m) -> TaskSuite:
    m.check_covers(qnp)
    sc = bat.constraints.conjunction()
    tasks = [gen_task_init(bat, qnp, m)]
    for a in qnp.actions:
        tasks.append(gen_task_exec(bat, sc, qnp, m, a.name))
    for a in qnp.actions:
        effects = hl_ssa_literals(a, qnp)
        for f in qnp.bools:
            tasks.append(gen_task_booleff(bat, sc, qnp, m, a.name, f, effects[f]))
        for n in qnp.nums:
            tasks.append(gen_task_numeff(bat, sc, qnp, m, a.name, n, effects[n]))
    tasks.append(gen_task_goal(bat, sc, qnp, m))
    return TaskSuite(tasks, bat)


def task_sexpr(task: VerificationTask) -> str:
    return (f"; id: {task.id}\n; kind: {task.kind}\n; checks: {task.provenance}\n"
            f"{pretty(task.formula)}\n")
