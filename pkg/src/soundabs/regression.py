"""Regression through actions and iteration-free programs.

``regress_step`` eliminates every ``Pending``/``Poss`` node by substituting
successor-state axioms and precondition axioms.  ``regress_exist`` and
``regress_univ`` lift it to programs: the former holds iff some execution
ends in a state satisfying the formula, the latter iff every execution does.
"""

from __future__ import annotations

from .golog import Act, Choice, Pick, Seq, Test, program_var_names, substitute_program
from .logic import (
    TRUE, And, Atom, Bottom, Const, Count, Eq, Exists, Fn, Forall, Frozen, Iff,
    Imply, Not, NumCmp, Or, Pending, Poss, Tc, Top, Var, all_var_names, conj,
    disj, exists, forall, free_vars, imply, map_children, rename_bound,
    simplify, substitute,
)
from .bat import ACTION_VAR


class RegressionError(ValueError):
    pass


class RegressionContext:
    """Regression state for one task: fresh names and a memo table."""

    def __init__(self, theory):
        self.theory = theory
        self.counter = 0
        self.memo: dict = {}

    def fresh(self, v: Var, avoid: set) -> Var:
        base = v.name.split("!", 1)[0]
        while True:
            self.counter += 1
            name = f"{base}!{self.counter}"
            if name not in avoid:
                return Var(name, v.sort)


# ------------------------------------------------------------ one step


def regress_step(ctx: RegressionContext, phi):
    """Rewrite away pending actions and Poss atoms."""
    return simplify(_strip(ctx, phi))


def _strip(ctx, phi):
    if isinstance(phi, Poss):
        return _precondition(ctx, phi.action)
    if isinstance(phi, Pending):
        return _after(ctx, phi.action, _strip(ctx, phi.body))
    if isinstance(phi, (Top, Bottom, Atom, Eq, Var, Const)):
        return phi
    return map_children(phi, lambda c: _strip(ctx, c))


def _precondition(ctx, action):
    if not isinstance(action, Fn):
        raise RegressionError(f"Poss needs a concrete action term, got {action}")
    schema = ctx.theory.schemas.get(action.name)
    if schema is None:
        raise RegressionError(f"unknown action {action.name}")
    return substitute(schema.precondition, dict(zip(schema.params, action.args)))


def _after(ctx, action, phi):
    """``phi`` evaluated after ``action``, as a formula about the state before.

    ``phi`` must already be free of pending actions and Poss atoms.
    """
    if isinstance(phi, (Top, Bottom, Eq)):
        return phi
    if isinstance(phi, Frozen):
        return phi
    if isinstance(phi, Atom):
        ssa = ctx.theory.ssas.get(phi.pred)
        if ssa is None:
            raise RegressionError(f"unknown fluent {phi.pred}")
        binding = dict(zip(ssa.params, phi.args))
        binding[ACTION_VAR] = action
        return simplify(substitute(ssa.body, binding))
    if isinstance(phi, (Forall, Exists, Count, Tc)):
        clash = {v.name for v in free_vars(action)}
        bound = phi.vars if not isinstance(phi, Tc) else (phi.x, phi.y)
        if clash & {v.name for v in bound}:
            phi = rename_bound(phi, clash)
        if isinstance(phi, Tc):
            return Tc(phi.x, phi.y, _after(ctx, action, phi.body),
                      phi.u, phi.v)
        return type(phi)(phi.vars, _after(ctx, action, phi.body))
    if isinstance(phi, NumCmp):
        return NumCmp(phi.op, _after(ctx, action, phi.lhs), phi.value)
    if isinstance(phi, (Not, And, Or, Imply, Iff)):
        return map_children(phi, lambda c: _after(ctx, action, c))
    if isinstance(phi, (Pending, Poss)):
        return _after(ctx, action, _strip(ctx, phi))
    raise RegressionError(f"cannot regress {phi!r}")


# --------------------------------------------------------- programs


def regress_exist(ctx: RegressionContext, phi, delta):
    """Some execution of ``delta`` ends in a state satisfying ``phi``."""
    return _regress(ctx, phi, delta, True)


def regress_univ(ctx: RegressionContext, phi, delta):
    """Every execution of ``delta`` ends in a state satisfying ``phi``."""
    return _regress(ctx, phi, delta, False)


def exec_condition(ctx: RegressionContext, delta):
    return regress_exist(ctx, TRUE, delta)


def _regress(ctx, phi, delta, existential: bool):
    key = (phi, delta, existential)
    hit = ctx.memo.get(key)
    if hit is not None:
        return hit
    if isinstance(delta, Act):
        a = delta.action
        if existential:
            out = regress_step(ctx, conj(Poss(a), Pending(a, phi)))
        else:
            out = regress_step(ctx, imply(Poss(a), Pending(a, phi)))
    elif isinstance(delta, Test):
        out = simplify(conj(delta.cond, phi) if existential else imply(delta.cond, phi))
    elif isinstance(delta, Seq):
        out = phi
        for part in reversed(delta.parts):
            out = _regress(ctx, out, part, existential)
    elif isinstance(delta, Choice):
        left = _regress(ctx, phi, delta.left, existential)
        right = _regress(ctx, phi, delta.right, existential)
        out = simplify(disj(left, right) if existential else conj(left, right))
    elif isinstance(delta, Pick):
        avoid = all_var_names(phi) | program_var_names(delta)
        binding = {}
        for v in delta.vars:
            nv = ctx.fresh(v, avoid)
            avoid.add(nv.name)
            binding[v] = nv
        body = substitute_program(delta.body, binding)
        inner = _regress(ctx, phi, body, existential)
        vs = tuple(binding[v] for v in delta.vars)
        out = simplify(exists(vs, inner) if existential else forall(vs, inner))
    else:
        raise RegressionError(f"unsupported program {delta!r}")
    ctx.memo[key] = out
    return out
