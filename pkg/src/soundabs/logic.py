"""First-order formulas with counting terms and transitive closure.

Formulas are situation-suppressed: fluent atoms never carry a situation
argument.  Two internal wrappers stand in for situation terms during
regression: ``Pending(action, body)`` says ``body`` holds after ``action``
and ``Frozen(body)`` pins ``body`` to the situation a regression started
from.  Neither survives into a finished verification condition.

All nodes are immutable and hashable.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

OBJECT = "object"
ACTION = "action"
SORTS = (OBJECT, ACTION)


class SortError(TypeError):
    pass


def node(cls):
    """Frozen dataclass whose hash is computed once and cached."""
    cls = dataclass(frozen=True, repr=False)(cls)
    names = tuple(f.name for f in dataclasses.fields(cls))
    tag = cls.__name__

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((tag,) + tuple(getattr(self, n) for n in names))
            self.__dict__["_hash"] = h
        return h

    def __repr__(self):
        return f"{tag}<{to_sexpr(self)}>"

    cls.__hash__ = __hash__
    cls.__repr__ = __repr__
    cls.__str__ = lambda self: to_sexpr(self)
    return cls


# ---------------------------------------------------------------- terms


@node
class Var:
    name: str
    sort: str = OBJECT


@node
class Const:
    name: str
    sort: str = OBJECT


@node
class Fn:
    """Function application; in practice an action term ``A(t1..tn)``."""
    name: str
    args: tuple = ()
    sort: str = ACTION


@node
class Count:
    """``#vars. body``: the number of tuples satisfying ``body``."""
    vars: tuple
    body: "Formula"
    sort: str = "number"


@node
class NumVar:
    """A high-level numeric variable of a QNP, before mapping."""
    name: str
    sort: str = "number"


Term = Union[Var, Const, Fn, Count, NumVar]


# ------------------------------------------------------------- formulas


@node
class Top:
    pass


@node
class Bottom:
    pass


TRUE = Top()
FALSE = Bottom()


@node
class Atom:
    pred: str
    args: tuple = ()


@node
class Eq:
    lhs: Term
    rhs: Term


@node
class NumCmp:
    """``lhs op value`` with op in {'=', '>'}; lhs is a Count or NumVar."""
    op: str
    lhs: Term
    value: int = 0


@node
class Not:
    arg: "Formula"


@node
class And:
    args: tuple


@node
class Or:
    args: tuple


@node
class Imply:
    lhs: "Formula"
    rhs: "Formula"


@node
class Iff:
    lhs: "Formula"
    rhs: "Formula"


@node
class Forall:
    vars: tuple
    body: "Formula"


@node
class Exists:
    vars: tuple
    body: "Formula"


@node
class Tc:
    """``[TC_{x,y} body](u, v)``: (u, v) in the reflexive transitive closure."""
    x: Var
    y: Var
    body: "Formula"
    u: Term
    v: Term


@node
class Poss:
    action: Fn


@node
class Pending:
    action: Fn
    body: "Formula"


@node
class Frozen:
    body: "Formula"


Formula = Union[Top, Bottom, Atom, Eq, NumCmp, Not, And, Or, Imply, Iff,
                Forall, Exists, Tc, Poss, Pending, Frozen]

Quant = (Forall, Exists)


# ------------------------------------------------------ smart builders


def conj(*args) -> Formula:
    flat = []
    for a in _flatten(args):
        if isinstance(a, And):
            flat.extend(a.args)
        elif isinstance(a, Bottom):
            return FALSE
        elif not isinstance(a, Top):
            flat.append(a)
    flat = _dedupe(flat)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*args) -> Formula:
    flat = []
    for a in _flatten(args):
        if isinstance(a, Or):
            flat.extend(a.args)
        elif isinstance(a, Top):
            return TRUE
        elif not isinstance(a, Bottom):
            flat.append(a)
    flat = _dedupe(flat)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def neg(f: Formula) -> Formula:
    if isinstance(f, Top):
        return FALSE
    if isinstance(f, Bottom):
        return TRUE
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def imply(a: Formula, b: Formula) -> Formula:
    if isinstance(a, Top) or isinstance(b, Top):
        return b
    if isinstance(a, Bottom):
        return TRUE
    if isinstance(b, Bottom):
        return neg(a)
    if a == b:
        return TRUE
    return Imply(a, b)


def iff(a: Formula, b: Formula) -> Formula:
    if a == b:
        return TRUE
    if isinstance(a, Top):
        return b
    if isinstance(b, Top):
        return a
    if isinstance(a, Bottom):
        return neg(b)
    if isinstance(b, Bottom):
        return neg(a)
    return Iff(a, b)


def forall(vs: Iterable[Var], body: Formula) -> Formula:
    vs = tuple(v for v in _dedupe(list(vs)) if v in free_vars(body))
    if not vs or isinstance(body, (Top, Bottom)):
        return body
    if isinstance(body, Forall):
        return Forall(vs + tuple(v for v in body.vars if v not in vs), body.body)
    return Forall(vs, body)


def exists(vs: Iterable[Var], body: Formula) -> Formula:
    vs = tuple(v for v in _dedupe(list(vs)) if v in free_vars(body))
    if not vs or isinstance(body, (Top, Bottom)):
        return body
    if isinstance(body, Exists):
        return Exists(vs + tuple(v for v in body.vars if v not in vs), body.body)
    return Exists(vs, body)


def eq(a: Term, b: Term) -> Formula:
    if a.sort != b.sort:
        raise SortError(f"cannot equate {a} ({a.sort}) with {b} ({b.sort})")
    if a == b:
        return TRUE
    # variables on the left reads better: x = A rather than A = x
    if isinstance(a, Const) and isinstance(b, Var):
        a, b = b, a
    return Eq(a, b)


def _flatten(args):
    for a in args:
        if isinstance(a, (list, tuple)):
            yield from _flatten(a)
        else:
            yield a


def _dedupe(items):
    seen = set()
    out = []
    for x in items:
        if x not in seen:
            seen.add(x)
            out.append(x)
    return out


# ---------------------------------------------------------- free vars


def free_vars(x) -> frozenset:
    """Free variables of a term or formula."""
    cached = x.__dict__.get("_fv")
    if cached is not None:
        return cached
    fv = _free_vars(x)
    x.__dict__["_fv"] = fv
    return fv


_EMPTY = frozenset()


def _free_vars(x) -> frozenset:
    if isinstance(x, Var):
        return frozenset((x,))
    if isinstance(x, (Const, NumVar, Top, Bottom)):
        return _EMPTY
    if isinstance(x, (Fn, Atom)):
        return _union(x.args)
    if isinstance(x, Count):
        return free_vars(x.body) - frozenset(x.vars)
    if isinstance(x, Eq):
        return free_vars(x.lhs) | free_vars(x.rhs)
    if isinstance(x, NumCmp):
        return free_vars(x.lhs)
    if isinstance(x, Not):
        return free_vars(x.arg)
    if isinstance(x, (And, Or)):
        return _union(x.args)
    if isinstance(x, (Imply, Iff)):
        return free_vars(x.lhs) | free_vars(x.rhs)
    if isinstance(x, Quant):
        return free_vars(x.body) - frozenset(x.vars)
    if isinstance(x, Tc):
        return (free_vars(x.body) - {x.x, x.y}) | free_vars(x.u) | free_vars(x.v)
    if isinstance(x, Poss):
        return free_vars(x.action)
    if isinstance(x, Pending):
        return free_vars(x.action) | free_vars(x.body)
    if isinstance(x, Frozen):
        return free_vars(x.body)
    raise TypeError(f"not a term or formula: {x!r}")


def _union(items) -> frozenset:
    out = _EMPTY
    for i in items:
        out = out | free_vars(i)
    return out


def all_var_names(x) -> set[str]:
    """Names of every variable occurring in x, bound or free."""
    out: set[str] = set()

    def walk(n):
        if isinstance(n, Var):
            out.add(n.name)
            return
        if isinstance(n, (Const, NumVar, Top, Bottom, str, int)):
            return
        for f in dataclasses.fields(n):
            v = getattr(n, f.name)
            if isinstance(v, tuple):
                for i in v:
                    walk(i)
            elif not isinstance(v, (str, int)):
                walk(v)

    walk(x)
    return out


def constants(x) -> set[Const]:
    out: set[Const] = set()

    def walk(n):
        if isinstance(n, Const):
            out.add(n)
            return
        if isinstance(n, (Var, NumVar, Top, Bottom, str, int)):
            return
        for f in dataclasses.fields(n):
            v = getattr(n, f.name)
            if isinstance(v, tuple):
                for i in v:
                    walk(i)
            elif not isinstance(v, (str, int)):
                walk(v)

    walk(x)
    return out


def subformulas(x):
    """Yield every formula and term node in x (pre-order)."""
    yield x
    if isinstance(x, (Var, Const, NumVar, Top, Bottom)):
        return
    for f in dataclasses.fields(x):
        v = getattr(x, f.name)
        if isinstance(v, tuple):
            for i in v:
                if not isinstance(i, (str, int)):
                    yield from subformulas(i)
        elif not isinstance(v, (str, int)):
            yield from subformulas(v)


# ------------------------------------------------------- substitution


_SUFFIX = re.compile(r"!\d+$")


def fresh_var(v: Var, avoid: set[str]) -> Var:
    base = _SUFFIX.sub("", v.name)
    k = 1
    while f"{base}!{k}" in avoid:
        k += 1
    return Var(f"{base}!{k}", v.sort)


def _check_binding(binding: Mapping[Var, Term]) -> None:
    for var, term in binding.items():
        if not isinstance(var, Var):
            raise SortError(f"substitution key {var!r} is not a variable")
        if var.sort != term.sort:
            raise SortError(f"cannot bind {var.name}:{var.sort} to {term} of sort {term.sort}")


def substitute(x, binding: Mapping[Var, Term], check: bool = True):
    """Capture-avoiding replacement of free variables."""
    if check:
        _check_binding(binding)
    binding = {k: v for k, v in binding.items() if k != v}
    if not binding:
        return x
    return _subst(x, binding)


def _binder(vs: tuple, body_parts: tuple, binding: dict):
    """Adjust a binding for entering a scope that binds ``vs``.

    Returns (new_vars, inner_binding).  Bound variables that would capture
    a variable of a substituted term are renamed.
    """
    inner = {k: t for k, t in binding.items() if k not in vs}
    if not inner:
        return vs, inner
    incoming = set()
    for k, t in inner.items():
        incoming |= {w.name for w in free_vars(t)}
    clash = [v for v in vs if v.name in incoming]
    if not clash:
        return vs, inner
    avoid = set(incoming)
    for p in body_parts:
        avoid |= {w.name for w in free_vars(p)}
    avoid |= {v.name for v in vs}
    avoid |= {k.name for k in inner}
    renamed = {}
    new_vs = []
    for v in vs:
        if v in clash:
            nv = fresh_var(v, avoid)
            avoid.add(nv.name)
            renamed[v] = nv
            new_vs.append(nv)
        else:
            new_vs.append(v)
    inner = {**inner, **renamed}
    return tuple(new_vs), inner


def _subst(x, b: dict):
    if not (free_vars(x) & b.keys()):
        return x
    if isinstance(x, Var):
        return b.get(x, x)
    if isinstance(x, Fn):
        return Fn(x.name, tuple(_subst(a, b) for a in x.args), x.sort)
    if isinstance(x, Atom):
        return Atom(x.pred, tuple(_subst(a, b) for a in x.args))
    if isinstance(x, Count):
        vs, inner = _binder(x.vars, (x.body,), b)
        return Count(vs, _subst(x.body, inner))
    if isinstance(x, Eq):
        return Eq(_subst(x.lhs, b), _subst(x.rhs, b))
    if isinstance(x, NumCmp):
        return NumCmp(x.op, _subst(x.lhs, b), x.value)
    if isinstance(x, Not):
        return Not(_subst(x.arg, b))
    if isinstance(x, (And, Or)):
        return type(x)(tuple(_subst(a, b) for a in x.args))
    if isinstance(x, (Imply, Iff)):
        return type(x)(_subst(x.lhs, b), _subst(x.rhs, b))
    if isinstance(x, Quant):
        vs, inner = _binder(x.vars, (x.body,), b)
        return type(x)(vs, _subst(x.body, inner))
    if isinstance(x, Tc):
        (nx, ny), inner = _binder((x.x, x.y), (x.body,), b)
        return Tc(nx, ny, _subst(x.body, inner), _subst(x.u, b), _subst(x.v, b))
    if isinstance(x, Poss):
        return Poss(_subst(x.action, b))
    if isinstance(x, Pending):
        return Pending(_subst(x.action, b), _subst(x.body, b))
    if isinstance(x, Frozen):
        return Frozen(_subst(x.body, b))
    raise TypeError(f"cannot substitute into {x!r}")


def rename_bound(x, avoid: set[str]):
    """Rename bound variables of x whose names are in ``avoid``."""
    if isinstance(x, (Var, Const, NumVar, Top, Bottom)):
        return x
    if isinstance(x, (Quant + (Count,))):
        body = rename_bound(x.body, avoid)
        new_vs, b = [], {}
        used = set(avoid) | all_var_names(body)
        for v in x.vars:
            if v.name in avoid:
                nv = fresh_var(v, used)
                used.add(nv.name)
                b[v] = nv
                new_vs.append(nv)
            else:
                new_vs.append(v)
        return type(x)(tuple(new_vs), substitute(body, b, check=False))
    if isinstance(x, Tc):
        body = rename_bound(x.body, avoid)
        used = set(avoid) | all_var_names(body)
        b = {}
        nx, ny = x.x, x.y
        if nx.name in avoid:
            nx = fresh_var(nx, used)
            used.add(nx.name)
            b[x.x] = nx
        if ny.name in avoid:
            ny = fresh_var(ny, used)
            used.add(ny.name)
            b[x.y] = ny
        return Tc(nx, ny, substitute(body, b, check=False), x.u, x.v)
    return _map_children(x, lambda c: rename_bound(c, avoid))


def _map_children(x, fn):
    if isinstance(x, (Var, Const, NumVar, Top, Bottom)):
        return x
    kwargs = {}
    for f in dataclasses.fields(x):
        v = getattr(x, f.name)
        if isinstance(v, tuple):
            kwargs[f.name] = tuple(fn(i) if not isinstance(i, (str, int)) else i for i in v)
        elif isinstance(v, (str, int)):
            kwargs[f.name] = v
        else:
            kwargs[f.name] = fn(v)
    return type(x)(**kwargs)


def map_children(x, fn):
    """Rebuild x with ``fn`` applied to each direct child node."""
    return _map_children(x, fn)


# ------------------------------------------------------ simplification


def _is_action_term(t) -> bool:
    return isinstance(t, (Fn, Var)) and t.sort == ACTION


def una_simplify(phi: Formula) -> Formula:
    """Apply unique-names reasoning for actions, then simplify."""
    return simplify(phi)


def simplify(phi):
    """Bottom-up simplification.

    Action equalities are decided by unique names; distinct constants are
    unequal; negation is pushed through conjunctions, disjunctions and
    implications; quantifiers over variables pinned by an equality are
    eliminated (one-point rule).
    """
    cached = phi.__dict__.get("_simp")
    if cached is not None:
        return cached
    out = _simplify(phi)
    phi.__dict__["_simp"] = out
    return out


def _simplify(x):
    if isinstance(x, (Var, Const, NumVar, Top, Bottom)):
        return x
    if isinstance(x, Fn):
        return Fn(x.name, tuple(simplify(a) for a in x.args), x.sort)
    if isinstance(x, Count):
        return Count(x.vars, simplify(x.body))
    if isinstance(x, Atom):
        return x
    if isinstance(x, Eq):
        return _simp_eq(simplify(x.lhs), simplify(x.rhs))
    if isinstance(x, NumCmp):
        return NumCmp(x.op, simplify(x.lhs), x.value)
    if isinstance(x, Not):
        return _simp_not(simplify(x.arg))
    if isinstance(x, And):
        return conj(*[simplify(a) for a in x.args])
    if isinstance(x, Or):
        return disj(*[simplify(a) for a in x.args])
    if isinstance(x, Imply):
        a, b = simplify(x.lhs), simplify(x.rhs)
        return imply(a, b)
    if isinstance(x, Iff):
        return iff(simplify(x.lhs), simplify(x.rhs))
    if isinstance(x, Forall):
        return _one_point(forall(x.vars, simplify(x.body)))
    if isinstance(x, Exists):
        return _one_point(exists(x.vars, simplify(x.body)))
    if isinstance(x, Tc):
        body = simplify(x.body)
        u, v = simplify(x.u), simplify(x.v)
        if u == v:
            return TRUE
        if isinstance(body, Bottom):
            return _simp_eq(u, v)
        return Tc(x.x, x.y, body, u, v)
    if isinstance(x, Poss):
        return Poss(simplify(x.action))
    if isinstance(x, Pending):
        return Pending(x.action, simplify(x.body))
    if isinstance(x, Frozen):
        body = simplify(x.body)
        if isinstance(body, (Top, Bottom)):
            return body
        return Frozen(body)
    raise TypeError(f"cannot simplify {x!r}")


def _simp_eq(a, b) -> Formula:
    if a == b:
        return TRUE
    if _is_action_term(a) and _is_action_term(b):
        if isinstance(a, Fn) and isinstance(b, Fn):
            if a.name != b.name or len(a.args) != len(b.args):
                return FALSE
            return conj(*[_simp_eq(s, t) for s, t in zip(a.args, b.args)])
        return eq(a, b)
    if isinstance(a, Const) and isinstance(b, Const):
        return FALSE
    return eq(a, b)


def _simp_not(a) -> Formula:
    if isinstance(a, (Top, Bottom, Not)):
        return neg(a)
    if isinstance(a, And):
        return disj(*[_simp_not(x) for x in a.args])
    if isinstance(a, Or):
        return conj(*[_simp_not(x) for x in a.args])
    if isinstance(a, Imply):
        return conj(a.lhs, _simp_not(a.rhs))
    return Not(a)


def _one_point(q):
    """Drop ``x`` from ``exists x. (x = t & ...)`` / ``forall x. (x != t | ...)``."""
    if not isinstance(q, Quant):
        return q
    is_ex = isinstance(q, Exists)
    if is_ex:
        parts = q.body.args if isinstance(q.body, And) else (q.body,)
        eqs = list(parts)
    elif isinstance(q.body, Imply):
        lhs = q.body.lhs
        eqs = list(lhs.args) if isinstance(lhs, And) else [lhs]
    else:
        parts = q.body.args if isinstance(q.body, Or) else (q.body,)
        eqs = [p.arg for p in parts if isinstance(p, Not)]
    for v in q.vars:
        for e in eqs:
            if not isinstance(e, Eq):
                continue
            if e.lhs == v and v not in free_vars(e.rhs):
                t = e.rhs
            elif e.rhs == v and v not in free_vars(e.lhs):
                t = e.lhs
            else:
                continue
            rest = tuple(x for x in q.vars if x != v)
            body = simplify(substitute(q.body, {v: t}))
            return simplify((exists if is_ex else forall)(rest, body))
    return q


# ---------------------------------------------------------- normal forms


def nnf(x):
    """Negation normal form; implications and equivalences are expanded."""
    return _nnf(x, True)


def _nnf(x, pos: bool):
    if isinstance(x, Top):
        return TRUE if pos else FALSE
    if isinstance(x, Bottom):
        return FALSE if pos else TRUE
    if isinstance(x, Not):
        return _nnf(x.arg, not pos)
    if isinstance(x, And):
        parts = [_nnf(a, pos) for a in x.args]
        return conj(*parts) if pos else disj(*parts)
    if isinstance(x, Or):
        parts = [_nnf(a, pos) for a in x.args]
        return disj(*parts) if pos else conj(*parts)
    if isinstance(x, Imply):
        return _nnf(Or((Not(x.lhs), x.rhs)), pos)
    if isinstance(x, Iff):
        a, b = x.lhs, x.rhs
        if pos:
            return conj(disj(_nnf(a, False), _nnf(b, True)), disj(_nnf(a, True), _nnf(b, False)))
        return disj(conj(_nnf(a, True), _nnf(b, False)), conj(_nnf(a, False), _nnf(b, True)))
    if isinstance(x, Forall):
        body = _nnf(x.body, pos)
        return Forall(x.vars, body) if pos else Exists(x.vars, body)
    if isinstance(x, Exists):
        body = _nnf(x.body, pos)
        return Exists(x.vars, body) if pos else Forall(x.vars, body)
    if isinstance(x, Tc):
        t = Tc(x.x, x.y, nnf(x.body), x.u, x.v)
        return t if pos else Not(t)
    if isinstance(x, Count):
        return Count(x.vars, nnf(x.body))
    if isinstance(x, NumCmp):
        t = NumCmp(x.op, _nnf_term(x.lhs), x.value)
        return t if pos else Not(t)
    if isinstance(x, Frozen):
        return Frozen(_nnf(x.body, pos))
    if isinstance(x, Atom):
        t = Atom(x.pred, tuple(_nnf_term(a) for a in x.args))
        return t if pos else Not(t)
    return x if pos else Not(x)


def _nnf_term(t):
    if isinstance(t, Count):
        return Count(t.vars, nnf(t.body))
    return t


def canonical(x):
    """A normal form for comparing formulas up to presentation.

    NNF, flattened and sorted conjunctions/disjunctions, equalities with a
    fixed orientation, and bound variables renamed by position.
    Operands are ordered ignoring bound names, then renumbered.
    """
    once = _canon(simplify(nnf(x)), {}, [0])
    return _canon(once, {}, [0])


_BOUND_NAME = re.compile(r"\?_b\d+")


def _shape_key(x) -> str:
    """Rendering with bound names numbered by first occurrence."""
    local: dict = {}
    return _BOUND_NAME.sub(lambda mt: local.setdefault(mt.group(), f"?_{len(local)}"), to_sexpr(x))


def _canon(x, env: dict, counter: list):
    if isinstance(x, Var):
        return env.get(x, x)
    if isinstance(x, (Const, NumVar, Top, Bottom)):
        return x
    if isinstance(x, Eq):
        a, b = _canon(x.lhs, env, counter), _canon(x.rhs, env, counter)
        if _shape_key(b) < _shape_key(a):
            a, b = b, a
        return Eq(a, b)
    if isinstance(x, (And, Or)):
        parts = sorted((_canon(a, env, counter) for a in x.args), key=_shape_key)
        return type(x)(tuple(parts))
    if isinstance(x, (Quant + (Count,))):
        inner = dict(env)
        vs = []
        for v in x.vars:
            counter[0] += 1
            nv = Var(f"_b{counter[0]}", v.sort)
            inner[v] = nv
            vs.append(nv)
        return type(x)(tuple(vs), _canon(x.body, inner, counter))
    if isinstance(x, Tc):
        inner = dict(env)
        counter[0] += 1
        nx = Var(f"_b{counter[0]}", x.x.sort)
        counter[0] += 1
        ny = Var(f"_b{counter[0]}", x.y.sort)
        inner[x.x], inner[x.y] = nx, ny
        return Tc(nx, ny, _canon(x.body, inner, counter), _canon(x.u, env, counter), _canon(x.v, env, counter))
    return _map_children(x, lambda c: _canon(c, env, counter))


def alpha_equal(a, b) -> bool:
    """Structural equality modulo bound-variable names and = orientation."""
    return _alpha(a, b, {}, {})


def _alpha(a, b, ea: dict, eb: dict) -> bool:
    if isinstance(a, Var) and isinstance(b, Var):
        if a in ea or b in eb:
            return ea.get(a) is not None and ea.get(a) == eb.get(b)
        return a == b
    if type(a) is not type(b):
        return False
    if isinstance(a, (Const, NumVar, Top, Bottom)):
        return a == b
    if isinstance(a, Eq):
        return ((_alpha(a.lhs, b.lhs, ea, eb) and _alpha(a.rhs, b.rhs, ea, eb))
                or (_alpha(a.lhs, b.rhs, ea, eb) and _alpha(a.rhs, b.lhs, ea, eb)))
    if isinstance(a, (Quant + (Count,))):
        if len(a.vars) != len(b.vars):
            return False
        ea, eb = dict(ea), dict(eb)
        for i, (va, vb) in enumerate(zip(a.vars, b.vars)):
            key = object()
            ea[va], eb[vb] = key, key
        return _alpha(a.body, b.body, ea, eb)
    if isinstance(a, Tc):
        if not (_alpha(a.u, b.u, ea, eb) and _alpha(a.v, b.v, ea, eb)):
            return False
        ea, eb = dict(ea), dict(eb)
        kx, ky = object(), object()
        ea[a.x], eb[b.x] = kx, kx
        ea[a.y], eb[b.y] = ky, ky
        return _alpha(a.body, b.body, ea, eb)
    for f in dataclasses.fields(a):
        va, vb = getattr(a, f.name), getattr(b, f.name)
        if isinstance(va, tuple):
            if len(va) != len(vb):
                return False
            for i, j in zip(va, vb):
                if isinstance(i, (str, int)):
                    if i != j:
                        return False
                elif not _alpha(i, j, ea, eb):
                    return False
        elif isinstance(va, (str, int)):
            if va != vb:
                return False
        elif not _alpha(va, vb, ea, eb):
            return False
    return True


# ------------------------------------------------------------- printing


def term_sexpr(t) -> str:
    if isinstance(t, Var):
        return "?" + t.name
    if isinstance(t, Const):
        return t.name
    if isinstance(t, NumVar):
        return t.name
    if isinstance(t, Fn):
        if not t.args:
            return f"({t.name})"
        return f"({t.name} {' '.join(term_sexpr(a) for a in t.args)})"
    if isinstance(t, Count):
        return f"(count ({' '.join(term_sexpr(v) for v in t.vars)}) {to_sexpr(t.body)})"
    raise TypeError(f"not a term: {t!r}")


def to_sexpr(x) -> str:
    if isinstance(x, (Var, Const, NumVar, Fn, Count)):
        return term_sexpr(x)
    if isinstance(x, Top):
        return "true"
    if isinstance(x, Bottom):
        return "false"
    if isinstance(x, Atom):
        if not x.args:
            return x.pred
        return f"({x.pred} {' '.join(term_sexpr(a) for a in x.args)})"
    if isinstance(x, Eq):
        return f"(= {term_sexpr(x.lhs)} {term_sexpr(x.rhs)})"
    if isinstance(x, NumCmp):
        return f"({x.op} {term_sexpr(x.lhs)} {x.value})"
    if isinstance(x, Not):
        return f"(not {to_sexpr(x.arg)})"
    if isinstance(x, And):
        return f"(and {' '.join(to_sexpr(a) for a in x.args)})"
    if isinstance(x, Or):
        return f"(or {' '.join(to_sexpr(a) for a in x.args)})"
    if isinstance(x, Imply):
        return f"(imply {to_sexpr(x.lhs)} {to_sexpr(x.rhs)})"
    if isinstance(x, Iff):
        return f"(iff {to_sexpr(x.lhs)} {to_sexpr(x.rhs)})"
    if isinstance(x, Quant):
        kw = "forall" if isinstance(x, Forall) else "exists"
        return f"({kw} ({' '.join(term_sexpr(v) for v in x.vars)}) {to_sexpr(x.body)})"
    if isinstance(x, Tc):
        return (f"(tc ({term_sexpr(x.x)} {term_sexpr(x.y)}) {to_sexpr(x.body)} "
                f"{term_sexpr(x.u)} {term_sexpr(x.v)})")
    if isinstance(x, Poss):
        return f"(poss {term_sexpr(x.action)})"
    if isinstance(x, Pending):
        return f"(after {term_sexpr(x.action)} {to_sexpr(x.body)})"
    if isinstance(x, Frozen):
        return f"(frozen {to_sexpr(x.body)})"
    raise TypeError(f"cannot print {x!r}")


def pretty(x, width: int = 88, indent: int = 0) -> str:
    """Multi-line S-expression rendering for reports and task files."""
    flat = to_sexpr(x)
    if len(flat) + indent <= width or isinstance(x, (Atom, Eq, NumCmp, Top, Bottom, Poss)):
        return flat
    pad = " " * (indent + 2)
    if isinstance(x, (And, Or)):
        kw = "and" if isinstance(x, And) else "or"
        inner = ("\n" + pad).join(pretty(a, width, indent + 2) for a in x.args)
        return f"({kw}\n{pad}{inner})"
    if isinstance(x, (Imply, Iff)):
        kw = "imply" if isinstance(x, Imply) else "iff"
        return (f"({kw}\n{pad}{pretty(x.lhs, width, indent + 2)}\n"
                f"{pad}{pretty(x.rhs, width, indent + 2)})")
    if isinstance(x, Not):
        return f"(not {pretty(x.arg, width, indent + 5)})"
    if isinstance(x, Quant):
        kw = "forall" if isinstance(x, Forall) else "exists"
        vs = " ".join(term_sexpr(v) for v in x.vars)
        return f"({kw} ({vs})\n{pad}{pretty(x.body, width, indent + 2)})"
    return flat


# ---------------------------------------------------------- symbol table


@dataclass
class SymbolTable:
    """Declared symbols of a low-level domain; names are unique across kinds."""

    fluents: dict = dataclasses.field(default_factory=dict)     # name -> arity
    functions: dict = dataclasses.field(default_factory=dict)   # functional fluents
    actions: dict = dataclasses.field(default_factory=dict)     # name -> arity
    constants: set = dataclasses.field(default_factory=set)

    def kind(self, name: str) -> str | None:
        if name in self.fluents:
            return "fluent"
        if name in self.functions:
            return "function"
        if name in self.actions:
            return "action"
        if name in self.constants:
            return "constant"
        return None

    def declare(self, kind: str, name: str, arity: int = 0) -> None:
        existing = self.kind(name)
        if existing is not None:
            raise ValueError(f"symbol {name!r} already declared as {existing}")
        if kind == "fluent":
            self.fluents[name] = arity
        elif kind == "function":
            self.functions[name] = arity
        elif kind == "action":
            self.actions[name] = arity
        elif kind == "constant":
            self.constants.add(name)
        else:
            raise ValueError(f"unknown symbol kind {kind!r}")
