"""Bundled example problems and small-instance generators for them.

Each problem lives in its own directory with ``domain.sexp``, ``qnp.sexp``,
``map.sexp`` and ``constraints.sexp``.  The generators yield every initial
state of a given size that satisfies the domain's initial formula; the
oracle explores from there.
"""

from __future__ import annotations

import itertools
from pathlib import Path

from ..oracle import FiniteInstance

CORPUS_DIR = Path(__file__).parent
FILES = ("domain", "qnp", "map", "constraints")


def problem_names() -> list:
    return sorted(p.name for p in CORPUS_DIR.iterdir() if (p / "domain.sexp").exists())


def problem_paths(name: str) -> dict:
    d = CORPUS_DIR / name
    if not d.is_dir():
        raise KeyError(f"no bundled problem {name!r}")
    return {k: d / f"{k}.sexp" for k in FILES}


def load_problem(name: str):
    """(theory, qnp, mapping) for a bundled problem."""
    from ..bat import load_domain
    from ..golog import load_mapping
    from ..qnp import load_qnp
    p = problem_paths(name)
    bat = load_domain(p["domain"], p["constraints"])
    return bat, load_qnp(p["qnp"]), load_mapping(p["map"], bat)


# ------------------------------------------------------------ generators


def _names(n: int, first: str = "A") -> list:
    return [chr(ord(first) + i) for i in range(n)]


def _set_partitions(items):
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[head] + part[i]] + part[i + 1:]
        yield [[head]] + part


def block_towers(blocks, handempty: bool = False):
    """Every arrangement of the blocks into stacks, with nothing held."""
    seen = set()
    for part in _set_partitions(list(blocks)):
        for orders in itertools.product(*(itertools.permutations(p) for p in part)):
            atoms = set()
            for stack in orders:          # stack[0] is on the table
                atoms.add(("ontable", stack[0]))
                atoms.add(("clear", stack[-1]))
                for lower, upper in zip(stack, stack[1:]):
                    atoms.add(("on", upper, lower))
            if handempty:
                atoms.add(("handempty",))
            state = frozenset(atoms)
            if state not in seen:
                seen.add(state)
                yield state


def clear_a_instances(max_size: int = 4):
    for n in range(2, max_size + 1):
        objs = tuple(_names(n))
        for state in block_towers(objs):
            yield FiniteInstance(objs, state, f"blocks{n}")


def on_ab_instances(max_size: int = 5):
    for n in range(4, max(max_size, 4) + 1):
        objs = tuple(_names(n))
        for state in block_towers(objs):
            yield FiniteInstance(objs, state, f"blocks{n}")


def _chains(objs):
    """Every ordering of ``objs`` as a single linked list."""
    for order in itertools.permutations(objs):
        yield order, {("next", a, b) for a, b in zip(order, order[1:])}


def list_instances(max_size: int = 4):
    for n in range(2, max_size + 1):
        objs = tuple(_names(n))
        for order, links in _chains(objs):
            for i in range(n - 1):
                yield FiniteInstance(objs, frozenset(links | {("pt", order[i])}), f"list{n}")


def corner_instances(max_size: int = 4):
    for n in range(1, max_size + 1):
        coords = tuple(f"C{i}" for i in range(n))
        succ = {("succ", a, b) for a, b in zip(coords, coords[1:])}
        for x, y in itertools.product(coords, repeat=2):
            yield FiniteInstance(coords, frozenset(succ | {("atx", x), ("aty", y)}), f"grid{n}")


def gripper_instances(max_size: int = 4):
    for grippers in (1, 2):
        for balls in range(1, max_size - 1):
            gs = [f"G{i}" for i in range(1, grippers + 1)]
            bs = [f"X{i}" for i in range(1, balls + 1)]
            atoms = {("robot-at", "RA")}
            atoms |= {("gripper", g) for g in gs} | {("free", g) for g in gs}
            atoms |= {("ball", b) for b in bs} | {("at", b, "RA") for b in bs}
            yield FiniteInstance(("RA", "RB", *gs, *bs), frozenset(atoms),
                                 f"gripper{grippers}x{balls}")


def logistics_instances(max_size: int = 4):
    for k in range(1, max_size - 1):
        ps = [f"P{i}" for i in range(1, k + 1)]
        atoms = {("truck-at", "SRC")}
        atoms |= {("pkg", p) for p in ps} | {("at", p, "SRC") for p in ps}
        yield FiniteInstance(("SRC", "DST", *ps), frozenset(atoms), f"logistics{k}")


GENERATORS = {
    "clear_a": clear_a_instances,
    "get_last": list_instances,
    "find_a": list_instances,
    "corner": corner_instances,
    "gripper": gripper_instances,
    "logistics": logistics_instances,
    "on_ab": on_ab_instances,
}


def instances(name: str, max_size: int = 4, bat=None):
    """Instances of a bundled problem whose initial state satisfies its init formula."""
    from ..oracle import eval_formula
    gen = GENERATORS[name]
    for inst in gen(max_size):
        if bat is None or eval_formula(bat.init, inst, inst.init, bat):
            yield inst
