"""Command-line entry point.

``soundabs verify`` generates the verification tasks for a (domain, QNP,
mapping, constraints) quadruple, discharges them with an SMT solver and
reports an aggregate verdict.  ``soundabs oracle`` checks task formulas on
the reachable states of a concrete instance.

Exit codes: 0 True, 1 False, 2 Unknown, 3 bad input.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .bat import load_domain
from .golog import load_mapping, map_action
from .oracle import (
    check_validity_finite, load_instance, reachable_states, refined_reachable_states,
)
from .qnp import load_qnp
from .sexpr import ParseError, read_all
from .smt import REFUTED, VALID, SolverConfig, discharge
from .syntax import parse_formula
from .vcgen import generate_tasks, task_sexpr

EXIT_TRUE, EXIT_FALSE, EXIT_UNKNOWN, EXIT_INPUT = 0, 1, 2, 3
INPUT_ERRORS = (ParseError, ValueError, KeyError, OSError)


@dataclass
class RunConfig:
    domain: Path
    qnp: Path
    mapping: Path
    constraints: Path | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    jobs: int = 1
    emit_smt: Path | None = None
    emit_tasks: Path | None = None
    report: Path | None = None


@dataclass
class TaskRecord:
    id: str
    kind: str
    provenance: str
    status: str
    solver: str
    downgraded: bool
    time_ms: float
    note: str = ""


@dataclass
class VerdictReport:
    name: str
    aggregate: str
    tasks: list
    wall_ms: float
    actions: int
    bools: int
    nums: int

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "aggregate": self.aggregate,
            "totals": {"wall_ms": round(self.wall_ms, 1), "actions": self.actions,
                       "bools": self.bools, "nums": self.nums, "tasks": len(self.tasks)},
            "tasks": [{"id": t.id, "kind": t.kind, "provenance": t.provenance,
                       "status": t.status, "solver": t.solver, "downgraded": t.downgraded,
                       "time_ms": round(t.time_ms, 1), "note": t.note}
                      for t in self.tasks],
        }

    @property
    def exit_code(self) -> int:
        return {"True": EXIT_TRUE, "False": EXIT_FALSE}.get(self.aggregate, EXIT_UNKNOWN)


def aggregate(statuses) -> str:
    statuses = list(statuses)
    if all(s == VALID for s in statuses):
        return "True"
    if any(s == REFUTED for s in statuses):
        return "False"
    return "Unknown"


def summary_table(report: VerdictReport) -> str:
    """One-row table: HL actions, numeric variables (#F), boolean features (#P)."""
    rows = [("Domain", "#A", "#F", "#P", "T", "Result"),
            (report.name, str(report.actions), str(report.nums), str(report.bools),
             f"{report.wall_ms / 1000:.2f}s", report.aggregate)]
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
    for t in report.tasks:
        if t.status == VALID:
            continue
        flag = "timed out" if t.solver == "timeout" else t.status
        lines.append(f"  {t.id}: {flag}{' (downgraded)' if t.downgraded else ''}"
                     f"{': ' + t.note if t.note and t.solver != 'timeout' else ''}")
    return "\n".join(lines)


def report_emit(report: VerdictReport, path) -> None:
    path = Path(path)
    path.write_text(json.dumps(report.to_json(), indent=2) + "\n")
    path.with_suffix(".txt").write_text(summary_table(report) + "\n")


def _file_name(task_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", task_id)


def load_inputs(cfg: RunConfig):
    bat = load_domain(cfg.domain, cfg.constraints)
    qnp = load_qnp(cfg.qnp)
    mapping = load_mapping(cfg.mapping, bat)
    mapping.check_covers(qnp)
    return bat, qnp, mapping


def verify(cfg: RunConfig, inputs=None) -> VerdictReport:
    """Run the whole pipeline.  Input errors propagate to the caller."""
    start = time.perf_counter()
    bat, qnp, mapping = inputs or load_inputs(cfg)
    suite = generate_tasks(bat, qnp, mapping)
    if cfg.emit_tasks:
        Path(cfg.emit_tasks).mkdir(parents=True, exist_ok=True)
        for t in suite:
            (Path(cfg.emit_tasks) / f"{_file_name(t.id)}.task").write_text(task_sexpr(t))
    if cfg.emit_smt:
        Path(cfg.emit_smt).mkdir(parents=True, exist_ok=True)

    def run(task):
        emit = Path(cfg.emit_smt) / f"{_file_name(task.id)}.smt2" if cfg.emit_smt else None
        result, _ = discharge(task, bat, cfg.solver, emit)
        return task, result

    with ThreadPoolExecutor(max_workers=max(1, cfg.jobs)) as pool:
        done = list(pool.map(run, suite.tasks))
    records = [TaskRecord(t.id, t.kind, t.provenance, r.classification, r.verdict.status,
                          r.downgraded, r.verdict.wall_ms, r.note) for t, r in done]
    return VerdictReport(qnp.name, aggregate(r.status for r in records), records,
                         (time.perf_counter() - start) * 1000,
                         len(qnp.actions), len(qnp.bools), len(qnp.nums))


# ------------------------------------------------------------- oracle


def read_task_file(path, bat) -> list:
    """(label, formula) pairs from a file of task formulas."""
    path = Path(path)
    text = path.read_text()
    ids = re.findall(r"^;\s*id:\s*(\S+)", text, flags=re.M)
    scope = bat.scope(str(path))
    scope.generated_names = True
    out = []
    for i, node in enumerate(read_all(text, str(path))):
        label = ids[i] if i < len(ids) else f"formula {i + 1}"
        out.append((label, parse_formula(node, scope)))
    return out


def run_oracle(args) -> int:
    bat = load_domain(args.domain, args.constraints)
    inst = load_instance(args.instance, bat)
    if args.map:
        if not args.qnp:
            raise ValueError("--map needs --qnp")
        qnp = load_qnp(args.qnp)
        m = load_mapping(args.map, bat)
        m.check_covers(qnp)
        progs = [map_action(m, a.name) for a in qnp.actions]
        states = refined_reachable_states(bat, inst, progs, args.depth)
    else:
        states = reachable_states(bat, inst, args.depth)
    family = [(inst, states)]
    code = EXIT_TRUE
    for label, phi in read_task_file(args.check, bat):
        ok, witness = check_validity_finite(phi, family, bat)
        if ok:
            print(f"{label}: holds in all {len(states)} reachable states")
        else:
            print(f"{label}: VIOLATED in {witness.describe()}")
            code = EXIT_FALSE
    return code


# ---------------------------------------------------------------- main


def _problem_paths(args):
    if args.problem:
        from .corpus import problem_paths
        p = problem_paths(args.problem)
        args.domain = args.domain or p["domain"]
        args.qnp = args.qnp or p["qnp"]
        args.map = args.map or p["map"]
        args.constraints = args.constraints or p["constraints"]
    missing = [f"--{n}" for n in ("domain", "qnp", "map") if getattr(args, n) is None]
    if missing:
        raise ValueError(f"missing {', '.join(missing)} (or use --problem)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="soundabs",
                                 description="Verify that a QNP is a sound abstraction of a planning domain.")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="generate and discharge all verification tasks")
    v.add_argument("--problem", help="use a bundled example problem by name")
    v.add_argument("--domain", type=Path)
    v.add_argument("--qnp", type=Path)
    v.add_argument("--map", type=Path)
    v.add_argument("--constraints", type=Path)
    v.add_argument("--solver-cmd", help="solver command reading SMT-LIB on stdin "
                                        "(default: $SOUNDABS_SOLVER or 'z3 -in')")
    v.add_argument("--timeout-secs", type=float, help="per-task solver timeout (default 10)")
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("--emit-smt", type=Path, metavar="DIR")
    v.add_argument("--emit-tasks", type=Path, metavar="DIR")
    v.add_argument("--report", type=Path, metavar="FILE", help="write a JSON report (and FILE.txt summary)")
    v.add_argument("--verbose", "-v", action="store_true", help="print every task result")

    o = sub.add_parser("oracle", help="check task formulas on the reachable states of an instance")
    o.add_argument("--domain", type=Path, required=True)
    o.add_argument("--instance", type=Path, required=True)
    o.add_argument("--check", type=Path, required=True, metavar="TASKFILE")
    o.add_argument("--constraints", type=Path)
    o.add_argument("--qnp", type=Path, help="with --map, explore only refinement executions")
    o.add_argument("--map", type=Path)
    o.add_argument("--depth", type=int, help="transition bound (default 3 x number of objects)")

    sub.add_parser("list", help="list the bundled example problems")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list":
            from .corpus import problem_names
            print("\n".join(problem_names()))
            return EXIT_TRUE
        if args.command == "oracle":
            return run_oracle(args)
        _problem_paths(args)
        cfg = RunConfig(args.domain, args.qnp, args.map, args.constraints,
                        SolverConfig.from_env(args.solver_cmd, args.timeout_secs),
                        args.jobs, args.emit_smt, args.emit_tasks, args.report)
        inputs = load_inputs(cfg)
    except INPUT_ERRORS as e:
        print(f"soundabs: error: {e}", file=sys.stderr)
        return EXIT_INPUT
    try:
        report = verify(cfg, inputs)
    except INPUT_ERRORS as e:
        print(f"soundabs: error: {e}", file=sys.stderr)
        return EXIT_INPUT
    if args.verbose:
        for t in report.tasks:
            print(f"{t.id:<28} {t.status:<8} {t.solver:<8} {t.time_ms:8.0f}ms")
    print(summary_table(report))
    if cfg.report:
        try:
            report_emit(report, cfg.report)
        except OSError as e:
            print(f"soundabs: cannot write report: {e}", file=sys.stderr)
            return EXIT_INPUT
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
