"""Command-line front end: ``baxcount {solve,decide,gadget,bench}``."""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import sys
import time
from pathlib import Path

from . import gadgets
from .cegar import MaxCountResult, SolverConfig, solve
from .formula import FormulaError, ProblemInstance, parse_instance, serialize_instance, witness_literals
from .heuristics import HEURISTICS
from .sat import POLARITY_MODES

SCHEMA = "baxcount-report/1"
EXIT_OK, EXIT_PARSE, EXIT_TIMEOUT = 0, 65, 124
BENCH_FIELDS = ["name", "status", "time", "count", "log2"]

log = logging.getLogger("baxcount")


def add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--exact", action="store_true", help="exact counting oracle")
    p.add_argument("--epsilon", type=float, default=0.8)
    p.add_argument("--delta", type=float, default=0.2)
    p.add_argument("--kappa", type=float, default=None, help="stopping slack (default derived from epsilon)")
    p.add_argument("--heuristic", choices=HEURISTICS, default="leads")
    p.add_argument("--polarity", choices=POLARITY_MODES, default="rnd")
    p.add_argument("--no-symmetry", action="store_true")
    p.add_argument("--no-equiv", action="store_true")
    p.add_argument("--merge-yz-colors", action="store_true", help="two variable colors (X vs rest) in symmetry search")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timeout", type=float, default=0.0, help="seconds, 0 = none")
    p.add_argument("--progressive-q", type=int, default=0,
                   help="reveal candidates q literals at a time; 0 = auto, negative disables")
    p.add_argument("--json", type=Path, default=None, help="write a JSON report here")


def config_from_args(a: argparse.Namespace) -> SolverConfig:
    return SolverConfig(
        epsilon=a.epsilon, delta=a.delta, kappa=a.kappa,
        mode="exact" if a.exact else "approximate",
        heuristic=a.heuristic, polarity=a.polarity,
        symmetry=not a.no_symmetry, equiv_literals=not a.no_equiv,
        seed=a.seed, timeout=a.timeout,
        progressive_q=None if a.progressive_q < 0 else a.progressive_q,
        merge_yz_colors=a.merge_yz_colors,
    )


def load(path: str | Path) -> ProblemInstance:
    with open(path) as fh:
        return parse_instance(fh)


def log2_count(count: int) -> float | None:
    return math.log2(count) if count > 0 else None


def build_report(path, cfg: SolverConfig, res: MaxCountResult, timings: dict, pre=None) -> dict:
    stats = dataclasses.asdict(res.stats)
    timings = dict(timings, search=stats.pop("wall_time"))
    witness = None if res.witness is None else witness_literals(res.witness)
    return {
        "schema": SCHEMA,
        "instance": str(path),
        "seed": cfg.seed,
        "config": dataclasses.asdict(cfg),
        "params": None if res.params is None else dataclasses.asdict(res.params),
        "result": {
            "status": res.status,
            "count": res.count,
            "log2": log2_count(res.count),
            "upper_bound": res.upper_bound,
            "witness": witness,
        },
        "preprocess": None if pre is None else {
            "generators": len(pre.generators),
            "eliminated": len(pre.back.replaced),
            "unsat": pre.unsat,
        },
        "stats": stats,
        "timings": timings,
    }


def write_json(path: Path | None, report: dict) -> None:
    if path is not None:
        path.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")


def _run(path, cfg: SolverConfig, stop_at: int | None = None):
    t0 = time.monotonic()
    hooks = {} if stop_at is None else {"stop_at": stop_at}
    res, pre = solve(load(path), cfg, **hooks)
    timings = {"total": time.monotonic() - t0}
    return res, pre, timings


def _exit_code(res: MaxCountResult) -> int:
    return EXIT_TIMEOUT if res.status == "timeout" else EXIT_OK


def cmd_solve(a: argparse.Namespace) -> int:
    cfg = config_from_args(a)
    try:
        res, pre, timings = _run(a.file, cfg)
    except (FormulaError, OSError) as e:
        print(f"c parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    if res.status == "timeout":
        print("c timeout; reporting best witness so far")
    if res.witness is not None:
        print("v " + " ".join(map(str, witness_literals(res.witness) + [0])))
    print(f"s mc {res.count}")
    if res.count > 0:
        print(f"s log2 {log2_count(res.count):.3f}")
    write_json(a.json, build_report(a.file, cfg, res, timings, pre))
    return _exit_code(res)


def cmd_decide(a: argparse.Namespace) -> int:
    cfg = config_from_args(a)
    if a.bound <= 0:
        try:
            load(a.file)
        except (FormulaError, OSError) as e:
            print(f"c parse error: {e}", file=sys.stderr)
            return EXIT_PARSE
        print("s yes")
        return EXIT_OK
    try:
        res, pre, timings = _run(a.file, cfg, stop_at=a.bound)
    except (FormulaError, OSError) as e:
        print(f"c parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    answer = res.count >= a.bound
    if res.status == "timeout" and not answer:
        print("s unknown")
    else:
        print("s yes" if answer else "s no")
    report = build_report(a.file, cfg, res, timings, pre)
    report["decision"] = {"bound": a.bound, "answer": answer, "probabilistic": not cfg.exact}
    write_json(a.json, report)
    return EXIT_OK if answer else _exit_code(res)


def _parse_ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def make_gadget(a: argparse.Namespace) -> gadgets.GadgetFormula:
    """Sub-formulas are comparators M^n_c, so every digit or p is chosen by count."""
    n = a.n
    if a.kind == "m":
        return gadgets.m_gadget(n, a.c)
    if a.kind == "chi":
        return gadgets.chi(gadgets.m_gadget(n, a.p), a.delta)
    counts = _parse_ints(a.counts)
    subs = [gadgets.m_gadget(n, c) for c in counts]
    if a.kind == "lambda2":
        if len(subs) != 2:
            raise ValueError("lambda2 needs exactly two counts")
        return gadgets.lambda2(subs[0], subs[1])
    return gadgets.lambda_k(subs)


def cmd_gadget(a: argparse.Namespace) -> int:
    try:
        g = make_gadget(a)
    except ValueError as e:
        print(f"c error: {e}", file=sys.stderr)
        return 2
    phi = g.to_instance()
    if a.witness_vars:
        k = min(a.witness_vars, g.num_vars)
        phi = ProblemInstance.build(phi.clauses, range(1, k + 1), range(k + 1, g.num_vars + 1), phi.num_vars)
    sys.stdout.write(f"c gadget {g.tag} size {g.size} models {g.count() if g.num_vars <= 20 else '?'}\n")
    sys.stdout.write(serialize_instance(phi))
    return EXIT_OK


def bench_rows(directory: Path, cfg: SolverConfig) -> list[dict]:
    rows = []
    for path in sorted(p for p in directory.iterdir() if p.is_file()):
        try:
            res, _, timings = _run(path, cfg)
        except (FormulaError, OSError, UnicodeDecodeError) as e:
            log.warning("skipping %s: %s", path.name, e)
            rows.append({"name": path.name, "status": "error", "time": 0.0, "count": None, "log2": None})
            continue
        lg = log2_count(res.count)
        rows.append({"name": path.name, "status": res.status, "time": round(timings["total"], 4),
                     "count": res.count, "log2": None if lg is None else round(lg, 4)})
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def cmd_bench(a: argparse.Namespace) -> int:
    cfg = config_from_args(a)
    rows = bench_rows(Path(a.directory), cfg)
    text = rows_to_csv(rows)
    if a.csv:
        Path(a.csv).write_text(text)
    else:
        sys.stdout.write(text)
    write_json(a.json, {"schema": SCHEMA, "config": dataclasses.asdict(cfg), "rows": rows})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="baxcount", description="Max#SAT solver")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="find a witness maximizing the projected count")
    s.add_argument("file")
    add_solver_flags(s)
    s.set_defaults(func=cmd_solve)

    d = sub.add_parser("decide", help="does some witness reach the bound?")
    d.add_argument("file")
    d.add_argument("bound", type=int)
    add_solver_flags(d)
    d.set_defaults(func=cmd_decide)

    g = sub.add_parser("gadget", help="emit a counting gadget as extended DIMACS")
    g.add_argument("kind", choices=["lambda2", "lambdak", "m", "chi"])
    g.add_argument("--n", type=int, default=2, help="variables per sub-formula")
    g.add_argument("--c", type=int, default=0, help="comparator bound for m")
    g.add_argument("--p", type=int, default=0, help="model count of the chi sub-formula")
    g.add_argument("--delta", type=int, default=0)
    g.add_argument("--counts", default="1,1", help="comma list of sub-formula counts for lambda gadgets")
    g.add_argument("--witness-vars", type=int, default=0, help="declare the first K variables as X")
    g.set_defaults(func=cmd_gadget)

    b = sub.add_parser("bench", help="solve every instance in a directory")
    b.add_argument("directory")
    b.add_argument("--csv", default=None, help="write CSV here instead of stdout")
    add_solver_flags(b)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    a = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if a.verbose else logging.WARNING, format="c %(message)s")
    try:
        return a.func(a)
    except ValueError as e:
        print(f"c error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
