"""Write a small benchmark directory (random instances plus gadgets) and run the bench harness on it.

    python scripts/bench_corpus.py out/ --count 10 --exact
"""
from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from baxcount import gadgets
from baxcount.cli import main as cli_main
from baxcount.formula import ProblemInstance, serialize_instance


def write_corpus(out: Path, count: int, seed: int) -> None:
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    for i in range(count):
        nx, ny, nz = rng.randint(2, 8), rng.randint(2, 10), rng.randint(0, 6)
        n = nx + ny + nz
        clauses = [[rng.choice((1, -1)) * v for v in rng.sample(range(1, n + 1), 3)]
                   for _ in range(int(rng.uniform(1, 3) * n))]
        phi = ProblemInstance.build(clauses, range(1, nx + 1), range(nx + 1, nx + ny + 1), n)
        (out / f"rand{i:03d}.cnf").write_text(serialize_instance(phi))
    g = gadgets.chi(gadgets.m_gadget(4, 9), 3).to_instance()
    phi = ProblemInstance.build(g.clauses, range(1, 5), range(5, 10), g.num_vars)
    (out / "chi_n4.cnf").write_text(serialize_instance(phi))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out", type=Path)
    ap.add_argument("--count", type=int, default=10)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--exact", action="store_true")
    a = ap.parse_args(argv)
    write_corpus(a.out, a.count, a.seed)
    args = ["bench", str(a.out), "--json", str(a.out.with_suffix(".json")), "--seed", str(a.seed)]
    return cli_main(args + (["--exact"] if a.exact else []))


if __name__ == "__main__":
    sys.exit(main())
