"""Empirical PAC check: how often does an approximate run miss the (1+eps) guarantees?

For each seeded random instance the exact maximum M is enumerated, the solver
runs in approximate mode, and a run fails if its reported count is not within
a factor 1+eps of its witness's true count, or that true count is below M/(1+eps).

    python scripts/pac_calibration.py --runs 300 --csv pac.csv
"""
from __future__ import annotations

import argparse
import csv
import math
import random
import sys
import time

from baxcount.brute import brute_force_count, brute_force_max_count
from baxcount.cegar import SolverConfig, solve
from baxcount.formula import ProblemInstance


def instance(rng: random.Random, y_range=(9, 12)) -> ProblemInstance:
    nx, ny, nz = rng.randint(2, 5), rng.randint(*y_range), rng.randint(0, 3)
    n = nx + ny + nz
    clauses = [[rng.choice((1, -1)) * v for v in rng.sample(range(1, n + 1), 3)]
               for _ in range(int(rng.uniform(1.0, 2.5) * n))]
    return ProblemInstance.build(clauses, range(1, nx + 1), range(nx + 1, nx + ny + 1), n)


def main(argv=None):
    ap = argparse.ArgumentParser(description="approximate-mode calibration against enumeration")
    ap.add_argument("--runs", type=int, default=300)
    ap.add_argument("--epsilon", type=float, default=0.8)
    ap.add_argument("--delta", type=float, default=0.2)
    ap.add_argument("--seed", type=int, default=777)
    ap.add_argument("--csv", default=None)
    a = ap.parse_args(argv)

    rng = random.Random(a.seed)
    rows, failures = [], 0
    t0 = time.monotonic()
    for i in range(a.runs):
        phi = instance(rng)
        _, best = brute_force_max_count(phi)
        t = time.monotonic()
        res, _ = solve(phi, SolverConfig(epsilon=a.epsilon, delta=a.delta, seed=i))
        true = brute_force_count(phi, res.witness) if res.witness is not None else 0
        fail = not (true / (1 + a.epsilon) <= res.count <= true * (1 + a.epsilon)
                    and true >= best / (1 + a.epsilon))
        failures += fail
        rows.append({"run": i, "max": best, "reported": res.count, "witness_count": true,
                     "fail": int(fail), "time": round(time.monotonic() - t, 3)})
    limit = a.delta + 3 * math.sqrt(a.delta * (1 - a.delta) / a.runs)
    print(f"runs={a.runs} failures={failures} fraction={failures / a.runs:.3f} "
          f"limit={limit:.3f} elapsed={time.monotonic() - t0:.1f}s")
    if a.csv:
        with open(a.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]) if rows else ["run"])
            w.writeheader()
            w.writerows(rows)
    return 0 if failures / a.runs <= limit else 1


if __name__ == "__main__":
    sys.exit(main())
