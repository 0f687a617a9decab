"""Stretch run on a sign-comparison shape: 16 witness bits, 16 counting bits.

The instance is  y <=_signed x  over two's-complement words.  The best
witness is the largest positive x, whose count is 2^bits (log2 = bits).

    python scripts/stretch_sign.py --bits 16 --timeout 3600
"""
from __future__ import annotations

import argparse
import json
import math
import time

from baxcount.cegar import SolverConfig, solve
from baxcount.formula import ProblemInstance
from baxcount.gadgets import And, Not, Or, TRUE, Var, tseitin


def signed_le_instance(bits: int) -> ProblemInstance:
    """Variables 1..bits are x (LSB first), bits+1..2*bits are y."""
    def x(i):
        return Var(i + 1)

    def y(i):
        return Var(bits + i + 1)

    le = TRUE
    for i in range(bits):
        xi, yi = x(i), y(i)
        if i == bits - 1:
            xi, yi = yi, xi  # sign bit: a set sign bit means the smaller value
        same = Or((And((xi, yi)), And((Not(xi), Not(yi)))))
        le = Or((And((Not(yi), xi)), And((same, le)))) if le is not TRUE else Or((Not(yi), xi))
    cnf = tseitin(le, 2 * bits)
    return ProblemInstance.build(cnf.clauses, range(1, bits + 1), range(bits + 1, 2 * bits + 1), cnf.num_vars)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bits", type=int, default=16)
    ap.add_argument("--timeout", type=float, default=3600.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--exact", action="store_true")
    a = ap.parse_args(argv)
    phi = signed_le_instance(a.bits)
    cfg = SolverConfig(mode="exact" if a.exact else "approximate", timeout=a.timeout, seed=a.seed)
    t0 = time.monotonic()
    res, _ = solve(phi, cfg)
    out = {"bits": a.bits, "status": res.status, "count": res.count,
           "log2": math.log2(res.count) if res.count else None, "time": round(time.monotonic() - t0, 2),
           "iterations": res.stats.iterations}
    print(json.dumps(out, sort_keys=True))


if __name__ == "__main__":
    main()
