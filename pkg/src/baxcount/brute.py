"""Exhaustive reference oracle.

Enumerates every assignment with numpy bit arithmetic.  Kept deliberately
independent of the SAT and counting engines so tests can check one against
the other.
"""
from __future__ import annotations

from typing import Mapping

import numpy as np

from .formula import FormulaError, ProblemInstance

MAX_ENUM_VARS = 24


def _surviving_models(phi: ProblemInstance, fixed: Mapping[int, bool] | None = None):
    """Return (free variable list, codes of satisfying assignments over them)."""
    fixed = dict(fixed or {})
    free = [v for v in range(1, phi.num_vars + 1) if v not in fixed]
    if len(free) > MAX_ENUM_VARS:
        raise FormulaError(f"{len(free)} free variables exceed the enumeration guard ({MAX_ENUM_VARS})")
    pos = {v: i for i, v in enumerate(free)}
    codes = np.arange(1 << len(free), dtype=np.uint32)
    for c in phi.clauses:
        if codes.size == 0:
            break
        sat = np.zeros(codes.size, dtype=bool)
        const_true = False
        for l in c:
            v = abs(l)
            if v in fixed:
                if fixed[v] == (l > 0):
                    const_true = True
                    break
                continue
            bit = (codes >> np.uint32(pos[v])) & np.uint32(1)
            sat |= (bit == 1) if l > 0 else (bit == 0)
        if const_true:
            continue
        codes = codes[sat]
    return free, pos, codes


def _gather(codes: np.ndarray, pos: dict, variables: list[int]) -> np.ndarray:
    out = np.zeros(codes.size, dtype=np.uint64)
    for i, v in enumerate(variables):
        if v in pos:
            out |= ((codes >> np.uint32(pos[v])) & np.uint32(1)).astype(np.uint64) << np.uint64(i)
    return out


def brute_force_counts(phi: ProblemInstance) -> dict[tuple[bool, ...], int]:
    """Count(x) for every x in M_X(phi), keyed by the X values in sorted X order."""
    xs, ys = phi.sorted_x(), phi.sorted_y()
    free, pos, codes = _surviving_models(phi)
    xc = _gather(codes, pos, xs)
    yc = _gather(codes, pos, ys)
    pairs = np.unique(xc * np.uint64(1 << len(ys)) + yc) if codes.size else np.zeros(0, dtype=np.uint64)
    xu, cnt = np.unique(pairs >> np.uint64(len(ys)), return_counts=True)
    return {tuple(bool((int(code) >> i) & 1) for i in range(len(xs))): int(n) for code, n in zip(xu, cnt)}


def brute_force_max_count(phi: ProblemInstance) -> tuple[dict[int, bool] | None, int]:
    """Exhaustive Max#SAT: (argmax witness over X, its count), or (None, 0) if UNSAT."""
    counts = brute_force_counts(phi)
    if not counts:
        return None, 0
    xs = phi.sorted_x()
    best = max(counts.items(), key=lambda kv: (kv[1], [not b for b in kv[0]]))
    return dict(zip(xs, best[0])), best[1]


def brute_force_count(phi: ProblemInstance, w: Mapping[int, bool] | None = None) -> int:
    """Count_E(phi, w): distinct Y projections of models extending w (E = keys of w)."""
    ys = phi.sorted_y()
    _, pos, codes = _surviving_models(phi, w)
    if codes.size == 0:
        return 0
    fixed_y = [v for v in ys if w and v in w]
    if fixed_y:
        raise FormulaError("witness must not assign Y variables")
    return int(np.unique(_gather(codes, pos, ys)).size)


def brute_force_sat(phi: ProblemInstance, assumptions: Mapping[int, bool] | None = None) -> bool:
    _, _, codes = _surviving_models(phi, assumptions)
    return bool(codes.size)
