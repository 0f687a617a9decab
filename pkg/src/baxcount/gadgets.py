"""Counting gadgets with closed-form model counts.

Formulas are small Boolean trees over variables 1..n.  Each gadget can be
evaluated exhaustively with numpy (the oracle) or Tseitin-encoded to CNF,
where the original variables become Y and the encoding auxiliaries go to Z.

Size is the number of binary Boolean operators plus negations of compound
subformulas; a negated variable counts as a literal.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .formula import ProblemInstance

ENUM_LIMIT = 22


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Not:
    arg: "Node"


@dataclass(frozen=True)
class And:
    args: tuple["Node", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["Node", ...]


Node = Const | Var | Not | And | Or
TRUE, FALSE = Const(True), Const(False)


def conj(*args: Node) -> Node:
    args = tuple(a for a in args if a != TRUE)
    if any(a == FALSE for a in args):
        return FALSE
    if not args:
        return TRUE
    return args[0] if len(args) == 1 else And(args)


def disj(*args: Node) -> Node:
    args = tuple(a for a in args if a != FALSE)
    if any(a == TRUE for a in args):
        return TRUE
    if not args:
        return FALSE
    return args[0] if len(args) == 1 else Or(args)


def negate(a: Node) -> Node:
    if isinstance(a, Const):
        return Const(not a.value)
    return Not(a)


def size(f: Node) -> int:
    if isinstance(f, (Const, Var)):
        return 0
    if isinstance(f, Not):
        return size(f.arg) + (0 if isinstance(f.arg, Var) else 1)
    return len(f.args) - 1 + sum(size(a) for a in f.args)


def shift(f: Node, offset: int) -> Node:
    """Rename variable i to i + offset."""
    if offset == 0 or isinstance(f, Const):
        return f
    if isinstance(f, Var):
        return Var(f.index + offset)
    if isinstance(f, Not):
        return Not(shift(f.arg, offset))
    return type(f)(tuple(shift(a, offset) for a in f.args))


def max_var(f: Node) -> int:
    if isinstance(f, Const):
        return 0
    if isinstance(f, Var):
        return f.index
    if isinstance(f, Not):
        return max_var(f.arg)
    return max((max_var(a) for a in f.args), default=0)


def evaluate(f: Node, num_vars: int) -> np.ndarray:
    """Truth table of f over all 2^num_vars assignments; bit i-1 of the row index is variable i."""
    if num_vars > ENUM_LIMIT:
        raise ValueError(f"refusing to enumerate {num_vars} variables")
    rows = np.arange(1 << num_vars, dtype=np.uint32)

    def ev(g: Node) -> np.ndarray:
        if isinstance(g, Const):
            return np.full(rows.shape, g.value)
        if isinstance(g, Var):
            return ((rows >> np.uint32(g.index - 1)) & 1).astype(bool)
        if isinstance(g, Not):
            return ~ev(g.arg)
        op = np.logical_and if isinstance(g, And) else np.logical_or
        return reduce(op, (ev(a) for a in g.args))

    return ev(f)


def model_count(f: Node, num_vars: int) -> int:
    return int(np.count_nonzero(evaluate(f, num_vars)))


def tseitin(f: Node, num_vars: int) -> ProblemInstance:
    """Equisatisfiable CNF whose projection onto 1..num_vars has exactly f's models."""
    clauses: list[tuple[int, ...]] = []
    nxt = [num_vars]
    memo: dict[Node, int] = {}

    def fresh() -> int:
        nxt[0] += 1
        return nxt[0]

    def enc(g: Node) -> int:
        if isinstance(g, Var):
            return g.index
        if isinstance(g, Not):
            return -enc(g.arg)
        if g in memo:
            return memo[g]
        t = fresh()
        if isinstance(g, Const):
            clauses.append((t,) if g.value else (-t,))
        else:
            kids = [enc(a) for a in g.args]
            if isinstance(g, And):
                clauses.extend((-t, k) for k in kids)
                clauses.append(tuple([t] + [-k for k in kids]))
            else:
                clauses.extend((t, -k) for k in kids)
                clauses.append(tuple([-t] + kids))
        memo[g] = t
        return t

    clauses.append((enc(f),))
    return ProblemInstance.build(clauses, (), range(1, num_vars + 1), nxt[0])


@dataclass(frozen=True)
class GadgetFormula:
    tree: Node
    num_vars: int
    tag: str

    def __post_init__(self):
        if max_var(self.tree) > self.num_vars:
            raise ValueError("gadget uses a variable beyond its declared range")

    @property
    def size(self) -> int:
        return size(self.tree)

    def count(self) -> int:
        return model_count(self.tree, self.num_vars)

    def to_instance(self) -> ProblemInstance:
        return tseitin(self.tree, self.num_vars)


def _as_gadget(f: Node | GadgetFormula, n: int | None) -> tuple[Node, int]:
    if isinstance(f, GadgetFormula):
        return f.tree, f.num_vars
    if n is None:
        raise ValueError("variable count required for a bare formula")
    return f, n


def lambda2(phi: Node | GadgetFormula, psi: Node | GadgetFormula,
            n: int | None = None, m: int | None = None) -> GadgetFormula:
    """(φ ∧ ¬X_{n+1} ∧ … ∧ ¬X_{n+m+2}) ∨ (ψ' ∧ X_{n+m+1}), ψ' = ψ renamed onto n+1..n+m.

    Count = |M(φ)| + |M(ψ)|·2^{n+1}.
    """
    phi, n = _as_gadget(phi, n)
    psi, m = _as_gadget(psi, m)
    if max_var(phi) > n or max_var(psi) > m:
        raise ValueError("subformula exceeds its declared variable count")
    left = And((phi,) + tuple(Not(Var(i)) for i in range(n + 1, n + m + 3)))
    right = And((shift(psi, n), Var(n + m + 1)))
    return GadgetFormula(Or((left, right)), n + m + 2, f"lambda2(n={n},m={m})")


def lambda_k(phis: list[Node | GadgetFormula], n: int | None = None) -> GadgetFormula:
    """Nested Λ₂ whose count has |M(φ_i)| as its base-2^{n+1} digit of order i."""
    if not phis:
        raise ValueError("lambda_k needs at least one formula")
    parts = [_as_gadget(p, n) for p in phis]
    widths = {w for _, w in parts}
    if len(widths) != 1:
        raise ValueError("all formulas must range over the same number of variables")
    width = widths.pop()
    acc = GadgetFormula(parts[-1][0], width, "lambda_k")
    for tree, _ in reversed(parts[:-1]):
        acc = lambda2(tree, acc, width)
    return GadgetFormula(acc.tree, acc.num_vars, f"lambda_k(k={len(parts)},n={width})")


def lambda_k_vars(k: int, n: int) -> int:
    return k * n + 2 * (k - 1)


def m_gadget(n: int, c: int) -> GadgetFormula:
    """Σ_i 2^i X_{i+1} < c over n variables: exactly c models, linear size."""
    if not 0 <= c <= 1 << n:
        raise ValueError(f"c must lie in [0, 2^{n}]")
    if c == 1 << n:
        return GadgetFormula(TRUE, n, f"m(n={n},c={c})")
    lt: Node = FALSE
    for i in range(n):
        x = Var(i + 1)
        lt = disj(negate(x), lt) if (c >> i) & 1 else conj(negate(x), lt)
    return GadgetFormula(lt, n, f"m(n={n},c={c})")


def chi(phi: Node | GadgetFormula, delta: int, n: int | None = None) -> GadgetFormula:
    """φ(X₁..Xₙ) ∧ ((¬φ(X_{n+1}..X_{2n}) ∧ ¬X_{2n+1}) ∨ (M_{2Δ}(X_{n+1}..X_{2n}) ∧ X_{2n+1}))."""
    phi, n = _as_gadget(phi, n)
    if n < 1 or not 0 <= delta <= 1 << (n - 1):
        raise ValueError(f"delta must lie in [0, 2^{n - 1}]")
    copy = shift(phi, n)
    comparator = shift(m_gadget(n, 2 * delta).tree, n)
    sel = Var(2 * n + 1)
    tree = And((phi, Or((And((negate(copy), Not(sel))), conj(comparator, sel)))))
    return GadgetFormula(tree, 2 * n + 1, f"chi(n={n},delta={delta})")


def k_poly(n: int, delta: int, p: int) -> int:
    return p * ((1 << n) - p + 2 * delta)


def random_formula(n: int, rng: random.Random, depth: int = 3) -> Node:
    """A random tree over variables 1..n for property tests."""
    if depth == 0 or rng.random() < 0.25:
        v = Var(rng.randint(1, n))
        return Not(v) if rng.random() < 0.5 else v
    r = rng.random()
    if r < 0.15:
        return Not(random_formula(n, rng, depth - 1))
    kids = tuple(random_formula(n, rng, depth - 1) for _ in range(rng.randint(2, 3)))
    return And(kids) if r < 0.6 else Or(kids)
