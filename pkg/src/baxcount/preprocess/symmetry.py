"""Formula symmetries via colored-graph automorphisms, broken by lex-leader clauses.

Nodes 0..2n-1 are literal nodes (``2(v-1)`` positive, ``2(v-1)+1`` negative);
clause nodes follow.  Automorphisms are found by individualization and
color refinement, collecting generators along a stabilizer chain.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..formula import Clause, ProblemInstance

X_COLOR, Y_COLOR, Z_COLOR, CLAUSE_COLOR = 0, 1, 2, 3
DEFAULT_BUDGET = 10 ** 6


class BudgetExhausted(Exception):
    pass


@dataclass
class SymmetryGraph:
    num_vars: int
    num_clauses: int
    colors: list[int]
    adj: list[set[int]]
    clauses: tuple[Clause, ...] = ()

    @property
    def num_nodes(self) -> int:
        return len(self.colors)

    def edges(self) -> set[tuple[int, int]]:
        return {(a, b) for a in range(self.num_nodes) for b in self.adj[a] if a < b}

    def node_of(self, literal: int) -> int:
        v = abs(literal)
        return 2 * (v - 1) + (literal < 0)

    def literal_of(self, node: int) -> int:
        v = node // 2 + 1
        return -v if node % 2 else v


def build_symmetry_graph(phi: ProblemInstance, merge_yz_colors: bool = False) -> SymmetryGraph:
    """Literal nodes colored by variable class, one node per distinct clause, consistency + incidence edges.

    Repeated clauses share a node; twin clause nodes would only inflate the search.

    ``merge_yz_colors`` merges Y and Z into one color, which lets automorphisms
    exchange counting and intermediate variables.
    """
    n = phi.num_vars
    colors = []
    for v in range(1, n + 1):
        k = phi.partition.kind(v)
        c = X_COLOR if k == "x" else (Y_COLOR if k == "y" or merge_yz_colors else Z_COLOR)
        colors += [c, c]
    adj: list[set[int]] = [set() for _ in range(2 * n)]
    for v in range(n):
        adj[2 * v].add(2 * v + 1)
        adj[2 * v + 1].add(2 * v)
    distinct = tuple(dict.fromkeys(tuple(sorted(c)) for c in phi.clauses))
    g = SymmetryGraph(n, len(distinct), colors, adj, distinct)
    for c in distinct:
        node = len(colors)
        colors.append(CLAUSE_COLOR)
        adj.append(set())
        for l in c:
            ln = g.node_of(l)
            adj[node].add(ln)
            adj[ln].add(node)
    return g


class _Search:
    def __init__(self, g: SymmetryGraph, budget: int):
        self.g = g
        self.budget = budget
        self.steps = 0

    def refine(self, cells: list[list[int]]) -> list[list[int]]:
        adj = self.g.adj
        while True:
            cell_of = {}
            for i, c in enumerate(cells):
                for v in c:
                    cell_of[v] = i
            new, changed = [], False
            for c in cells:
                if len(c) == 1:
                    new.append(c)
                    continue
                self.steps += len(c)
                if self.steps > self.budget:
                    raise BudgetExhausted()
                sig = {v: tuple(sorted(cell_of[u] for u in adj[v])) for v in c}
                keys = sorted(set(sig.values()))
                if len(keys) > 1:
                    changed = True
                    for k in keys:
                        new.append([v for v in c if sig[v] == k])
                else:
                    new.append(c)
            cells = new
            if not changed:
                return cells

    @staticmethod
    def individualize(cells, idx, v):
        c = cells[idx]
        rest = [u for u in c if u != v]
        return cells[:idx] + [[v], rest] + cells[idx + 1:]

    @staticmethod
    def first_open(cells):
        for i, c in enumerate(cells):
            if len(c) > 1:
                return i
        return -1

    def is_automorphism(self, perm: dict[int, int]) -> bool:
        g = self.g
        for a in range(g.num_nodes):
            if g.colors[a] != g.colors[perm[a]]:
                return False
            if {perm[b] for b in g.adj[a]} != g.adj[perm[a]]:
                return False
        return True

    def match(self, p1, p2) -> dict[int, int] | None:
        if [len(c) for c in p1] != [len(c) for c in p2]:
            return None
        i = self.first_open(p1)
        if i < 0:
            perm = {a[0]: b[0] for a, b in zip(p1, p2)}
            return perm if self.is_automorphism(perm) else None
        q1 = self.refine(self.individualize(p1, i, p1[i][0]))
        for b in p2[i]:
            q2 = self.refine(self.individualize(p2, i, b))
            r = self.match(q1, q2)
            if r is not None:
                return r
        return None


def _orbit_rep(parent: dict[int, int], v: int) -> int:
    while parent.get(v, v) != v:
        v = parent[v]
    return v


def find_automorphisms(g: SymmetryGraph, budget: int = DEFAULT_BUDGET) -> list[dict[int, int]]:
    """Node permutations generating (a subgroup of) the color-preserving automorphism group."""
    s = _Search(g, budget)
    gens: list[dict[int, int]] = []
    parent: dict[int, int] = {}

    def union_by(perm):
        for a, b in perm.items():
            ra, rb = _orbit_rep(parent, a), _orbit_rep(parent, b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

    def level(cells):
        i = s.first_open(cells)
        if i < 0:
            return
        a = cells[i][0]
        pa = s.refine(s.individualize(cells, i, a))
        level(pa)
        for b in cells[i][1:]:
            if _orbit_rep(parent, b) == _orbit_rep(parent, a):
                continue
            perm = s.match(pa, s.refine(s.individualize(cells, i, b)))
            if perm is not None:
                gens.append(perm)
                union_by(perm)

    by_color: dict[int, list[int]] = {}
    for v, c in enumerate(g.colors):
        by_color.setdefault(c, []).append(v)
    try:
        level(s.refine([by_color[c] for c in sorted(by_color)]))
    except (BudgetExhausted, RecursionError):
        pass
    return gens


@dataclass
class Permutation:
    """A negation-preserving literal map; only non-fixed positive literals are stored."""

    mapping: dict[int, int] = field(default_factory=dict)

    def __call__(self, literal: int) -> int:
        img = self.mapping.get(abs(literal), abs(literal))
        return img if literal > 0 else -img

    def apply_clause(self, clause: Clause) -> frozenset[int]:
        return frozenset(self(l) for l in clause)


def preserves(g: SymmetryGraph, sigma: Permutation) -> bool:
    """σ(φ) = φ up to clause and literal order, and σ keeps every variable in its color class."""
    for v, img in sigma.mapping.items():
        if g.colors[g.node_of(v)] != g.colors[g.node_of(img)]:
            return False
    if sorted(abs(i) for i in sigma.mapping.values()) != sorted(sigma.mapping):
        return False
    before = {frozenset(c) for c in g.clauses}
    return {sigma.apply_clause(c) for c in g.clauses} == before


def find_generators(g: SymmetryGraph, budget: int = DEFAULT_BUDGET) -> list[Permutation]:
    """Verified literal permutations generating the symmetries found within ``budget``."""
    out = []
    for perm in find_automorphisms(g, budget):
        mapping = {}
        for v in range(1, g.num_vars + 1):
            img = g.literal_of(perm[g.node_of(v)])
            if img != v:
                mapping[v] = img
        sigma = Permutation(mapping)
        if mapping and preserves(g, sigma):
            out.append(sigma)
    return out


def breaking_predicate(generators: list[Permutation], x_order: list[int],
                       next_var: int) -> tuple[list[Clause], int]:
    """Lex-leader clauses x <=lex x∘σ over the X variables, one chain per generator.

    Returns (clauses, number of fresh auxiliary variables starting at next_var).
    """
    clauses: list[Clause] = []
    fresh = next_var
    for sigma in generators:
        pairs = []
        placed = set()
        for v in x_order:
            img = sigma(v)
            if img == v:
                continue
            if abs(img) in placed and sigma(img) == v:
                continue
            pairs.append((v, img))
            placed.add(v)
            if img == -v:
                break
        prev = None
        for i, (a, b) in enumerate(pairs):
            guard = () if prev is None else (-prev,)
            if b == -a:
                clauses.append(guard + (-a,))
                break
            clauses.append(guard + (-a, b))
            if i == len(pairs) - 1:
                break
            e = fresh
            fresh += 1
            if prev is not None:
                clauses.append((-e, prev))
            clauses.append((-e, -a, b))
            clauses.append((-e, a, -b))
            clauses.append(guard + (-a, -b, e))
            clauses.append(guard + (a, b, e))
            prev = e
    return clauses, fresh - next_var


def break_symmetries(phi: ProblemInstance, budget: int = DEFAULT_BUDGET,
                     merge_yz_colors: bool = False) -> tuple[ProblemInstance, list[Permutation]]:
    gens = find_generators(build_symmetry_graph(phi, merge_yz_colors), budget)
    if not gens:
        return phi, []
    clauses, n_aux = breaking_predicate(gens, phi.sorted_x(), phi.num_vars + 1)
    return phi.with_clauses(clauses, extra_z=n_aux), gens
