"""Equivalent literals from the binary implication graph, and their substitution."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import networkx as nx

from ..formula import ProblemInstance, VarPartition, lit_value

_RANK = {"x": 0, "y": 1, "z": 2}


@dataclass
class EquivClasses:
    """Each class lists its literals with the representative first."""

    classes: list[list[int]] = field(default_factory=list)
    unsat: bool = False

    def representative(self, literal: int) -> int:
        for c in self.classes:
            if literal in c:
                return c[0]
            if -literal in c:
                return -c[0]
        return literal


@dataclass
class BackMapping:
    """Eliminated variable -> literal over the reduced instance that determines it."""

    replaced: dict[int, int] = field(default_factory=dict)

    def extend(self, values: Mapping[int, bool], variables) -> dict[int, bool]:
        out = {v: values[v] for v in variables if v in values}
        for v in variables:
            if v in self.replaced:
                out[v] = bool(lit_value(self.replaced[v], values))
        return out

    def compose(self, later: "BackMapping") -> "BackMapping":
        """self followed by a later substitution round."""
        merged = {}
        for v, l in self.replaced.items():
            img = later.replaced.get(abs(l), abs(l))
            merged[v] = img if l > 0 else -img
        merged.update(later.replaced)
        return BackMapping(merged)


def _priority(phi: ProblemInstance, literal: int) -> tuple:
    v = abs(literal)
    return (_RANK[phi.partition.kind(v)], v, literal < 0)


def find_equivalent_literals(phi: ProblemInstance) -> EquivClasses:
    g = nx.DiGraph()
    for c in phi.clauses:
        if len(c) == 2:
            a, b = c
            g.add_edge(-a, b)
            g.add_edge(-b, a)
    out = EquivClasses()
    seen: set[frozenset[int]] = set()
    for comp in nx.strongly_connected_components(g):
        if len(comp) < 2:
            continue
        if any(-l in comp for l in comp):
            out.unsat = True
            continue
        key = frozenset(comp)
        if frozenset(-l for l in comp) in seen:
            continue
        seen.add(key)
        members = sorted(comp, key=lambda l: _priority(phi, l))
        out.classes.append(members)
    out.classes.sort(key=lambda c: abs(c[0]))
    return out


def _legal(phi: ProblemInstance, rep: int, other: int) -> bool:
    return _RANK[phi.partition.kind(abs(rep))] <= _RANK[phi.partition.kind(abs(other))]


def substitute_equivalents(phi: ProblemInstance, classes: EquivClasses) -> tuple[ProblemInstance, BackMapping]:
    """Replace each non-representative literal by its representative.

    Eliminated variables stop occurring in clauses and are moved to Z; they are
    functionally determined by their representative, so the projected count over
    the remaining Y variables equals the original count.
    """
    back = BackMapping()
    for members in classes.classes:
        rep = members[0]
        for l in members[1:]:
            if not _legal(phi, rep, l):
                continue
            back.replaced[abs(l)] = rep if l > 0 else -rep
    if not back.replaced:
        return phi, back

    def sub(l):
        img = back.replaced.get(abs(l))
        if img is None:
            return l
        return img if l > 0 else -img

    gone = frozenset(back.replaced)
    part = VarPartition(phi.x_vars - gone, phi.y_vars - gone, phi.z_vars | gone)
    base = ProblemInstance((), part, phi.num_vars)
    reduced = base.with_clauses([tuple(sub(l) for l in c) for c in phi.clauses])
    return reduced, back


def eliminate_equivalences(phi: ProblemInstance, max_rounds: int = 16) -> tuple[ProblemInstance, BackMapping, bool]:
    """Substitute to a fixpoint. Returns (instance, back-mapping, unsat flag)."""
    back = BackMapping()
    for _ in range(max_rounds):
        classes = find_equivalent_literals(phi)
        if classes.unsat:
            return phi, back, True
        phi2, b = substitute_equivalents(phi, classes)
        if not b.replaced:
            break
        phi, back = phi2, back.compose(b)
    return phi, back, False
