"""Simplifications applied before the search: equivalent literals, then symmetry breaking."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from ..formula import ProblemInstance
from .equivalence import (BackMapping, EquivClasses, eliminate_equivalences, find_equivalent_literals,
                          substitute_equivalents)
from .symmetry import (DEFAULT_BUDGET, Permutation, SymmetryGraph, break_symmetries, breaking_predicate,
                       build_symmetry_graph, find_generators)


@dataclass
class Preprocessed:
    original: ProblemInstance
    instance: ProblemInstance
    back: BackMapping = field(default_factory=BackMapping)
    generators: list[Permutation] = field(default_factory=list)
    unsat: bool = False

    def witness(self, reduced: Mapping[int, bool] | None) -> dict[int, bool] | None:
        """Lift a witness of the reduced instance back to the original X variables."""
        if reduced is None:
            return None
        return self.back.extend(reduced, self.original.sorted_x())


def preprocess(phi: ProblemInstance, symmetry: bool = True, equiv: bool = True,
               merge_yz_colors: bool = False, budget: int = DEFAULT_BUDGET) -> Preprocessed:
    out = Preprocessed(phi, phi)
    if equiv:
        reduced, back, unsat = eliminate_equivalences(phi)
        if unsat:
            out.instance = phi.with_clauses([()])
            out.unsat = True
            return out
        out.instance, out.back = reduced, back
    if symmetry:
        out.instance, out.generators = break_symmetries(out.instance, budget, merge_yz_colors)
    return out


__all__ = [
    "BackMapping", "EquivClasses", "Permutation", "Preprocessed", "SymmetryGraph",
    "breaking_predicate", "build_symmetry_graph", "find_equivalent_literals", "find_generators",
    "preprocess", "substitute_equivalents",
]
