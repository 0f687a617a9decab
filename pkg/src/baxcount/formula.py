"""CNF instances with a witness/counting/intermediate variable partition.

Literals are DIMACS-style signed integers: ``v`` is the positive literal of
variable ``v`` and ``-v`` its negation.  Partial witnesses and assignments
are plain ``dict[int, bool]`` maps.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, TextIO

Clause = tuple[int, ...]
PartialWitness = dict[int, bool]
Assignment = dict[int, bool]


class FormulaError(ValueError):
    """Raised for malformed input or violated instance invariants."""


def lit(var: int, sign: bool = True) -> int:
    if var < 1:
        raise FormulaError(f"variable index must be >= 1, got {var}")
    return var if sign else -var


def neg(literal: int) -> int:
    return -literal


def lit_value(literal: int, values: Mapping[int, bool]) -> bool | None:
    v = values.get(abs(literal))
    if v is None:
        return None
    return v if literal > 0 else not v


def normalize_clause(literals: Iterable[int]) -> Clause | None:
    """Deduplicate literals; return None for a tautology."""
    seen: list[int] = []
    members = set()
    for l in literals:
        if l == 0:
            raise FormulaError("0 is not a literal")
        if -l in members:
            return None
        if l not in members:
            members.add(l)
            seen.append(l)
    return tuple(seen)


@dataclass(frozen=True)
class VarPartition:
    x_vars: frozenset[int]
    y_vars: frozenset[int]
    z_vars: frozenset[int]

    def __post_init__(self):
        if self.x_vars & self.y_vars or self.x_vars & self.z_vars or self.y_vars & self.z_vars:
            raise FormulaError("partition sets overlap")

    def kind(self, var: int) -> str:
        if var in self.x_vars:
            return "x"
        if var in self.y_vars:
            return "y"
        return "z"


@dataclass(frozen=True)
class ProblemInstance:
    """Immutable CNF plus variable partition.

    Blocking produces a new instance through :meth:`with_clauses`; the
    clause tuple of the parent is a prefix of the child's.
    """

    clauses: tuple[Clause, ...]
    partition: VarPartition
    num_vars: int
    _sorted: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        covered = self.partition.x_vars | self.partition.y_vars | self.partition.z_vars
        if covered != frozenset(range(1, self.num_vars + 1)):
            raise FormulaError("partition must cover exactly 1..num_vars")
        for c in self.clauses:
            for l in c:
                if abs(l) > self.num_vars:
                    raise FormulaError(f"literal {l} exceeds declared variable count {self.num_vars}")

    @classmethod
    def build(cls, clauses: Iterable[Iterable[int]], x_vars: Iterable[int], y_vars: Iterable[int],
              num_vars: int | None = None) -> "ProblemInstance":
        """Normalize clauses and put every unlisted variable into Z."""
        norm = []
        for c in clauses:
            nc = normalize_clause(c)
            if nc is not None:
                norm.append(nc)
        xs, ys = frozenset(x_vars), frozenset(y_vars)
        if num_vars is None:
            num_vars = max([abs(l) for c in norm for l in c] + list(xs) + list(ys) + [0])
        zs = frozenset(range(1, num_vars + 1)) - xs - ys
        return cls(tuple(norm), VarPartition(xs, ys, zs), num_vars)

    @property
    def x_vars(self) -> frozenset[int]:
        return self.partition.x_vars

    @property
    def y_vars(self) -> frozenset[int]:
        return self.partition.y_vars

    @property
    def z_vars(self) -> frozenset[int]:
        return self.partition.z_vars

    def sorted_x(self) -> list[int]:
        if "x" not in self._sorted:
            self._sorted["x"] = sorted(self.x_vars)
        return self._sorted["x"]

    def sorted_y(self) -> list[int]:
        if "y" not in self._sorted:
            self._sorted["y"] = sorted(self.y_vars)
        return self._sorted["y"]

    def with_clauses(self, extra: Iterable[Clause], extra_z: int = 0) -> "ProblemInstance":
        """Append clauses, optionally declaring ``extra_z`` fresh Z variables."""
        n = self.num_vars + extra_z
        part = self.partition
        if extra_z:
            part = VarPartition(part.x_vars, part.y_vars,
                                part.z_vars | frozenset(range(self.num_vars + 1, n + 1)))
        added = []
        for c in extra:
            nc = normalize_clause(c)
            if nc is not None:
                added.append(nc)
        return ProblemInstance(self.clauses + tuple(added), part, n)

    def satisfied_by(self, values: Mapping[int, bool]) -> bool:
        return all(any(lit_value(l, values) for l in c) for c in self.clauses)


def parse_instance(text: str | TextIO) -> ProblemInstance:
    """Read extended DIMACS: ``c max`` lines declare X, ``c ind`` lines declare Y."""
    if isinstance(text, str):
        text = io.StringIO(text)
    header = None
    xs: list[int] = []
    ys: list[int] = []
    clauses: list[list[int]] = []
    current: list[int] = []
    for lineno, raw in enumerate(text, 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            parts = line.split()
            if len(parts) >= 2 and parts[0] == "c" and parts[1] in ("max", "ind"):
                try:
                    nums = [int(t) for t in parts[2:]]
                except ValueError:
                    raise FormulaError(f"line {lineno}: non-integer in '{parts[1]}' declaration")
                if nums and nums[-1] == 0:
                    nums = nums[:-1]
                if any(v <= 0 for v in nums):
                    raise FormulaError(f"line {lineno}: declared variables must be positive")
                (xs if parts[1] == "max" else ys).extend(nums)
            continue
        if line.startswith("p"):
            parts = line.split()
            if header is not None or len(parts) != 4 or parts[1] != "cnf":
                raise FormulaError(f"line {lineno}: malformed header {line!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise FormulaError(f"line {lineno}: malformed header {line!r}")
            if header[0] < 0 or header[1] < 0:
                raise FormulaError(f"line {lineno}: negative counts in header")
            continue
        if header is None:
            raise FormulaError(f"line {lineno}: clause before 'p cnf' header")
        for tok in line.split():
            try:
                l = int(tok)
            except ValueError:
                raise FormulaError(f"line {lineno}: bad literal {tok!r}")
            if l == 0:
                clauses.append(current)
                current = []
            else:
                if abs(l) > header[0]:
                    raise FormulaError(f"line {lineno}: variable {abs(l)} exceeds declared count {header[0]}")
                current.append(l)
    if header is None:
        raise FormulaError("missing 'p cnf' header")
    if current:
        clauses.append(current)
    if len(clauses) != header[1]:
        raise FormulaError(f"header declares {header[1]} clauses, found {len(clauses)}")
    num_vars = header[0]
    xset, yset = set(xs), set(ys)
    if xset & yset:
        raise FormulaError(f"variables declared both max and ind: {sorted(xset & yset)}")
    if any(v > num_vars for v in xset | yset):
        raise FormulaError("declared variable exceeds header variable count")
    return ProblemInstance.build(clauses, xset, yset, num_vars)


def serialize_instance(phi: ProblemInstance) -> str:
    out = [f"p cnf {phi.num_vars} {len(phi.clauses)}"]
    if phi.x_vars:
        out.append("c max " + " ".join(map(str, phi.sorted_x())) + " 0")
    if phi.y_vars:
        out.append("c ind " + " ".join(map(str, phi.sorted_y())) + " 0")
    for c in phi.clauses:
        out.append(" ".join(map(str, c)) + " 0")
    return "\n".join(out) + "\n"


def restrict(phi: ProblemInstance, w: Mapping[int, bool]) -> ProblemInstance:
    """Substitute the witness values: drop satisfied clauses, delete false literals.

    The assigned variables stay declared (they no longer occur), so counts
    over Y are unchanged in meaning.  An empty clause means UNSAT.
    """
    bad = [v for v in w if v not in phi.x_vars]
    if bad:
        raise FormulaError(f"witness assigns non-X variables {bad}")
    out = []
    for c in phi.clauses:
        keep = []
        sat = False
        for l in c:
            val = lit_value(l, w)
            if val is None:
                keep.append(l)
            elif val:
                sat = True
                break
        if not sat:
            out.append(tuple(keep))
    return ProblemInstance(tuple(out), phi.partition, phi.num_vars)


def blocking_clause(w: Mapping[int, bool]) -> Clause:
    """The clause ¬(w): satisfied exactly by assignments disagreeing with w somewhere."""
    if not w:
        raise FormulaError("cannot block the empty partial witness")
    return tuple(-v if b else v for v, b in sorted(w.items()))


def witness_literals(w: Mapping[int, bool]) -> list[int]:
    return [v if b else -v for v, b in sorted(w.items())]
