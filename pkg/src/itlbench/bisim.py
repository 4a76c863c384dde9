"""
Bounded bisimulations between finite models.

A family is a descending chain Z_n <= ... <= Z_0 of relations between the
worlds of two models, stored as boolean matrices. Every kind carries the
next-bisimulation clauses (Atoms, Forth/Back implication, Forth next) plus
the pair of clauses for its temporal connective.

Quantifiers over iterates "for all k >= 0" are decided over
k < prefix + 2 * cycle of the world's orbit, after which every
(position, visited set) configuration has already occurred.
"""

import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .checker import Evaluator, orbit
from .errors import FamilyFormatError, FragmentError, NonDescendingChainError
from .formula import Formula, Fragment, fragment_of, length
from .model import Model

logger = logging.getLogger(__name__)


class BisimKind(Enum):
    NEXT = "next"
    DIAM = "diam"
    BOX = "box"
    UNTIL = "until"
    RELEASE = "release"

    @property
    def clauses(self) -> Tuple[str, ...]:
        return BASE_CLAUSES + _TEMPORAL_CLAUSES[self]

    @property
    def fragment(self) -> Fragment:
        return KIND_FRAGMENT[self]


BASE_CLAUSES = ("Atoms", "Forth ->", "Back ->", "Forth X")

_TEMPORAL_CLAUSES = {
    BisimKind.NEXT: (),
    BisimKind.DIAM: ("Forth F", "Back F"),
    BisimKind.BOX: ("Forth G", "Back G"),
    BisimKind.UNTIL: ("Forth U", "Back U"),
    BisimKind.RELEASE: ("Forth R", "Back R"),
}

KIND_FRAGMENT = {
    BisimKind.NEXT: Fragment.NEXT_ONLY,
    BisimKind.DIAM: Fragment.DIAM,
    BisimKind.BOX: Fragment.BOX,
    BisimKind.UNTIL: Fragment.UNTIL,
    BisimKind.RELEASE: Fragment.RELEASE,
}

# clause -> (matrix, transposed, shape, quantified index)
# A: some v1 above y1 is related to some v2 below y2; B: the mirror image.
_SEQUENCE_CLAUSES = {
    "Forth F": ("A", False, "plain", "k1"),
    "Back F": ("B", True, "plain", "k2"),
    "Forth G": ("A", True, "plain", "k2"),
    "Back G": ("B", False, "plain", "k1"),
    "Forth U": ("A", False, "until", "k1"),
    "Back U": ("B", True, "until", "k2"),
    "Forth R": ("A", True, "until", "k2"),
    "Back R": ("B", False, "until", "k1"),
}


@dataclass(frozen=True)
class ClauseViolation:
    clause: str
    level: int
    pair: Tuple[str, str]
    witness: Mapping[str, Any] = field(default_factory=dict)

    def __str__(self) -> str:
        detail = ", ".join(f"{k}={v}" for k, v in self.witness.items())
        return f"{self.clause} fails at level {self.level} for ({self.pair[0]},{self.pair[1]}): {detail}"


@dataclass(frozen=True)
class Disagreement:
    """A formula short enough to be preserved that still separates a related pair."""
    formula: Formula
    level: int
    pair: Tuple[str, str]
    left: bool
    right: bool


@dataclass(frozen=True, eq=False)
class BisimFamily:
    model1: Model
    model2: Model
    chain: Tuple[np.ndarray, ...]

    def __post_init__(self):
        if not self.chain:
            raise ValueError("a family needs at least level 0")
        shape = (self.model1.size, self.model2.size)
        for z in self.chain:
            if z.shape != shape:
                raise ValueError(f"relation of shape {z.shape}, expected {shape}")

    @property
    def depth(self) -> int:
        return len(self.chain) - 1

    @classmethod
    def from_pairs(cls, m1: Model, m2: Model,
                   levels: Sequence[Iterable[Tuple[str, str]]]) -> "BisimFamily":
        chain = []
        for pairs in levels:
            z = np.zeros((m1.size, m2.size), dtype=bool)
            for w1, w2 in pairs:
                z[m1.index(w1), m2.index(w2)] = True
            chain.append(z)
        return cls(m1, m2, tuple(chain))

    @classmethod
    def identity(cls, m: Model, depth: int) -> "BisimFamily":
        z = np.eye(m.size, dtype=bool)
        return cls(m, m, tuple(z.copy() for _ in range(depth + 1)))

    def pairs(self, level: int) -> FrozenSet[Tuple[str, str]]:
        z = self.chain[level]
        return frozenset((self.model1.worlds[i], self.model2.worlds[j]) for i, j in np.argwhere(z))

    def contains(self, level: int, w1: str, w2: str) -> bool:
        return bool(self.chain[level][self.model1.index(w1), self.model2.index(w2)])

    def deepest_level(self, w1: str, w2: str) -> int:
        """Highest level relating w1 and w2, or -1 when they are not even in Z_0."""
        i, j = self.model1.index(w1), self.model2.index(w2)
        deepest = -1
        for level, z in enumerate(self.chain):
            if z[i, j]:
                deepest = level
        return deepest

    def with_pair(self, level: int, w1: str, w2: str) -> "BisimFamily":
        """Copy with (w1, w2) added to every level up to `level`, keeping the chain descending."""
        i, j = self.model1.index(w1), self.model2.index(w2)
        chain = [z.copy() for z in self.chain]
        for z in chain[:level + 1]:
            z[i, j] = True
        return BisimFamily(self.model1, self.model2, tuple(chain))


# ---------------------------------------------------------------------------
# Clause evaluation

class _Context:
    """Per-model-pair data shared by every clause check."""

    def __init__(self, m1: Model, m2: Model):
        self.m1, self.m2 = m1, m2
        self.le1 = m1.order.astype(np.int64)
        self.le2 = m2.order.astype(np.int64)
        self.atoms = sorted(set(m1.atoms) | set(m2.atoms))
        self.seq1 = [self._saturated(m1, w) for w in m1.worlds]
        self.seq2 = [self._saturated(m2, w) for w in m2.worlds]
        self._shifted: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}

    @staticmethod
    def _saturated(m: Model, w: str) -> np.ndarray:
        o = orbit(m, w)
        names = [o.at(k) for k in range(len(o.prefix) + 2 * len(o.cycle))]
        return np.array([m.index(v) for v in names], dtype=np.intp)

    def shifted(self, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        key = id(z)
        if key not in self._shifted:
            zi = z.astype(np.int64)
            a = (self.le1 @ zi @ self.le2) > 0
            b = (self.le1.T @ zi @ self.le2.T) > 0
            self._shifted[key] = (a, b)
        return self._shifted[key]


def _first_unmatched(m: np.ndarray) -> Optional[int]:
    """Row index k with no True entry, i.e. where "for all k exists l" fails."""
    missing = np.flatnonzero(~m.any(axis=1))
    return int(missing[0]) if len(missing) else None


def _first_unmatched_until(m: np.ndarray) -> Optional[int]:
    """
    For all rows k there is a column l with m[k, l] such that every column
    j < l is matched by some row i < k.
    """
    earlier = np.zeros_like(m)
    if m.shape[0] > 1:
        earlier[1:] = np.logical_or.accumulate(m, axis=0)[:-1]
    guarded = np.ones_like(m)
    if m.shape[1] > 1:
        guarded[:, 1:] = np.logical_and.accumulate(earlier, axis=1)[:, :-1]
    return _first_unmatched(m & guarded)


def _evaluate(ctx: _Context, clause: str, z: np.ndarray, x1: int, x2: int) -> Optional[Dict[str, Any]]:
    """None when the clause holds for (x1, x2) against relation z, else the witness."""
    m1, m2 = ctx.m1, ctx.m2
    if clause == "Atoms":
        for atom in ctx.atoms:
            if m1.truth_vector(atom)[x1] != m2.truth_vector(atom)[x2]:
                return {"atom": atom}
        return None
    if clause == "Forth ->":
        above2 = m2.order[x2]
        for v1 in np.flatnonzero(m1.order[x1]):
            if not (z[v1] & above2).any():
                return {"v1": m1.worlds[v1]}
        return None
    if clause == "Back ->":
        above1 = m1.order[x1]
        for v2 in np.flatnonzero(m2.order[x2]):
            if not (z[:, v2] & above1).any():
                return {"v2": m2.worlds[v2]}
        return None
    if clause == "Forth X":
        s1, s2 = int(m1.succ[x1]), int(m2.succ[x2])
        if z[s1, s2]:
            return None
        return {"successors": (m1.worlds[s1], m2.worlds[s2])}

    which, transposed, shape, name = _SEQUENCE_CLAUSES[clause]
    a, b = ctx.shifted(z)
    rel = a if which == "A" else b
    grid = rel[np.ix_(ctx.seq1[x1], ctx.seq2[x2])]
    if transposed:
        grid = grid.T
    finder = _first_unmatched if shape == "plain" else _first_unmatched_until
    k = finder(grid)
    return None if k is None else {name: k}


def _check_kind(kind: BisimKind, clause: str) -> None:
    if clause not in kind.clauses:
        raise ValueError(f"clause '{clause}' is not part of {kind.value}-bisimulation")


def check_clause(kind: BisimKind, fam: BisimFamily, clause: str, level: int,
                 pair: Tuple[str, str]) -> Optional[ClauseViolation]:
    """
    Replay one clause for a pair at `level`. Atoms is checked against the
    pair itself; every other clause needs level >= 1 and targets level - 1.
    """
    _check_kind(kind, clause)
    if clause != "Atoms" and level < 1:
        raise ValueError("transfer clauses are only required from level 1 on")
    ctx = _Context(fam.model1, fam.model2)
    x1, x2 = fam.model1.index(pair[0]), fam.model2.index(pair[1])
    target = fam.chain[level] if clause == "Atoms" else fam.chain[level - 1]
    witness = _evaluate(ctx, clause, target, x1, x2)
    if witness is None:
        return None
    return ClauseViolation(clause, level, tuple(pair), witness)


def _check_descending(fam: BisimFamily) -> None:
    for i in range(fam.depth):
        extra = fam.chain[i + 1] & ~fam.chain[i]
        if extra.any():
            x1, x2 = np.argwhere(extra)[0]
            raise NonDescendingChainError(i, (fam.model1.worlds[x1], fam.model2.worlds[x2]))


def verify_family(kind: BisimKind, fam: BisimFamily) -> List[ClauseViolation]:
    """Every clause failure of the family; empty iff it is a bounded kind-bisimulation."""
    _check_descending(fam)
    ctx = _Context(fam.model1, fam.model2)
    names1, names2 = fam.model1.worlds, fam.model2.worlds
    violations = []
    for x1, x2 in np.argwhere(fam.chain[0]):
        witness = _evaluate(ctx, "Atoms", fam.chain[0], x1, x2)
        if witness is not None:
            violations.append(ClauseViolation("Atoms", 0, (names1[x1], names2[x2]), witness))
    transfer = kind.clauses[1:]
    for level in range(1, fam.depth + 1):
        target = fam.chain[level - 1]
        for x1, x2 in np.argwhere(fam.chain[level]):
            for clause in transfer:
                witness = _evaluate(ctx, clause, target, x1, x2)
                if witness is not None:
                    violations.append(ClauseViolation(clause, level, (names1[x1], names2[x2]), witness))
    if violations:
        logger.debug("%s-family has %d clause violations", kind.value, len(violations))
    return violations


def atom_agreement(m1: Model, m2: Model) -> np.ndarray:
    z = np.ones((m1.size, m2.size), dtype=bool)
    for atom in set(m1.atoms) | set(m2.atoms):
        v1, v2 = m1.truth_vector(atom), m2.truth_vector(atom)
        z &= v1[:, None] == v2[None, :]
    return z


def max_family(kind: BisimKind, m1: Model, m2: Model, depth: int) -> BisimFamily:
    """The greatest bounded kind-bisimulation of the given depth, level by level."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    ctx = _Context(m1, m2)
    transfer = kind.clauses[1:]
    chain = [atom_agreement(m1, m2)]
    for level in range(1, depth + 1):
        target = chain[-1]
        refined = target.copy()
        for x1, x2 in np.argwhere(target):
            if any(_evaluate(ctx, clause, target, x1, x2) is not None for clause in transfer):
                refined[x1, x2] = False
        chain.append(refined)
        logger.debug("%s-bisimulation level %d keeps %d pairs", kind.value, level, int(refined.sum()))
    return BisimFamily(m1, m2, tuple(chain))


def preservation_check(kind: BisimKind, fam: BisimFamily,
                       formulas: Iterable[Formula]) -> List[Disagreement]:
    """
    Every pair related at a level at least the formula's length must agree on
    it. Returns the pairs that do not.
    """
    formulas = list(formulas)
    for f in formulas:
        if not kind.fragment.contains(fragment_of(f)):
            raise FragmentError(f, kind.value)
    ev1, ev2 = Evaluator.for_model(fam.model1), Evaluator.for_model(fam.model2)
    found = []
    for f in formulas:
        level = length(f)
        if level > fam.depth:
            continue
        left, right = ev1.extension(f), ev2.extension(f)
        for x1, x2 in np.argwhere(fam.chain[level] & (left[:, None] != right[None, :])):
            found.append(Disagreement(f, level, (fam.model1.worlds[x1], fam.model2.worlds[x2]),
                                      bool(left[x1]), bool(right[x2])))
    return found


# ---------------------------------------------------------------------------
# Text format: "level i: (w1,w2) (w1',w2') ..."

_LEVEL_LINE = re.compile(r"level\s+(\d+)\s*:(.*)\Z")
_PAIR = re.compile(r"\(\s*([^,()\s]+)\s*,\s*([^,()\s]+)\s*\)")


def serialize_family(fam: BisimFamily) -> str:
    lines = []
    for level, z in enumerate(fam.chain):
        pairs = " ".join(f"({fam.model1.worlds[i]},{fam.model2.worlds[j]})" for i, j in np.argwhere(z))
        lines.append(f"level {level}: {pairs}".rstrip())
    return "\n".join(lines) + "\n"


def parse_family(text: str, m1: Model, m2: Model) -> BisimFamily:
    levels: List[List[Tuple[str, str]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        match = _LEVEL_LINE.match(line)
        if not match:
            raise FamilyFormatError("expected 'level i: (w1,w2) ...'", lineno)
        if int(match.group(1)) != len(levels):
            raise FamilyFormatError(f"expected level {len(levels)}, got level {match.group(1)}", lineno)
        body = match.group(2)
        if _PAIR.sub("", body).strip():
            raise FamilyFormatError("pairs must be written as (w1,w2)", lineno)
        pairs = []
        for w1, w2 in _PAIR.findall(body):
            if w1 not in m1.worlds:
                raise FamilyFormatError(f"unknown world '{w1}' in the first model", lineno)
            if w2 not in m2.worlds:
                raise FamilyFormatError(f"unknown world '{w2}' in the second model", lineno)
            pairs.append((w1, w2))
        levels.append(pairs)
    if not levels:
        raise FamilyFormatError("no levels given")
    return BisimFamily.from_pairs(m1, m2, levels)
