"""
Finite dynamic posets with monotone valuations.
Building and validation, frame-class predicates (expanding, persistent,
here-and-there) and the line-oriented model file format.
"""

import logging
import re
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    AntisymmetryError,
    ConfluenceError,
    ModelError,
    ModelFormatError,
    MonotonicityError,
    UnknownWorldError,
)
from .formula import ATOM_PATTERN, KEYWORDS

logger = logging.getLogger(__name__)

# world names are single tokens of the model file format
WORLD_PATTERN = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_.']*\Z")


class FrameClass(Enum):
    EXPANDING = "expanding"
    PERSISTENT = "persistent"
    HERE_AND_THERE = "ht"


@dataclass(frozen=True)
class Verdict:
    """A yes/no answer with an optional witness explaining a 'no'."""
    holds: bool
    witness: Optional[Tuple[str, ...]] = None
    detail: Any = None

    def __bool__(self) -> bool:
        return self.holds


@dataclass(frozen=True)
class HTDecomposition:
    """chains[t] = (lower, upper); S maps chain t row-wise onto chain f[t]."""
    chains: Tuple[Tuple[str, str], ...]
    f: Tuple[int, ...]


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


class Model:
    """
    A finite dynamic poset (W, <=, S) with a monotone valuation.

    Worlds are opaque names; relations are stored over world indices. The
    order matrix is the full reflexive-transitive closure: order[i, j] means
    worlds[i] <= worlds[j]. Instances are immutable; use build_model to get
    a validated one.
    """

    def __init__(self, worlds: Sequence[str], order: np.ndarray, succ: np.ndarray,
                 valuation: Mapping[str, np.ndarray]):
        self._worlds = tuple(worlds)
        self._index = {w: i for i, w in enumerate(self._worlds)}
        self._order = _frozen(np.asarray(order, dtype=bool))
        self._succ = _frozen(np.asarray(succ, dtype=np.intp))
        self._valuation = {
            atom: _frozen(np.asarray(vec, dtype=bool))
            for atom, vec in sorted(valuation.items())
        }

    @property
    def worlds(self) -> Tuple[str, ...]:
        return self._worlds

    @property
    def size(self) -> int:
        return len(self._worlds)

    @property
    def order(self) -> np.ndarray:
        return self._order

    @property
    def succ(self) -> np.ndarray:
        return self._succ

    @property
    def atoms(self) -> Tuple[str, ...]:
        return tuple(self._valuation)

    def index(self, world: str) -> int:
        try:
            return self._index[world]
        except KeyError:
            raise UnknownWorldError(world) from None

    def leq(self, w: str, v: str) -> bool:
        return bool(self._order[self.index(w), self.index(v)])

    def successor(self, w: str) -> str:
        return self._worlds[self._succ[self.index(w)]]

    def truth_vector(self, atom: str) -> np.ndarray:
        """Worlds where the atom holds; absent atoms are false everywhere."""
        vec = self._valuation.get(atom)
        if vec is None:
            return np.zeros(self.size, dtype=bool)
        return vec

    def valuation_sets(self) -> Dict[str, FrozenSet[str]]:
        return {
            atom: frozenset(self._worlds[i] for i in np.flatnonzero(vec))
            for atom, vec in self._valuation.items()
        }

    def __eq__(self, other) -> bool:
        if not isinstance(other, Model):
            return NotImplemented
        return (
            self._worlds == other._worlds
            and np.array_equal(self._order, other._order)
            and np.array_equal(self._succ, other._succ)
            and self._valuation.keys() == other._valuation.keys()
            and all(np.array_equal(v, other._valuation[a]) for a, v in self._valuation.items())
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"Model(worlds={list(self._worlds)}, atoms={list(self.atoms)})"


# ---------------------------------------------------------------------------
# Construction and validation

def transitive_closure(relation: np.ndarray) -> np.ndarray:
    """Reflexive-transitive closure of a square boolean matrix."""
    closure = np.array(relation, dtype=bool) | np.eye(len(relation), dtype=bool)
    for k in range(len(closure)):
        closure |= closure[:, k:k + 1] & closure[k:k + 1, :]
    return closure


def _lookup(index: Mapping[str, int], world: str, where: str) -> int:
    if world not in index:
        raise UnknownWorldError(world, where)
    return index[world]


def _check_atom_name(atom: str) -> None:
    if not ATOM_PATTERN.match(atom) or atom in KEYWORDS:
        raise ModelError(f"invalid atom name '{atom}'")


def _check_world_name(world: str) -> None:
    if not isinstance(world, str) or not WORLD_PATTERN.match(world):
        raise ModelError(f"invalid world name '{world}'")


def build_model(worlds: Iterable[str], order_generators: Iterable[Tuple[str, str]] = (),
                succ: Optional[Mapping[str, str]] = None,
                valuation: Optional[Mapping[str, Iterable[str]]] = None) -> Model:
    """Close the order generators and return a validated Model."""
    worlds = tuple(worlds)
    if not worlds:
        raise ModelError("a model needs at least one world")
    index: Dict[str, int] = {}
    for w in worlds:
        _check_world_name(w)
        if w in index:
            raise ModelError(f"world '{w}' declared twice")
        index[w] = len(index)

    n = len(worlds)
    generators = np.zeros((n, n), dtype=bool)
    for lower, upper in order_generators:
        generators[_lookup(index, lower, "order"), _lookup(index, upper, "order")] = True

    succ = dict(succ or {})
    for w, target in succ.items():
        _lookup(index, w, "succ")
        _lookup(index, target, "succ")
    missing = [w for w in worlds if w not in succ]
    if missing:
        raise ModelError(f"no successor given for world '{missing[0]}'")
    successors = np.array([index[succ[w]] for w in worlds], dtype=np.intp)

    vectors = {}
    for atom, members in (valuation or {}).items():
        _check_atom_name(atom)
        vec = np.zeros(n, dtype=bool)
        for w in members:
            vec[_lookup(index, w, f"valuation of '{atom}'")] = True
        vectors[atom] = vec

    return validate_model(Model(worlds, transitive_closure(generators), successors, vectors))


def validate_model(m: Model) -> Model:
    """Check every Model invariant; returns m unchanged when they hold."""
    order, succ, n = m.order, m.succ, m.size
    eye = np.eye(n, dtype=bool)
    if order.shape != (n, n) or succ.shape != (n,):
        raise ModelError("relation shapes do not match the number of worlds")
    if not order[eye].all():
        raise ModelError("order is not reflexive")
    composed = (order.astype(np.int64) @ order.astype(np.int64)) > 0
    if (composed & ~order).any():
        raise ModelError("order is not transitively closed")

    both = order & order.T & ~eye
    if both.any():
        i, j = np.argwhere(both)[0]
        raise AntisymmetryError((m.worlds[i], m.worlds[j]))

    bad = order & ~order[np.ix_(succ, succ)]
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise ConfluenceError((m.worlds[i], m.worlds[j]),
                              (m.worlds[succ[i]], m.worlds[succ[j]]))

    for atom in m.atoms:
        vec = m.truth_vector(atom)
        bad = order & vec[:, None] & ~vec[None, :]
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise MonotonicityError(atom, (m.worlds[i], m.worlds[j]))
    return m


def relabel(m: Model, names: Sequence[str]) -> Model:
    names = tuple(names)
    if len(names) != m.size or len(set(names)) != len(names):
        raise ModelError("relabelling needs one distinct name per world")
    for w in names:
        _check_world_name(w)
    return Model(names, m.order, m.succ, {a: m.truth_vector(a) for a in m.atoms})


# ---------------------------------------------------------------------------
# Frame classes

def backward_confluence_violation(order: np.ndarray, succ: np.ndarray) -> Optional[Tuple[int, int]]:
    """Indices (w, v) with v >= S(w) but no u >= w mapped onto v, or None."""
    n = len(succ)
    hits = np.zeros((n, n), dtype=np.int64)
    hits[np.arange(n), succ] = 1
    image_of_up = (order.astype(np.int64) @ hits) > 0
    bad = order[succ, :] & ~image_of_up
    if bad.any():
        w, v = np.argwhere(bad)[0]
        return int(w), int(v)
    return None


def is_backward_confluent(m: Model) -> Verdict:
    """Whenever v >= S(w) there must be u >= w with S(u) = v."""
    found = backward_confluence_violation(m.order, m.succ)
    if found is not None:
        return Verdict(False, (m.worlds[found[0]], m.worlds[found[1]]))
    return Verdict(True)


def is_here_and_there(m: Model) -> Verdict:
    """Worlds split into 2-chains and S acts row-wise through one map on chains."""
    n = m.size
    strict = m.order & ~np.eye(n, dtype=bool)
    comparable = strict.sum(axis=1) + strict.sum(axis=0)
    for i in range(n):
        if comparable[i] != 1:
            return Verdict(False, (m.worlds[i],), "world is not in exactly one 2-chain")

    chains: List[Tuple[int, int]] = [(int(lo), int(np.flatnonzero(strict[lo])[0]))
                                     for lo in range(n) if strict[lo].any()]
    chain_of_lower = {lo: t for t, (lo, _) in enumerate(chains)}
    chain_of_upper = {hi: t for t, (_, hi) in enumerate(chains)}
    f = []
    for lo, hi in chains:
        target = chain_of_lower.get(int(m.succ[lo]))
        if target is None:
            return Verdict(False, (m.worlds[lo], m.worlds[m.succ[lo]]),
                           "successor of a lower world is not lower")
        if chain_of_upper.get(int(m.succ[hi])) != target:
            return Verdict(False, (m.worlds[hi], m.worlds[m.succ[hi]]),
                           "successor of an upper world leaves the image chain")
        f.append(target)

    named = tuple((m.worlds[lo], m.worlds[hi]) for lo, hi in chains)
    return Verdict(True, detail=HTDecomposition(named, tuple(f)))


def in_class(m: Model, frame_class: FrameClass) -> bool:
    if frame_class is FrameClass.EXPANDING:
        return True
    if frame_class is FrameClass.PERSISTENT:
        return bool(is_backward_confluent(m))
    return bool(is_here_and_there(m))


def classify(m: Model) -> FrameClass:
    """The most specific frame class containing m."""
    if is_here_and_there(m):
        return FrameClass.HERE_AND_THERE
    if is_backward_confluent(m):
        return FrameClass.PERSISTENT
    return FrameClass.EXPANDING


# ---------------------------------------------------------------------------
# Text format

def hasse_pairs(m: Model) -> List[Tuple[str, str]]:
    """Covering pairs of the order; their closure is the order."""
    strict = m.order & ~np.eye(m.size, dtype=bool)
    as_int = strict.astype(np.int64)
    cover = strict & ~((as_int @ as_int) > 0)
    return [(m.worlds[i], m.worlds[j]) for i, j in np.argwhere(cover)]


def serialize_model(m: Model) -> str:
    order = " ; ".join(f"{a} <= {b}" for a, b in hasse_pairs(m))
    succ = " ; ".join(f"{w} -> {m.successor(w)}" for w in m.worlds)
    lines = [f"worlds: {' '.join(m.worlds)}", f"order: {order}".rstrip(), f"succ: {succ}"]
    for atom, members in m.valuation_sets().items():
        listed = " ".join(w for w in m.worlds if w in members)
        lines.append(f"val: {atom} @ {listed}".rstrip())
    return "\n".join(lines) + "\n"


def parse_model(text: str) -> Model:
    worlds: Optional[List[str]] = None
    known: Dict[str, int] = {}
    generators: List[Tuple[str, str]] = []
    succ: Dict[str, str] = {}
    valuation: Dict[str, List[str]] = {}

    def name(token: str, lineno: int) -> str:
        token = token.strip()
        if not token or len(token.split()) != 1:
            raise ModelFormatError(f"expected a single world name, got '{token}'", lineno)
        if token not in known:
            raise ModelFormatError(f"unknown world '{token}'", lineno)
        return token

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        key = key.strip()
        if not sep:
            raise ModelFormatError("expected 'key: value'", lineno)
        if key == "worlds":
            if worlds is not None:
                raise ModelFormatError("'worlds:' given twice", lineno)
            worlds = rest.split()
            if not worlds:
                raise ModelFormatError("'worlds:' lists no worlds", lineno)
            if len(set(worlds)) != len(worlds):
                raise ModelFormatError("a world is declared twice", lineno)
            for w in worlds:
                if not WORLD_PATTERN.match(w):
                    raise ModelFormatError(f"invalid world name '{w}'", lineno)
            known.update((w, i) for i, w in enumerate(worlds))
            continue
        if worlds is None:
            raise ModelFormatError("'worlds:' must come first", lineno)
        if key == "order":
            for item in filter(str.strip, rest.split(";")):
                chain = item.split("<=")
                if len(chain) < 2:
                    raise ModelFormatError(f"expected 'a <= b', got '{item.strip()}'", lineno)
                chain = [name(part, lineno) for part in chain]
                generators.extend(zip(chain, chain[1:]))
        elif key == "succ":
            for item in filter(str.strip, rest.split(";")):
                source, arrow, target = item.partition("->")
                if not arrow:
                    raise ModelFormatError(f"expected 'a -> b', got '{item.strip()}'", lineno)
                source = name(source, lineno)
                if source in succ:
                    raise ModelFormatError(f"successor of '{source}' given twice", lineno)
                succ[source] = name(target, lineno)
        elif key == "val":
            atom, at, members = rest.partition("@")
            atom = atom.strip()
            if not at or not ATOM_PATTERN.match(atom) or atom in KEYWORDS:
                raise ModelFormatError("expected 'atom @ world ...'", lineno)
            if atom in valuation:
                raise ModelFormatError(f"valuation of '{atom}' given twice", lineno)
            valuation[atom] = [name(w, lineno) for w in members.split()]
        else:
            raise ModelFormatError(f"unknown key '{key}'", lineno)

    if worlds is None:
        raise ModelFormatError("missing 'worlds:' line")
    for w in worlds:
        if w not in succ:
            raise ModelFormatError(f"no successor given for world '{w}'")
    return build_model(worlds, generators, succ, valuation)
