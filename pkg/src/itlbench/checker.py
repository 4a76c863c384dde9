"""
Model checking over finite dynamic posets.

Every world's S-trajectory is a lasso (prefix then cycle), so temporal
quantifiers only need the positions before the trajectory first repeats.
Extensions are computed bottom-up per subformula as boolean vectors over
world indices, over padded neighbour tables that can also hold many models
side by side for batch search.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Mapping, Optional, Sequence, Tuple

import numpy as np

from .formula import (
    And,
    Atom,
    Bottom,
    Eventually,
    Formula,
    Henceforth,
    Implies,
    Next,
    Or,
    Release,
    Until,
)
from .model import Model, Verdict

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Orbit:
    """The trajectory of a world: prefix, then cycle repeated forever."""
    prefix: Tuple[str, ...]
    cycle: Tuple[str, ...]

    @property
    def horizon(self) -> int:
        return len(self.prefix) + len(self.cycle)

    def at(self, k: int) -> str:
        """S^k of the starting world."""
        if k < 0:
            raise ValueError("orbit positions start at 0")
        if k < len(self.prefix):
            return self.prefix[k]
        return self.cycle[(k - len(self.prefix)) % len(self.cycle)]

    def positions(self) -> Tuple[str, ...]:
        return self.prefix + self.cycle


def orbit(m: Model, w: str) -> Orbit:
    seen: Dict[int, int] = {}
    path = []
    i = m.index(w)
    while i not in seen:
        seen[i] = len(path)
        path.append(i)
        i = int(m.succ[i])
    entry = seen[i]
    names = [m.worlds[j] for j in path]
    return Orbit(tuple(names[:entry]), tuple(names[entry:]))


# ---------------------------------------------------------------------------
# Evaluation tables

@dataclass(frozen=True)
class Tables:
    """
    Index tables for vectorised evaluation.

    up[w] lists the worlds above w, padded with w itself; traj[w, k] is
    S^k(w) and mask[w, k] says whether position k lies inside the orbit
    horizon of w. offsets delimit the component models of a concatenation.
    """
    up: np.ndarray
    succ: np.ndarray
    traj: np.ndarray
    mask: np.ndarray
    valuation: Mapping[str, np.ndarray]
    offsets: Tuple[int, ...] = field(default=())

    @property
    def size(self) -> int:
        return len(self.succ)

    @classmethod
    def from_model(cls, m: Model) -> "Tables":
        n = m.size
        own = np.arange(n)
        width = int(m.order.sum(axis=1).max())
        up = np.repeat(own[:, None], width, axis=1)
        for i in range(n):
            above = np.flatnonzero(m.order[i])
            up[i, :len(above)] = above

        steps = np.empty((n, n), dtype=np.intp)
        steps[:, 0] = own
        for k in range(1, n):
            steps[:, k] = m.succ[steps[:, k - 1]]
        # every orbit shows all its distinct worlds within |W| steps
        horizon = np.array([len(set(row.tolist())) for row in steps])
        depth = int(horizon.max())
        traj = steps[:, :depth]
        mask = np.arange(depth)[None, :] < horizon[:, None]

        valuation = {a: m.truth_vector(a) for a in m.atoms}
        return cls(up, np.asarray(m.succ, dtype=np.intp), traj, mask, valuation, (0, n))

    @classmethod
    def concat(cls, parts: Sequence["Tables"]) -> "Tables":
        """Disjoint union: world indices of each part are shifted past the previous ones."""
        if not parts:
            raise ValueError("nothing to concatenate")
        sizes = [p.size for p in parts]
        starts = np.concatenate(([0], np.cumsum(sizes)))
        width = max(p.up.shape[1] for p in parts)
        depth = max(p.traj.shape[1] for p in parts)
        total = int(starts[-1])
        own = np.arange(total)
        up = np.repeat(own[:, None], width, axis=1)
        traj = np.repeat(own[:, None], depth, axis=1)
        mask = np.zeros((total, depth), dtype=bool)
        succ = np.empty(total, dtype=np.intp)
        atom_names = sorted({a for p in parts for a in p.valuation})
        valuation = {a: np.zeros(total, dtype=bool) for a in atom_names}
        for p, start in zip(parts, starts[:-1]):
            rows = slice(start, start + p.size)
            up[rows, :p.up.shape[1]] = p.up + start
            traj[rows, :p.traj.shape[1]] = p.traj + start
            mask[rows, :p.mask.shape[1]] = p.mask
            succ[rows] = p.succ + start
            for a, vec in p.valuation.items():
                valuation[a][rows] = vec
        return cls(up, succ, traj, mask, valuation, tuple(int(s) for s in starts))

    def truth_vector(self, atom: str) -> np.ndarray:
        vec = self.valuation.get(atom)
        if vec is None:
            return np.zeros(self.size, dtype=bool)
        return vec

    def first_failures(self, vec: np.ndarray) -> np.ndarray:
        """Per component model, the local index of the first world where vec is false, or -1."""
        starts = np.asarray(self.offsets[:-1])
        failing = ~vec
        any_fail = np.logical_or.reduceat(failing, starts)
        cumulative = np.cumsum(failing)
        before = np.concatenate(([0], cumulative))[starts]
        # position of the first False inside each block
        first = np.searchsorted(cumulative, before + 1) - starts
        return np.where(any_fail, first, -1)


def _exclusive_all(columns: np.ndarray) -> np.ndarray:
    """out[:, k] is True iff columns[:, j] holds for every j < k."""
    out = np.ones_like(columns)
    if columns.shape[1] > 1:
        out[:, 1:] = np.logical_and.accumulate(columns, axis=1)[:, :-1]
    return out


class Evaluator:
    """
    Memoised extensions of formulas over one set of tables. With memo_limit
    the memo is dropped whenever it grows past that many entries.
    """

    def __init__(self, tables: Tables, memo_limit: Optional[int] = None):
        self.tables = tables
        self.memo_limit = memo_limit
        self._memo: Dict[Formula, np.ndarray] = {}

    @classmethod
    def for_model(cls, m: Model) -> "Evaluator":
        return cls(Tables.from_model(m))

    def extension(self, f: Formula) -> np.ndarray:
        cached = self._memo.get(f)
        if cached is None:
            cached = self._compute(f)
            if self.memo_limit is not None and len(self._memo) >= self.memo_limit:
                self._memo.clear()
            self._memo[f] = cached
        return cached

    def _compute(self, f: Formula) -> np.ndarray:
        t = self.tables
        if isinstance(f, Atom):
            return t.truth_vector(f.name)
        if isinstance(f, Bottom):
            return np.zeros(t.size, dtype=bool)
        if isinstance(f, And):
            return self.extension(f.left) & self.extension(f.right)
        if isinstance(f, Or):
            return self.extension(f.left) | self.extension(f.right)
        if isinstance(f, Implies):
            ok = ~self.extension(f.left) | self.extension(f.right)
            return ok[t.up].all(axis=1)
        if isinstance(f, Next):
            return self.extension(f.sub)[t.succ]
        if isinstance(f, Eventually):
            return (self.extension(f.sub)[t.traj] & t.mask).any(axis=1)
        if isinstance(f, Henceforth):
            return (self.extension(f.sub)[t.traj] | ~t.mask).all(axis=1)
        if isinstance(f, Until):
            left = self.extension(f.left)[t.traj]
            right = self.extension(f.right)[t.traj]
            return (right & _exclusive_all(left) & t.mask).any(axis=1)
        if isinstance(f, Release):
            left = self.extension(f.left)[t.traj]
            right = self.extension(f.right)[t.traj]
            broken = ~right & _exclusive_all(~left) & t.mask
            return ~broken.any(axis=1)
        raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Public checking API

def satisfies(m: Model, w: str, f: Formula) -> bool:
    i = m.index(w)
    return bool(Evaluator.for_model(m).extension(f)[i])


def extension(m: Model, f: Formula) -> FrozenSet[str]:
    vec = Evaluator.for_model(m).extension(f)
    return frozenset(m.worlds[i] for i in np.flatnonzero(vec))


def valid_in_model(m: Model, f: Formula) -> Verdict:
    """Holds iff f is true at every world; otherwise witnesses a falsifying world."""
    vec = Evaluator.for_model(m).extension(f)
    failing = np.flatnonzero(~vec)
    if len(failing):
        return Verdict(False, (m.worlds[failing[0]],))
    return Verdict(True)


def global_satisfies(m: Model, f: Formula) -> bool:
    return bool(valid_in_model(m, f))


def extension_equal(m: Model, f: Formula, g: Formula) -> bool:
    ev = Evaluator.for_model(m)
    return bool(np.array_equal(ev.extension(f), ev.extension(g)))


def check_monotone_extension(m: Model, f: Formula) -> Verdict:
    """Holds iff the extension of f is upward closed; witness is (w, v) with w <= v, w in, v out."""
    vec = Evaluator.for_model(m).extension(f)
    bad = m.order & vec[:, None] & ~vec[None, :]
    if bad.any():
        i, j = np.argwhere(bad)[0]
        return Verdict(False, (m.worlds[i], m.worlds[j]))
    return Verdict(True)


def naive_satisfies(m: Model, w: str, f: Formula, depth: Optional[int] = None) -> bool:
    """
    Direct reading of the satisfaction clauses, with every temporal
    quantifier unrolled to `depth` iterates (default 3*|W|). Used as an
    oracle for the orbit-bounded evaluator.
    """
    if depth is None:
        depth = 3 * m.size
    memo: Dict[Tuple[Formula, int], bool] = {}

    def iterates(i: int):
        for _ in range(depth):
            yield i
            i = int(m.succ[i])

    def sat(g: Formula, i: int) -> bool:
        key = (g, i)
        if key not in memo:
            memo[key] = _naive(g, i)
        return memo[key]

    def _naive(g: Formula, i: int) -> bool:
        if isinstance(g, Atom):
            return bool(m.truth_vector(g.name)[i])
        if isinstance(g, Bottom):
            return False
        if isinstance(g, And):
            return sat(g.left, i) and sat(g.right, i)
        if isinstance(g, Or):
            return sat(g.left, i) or sat(g.right, i)
        if isinstance(g, Implies):
            above = [int(v) for v in np.flatnonzero(m.order[i])]
            return all(sat(g.right, v) for v in above if sat(g.left, v))
        if isinstance(g, Next):
            return sat(g.sub, int(m.succ[i]))
        if isinstance(g, Eventually):
            return any(sat(g.sub, j) for j in iterates(i))
        if isinstance(g, Henceforth):
            return all(sat(g.sub, j) for j in iterates(i))
        if isinstance(g, Until):
            for j in iterates(i):
                if sat(g.right, j):
                    return True
                if not sat(g.left, j):
                    return False
            return False
        if isinstance(g, Release):
            for j in iterates(i):
                if not sat(g.right, j):
                    return False
                if sat(g.left, j):
                    return True
            return True
        raise TypeError(f"not a formula: {g!r}")

    return sat(f, m.index(w))
