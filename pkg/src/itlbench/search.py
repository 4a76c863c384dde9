"""
Bounded model search.

Models are enumerated once per isomorphism class, smallest first: posets
are grown by adding a maximal element to each canonical smaller poset, then
successor functions and valuations are kept only when they are the least
image under the automorphisms of what is already fixed. Here-and-there
models are generated directly from a map on chains.

Formulas are evaluated over batches of models stacked into one table, so a
search costs a few vectorised passes per batch instead of one per model.
"""

import itertools
import logging
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .checker import Evaluator, Tables
from .errors import SearchBoundsError
from .formula import ATOM_PATTERN, KEYWORDS, Eventually, Formula, Henceforth, Next, atoms, parse_formula
from .model import FrameClass, Model, backward_confluence_violation, serialize_model, validate_model

logger = logging.getLogger(__name__)

DEFAULT_LIMIT = 10 ** 7
DEFAULT_BATCH_SIZE = 2048


@dataclass(frozen=True)
class SearchBounds:
    max_worlds: int
    atoms: Tuple[str, ...] = ()
    frame_class: FrameClass = FrameClass.EXPANDING
    limit: Optional[int] = DEFAULT_LIMIT
    seed: Optional[int] = None
    batch_size: int = DEFAULT_BATCH_SIZE

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if isinstance(self.frame_class, str):
            object.__setattr__(self, "frame_class", FrameClass(self.frame_class))
        if self.max_worlds < 1:
            raise SearchBoundsError("max_worlds must be at least 1")
        if self.limit is not None and self.limit < 1:
            raise SearchBoundsError("limit must be positive")
        if self.batch_size < 1:
            raise SearchBoundsError("batch_size must be positive")
        for a in self.atoms:
            if not ATOM_PATTERN.match(a) or a in KEYWORDS:
                raise SearchBoundsError(f"invalid atom name '{a}'")
        if len(set(self.atoms)) != len(self.atoms):
            raise SearchBoundsError("atoms must be distinct")


class SearchVerdict(Enum):
    FOUND = "found"
    EXHAUSTED = "exhausted"
    LIMIT_REACHED = "limit-reached"


@dataclass(frozen=True)
class SearchResult:
    verdict: SearchVerdict
    witness: Optional[Tuple[Model, str]] = None
    visited: int = 0

    @property
    def found(self) -> bool:
        return self.verdict is SearchVerdict.FOUND

    def to_dict(self) -> Dict:
        data = {"verdict": self.verdict.value, "visited": self.visited}
        if self.witness is not None:
            model, world = self.witness
            data["witness"] = {"world": world, "model": serialize_model(model)}
        return data


# ---------------------------------------------------------------------------
# Canonical posets

@dataclass(frozen=True)
class _Poset:
    order: np.ndarray
    automorphisms: np.ndarray  # (count, size); row a maps new position t to old a[t]


def _block_permutations(order: np.ndarray) -> np.ndarray:
    """All permutations that sort worlds by (#below, #above) and shuffle ties."""
    below, above = order.sum(axis=0), order.sum(axis=1)
    ranked = sorted(range(len(order)), key=lambda i: (below[i], above[i]))
    blocks = [list(group) for _, group in
              itertools.groupby(ranked, key=lambda i: (below[i], above[i]))]
    combos = itertools.product(*(itertools.permutations(b) for b in blocks))
    return np.array([sum(combo, ()) for combo in combos], dtype=np.intp)


def _canonical_poset(order: np.ndarray) -> Tuple[bytes, _Poset]:
    perms = _block_permutations(order)
    images = order[perms[:, :, None], perms[:, None, :]]
    keys = [row.tobytes() for row in np.packbits(images.reshape(len(perms), -1), axis=1)]
    best = min(keys)
    first = keys.index(best)
    inverse = np.argsort(perms[first])
    matching = np.array([i for i, k in enumerate(keys) if k == best])
    automorphisms = inverse[perms[matching]]
    return best, _Poset(images[first], automorphisms)


def _down_sets(order: np.ndarray) -> Iterator[np.ndarray]:
    n = len(order)
    for bits in itertools.product((False, True), repeat=n):
        chosen = np.array(bits, dtype=bool)
        # closed downward: nothing below a chosen element is left out
        if not (order & chosen[None, :] & ~chosen[:, None]).any():
            yield chosen


def _posets(size: int, cache: Dict[int, List[_Poset]]) -> List[_Poset]:
    if size in cache:
        return cache[size]
    if size == 1:
        result = [_Poset(np.ones((1, 1), dtype=bool), np.zeros((1, 1), dtype=np.intp))]
    else:
        seen: Dict[bytes, _Poset] = {}
        for smaller in _posets(size - 1, cache):
            for below in _down_sets(smaller.order):
                grown = np.zeros((size, size), dtype=bool)
                grown[:-1, :-1] = smaller.order
                grown[:-1, -1] = below
                grown[-1, -1] = True
                key, poset = _canonical_poset(grown)
                seen.setdefault(key, poset)
        result = [seen[key] for key in sorted(seen)]
    cache[size] = result
    logger.debug("%d posets with %d elements", len(result), size)
    return result


def _successor_functions(order: np.ndarray, rng: Optional[random.Random] = None) -> Iterator[Tuple[int, ...]]:
    """Every forward-confluent S on the poset (in random order when rng is given)."""
    n = len(order)
    s = [0] * n

    def extend(i: int) -> Iterator[Tuple[int, ...]]:
        if i == n:
            yield tuple(s)
            return
        candidates = list(range(n))
        if rng is not None:
            rng.shuffle(candidates)
        for c in candidates:
            if all((not order[i, j] or order[c, s[j]]) and (not order[j, i] or order[s[j], c])
                   for j in range(i)):
                s[i] = c
                yield from extend(i + 1)

    yield from extend(0)


def _conjugates(succ: np.ndarray, automorphisms: np.ndarray) -> np.ndarray:
    inverse = np.argsort(automorphisms, axis=1)
    rows = np.arange(len(automorphisms))[:, None]
    return inverse[rows, succ[automorphisms]]


@dataclass
class _Frame:
    names: Tuple[str, ...]
    order: np.ndarray
    succ: np.ndarray
    automorphisms: np.ndarray
    tables: Tables = field(init=False)

    def __post_init__(self):
        self.tables = Tables.from_model(Model(self.names, self.order, self.succ, {}))

    def model(self, valuation: Dict[str, np.ndarray]) -> Tuple[Model, Tables]:
        return (Model(self.names, self.order, self.succ, valuation),
                replace(self.tables, valuation=valuation))


def _world_names(n: int) -> Tuple[str, ...]:
    return tuple(f"w{i}" for i in range(n))


def _frames(size: int, frame_class: FrameClass, cache: Dict[int, List[_Poset]],
            rng: Optional[random.Random]) -> List[_Frame]:
    frames = []
    for poset in _posets(size, cache):
        for candidate in _successor_functions(poset.order):
            succ = np.array(candidate, dtype=np.intp)
            images = _conjugates(succ, poset.automorphisms)
            if min(map(tuple, images.tolist())) != candidate:
                continue
            if frame_class is FrameClass.PERSISTENT and \
                    backward_confluence_violation(poset.order, succ) is not None:
                continue
            stabiliser = poset.automorphisms[(images == succ).all(axis=1)]
            frames.append(_Frame(_world_names(size), poset.order, succ, stabiliser))
    if rng is not None:
        rng.shuffle(frames)
    return frames


def _least_codes(codes: np.ndarray, images: np.ndarray) -> np.ndarray:
    """Mask of the rows whose code is not above any of its images."""
    return codes <= images.min(axis=0)


def _valuations(frame: _Frame, atom_names: Sequence[str]) -> Iterator[Tuple[Model, Tables]]:
    n = len(frame.names)
    if not atom_names:
        yield frame.model({})
        return
    masks = np.arange(2 ** n)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    upward = np.array([not (frame.order & b[:, None] & ~b[None, :]).any() for b in bits])
    up_sets = masks[upward]
    # image of every mask under every automorphism of the frame
    moved = np.stack([(bits[:, a].astype(np.int64) << np.arange(n)).sum(axis=1)
                      for a in frame.automorphisms])

    choices = np.array(list(itertools.product(up_sets, repeat=len(atom_names))), dtype=np.int64)
    radix = 2 ** n
    weights = radix ** np.arange(len(atom_names) - 1, -1, -1, dtype=np.int64)
    codes = choices @ weights
    image_codes = moved[:, choices] @ weights
    for row in choices[_least_codes(codes, image_codes)]:
        yield frame.model({a: bits[m] for a, m in zip(atom_names, row)})


# ---------------------------------------------------------------------------
# Here-and-there models

def _ht_maps(chains: int) -> Iterator[Tuple[Tuple[int, ...], np.ndarray]]:
    """Maps on chains up to relabelling, each with the permutations commuting with it."""
    perms = np.array(list(itertools.permutations(range(chains))), dtype=np.intp)
    for f in itertools.product(range(chains), repeat=chains):
        f_arr = np.array(f, dtype=np.intp)
        images = _conjugates(f_arr, perms)
        if min(map(tuple, images.tolist())) == f:
            yield f, perms[(images == f_arr).all(axis=1)]


def _ht_frame(chains: int, f: Sequence[int]) -> Tuple[Tuple[str, ...], np.ndarray, np.ndarray]:
    n = 2 * chains
    names = tuple(f"{t}_{j}" for t in range(chains) for j in (0, 1))
    order = np.eye(n, dtype=bool)
    for t in range(chains):
        order[2 * t, 2 * t + 1] = True
    succ = np.array([2 * f[t] + j for t in range(chains) for j in (0, 1)], dtype=np.intp)
    return names, order, succ


# per chain: 0 nowhere, 1 upper world only, 2 both worlds
_CHAIN_VALUES = (np.array([False, False]), np.array([False, True]), np.array([True, True]))


def _ht_models(chains: int, atom_names: Sequence[str]) -> Iterator[Tuple[Model, Tables]]:
    for f, automorphisms in _ht_maps(chains):
        names, order, succ = _ht_frame(chains, f)
        frame_tables = Tables.from_model(Model(names, order, succ, {}))
        labels = list(itertools.product(range(3 ** len(atom_names)), repeat=chains))
        for label in labels:
            if any(tuple(label[a] for a in aut) < label for aut in automorphisms.tolist()):
                continue
            valuation = {}
            for k, atom in enumerate(atom_names):
                values = [(code // 3 ** k) % 3 for code in label]
                valuation[atom] = np.concatenate([_CHAIN_VALUES[v] for v in values])
            yield (Model(names, order, succ, valuation), replace(frame_tables, valuation=valuation))


# ---------------------------------------------------------------------------
# Streams

def _generate(bounds: SearchBounds) -> Iterator[Tuple[Model, Tables]]:
    rng = random.Random(bounds.seed) if bounds.seed is not None else None
    cache: Dict[int, List[_Poset]] = {}
    for size in range(1, bounds.max_worlds + 1):
        count = 0
        if bounds.frame_class is FrameClass.HERE_AND_THERE:
            if size % 2:
                continue
            source = _ht_models(size // 2, bounds.atoms)
        else:
            frames = _frames(size, bounds.frame_class, cache, rng)
            source = itertools.chain.from_iterable(_valuations(fr, bounds.atoms) for fr in frames)
        for item in source:
            count += 1
            yield item
        logger.debug("enumerated %d %s models with %d worlds", count, bounds.frame_class.value, size)


class ModelStream:
    """
    Single-consumer stream of models within the bounds. `visited` counts the
    models handed out; `truncated` is set when the limit stopped the stream
    before the class was exhausted.
    """

    def __init__(self, bounds: SearchBounds):
        self.bounds = bounds
        self.visited = 0
        self.truncated = False
        self._source = _generate(bounds)
        self._done = False

    def _pull(self) -> Optional[Tuple[Model, Tables]]:
        if self._done:
            return None
        limit = self.bounds.limit
        if limit is not None and self.visited >= limit:
            self._done = True
            if next(self._source, None) is not None:
                self.truncated = True
                logger.warning("search stopped after %d models (limit reached)", self.visited)
            return None
        item = next(self._source, None)
        if item is None:
            self._done = True
            return None
        self.visited += 1
        return item

    def __iter__(self) -> "ModelStream":
        return self

    def __next__(self) -> Model:
        item = self._pull()
        if item is None:
            raise StopIteration
        return item[0]

    def batches(self, size: int) -> Iterator[List[Tuple[Model, Tables]]]:
        while True:
            batch = []
            while len(batch) < size:
                item = self._pull()
                if item is None:
                    break
                batch.append(item)
            if batch:
                yield batch
            if len(batch) < size:
                return


def enumerate_models(bounds: SearchBounds) -> ModelStream:
    return ModelStream(bounds)


# ---------------------------------------------------------------------------
# Searches

Test = Callable[[Evaluator], np.ndarray]


def _scan(tests: Sequence[Test], bounds: SearchBounds, memo_limit: int = 20000) -> List[SearchResult]:
    """
    Run every test over one enumeration. A test maps an evaluator to the
    vector of worlds where it holds; the first model with a failing world is
    its witness.
    """
    results: List[Optional[SearchResult]] = [None] * len(tests)
    open_tests = list(range(len(tests)))
    stream = ModelStream(bounds)
    for batch in stream.batches(bounds.batch_size):
        tables = Tables.concat([t for _, t in batch])
        evaluator = Evaluator(tables, memo_limit=memo_limit)
        still_open = []
        for index in open_tests:
            failures = tables.first_failures(tests[index](evaluator))
            hits = np.flatnonzero(failures >= 0)
            if not len(hits):
                still_open.append(index)
                continue
            position = int(hits[0])
            model = batch[position][0]
            visited = stream.visited - (len(batch) - position - 1)
            results[index] = SearchResult(SearchVerdict.FOUND, (model, model.worlds[failures[position]]),
                                          visited)
        open_tests = still_open
        if not open_tests:
            break
    verdict = SearchVerdict.LIMIT_REACHED if stream.truncated else SearchVerdict.EXHAUSTED
    for index in open_tests:
        results[index] = SearchResult(verdict, None, stream.visited)
    return results


def _with_atoms(bounds: SearchBounds, formulas: Sequence[Formula]) -> SearchBounds:
    if bounds.atoms:
        return bounds
    names = sorted(set().union(*(atoms(f) for f in formulas))) if formulas else []
    return replace(bounds, atoms=tuple(names))


def find_countermodel(f: Formula, bounds: SearchBounds) -> SearchResult:
    """First (model, world) within the bounds where f fails."""
    bounds = _with_atoms(bounds, [f])
    return _scan([lambda ev: ev.extension(f)], bounds)[0]


def check_equivalence(f: Formula, g: Formula, bounds: SearchBounds) -> SearchResult:
    """First (model, world) within the bounds where f and g disagree."""
    bounds = _with_atoms(bounds, [f, g])
    return _scan([lambda ev: ev.extension(f) == ev.extension(g)], bounds)[0]


def scan_validity(formulas: Sequence[Formula], bounds: SearchBounds) -> List[SearchResult]:
    """find_countermodel for many formulas over a single enumeration."""
    formulas = list(formulas)
    bounds = _with_atoms(bounds, formulas)
    return _scan([lambda ev, f=f: ev.extension(f) for f in formulas], bounds)


def scan_equivalences(pairs: Sequence[Tuple[Formula, Formula]], bounds: SearchBounds) -> List[SearchResult]:
    pairs = list(pairs)
    bounds = _with_atoms(bounds, [f for pair in pairs for f in pair])
    return _scan([lambda ev, f=f, g=g: ev.extension(f) == ev.extension(g) for f, g in pairs], bounds)


# ---------------------------------------------------------------------------
# Random models

def _random_down_closed(rng: random.Random, order: np.ndarray, size: int) -> np.ndarray:
    chosen = np.array([rng.random() < 0.4 for _ in range(size)], dtype=bool)
    return order[:size, :size][:, chosen].any(axis=1) if chosen.any() else chosen


def random_model(rng: random.Random, max_worlds: int, atom_names: Sequence[str],
                 frame_class: FrameClass = FrameClass.EXPANDING) -> Model:
    if max_worlds < 1:
        raise SearchBoundsError("max_worlds must be at least 1")
    if frame_class is FrameClass.HERE_AND_THERE:
        if max_worlds < 2:
            raise SearchBoundsError("here-and-there models need at least 2 worlds")
        chains = rng.randint(1, max_worlds // 2)
        names, order, succ = _ht_frame(chains, [rng.randrange(chains) for _ in range(chains)])
        valuation = {a: np.concatenate([_CHAIN_VALUES[rng.randrange(3)] for _ in range(chains)])
                     for a in atom_names}
        return validate_model(Model(names, order, succ, valuation))

    size = rng.randint(1, max_worlds)
    order = np.eye(size, dtype=bool)
    for i in range(1, size):
        order[:i, i] = _random_down_closed(rng, order, i)
    succ = np.array(next(_successor_functions(order, rng)), dtype=np.intp)
    if frame_class is FrameClass.PERSISTENT:
        for _ in range(50):
            if backward_confluence_violation(order, succ) is None:
                break
            succ = np.array(next(_successor_functions(order, rng)), dtype=np.intp)
        else:
            succ = np.arange(size)
    valuation = {}
    for a in atom_names:
        seeds = np.array([rng.random() < 0.4 for _ in range(size)], dtype=bool)
        valuation[a] = (order & seeds[:, None]).any(axis=0)
    return validate_model(Model(_world_names(size), order, succ, valuation))


# ---------------------------------------------------------------------------
# X / F and X / G commutation

COMMUTATION_INSTANCES = ("p", "q", "p -> q")


def confirm_next_commutations(bounds: Optional[SearchBounds] = None) -> frozenset:
    """
    Check X F a = F X a and X G a = G X a over persistent models for a few
    instances; returns the connectives whose rewrite survived.
    """
    if bounds is None:
        bounds = SearchBounds(max_worlds=4, atoms=("p", "q"), frame_class=FrameClass.PERSISTENT)
    bodies = [parse_formula(text) for text in COMMUTATION_INSTANCES]
    candidates = {
        "F": [(Next(Eventually(a)), Eventually(Next(a))) for a in bodies],
        "G": [(Next(Henceforth(a)), Henceforth(Next(a))) for a in bodies],
    }
    confirmed = set()
    for symbol, pairs in candidates.items():
        results = scan_equivalences(pairs, bounds)
        if any(r.found for r in results):
            logger.warning("X does not commute with %s over %s models; leaving it in place",
                           symbol, bounds.frame_class.value)
        else:
            confirmed.add(symbol)
    return frozenset(confirmed)
