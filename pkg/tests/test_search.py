"""
Tests for bounded model enumeration and countermodel search.
"""

import itertools
import random

import pytest

from itlbench.checker import satisfies
from itlbench.countermodels import diamond_from_box
from itlbench.errors import SearchBoundsError
from itlbench.formula import parse_formula
from itlbench.model import (
    FrameClass,
    build_model,
    classify,
    in_class,
    parse_model,
    serialize_model,
    validate_model,
)
from itlbench.search import (
    SearchBounds,
    SearchVerdict,
    check_equivalence,
    confirm_next_commutations,
    enumerate_models,
    find_countermodel,
    random_model,
    scan_validity,
)


@pytest.mark.parametrize("bounds,count", [
    (SearchBounds(max_worlds=1, atoms=("p",)), 2),
    (SearchBounds(max_worlds=2), 7),
    (SearchBounds(max_worlds=2, frame_class=FrameClass.PERSISTENT), 6),
    (SearchBounds(max_worlds=2, frame_class=FrameClass.HERE_AND_THERE), 1),
    (SearchBounds(max_worlds=3, atoms=("p",), frame_class=FrameClass.HERE_AND_THERE), 3),
])
def test_enumeration_counts(bounds, count):
    """One model per isomorphism class: 1 + 3 antichains + 3 chains on two worlds."""
    stream = enumerate_models(bounds)
    assert len(list(stream)) == count
    assert stream.visited == count
    assert not stream.truncated


def _partial_orders(n):
    worlds = range(n)
    pairs = [(a, b) for a in worlds for b in worlds if a != b]
    for bits in itertools.product((False, True), repeat=len(pairs)):
        le = {(a, a) for a in worlds} | {pair for pair, on in zip(pairs, bits) if on}
        if any((b, a) in le for a, b in le if a != b):
            continue
        if any((a, c) not in le for a, b in le for b2, c in le if b == b2):
            continue
        yield frozenset(le)


def _backward_confluent(n, le, succ):
    return all(any((w, u) in le and succ[u] == v for u in range(n))
               for w in range(n) for v in range(n) if (succ[w], v) in le)


def _relabelled(le, succ, val, perm):
    moved = [0] * len(succ)
    for a, b in enumerate(succ):
        moved[perm[a]] = perm[b]
    return (tuple(sorted((perm[a], perm[b]) for a, b in le)), tuple(moved),
            tuple(tuple(sorted(perm[w] for w in up)) for up in val))


def _brute_force_count(max_worlds, atoms, frame_class):
    """Label every (order, successor, valuation) triple and keep one per permutation orbit."""
    classes = set()
    for n in range(1, max_worlds + 1):
        worlds = range(n)
        perms = list(itertools.permutations(worlds))
        for le in _partial_orders(n):
            ups = [frozenset(s) for k in range(n + 1) for s in itertools.combinations(worlds, k)
                   if all(b in s for a, b in le if a in s)]
            for succ in itertools.product(worlds, repeat=n):
                if any((succ[a], succ[b]) not in le for a, b in le):
                    continue
                if frame_class is FrameClass.PERSISTENT and not _backward_confluent(n, le, succ):
                    continue
                for val in itertools.product(ups, repeat=len(atoms)):
                    if frame_class is FrameClass.HERE_AND_THERE:
                        names = [f"w{i}" for i in worlds]
                        m = build_model(names, [(names[a], names[b]) for a, b in le if a != b],
                                        {names[i]: names[succ[i]] for i in worlds},
                                        {atom: [names[i] for i in up] for atom, up in zip(atoms, val)})
                        if not in_class(m, FrameClass.HERE_AND_THERE):
                            continue
                    classes.add((n, min(_relabelled(le, succ, val, p) for p in perms)))
    return len(classes)


@pytest.mark.parametrize("atoms,frame_class", [
    ((), FrameClass.EXPANDING),
    (("p",), FrameClass.EXPANDING),
    ((), FrameClass.PERSISTENT),
    (("p",), FrameClass.PERSISTENT),
    (("p",), FrameClass.HERE_AND_THERE),
])
def test_enumeration_matches_brute_force_isomorphism_count(atoms, frame_class):
    bounds = SearchBounds(max_worlds=3, atoms=atoms, frame_class=frame_class)
    assert len(list(enumerate_models(bounds))) == _brute_force_count(3, atoms, frame_class)


@pytest.mark.parametrize("frame_class", list(FrameClass))
def test_enumerated_models_are_valid_and_in_class(frame_class):
    bounds = SearchBounds(max_worlds=4 if frame_class is FrameClass.HERE_AND_THERE else 3,
                          atoms=("p",), frame_class=frame_class)
    models = list(enumerate_models(bounds))
    assert models
    for m in models:
        validate_model(m)
        assert in_class(m, frame_class)


def test_enumeration_is_smallest_first():
    sizes = [m.size for m in enumerate_models(SearchBounds(max_worlds=3, atoms=("p",)))]
    assert sizes == sorted(sizes)


def test_batches_cover_the_stream():
    bounds = SearchBounds(max_worlds=2, batch_size=3)
    stream = enumerate_models(bounds)
    batches = list(stream.batches(3))
    assert [len(b) for b in batches] == [3, 3, 1]


def test_countermodel_to_excluded_middle():
    """The first countermodel is the two-world chain with p only on top."""
    f = parse_formula("p | ~p")
    result = find_countermodel(f, SearchBounds(max_worlds=3))
    assert result.found
    model, world = result.witness
    assert model.size == 2
    assert not satisfies(model, world, f)
    # the emitted text reproduces the witness
    assert not satisfies(parse_model(serialize_model(model)), world, f)


def test_valid_formula_exhausts():
    result = find_countermodel(parse_formula("p -> p"), SearchBounds(max_worlds=2, atoms=("p",)))
    assert result.verdict is SearchVerdict.EXHAUSTED
    assert result.witness is None
    assert result.visited == len(list(enumerate_models(SearchBounds(max_worlds=2, atoms=("p",)))))


def test_limit_stops_the_search():
    result = find_countermodel(parse_formula("p -> p"),
                               SearchBounds(max_worlds=3, atoms=("p",), limit=5, batch_size=2))
    assert result.verdict is SearchVerdict.LIMIT_REACHED
    assert result.visited == 5


def test_fisher_servi_depends_on_persistence():
    f = parse_formula("(X p -> X q) -> X(p -> q)")
    assert find_countermodel(f, SearchBounds(max_worlds=3)).found
    persistent = find_countermodel(f, SearchBounds(max_worlds=3, frame_class=FrameClass.PERSISTENT))
    assert persistent.verdict is SearchVerdict.EXHAUSTED


def test_weak_connectedness_countermodel_is_here_and_there():
    f = parse_formula("G(G p -> q) | G(G q -> p)")
    result = find_countermodel(f, SearchBounds(max_worlds=4, frame_class=FrameClass.HERE_AND_THERE))
    assert result.found
    model, world = result.witness
    assert classify(model) is FrameClass.HERE_AND_THERE
    assert not satisfies(model, world, f)


def test_diamond_from_box_equivalence():
    """Equivalent to F p on here-and-there models, not on expanding ones."""
    f, g = parse_formula("F p"), diamond_from_box("p")
    ht = check_equivalence(f, g, SearchBounds(max_worlds=4, frame_class=FrameClass.HERE_AND_THERE))
    assert ht.verdict is SearchVerdict.EXHAUSTED
    expanding = check_equivalence(f, g, SearchBounds(max_worlds=3))
    assert expanding.found
    model, world = expanding.witness
    assert satisfies(model, world, f) != satisfies(model, world, g)


def test_scan_validity_answers_each_formula():
    formulas = [parse_formula("X(p -> q) -> X p -> X q"), parse_formula("p | ~p")]
    valid, invalid = scan_validity(formulas, SearchBounds(max_worlds=2))
    assert valid.verdict is SearchVerdict.EXHAUSTED
    assert invalid.found


def test_seeded_search_is_reproducible():
    f = parse_formula("G(G p -> q) | G(G q -> p)")
    bounds = SearchBounds(max_worlds=4, seed=11)
    first, second = find_countermodel(f, bounds), find_countermodel(f, bounds)
    assert first.visited == second.visited
    assert first.witness[0] == second.witness[0]


def test_result_to_dict():
    result = find_countermodel(parse_formula("p | ~p"), SearchBounds(max_worlds=2))
    data = result.to_dict()
    assert data["verdict"] == "found"
    assert data["witness"]["model"].startswith("worlds:")


@pytest.mark.parametrize("kwargs", [
    {"max_worlds": 0},
    {"max_worlds": 2, "limit": 0},
    {"max_worlds": 2, "batch_size": 0},
    {"max_worlds": 2, "atoms": ("p", "p")},
    {"max_worlds": 2, "atoms": ("true",)},
    {"max_worlds": 2, "atoms": ("P",)},
])
def test_bounds_validation(kwargs):
    with pytest.raises(SearchBoundsError):
        SearchBounds(**kwargs)


def test_bounds_accept_class_names():
    assert SearchBounds(max_worlds=2, frame_class="ht").frame_class is FrameClass.HERE_AND_THERE
    with pytest.raises(ValueError):
        SearchBounds(max_worlds=2, frame_class="linear")


@pytest.mark.parametrize("frame_class", list(FrameClass))
def test_random_models_belong_to_their_class(frame_class):
    rng = random.Random(3)
    for _ in range(50):
        m = random_model(rng, 5, ("p", "q"), frame_class)
        assert 1 <= m.size <= 5
        assert in_class(m, frame_class)


def test_next_commutes_with_eventually_and_henceforth():
    bounds = SearchBounds(max_worlds=3, atoms=("p", "q"), frame_class=FrameClass.PERSISTENT)
    assert confirm_next_commutations(bounds) == {"F", "G"}
