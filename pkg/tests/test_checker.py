"""
Tests for the model checker: orbits, satisfaction, batch tables and the
unrolling oracle.
"""

import numpy as np
import pytest

from itlbench.checker import (
    Evaluator,
    Orbit,
    Tables,
    check_monotone_extension,
    extension,
    extension_equal,
    global_satisfies,
    naive_satisfies,
    orbit,
    satisfies,
    valid_in_model,
)
from itlbench.countermodels import expanding_family_E, ht_family_H, weak_connectedness_model
from itlbench.formula import enumerate_formulas, parse_formula
from itlbench.model import build_model


def line_model():
    """a -> b -> c -> c, discrete order; p at a and b, q at c."""
    return build_model(["a", "b", "c"], [], {"a": "b", "b": "c", "c": "c"},
                       {"p": ["a", "b"], "q": ["c"]})


def test_orbit_of_expanding_model(e1):
    """Row 1 runs to the end and falls into the row-0 cycle."""
    o = orbit(e1, "0_1")
    assert o.prefix == ("0_1", "1_1", "2_1")
    assert o.cycle == ("0_0", "1_0", "2_0")
    assert o.horizon == 6
    assert o.at(7) == "1_0"
    assert orbit(e1, "0_0") == Orbit((), ("0_0", "1_0", "2_0"))


def test_orbit_in_second_expanding_model():
    o = orbit(expanding_family_E(2), "0_1")
    assert o.prefix == ("0_1", "1_1", "2_1", "3_1")
    assert o.cycle == ("0_0", "1_0", "2_0", "3_0")
    assert o.horizon == 8


def test_henceforth_on_here_and_there_family():
    """Row 1 keeps p forever, every row-0 orbit reaches 3_0."""
    assert extension(ht_family_H(2), parse_formula("G p")) == {"0_1", "1_1", "2_1", "3_1"}


def test_orbit_rejects_negative_positions(e1):
    with pytest.raises(ValueError):
        orbit(e1, "0_0").at(-1)


@pytest.mark.parametrize("world,text,expected", [
    ("a", "p U q", True),
    ("a", "p U (q & p)", False),
    ("a", "F q", True),
    ("a", "G p", False),
    ("c", "G q", True),
    ("a", "X X q", True),
    ("a", "q R (p | q)", True),
    ("a", "q R p", False),
    ("c", "false R q", True),
    ("b", "~q", True),
])
def test_temporal_semantics(world, text, expected):
    assert satisfies(line_model(), world, parse_formula(text)) is expected


def test_implication_quantifies_over_the_future_order(fisher_servi):
    """(X p -> X q) -> X(p -> q) fails at w: S(w) = v sees u where p holds."""
    assert not satisfies(fisher_servi, "w", parse_formula("(X p -> X q) -> X(p -> q)"))
    assert not satisfies(fisher_servi, "w", parse_formula("(F p -> G q) -> G(p -> q)"))
    assert not satisfies(fisher_servi, "v", parse_formula("p | ~p"))


def test_weak_connectedness_fails():
    m = weak_connectedness_model()
    assert not satisfies(m, "w", parse_formula("G(G p -> q) | G(G q -> p)"))


def test_families_separate_first_column(h1, e1):
    """G p splits (0,0) from (0,1) in H_n; F p does so in E_n."""
    g = parse_formula("G p")
    f = parse_formula("F p")
    assert not satisfies(h1, "0_0", g) and satisfies(h1, "0_1", g)
    assert not satisfies(e1, "0_0", f) and satisfies(e1, "0_1", f)


def test_extension_and_validity(h1):
    p = parse_formula("p")
    assert extension(h1, p) == frozenset(h1.worlds) - {"2_0"}
    verdict = valid_in_model(h1, p)
    assert not verdict
    assert verdict.witness == ("2_0",)
    assert global_satisfies(h1, parse_formula("p -> p"))


def test_extension_equal(h1):
    assert extension_equal(h1, parse_formula("G p"), parse_formula("p & X G p"))
    assert not extension_equal(h1, parse_formula("G p"), parse_formula("p"))


def test_unknown_atom_is_false(h1):
    assert extension(h1, parse_formula("r")) == frozenset()


def test_extensions_are_upward_closed(h1, e1, fisher_servi):
    for m in (h1, e1, fisher_servi):
        for f in enumerate_formulas(("p",), 2):
            assert check_monotone_extension(m, f)


def test_check_monotone_extension_reports_pair():
    """A raw (unvalidated) non-monotone valuation is caught with its pair."""
    from itlbench.model import Model

    m = Model(["a", "b"], np.array([[True, True], [False, True]]), np.array([0, 1]),
              {"p": np.array([True, False])})
    verdict = check_monotone_extension(m, parse_formula("p"))
    assert not verdict
    assert verdict.witness == ("a", "b")


def test_orbit_bound_agrees_with_unrolling(h1, e1, fisher_servi):
    for m in (h1, e1, fisher_servi, line_model()):
        ev = Evaluator.for_model(m)
        for f in enumerate_formulas(("p",), 2):
            fast = ev.extension(f)
            slow = [naive_satisfies(m, w, f) for w in m.worlds]
            assert fast.tolist() == slow, str(f)


def test_concatenated_tables_locate_first_failures(h1, e1):
    tables = Tables.concat([Tables.from_model(h1), Tables.from_model(e1)])
    assert tables.offsets == (0, 6, 12)
    ev = Evaluator(tables)
    assert tables.first_failures(ev.extension(parse_formula("p"))).tolist() == [2, 0]
    assert tables.first_failures(ev.extension(parse_formula("true"))).tolist() == [-1, -1]
    # batch evaluation matches per-model evaluation
    f = parse_formula("(p U X p) -> G F p")
    joined = ev.extension(f)
    assert joined[:6].tolist() == Evaluator.for_model(h1).extension(f).tolist()
    assert joined[6:].tolist() == Evaluator.for_model(e1).extension(f).tolist()


def test_memo_limit_keeps_results_correct(h1):
    small = Evaluator(Tables.from_model(h1), memo_limit=2)
    full = Evaluator.for_model(h1)
    for f in enumerate_formulas(("p",), 2):
        assert np.array_equal(small.extension(f), full.extension(f))
