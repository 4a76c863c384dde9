"""
Tests for dynamic posets: construction, validation, frame classes and the
model file format.
"""

import numpy as np
import pytest

from itlbench.errors import (
    AntisymmetryError,
    ConfluenceError,
    ModelError,
    ModelFormatError,
    MonotonicityError,
    UnknownWorldError,
)
from itlbench.model import (
    FrameClass,
    build_model,
    classify,
    hasse_pairs,
    in_class,
    is_backward_confluent,
    is_here_and_there,
    parse_model,
    relabel,
    serialize_model,
)


def chain3():
    return build_model(["a", "b", "c"], [("a", "b"), ("b", "c")],
                       {"a": "a", "b": "b", "c": "c"}, {"p": ["c"]})


def test_build_model_closes_the_order():
    m = chain3()
    assert m.leq("a", "c")
    assert m.leq("b", "b")
    assert not m.leq("c", "a")
    assert m.successor("a") == "a"
    assert hasse_pairs(m) == [("a", "b"), ("b", "c")]


def test_model_is_read_only():
    m = chain3()
    with pytest.raises(ValueError):
        m.order[0, 2] = False
    with pytest.raises(ValueError):
        m.truth_vector("p")[0] = True


def test_absent_atom_is_false_everywhere():
    m = chain3()
    assert not m.truth_vector("q").any()
    assert m.valuation_sets() == {"p": frozenset({"c"})}


def test_unknown_world_is_reported():
    with pytest.raises(UnknownWorldError) as info:
        build_model(["a"], [("a", "z")], {"a": "a"})
    assert info.value.world == "z"
    with pytest.raises(UnknownWorldError):
        chain3().index("nowhere")


def test_missing_successor():
    with pytest.raises(ModelError):
        build_model(["a", "b"], [], {"a": "a"})


def test_duplicate_world():
    with pytest.raises(ModelError):
        build_model(["a", "a"], [], {"a": "a"})


@pytest.mark.parametrize("name", ["a;b", "a b", "a->b", "a<=b", "x#1", "p@q", "w:1", ""])
def test_world_names_must_be_file_tokens(name):
    """Names the model file format cannot read back are refused up front."""
    with pytest.raises(ModelError):
        build_model([name, "c"], [], {name: "c", "c": "c"})


def test_accepted_world_names_round_trip():
    m = build_model(["a.1", "b'", "0_2"], [("a.1", "b'")], {"a.1": "b'", "b'": "b'", "0_2": "a.1"},
                    {"p": ["b'"]})
    assert parse_model(serialize_model(m)) == m


def test_relabel_checks_world_names():
    with pytest.raises(ModelError):
        relabel(chain3(), ["a", "b;c", "d"])
    assert relabel(chain3(), ["x0", "x_1", "2"]).worlds == ("x0", "x_1", "2")


def test_antisymmetry_is_enforced():
    with pytest.raises(AntisymmetryError):
        build_model(["a", "b"], [("a", "b"), ("b", "a")], {"a": "a", "b": "b"})


def test_forward_confluence_is_enforced():
    """a <= b but S(a) = b is not below S(b) = a."""
    with pytest.raises(ConfluenceError) as info:
        build_model(["a", "b"], [("a", "b")], {"a": "b", "b": "a"})
    assert info.value.pair == ("a", "b")
    assert info.value.images == ("b", "a")


def test_valuation_must_be_monotone():
    with pytest.raises(MonotonicityError) as info:
        build_model(["a", "b"], [("a", "b")], {"a": "a", "b": "b"}, {"p": ["a"]})
    assert info.value.atom == "p"
    assert info.value.pair == ("a", "b")


def test_frame_classes(fisher_servi):
    """The Fisher Servi model is expanding but not persistent."""
    assert classify(fisher_servi) is FrameClass.EXPANDING
    verdict = is_backward_confluent(fisher_servi)
    assert not verdict
    assert verdict.witness == ("w", "u")


def test_single_loop_is_persistent():
    m = build_model(["w"], [], {"w": "w"})
    assert classify(m) is FrameClass.PERSISTENT
    assert in_class(m, FrameClass.EXPANDING)
    assert not in_class(m, FrameClass.HERE_AND_THERE)


def test_here_and_there_decomposition():
    from itlbench.countermodels import weak_connectedness_model

    m = weak_connectedness_model()
    verdict = is_here_and_there(m)
    assert verdict
    assert verdict.detail.chains == (("w", "t"), ("v", "u"))
    assert verdict.detail.f == (1, 1)
    assert classify(m) is FrameClass.HERE_AND_THERE
    assert in_class(m, FrameClass.PERSISTENT)


def test_here_and_there_rejects_long_chains():
    verdict = is_here_and_there(chain3())
    assert not verdict
    assert verdict.witness == ("a",)


def test_serialize_and_parse(fisher_servi):
    text = serialize_model(fisher_servi)
    assert text.splitlines()[0] == "worlds: w v u"
    assert "order: v <= u" in text
    assert "val: p @ u" in text
    assert parse_model(text) == fisher_servi


def test_parse_model_accepts_chains_and_comments():
    text = """
    # a three element chain
    worlds: a b c
    order: a <= b <= c
    succ: a -> a ; b -> b ; c -> c
    val: p @ c
    """
    assert parse_model(text) == chain3()


@pytest.mark.parametrize("text,line", [
    ("order: a <= b\nworlds: a b\n", 1),
    ("worlds: a\nsucc: a -> a\ncolour: red\n", 3),
    ("worlds: a b\nsucc: a -> b ; a -> a\n", 2),
    ("worlds: a\nsucc: a -> z\n", 2),
    ("worlds: a\nsucc: a -> a\nval: p @ a\nval: p @ a\n", 4),
    ("# header\nworlds: a b<=c\n", 2),
])
def test_parse_model_errors_name_the_line(text, line):
    with pytest.raises(ModelFormatError) as info:
        parse_model(text)
    assert info.value.line == line


def test_parse_model_validates():
    with pytest.raises(ConfluenceError):
        parse_model("worlds: a b\norder: a <= b\nsucc: a -> b ; b -> a\n")


def test_relabel_keeps_structure():
    m = relabel(chain3(), ["x", "y", "z"])
    assert m.leq("x", "z")
    assert m.valuation_sets() == {"p": frozenset({"z"})}
    assert np.array_equal(m.order, chain3().order)
    with pytest.raises(ModelError):
        relabel(m, ["x", "x", "y"])
