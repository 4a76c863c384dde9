"""
Formulas of intuitionistic temporal logic.
Abstract syntax, the text grammar, printing, length, fragment
classification, uniform substitution and the next normal form used over
persistent models.
"""

import random
import re
from dataclasses import dataclass
from enum import Enum
from typing import Callable, FrozenSet, Iterable, Iterator, List, Mapping, Sequence, Set, Union

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedToken

from .errors import FormulaSyntaxError

ATOM_PATTERN = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")
KEYWORDS = frozenset({"true", "false"})

# Connectives that distinguish the fragments; Booleans and X are everywhere.
MODAL_SYMBOLS = frozenset({"F", "G", "U", "R"})


@dataclass(frozen=True)
class Formula:
    """Base class of the syntax tree. Nodes are immutable and hashable."""

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True)
class Atom(Formula):
    name: str

    def __post_init__(self):
        if not ATOM_PATTERN.match(self.name) or self.name in KEYWORDS:
            raise FormulaSyntaxError(f"invalid atom name '{self.name}'")


@dataclass(frozen=True)
class Bottom(Formula):
    pass


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula
    symbol = "&"


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula
    symbol = "|"


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula
    symbol = "->"


@dataclass(frozen=True)
class Next(Formula):
    sub: Formula
    symbol = "X"


@dataclass(frozen=True)
class Eventually(Formula):
    sub: Formula
    symbol = "F"


@dataclass(frozen=True)
class Henceforth(Formula):
    sub: Formula
    symbol = "G"


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula
    symbol = "U"


@dataclass(frozen=True)
class Release(Formula):
    left: Formula
    right: Formula
    symbol = "R"


UNARY = (Next, Eventually, Henceforth)
BINARY = (And, Or, Implies, Until, Release)

BOTTOM = Bottom()
TOP = Implies(BOTTOM, BOTTOM)


def negation(f: Formula) -> Formula:
    """~f, which is sugar for f -> false."""
    return Implies(f, BOTTOM)


def biconditional(f: Formula, g: Formula) -> Formula:
    """(f -> g) & (g -> f); the grammar has no <->."""
    return And(Implies(f, g), Implies(g, f))


def is_negation(f: Formula) -> bool:
    return isinstance(f, Implies) and isinstance(f.right, Bottom)


class Fragment(Enum):
    NEXT_ONLY = "next"
    DIAM = "diam"
    BOX = "box"
    DIAM_BOX = "diam-box"
    UNTIL = "until"
    RELEASE = "release"
    FULL = "full"

    @property
    def connectives(self) -> FrozenSet[str]:
        return _FRAGMENT_CONNECTIVES[self]

    def contains(self, other: "Fragment") -> bool:
        return other.connectives <= self.connectives


_FRAGMENT_CONNECTIVES = {
    Fragment.NEXT_ONLY: frozenset(),
    Fragment.DIAM: frozenset({"F"}),
    Fragment.BOX: frozenset({"G"}),
    Fragment.DIAM_BOX: frozenset({"F", "G"}),
    Fragment.UNTIL: frozenset({"U"}),
    Fragment.RELEASE: frozenset({"R"}),
    Fragment.FULL: MODAL_SYMBOLS,
}


# ---------------------------------------------------------------------------
# Traversal helpers

def subformulas(f: Formula) -> Iterator[Formula]:
    """Yield every subformula occurrence, children before parents."""
    if isinstance(f, UNARY):
        yield from subformulas(f.sub)
    elif isinstance(f, BINARY):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    yield f


def _rebuild(f: Formula, fn: Callable[[Formula], Formula]) -> Formula:
    if isinstance(f, UNARY):
        return type(f)(fn(f.sub))
    if isinstance(f, BINARY):
        return type(f)(fn(f.left), fn(f.right))
    return f


def atoms(f: Formula) -> FrozenSet[str]:
    return frozenset(g.name for g in subformulas(f) if isinstance(g, Atom))


def connectives(f: Formula) -> FrozenSet[str]:
    return frozenset(g.symbol for g in subformulas(f) if isinstance(g, UNARY + BINARY))


def length(f: Formula) -> int:
    """Number of connectives; ~f counts once because it is f -> false."""
    if isinstance(f, UNARY):
        return 1 + length(f.sub)
    if isinstance(f, BINARY):
        return 1 + length(f.left) + length(f.right)
    return 0


def fragment_of(f: Formula) -> Fragment:
    used = connectives(f) & MODAL_SYMBOLS
    candidates = [frag for frag in Fragment if used <= frag.connectives]
    return min(candidates, key=lambda frag: len(frag.connectives))


# ---------------------------------------------------------------------------
# Parsing

_GRAMMAR = r"""
    ?start: implication

    ?implication: disjunction
        | disjunction _IMPLIES implication   -> implies

    ?disjunction: conjunction
        | disjunction _OR conjunction        -> or_

    ?conjunction: binary
        | conjunction _AND binary            -> and_

    ?binary: unary
        | unary _UNTIL binary                -> until
        | unary _RELEASE binary              -> release

    ?unary: atomic
        | _NEXT unary                        -> next
        | _EVENTUALLY unary                  -> eventually
        | _HENCEFORTH unary                  -> henceforth
        | _NOT unary                         -> negation

    ?atomic: ATOM                            -> atom
        | _FALSE                             -> bottom
        | _TRUE                              -> top
        | _LPAR implication _RPAR

    ATOM: /[a-z][a-zA-Z0-9_]*/
    _IMPLIES: "->"
    _OR: "|"
    _AND: "&"
    _UNTIL: "U"
    _RELEASE: "R"
    _NEXT: "X"
    _EVENTUALLY: "F"
    _HENCEFORTH: "G"
    _NOT: "~"
    _FALSE: "false"
    _TRUE: "true"
    _LPAR: "("
    _RPAR: ")"

    %import common.WS
    %ignore WS
"""

_TOKEN_DISPLAY = {
    "ATOM": "atom",
    "_IMPLIES": "'->'",
    "_OR": "'|'",
    "_AND": "'&'",
    "_UNTIL": "'U'",
    "_RELEASE": "'R'",
    "_NEXT": "'X'",
    "_EVENTUALLY": "'F'",
    "_HENCEFORTH": "'G'",
    "_NOT": "'~'",
    "_FALSE": "'false'",
    "_TRUE": "'true'",
    "_LPAR": "'('",
    "_RPAR": "')'",
    "$END": "end of input",
}


@v_args(inline=True)
class _ToFormula(Transformer):
    def implies(self, left, right):
        return Implies(left, right)

    def or_(self, left, right):
        return Or(left, right)

    def and_(self, left, right):
        return And(left, right)

    def until(self, left, right):
        return Until(left, right)

    def release(self, left, right):
        return Release(left, right)

    def next(self, sub):
        return Next(sub)

    def eventually(self, sub):
        return Eventually(sub)

    def henceforth(self, sub):
        return Henceforth(sub)

    def negation(self, sub):
        return Implies(sub, BOTTOM)

    def atom(self, token):
        return Atom(str(token))

    def bottom(self):
        return BOTTOM

    def top(self):
        return TOP


_PARSER = Lark(_GRAMMAR, parser="lalr", transformer=_ToFormula())


def _display(names: Iterable[str]) -> Set[str]:
    return {_TOKEN_DISPLAY.get(name, name) for name in (names or ())}


def parse_formula(text: str) -> Formula:
    """Parse one formula. Raises FormulaSyntaxError with a 0-based position."""
    if text is None or not text.strip():
        raise FormulaSyntaxError("empty input")
    try:
        return _PARSER.parse(text)
    except UnexpectedCharacters as e:
        raise FormulaSyntaxError(
            f"unexpected character {text[e.pos_in_stream]!r}",
            position=e.pos_in_stream,
            expected=_display(e.allowed),
        ) from None
    except UnexpectedToken as e:
        if e.token.type == "$END":
            message, position = "unexpected end of input", len(text)
        else:
            message = f"unexpected token {str(e.token)!r}"
            position = e.token.start_pos if e.token.start_pos is not None else len(text)
        raise FormulaSyntaxError(message, position=position, expected=_display(e.expected)) from None
    except UnexpectedEOF as e:
        raise FormulaSyntaxError(
            "unexpected end of input", position=len(text), expected=_display(e.expected)
        ) from None


def parse_formula_file(text: str) -> List[Formula]:
    """One formula per line; '#' starts a comment. Errors carry line numbers."""
    formulas = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        try:
            formulas.append(parse_formula(line))
        except FormulaSyntaxError as e:
            raise FormulaSyntaxError(e.reason, position=e.position,
                                     expected=e.expected, line=lineno) from None
    return formulas


# ---------------------------------------------------------------------------
# Printing

_UNARY_LEVEL = 5
_ATOMIC_LEVEL = 6
_BINARY_LEVEL = {Implies: 1, Or: 2, And: 3, Until: 4, Release: 4}
_RIGHT_ASSOCIATIVE = (Implies, Until, Release)


def _level(f: Formula) -> int:
    if isinstance(f, (Atom, Bottom)) or f == TOP:
        return _ATOMIC_LEVEL
    if is_negation(f) or isinstance(f, UNARY):
        return _UNARY_LEVEL
    return _BINARY_LEVEL[type(f)]


def _wrap(f: Formula, needs_parens: bool) -> str:
    text = print_formula(f)
    return f"({text})" if needs_parens else text


def print_formula(f: Formula) -> str:
    """Minimal-parenthesis rendering; parse_formula inverts it."""
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Bottom):
        return "false"
    if f == TOP:
        return "true"
    if is_negation(f):
        return "~" + _wrap(f.left, _level(f.left) < _UNARY_LEVEL)
    if isinstance(f, UNARY):
        if _level(f.sub) < _UNARY_LEVEL:
            return f"{f.symbol}({print_formula(f.sub)})"
        return f"{f.symbol} {print_formula(f.sub)}"
    level = _BINARY_LEVEL[type(f)]
    right_assoc = isinstance(f, _RIGHT_ASSOCIATIVE)
    left_level, right_level = _level(f.left), _level(f.right)
    left = _wrap(f.left, left_level < level or (right_assoc and left_level == level))
    right = _wrap(f.right, right_level < level or (not right_assoc and right_level == level))
    return f"{left} {f.symbol} {right}"


# ---------------------------------------------------------------------------
# Substitution and rewriting

def instantiate(schema: Formula, assignment: Mapping[str, Union[Formula, str]]) -> Formula:
    """Uniform substitution of formulas (or formula text) for atoms."""
    resolved = {
        name: parse_formula(value) if isinstance(value, str) else value
        for name, value in assignment.items()
    }

    def substitute(f: Formula) -> Formula:
        if isinstance(f, Atom):
            return resolved.get(f.name, f)
        return _rebuild(f, substitute)

    return substitute(schema)


DEFAULT_COMMUTATIONS = frozenset({"F", "G"})


def next_normal_form(f: Formula, commute: Iterable[str] = DEFAULT_COMMUTATIONS) -> Formula:
    """
    Push every X down to the atoms.

    `commute` names the unary connectives (F, G) that X may be pushed
    through; an X in front of any other F/G is left in place.
    """
    commute = frozenset(commute)

    def normalize(g: Formula) -> Formula:
        if isinstance(g, Next):
            return _push_next(normalize(g.sub), commute)
        return _rebuild(g, normalize)

    return normalize(f)


def _push_next(g: Formula, commute: FrozenSet[str]) -> Formula:
    # g is already normalised
    if isinstance(g, (Atom, Next)):
        return Next(g)
    if isinstance(g, Bottom):
        return g
    if isinstance(g, BINARY):
        return type(g)(_push_next(g.left, commute), _push_next(g.right, commute))
    if isinstance(g, (Eventually, Henceforth)) and g.symbol in commute:
        return type(g)(_push_next(g.sub, commute))
    return Next(g)


def is_next_normal(f: Formula) -> bool:
    return all(
        isinstance(g.sub, (Atom, Next))
        for g in subformulas(f)
        if isinstance(g, Next)
    )


# ---------------------------------------------------------------------------
# Generation

def _constructors(fragment: Fragment):
    allowed = fragment.connectives
    unary = [Next] + [ctor for ctor in (Eventually, Henceforth) if ctor.symbol in allowed]
    binary = [And, Or, Implies] + [ctor for ctor in (Until, Release) if ctor.symbol in allowed]
    return unary, binary


def enumerate_formulas(atom_names: Sequence[str], max_length: int,
                       fragment: Fragment = Fragment.FULL) -> Iterator[Formula]:
    """Every formula of the fragment over the atoms with length <= max_length."""
    unary, binary = _constructors(fragment)
    by_length: List[List[Formula]] = []

    def of_length(n: int) -> Iterator[Formula]:
        if n == 0:
            yield from (Atom(a) for a in atom_names)
            yield BOTTOM
            return
        for ctor in unary:
            for sub in by_length[n - 1]:
                yield ctor(sub)
        for ctor in binary:
            for split in range(n):
                for left in by_length[split]:
                    for right in by_length[n - 1 - split]:
                        yield ctor(left, right)

    for n in range(max_length + 1):
        if n < max_length:
            level = list(of_length(n))
            by_length.append(level)
            yield from level
        else:
            yield from of_length(n)


def random_formula(rng: random.Random, atom_names: Sequence[str], max_length: int,
                   fragment: Fragment = Fragment.FULL) -> Formula:
    unary, binary = _constructors(fragment)
    leaves = [Atom(a) for a in atom_names] + [BOTTOM]

    def build(n: int) -> Formula:
        if n == 0:
            return rng.choice(leaves)
        ctor = rng.choice(unary + binary)
        if ctor in unary:
            return ctor(build(n - 1))
        split = rng.randint(0, n - 1)
        return ctor(build(split), build(n - 1 - split))

    return build(rng.randint(0, max_length))
