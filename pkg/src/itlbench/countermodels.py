"""
Named constructions: fixed countermodels, the parametric families H_n and
E_n, and the formulas defining F through G and U through R.
"""

import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Union

from .errors import ArtifactNotFoundError
from .formula import And, Atom, Eventually, Formula, Or, Release, instantiate, parse_formula
from .model import Model, build_model

# F p over here-and-there models, using only G and X.
DIAMOND_FROM_BOX = parse_formula(
    "(G(p -> G(p | ~p)) & G(X G(p | ~p) -> p | ~p | X G ~p)) -> G(p | ~p) & ~G ~p"
)


@dataclass(frozen=True)
class NamedArtifact:
    name: str
    kind: str
    payload: Union[Model, Formula]
    provenance: str


def world(i: int, j: int) -> str:
    return f"{i}_{j}"


def fisher_servi_model() -> Model:
    """X p -> X q does not give X(p -> q) here; S(w) = v sits below u only on one side."""
    return build_model(
        ["w", "v", "u"],
        [("v", "u")],
        {"w": "v", "v": "v", "u": "u"},
        {"p": ["u"]},
    )


def weak_connectedness_model() -> Model:
    return build_model(
        ["w", "t", "u", "v"],
        [("v", "u"), ("w", "t")],
        {"w": "v", "v": "v", "t": "u", "u": "u"},
        {"p": ["v", "u"], "q": ["t", "u"]},
    )


def _two_rows(n: int, successor: Callable[[int, int], str], valuation: Dict[str, List[str]]) -> Model:
    if n < 1:
        raise ValueError("n must be at least 1")
    columns = range(n + 2)
    worlds = [world(i, j) for j in (0, 1) for i in columns]
    order = [(world(i, 0), world(i, 1)) for i in columns]
    succ = {world(i, j): successor(i, j) for i in columns for j in (0, 1)}
    return build_model(worlds, order, succ, valuation)


def ht_family_H(n: int) -> Model:
    """Here-and-there model; p fails only at (n+1, 0), both rows rotate."""
    everywhere = [world(i, j) for j in (0, 1) for i in range(n + 2)]
    return _two_rows(
        n,
        lambda i, j: world((i + 1) % (n + 2), j),
        {"p": [w for w in everywhere if w != world(n + 1, 0)]},
    )


def expanding_family_E(n: int) -> Model:
    """Expanding model; both rows run to column n+1 and then wrap into (0, 0)."""
    return _two_rows(
        n,
        lambda i, j: world(i + 1, j) if i <= n else world(0, 0),
        {"p": [world(n + 1, 1)]},
    )


def diamond_from_box(p: str) -> Formula:
    return instantiate(DIAMOND_FROM_BOX, {"p": Atom(p)})


def until_from_release(p: str, q: str, diamond_atom: Optional[str] = None,
                       expand: bool = True) -> Formula:
    """
    (q R (p | q)) & D, where D is F over `diamond_atom` (default p, as the
    identity is usually printed). With expand, D is rewritten through
    diamond_from_box so the result uses only R, G and X.
    """
    target = diamond_atom or p
    eventually = diamond_from_box(target) if expand else Eventually(Atom(target))
    return And(Release(Atom(q), Or(Atom(p), Atom(q))), eventually)


# ---------------------------------------------------------------------------
# Registry

_FIXED = {
    "fisher-servi": lambda: NamedArtifact(
        "fisher-servi", "model", fisher_servi_model(),
        "3-world expanding model refuting (X p -> X q) -> X(p -> q) and "
        "(F p -> G q) -> G(p -> q)",
    ),
    "weak-connected": lambda: NamedArtifact(
        "weak-connected", "model", weak_connectedness_model(),
        "4-world here-and-there model refuting G(G p -> q) | G(G q -> p)",
    ),
    "diamond-from-box": lambda: NamedArtifact(
        "diamond-from-box", "formula", diamond_from_box("p"),
        "G/X formula equivalent to F p over here-and-there models",
    ),
    "until-from-release": lambda: NamedArtifact(
        "until-from-release", "formula", until_from_release("p", "q"),
        "(q R (p | q)) & F p with F expanded through G; the F-conjunct over p",
    ),
    "until-from-release-q": lambda: NamedArtifact(
        "until-from-release-q", "formula", until_from_release("p", "q", diamond_atom="q"),
        "(q R (p | q)) & F q with F expanded through G; the F-conjunct over q",
    ),
}

_FAMILIES = {
    "H": (ht_family_H, "here-and-there model H_{n}: G p separates (0,0) from (0,1)"),
    "E": (expanding_family_E, "expanding model E_{n}: F p separates (0,0) from (0,1)"),
}

_FAMILY_NAME = re.compile(r"([HE])(\d+)\Z")


def get_artifact(name: str) -> NamedArtifact:
    if name in _FIXED:
        return _FIXED[name]()
    match = _FAMILY_NAME.match(name)
    if match and int(match.group(2)) >= 1:
        build, provenance = _FAMILIES[match.group(1)]
        n = int(match.group(2))
        return NamedArtifact(name, "model", build(n), provenance.format(n=n))
    raise ArtifactNotFoundError(name)


def list_artifacts() -> List[str]:
    return sorted(_FIXED) + ["E<n>", "H<n>"]
