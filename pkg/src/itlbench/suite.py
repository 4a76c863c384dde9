"""
Reproduction suite.

Each item re-derives one validity, countermodel, bisimulation or
definability result with the checker, the searcher and the bisimulation
engine, and reports pass/fail with the numbers behind it.
"""

import logging
import random
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .bisim import BisimKind, max_family, preservation_check, verify_family
from .checker import Evaluator, check_monotone_extension, naive_satisfies, satisfies
from .config_manager import SuiteSettings
from .countermodels import (
    diamond_from_box,
    expanding_family_E,
    fisher_servi_model,
    ht_family_H,
    until_from_release,
    weak_connectedness_model,
)
from .errors import UnknownSuiteItemError
from .formula import (
    Formula,
    biconditional,
    enumerate_formulas,
    is_next_normal,
    next_normal_form,
    parse_formula,
    random_formula,
)
from .model import FrameClass, classify
from .search import (
    DEFAULT_BATCH_SIZE,
    SearchBounds,
    SearchResult,
    SearchVerdict,
    check_equivalence,
    confirm_next_commutations,
    find_countermodel,
    random_model,
    scan_equivalences,
    scan_validity,
)

logger = logging.getLogger(__name__)

SCHEMA = "itlbench.paper/1"
ATOMS = ("p", "q")


def _f(text: str) -> Formula:
    return parse_formula(text)


def _iff(left: str, right: str) -> Formula:
    return biconditional(_f(left), _f(right))


VALID_BASICS = [
    _iff("X false", "false"),
    _iff("X(p & q)", "X p & X q"),
    _iff("X(p | q)", "X p | X q"),
    _f("X(p -> q) -> (X p -> X q)"),
    _f("G(p -> q) -> (G p -> G q)"),
    _f("G(p -> q) -> (F p -> F q)"),
    _f("F(p | q) -> F p | F q"),
    _iff("G p", "p & X G p"),
    _iff("p | X F p", "F p"),
    _f("G(p -> X p) -> (p -> G p)"),
    _f("(F p -> p) -> (X p -> p)"),
]

FISHER_SERVI = [
    _f("(X p -> X q) -> X(p -> q)"),
    _f("(F p -> G q) -> G(p -> q)"),
]

WEAK_CONNECTEDNESS = _f("G(G p -> q) | G(G q -> p)")

VALID_UNTIL_RELEASE = [
    _iff("p U q", "q | (p & X(p U q))"),
    _iff("p R q", "q & (p | X(p R q))"),
    _f("p U q -> F q"),
    _f("G q -> p R q"),
    _iff("F p", "true U p"),
    _iff("G p", "false R p"),
    _iff("X(p U q)", "X p U X q"),
    _iff("X(p R q)", "X p R X q"),
]

FIXPOINTS = [
    (_f("p U q"), _f("q | (p & X(p U q))")),
    (_f("p R q"), _f("q & (p | X(p R q))")),
]

HT_AXIOM = _f("p | (p -> q) | ~q")


@dataclass
class SuiteContext:
    settings: SuiteSettings
    batch_size: int = DEFAULT_BATCH_SIZE

    def bounds(self, max_worlds: int, frame_class: FrameClass, atoms: Sequence[str] = ATOMS) -> SearchBounds:
        return SearchBounds(max_worlds=max_worlds, atoms=tuple(atoms), frame_class=frame_class,
                            batch_size=self.batch_size)


@dataclass(frozen=True)
class SuiteItem:
    key: str
    group: str
    title: str
    run: Callable[[SuiteContext], Tuple[bool, Dict[str, Any]]]


@dataclass
class ItemResult:
    key: str
    group: str
    title: str
    passed: bool
    details: Dict[str, Any] = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _failures(formulas: Sequence[Formula], results: Sequence[SearchResult],
              expected: SearchVerdict) -> List[str]:
    return [str(f) for f, r in zip(formulas, results) if r.verdict is not expected]


# ---------------------------------------------------------------------------
# Items

def _valid_basics(ctx: SuiteContext):
    bounds = ctx.bounds(ctx.settings.valid_max_worlds, FrameClass.EXPANDING)
    results = scan_validity(VALID_BASICS, bounds)
    failing = _failures(VALID_BASICS, results, SearchVerdict.EXHAUSTED)
    return not failing, {"formulas": len(VALID_BASICS), "not_exhausted": failing,
                         "visited": max(r.visited for r in results)}


def _fisher_servi(ctx: SuiteContext):
    m = fisher_servi_model()
    refuted = [not satisfies(m, "w", f) for f in FISHER_SERVI]
    bounds = ctx.bounds(ctx.settings.valid_max_worlds, FrameClass.PERSISTENT)
    results = scan_validity(FISHER_SERVI, bounds)
    failing = _failures(FISHER_SERVI, results, SearchVerdict.EXHAUSTED)
    return all(refuted) and not failing, {
        "refuted_at_w": refuted,
        "persistent_not_exhausted": failing,
    }


def _weak_connectedness(ctx: SuiteContext):
    m = weak_connectedness_model()
    frame_class = classify(m)
    refuted = not satisfies(m, "w", WEAK_CONNECTEDNESS)
    search = find_countermodel(WEAK_CONNECTEDNESS, ctx.bounds(4, FrameClass.HERE_AND_THERE))
    passed = frame_class is FrameClass.HERE_AND_THERE and refuted and search.found
    return passed, {"class": frame_class.value, "refuted_at_w": refuted,
                    "search": search.verdict.value}


def _until_release_validities(ctx: SuiteContext):
    bounds = ctx.bounds(ctx.settings.valid_max_worlds, FrameClass.EXPANDING)
    results = scan_validity(VALID_UNTIL_RELEASE, bounds)
    failing = _failures(VALID_UNTIL_RELEASE, results, SearchVerdict.EXHAUSTED)
    fixpoints = scan_equivalences(FIXPOINTS, bounds)
    broken = [f"{f} / {g}" for (f, g), r in zip(FIXPOINTS, fixpoints) if r.found]
    return not failing and not broken, {"formulas": len(VALID_UNTIL_RELEASE),
                                        "not_exhausted": failing,
                                        "fixpoint_disagreements": broken}


def _random_pairs(ctx: SuiteContext, salt: int):
    s = ctx.settings
    rng = random.Random(s.seed + salt)
    for _ in range(s.random_pairs):
        m = random_model(rng, s.random_max_worlds, ATOMS)
        yield m, random_formula(rng, ATOMS, s.random_max_length)


def _monotone_extensions(ctx: SuiteContext):
    first = None
    failures = 0
    for m, f in _random_pairs(ctx, 0):
        verdict = check_monotone_extension(m, f)
        if not verdict:
            failures += 1
            first = first or {"formula": str(f), "pair": list(verdict.witness)}
    return failures == 0, {"pairs": ctx.settings.random_pairs, "failures": failures, "first": first}


def _orbit_oracle(ctx: SuiteContext):
    first = None
    failures = 0
    for m, f in _random_pairs(ctx, 1):
        fast = Evaluator.for_model(m).extension(f)
        slow = np.array([naive_satisfies(m, w, f) for w in m.worlds])
        if not np.array_equal(fast, slow):
            failures += 1
            first = first or {"formula": str(f), "worlds": list(m.worlds)}
    return failures == 0, {"pairs": ctx.settings.random_pairs, "failures": failures, "first": first}


def _preservation(ctx: SuiteContext):
    s = ctx.settings
    rng = random.Random(s.seed + 2)
    rows = []
    for kind in BisimKind:
        base = list(enumerate_formulas(("p",), 2, kind.fragment))
        for n in range(1, s.preservation_max_depth + 1):
            extra = [random_formula(rng, ("p",), n, kind.fragment) for _ in range(s.preservation_random)]
            for name, build in (("H", ht_family_H), ("E", expanding_family_E)):
                m = build(n)
                fam = max_family(kind, m, m, n)
                violations = verify_family(kind, fam)
                disagreements = preservation_check(kind, fam, base + extra)
                rows.append({"kind": kind.value, "model": f"{name}{n}",
                             "violations": len(violations), "disagreements": len(disagreements)})
    passed = all(r["violations"] == 0 and r["disagreements"] == 0 for r in rows)
    return passed, {"runs": len(rows), "bad": [r for r in rows if r["violations"] or r["disagreements"]]}


def _undefinability(kind: BisimKind, build, separator: str):
    def run(ctx: SuiteContext):
        f = _f(separator)
        rows = []
        for n in ctx.settings.undefinability_depths:
            m = build(n)
            fam = max_family(kind, m, m, n)
            rows.append({
                "n": n,
                "related": fam.contains(n, "0_0", "0_1"),
                "separated": satisfies(m, "0_0", f) != satisfies(m, "0_1", f),
                "violations": len(verify_family(kind, fam)),
            })
        passed = all(r["related"] and r["separated"] and not r["violations"] for r in rows)
        return passed, {"separator": separator, "depths": rows}
    return run


def _diamond_definable(ctx: SuiteContext):
    s = ctx.settings
    f, g = _f("F p"), diamond_from_box("p")
    over_ht = check_equivalence(f, g, ctx.bounds(s.ht_max_worlds, FrameClass.HERE_AND_THERE, ("p",)))
    over_expanding = check_equivalence(f, g, ctx.bounds(s.expanding_max_worlds, FrameClass.EXPANDING, ("p",)))
    details = {"ht": over_ht.verdict.value, "expanding": over_expanding.verdict.value}
    confirmed = False
    if over_expanding.found:
        m, w = over_expanding.witness
        confirmed = satisfies(m, w, f) != satisfies(m, w, g)
        details["expanding_witness_worlds"] = m.size
    passed = over_ht.verdict is SearchVerdict.EXHAUSTED and confirmed
    return passed, details


def _until_from_release(ctx: SuiteContext):
    bounds = ctx.bounds(ctx.settings.ht_max_worlds, FrameClass.HERE_AND_THERE)
    target = _f("p U q")
    readings = {}
    for atom in ATOMS:
        result = check_equivalence(target, until_from_release("p", "q", diamond_atom=atom), bounds)
        readings[f"F {atom}"] = result.verdict.value
    passed = any(v == SearchVerdict.EXHAUSTED.value for v in readings.values())
    return passed, {"readings": readings}


def _normal_form(ctx: SuiteContext):
    s = ctx.settings
    bounds = ctx.bounds(s.normal_form_max_worlds, FrameClass.PERSISTENT)
    confirmed = confirm_next_commutations(bounds)
    pairs = []
    not_normal = 0
    total = 0
    for f in enumerate_formulas(ATOMS, s.normal_form_max_length):
        total += 1
        g = next_normal_form(f, confirmed)
        if not is_next_normal(g):
            not_normal += 1
        if g != f:
            pairs.append((f, g))
    results = scan_equivalences(pairs, bounds)
    broken = [str(f) for (f, _), r in zip(pairs, results) if r.found]
    passed = not broken and not not_normal
    return passed, {"formulas": total, "rewritten": len(pairs), "commutations": sorted(confirmed),
                    "not_normal": not_normal, "disagreements": broken[:10]}


def _ht_axiom(ctx: SuiteContext):
    n = ctx.settings.valid_max_worlds
    over_ht = find_countermodel(HT_AXIOM, ctx.bounds(n, FrameClass.HERE_AND_THERE))
    over_expanding = find_countermodel(HT_AXIOM, ctx.bounds(n, FrameClass.EXPANDING))
    passed = over_ht.verdict is SearchVerdict.EXHAUSTED and over_expanding.found
    return passed, {"ht": over_ht.verdict.value, "expanding": over_expanding.verdict.value}


ITEMS = [
    SuiteItem("prop1", "validities", "Next/eventually/henceforth axioms are valid", _valid_basics),
    SuiteItem("prop2", "validities", "Fisher Servi axioms fail on expanding, hold on persistent models",
              _fisher_servi),
    SuiteItem("prop3", "validities", "Weak connectedness fails on here-and-there models",
              _weak_connectedness),
    SuiteItem("prop4", "validities", "Until/release axioms and fixpoints are valid",
              _until_release_validities),
    SuiteItem("lemma1", "properties", "Extensions are upward closed", _monotone_extensions),
    SuiteItem("orbit-oracle", "properties", "Orbit-bounded evaluation agrees with unrolling",
              _orbit_oracle),
    SuiteItem("preservation", "bisimulation", "Bounded bisimulations preserve short formulas",
              _preservation),
    SuiteItem("box-undefinable", "definability", "G is not definable from X and U (H_n)",
              _undefinability(BisimKind.UNTIL, ht_family_H, "G p")),
    SuiteItem("diamond-undefinable", "definability", "F is not definable from X and G (E_n)",
              _undefinability(BisimKind.BOX, expanding_family_E, "F p")),
    SuiteItem("diamond-definable", "definability", "F is G-definable over here-and-there models",
              _diamond_definable),
    SuiteItem("until-from-release", "definability", "U from R over here-and-there models",
              _until_from_release),
    SuiteItem("normal-form", "normal-form", "Next normal form is equivalent on persistent models",
              _normal_form),
    SuiteItem("ht-axiom", "validities", "p | (p -> q) | ~q holds exactly on here-and-there models",
              _ht_axiom),
]


def select_items(only: Optional[Sequence[str]] = None) -> List[SuiteItem]:
    if not only:
        return list(ITEMS)
    keys = {item.key for item in ITEMS} | {item.group for item in ITEMS}
    for name in only:
        if name not in keys:
            raise UnknownSuiteItemError(name)
    return [item for item in ITEMS if item.key in only or item.group in only]


def run_suite(settings: SuiteSettings, only: Optional[Sequence[str]] = None,
              batch_size: int = DEFAULT_BATCH_SIZE) -> List[ItemResult]:
    ctx = SuiteContext(settings, batch_size)
    results = []
    for item in select_items(only):
        started = time.perf_counter()
        passed, details = item.run(ctx)
        elapsed = time.perf_counter() - started
        logger.debug("%s finished in %.2fs (%s)", item.key, elapsed, "pass" if passed else "FAIL")
        results.append(ItemResult(item.key, item.group, item.title, bool(passed), details, round(elapsed, 3)))
    logger.info("%d/%d suite items passed", sum(r.passed for r in results), len(results))
    return results


def suite_report(results: Sequence[ItemResult]) -> Dict[str, Any]:
    return {
        "schema": SCHEMA,
        "passed": all(r.passed for r in results),
        "items": [r.to_dict() for r in results],
    }
