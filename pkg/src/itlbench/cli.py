"""
Command-line front end for itlbench.

Exit status: 0 when a verdict was computed (true or false), 1 on bad input,
2 when an internal consistency check fails (a witness that does not
re-verify, a failing reproduction item).
"""

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from . import __version__
from .bisim import BisimKind, max_family, parse_family, serialize_family, verify_family
from .checker import satisfies, valid_in_model
from .config_manager import ConfigManager
from .countermodels import get_artifact, list_artifacts
from .errors import ITLBenchError
from .formula import DEFAULT_COMMUTATIONS, Formula, next_normal_form, parse_formula, parse_formula_file
from .model import FrameClass, Model, parse_model, serialize_model
from .search import SearchBounds, check_equivalence, confirm_next_commutations, find_countermodel
from .suite import run_suite, suite_report

logger = logging.getLogger(__name__)

REPORT_SCHEMA = "itlbench.report/1"


class InvariantFailure(Exception):
    """A computed result failed its own re-check."""


@dataclass
class Report:
    command: str
    verdict: Any
    lines: List[str] = field(default_factory=list)
    data: Dict[str, Any] = field(default_factory=dict)
    seconds: float = 0.0
    status: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema": REPORT_SCHEMA,
            "command": self.command,
            "verdict": self.verdict,
            "seconds": round(self.seconds, 3),
            "data": self.data,
        }

    def render(self, as_json: bool) -> str:
        if as_json:
            return json.dumps(self.to_dict(), indent=2)
        return "\n".join(self.lines)


# ---------------------------------------------------------------------------
# Argument resolution

def load_model(ref: str) -> Model:
    """A model file path, or @name for a named artifact."""
    if ref.startswith("@"):
        artifact = get_artifact(ref[1:])
        if artifact.kind != "model":
            raise ITLBenchError(f"artifact '{artifact.name}' is a formula, not a model")
        return artifact.payload
    return parse_model(Path(ref).read_text(encoding="utf-8"))


def load_formula(text: str) -> Formula:
    if text.startswith("@"):
        artifact = get_artifact(text[1:])
        if artifact.kind != "formula":
            raise ITLBenchError(f"artifact '{artifact.name}' is a model, not a formula")
        return artifact.payload
    return parse_formula(text)


def _atoms(value: Optional[str]) -> Sequence[str]:
    if not value:
        return ()
    return tuple(a.strip() for a in value.split(",") if a.strip())


def _bounds(args, config: ConfigManager, **overrides) -> SearchBounds:
    values = {
        "max_worlds": args.max_worlds,
        "frame_class": args.frame_class,
        "limit": args.limit,
        "seed": args.seed,
        "batch_size": args.batch_size,
    }
    values.update(overrides)
    return config.search_bounds(atoms=_atoms(args.atoms), **values)


def _reverify_witness(witness, check: Callable[[Model, str], bool]) -> None:
    """The emitted model text must parse back and reproduce the verdict."""
    model, world = witness
    reparsed = parse_model(serialize_model(model))
    if reparsed != model or not check(reparsed, world):
        raise InvariantFailure(f"witness at {world} does not re-verify")


def _witness_lines(result) -> List[str]:
    lines = [f"verdict: {result.verdict.value} ({result.visited} models visited)"]
    if result.witness is not None:
        model, world = result.witness
        lines.append(f"world: {world}")
        lines.append(serialize_model(model).rstrip())
    return lines


# ---------------------------------------------------------------------------
# Commands

def cmd_check(args, config: ConfigManager) -> Report:
    m = load_model(args.model)
    f = load_formula(args.formula)
    value = satisfies(m, args.world, f)
    return Report("check", value, [f"{args.world} |= {f}: {str(value).lower()}"],
                  {"world": args.world, "formula": str(f)})


def cmd_valid(args, config: ConfigManager) -> Report:
    m = load_model(args.model)
    if args.file:
        formulas = parse_formula_file(Path(args.file).read_text(encoding="utf-8"))
    elif args.formula:
        formulas = [load_formula(args.formula)]
    else:
        raise ITLBenchError("give a formula or --file")
    lines, rows = [], []
    for f in formulas:
        verdict = valid_in_model(m, f)
        where = None if verdict.holds else verdict.witness[0]
        rows.append({"formula": str(f), "valid": verdict.holds, "fails_at": where})
        lines.append(f"{f}: valid" if verdict.holds else f"{f}: fails at {where}")
    return Report("valid", all(r["valid"] for r in rows), lines, {"formulas": rows})


def cmd_countermodel(args, config: ConfigManager) -> Report:
    words = args.formula
    if words[0] == "get":
        if len(words) == 1:
            names = list_artifacts()
            return Report("countermodel get", names, names, {"artifacts": names})
        artifact = get_artifact(words[1])
        if artifact.kind == "model":
            text = serialize_model(artifact.payload).rstrip()
        else:
            text = str(artifact.payload)
        return Report("countermodel get", artifact.name, [f"# {artifact.provenance}", text],
                      {"name": artifact.name, "kind": artifact.kind, "text": text,
                       "provenance": artifact.provenance})

    f = load_formula(" ".join(words))
    result = find_countermodel(f, _bounds(args, config))
    if result.found:
        _reverify_witness(result.witness, lambda m, w: not satisfies(m, w, f))
    data = {"formula": str(f), **result.to_dict()}
    return Report("countermodel", result.verdict.value, _witness_lines(result), data)


def cmd_equiv(args, config: ConfigManager) -> Report:
    f, g = load_formula(args.left), load_formula(args.right)
    result = check_equivalence(f, g, _bounds(args, config))
    if result.found:
        _reverify_witness(result.witness, lambda m, w: satisfies(m, w, f) != satisfies(m, w, g))
    data = {"left": str(f), "right": str(g), **result.to_dict()}
    return Report("equiv", result.verdict.value, _witness_lines(result), data)


def cmd_bisim(args, config: ConfigManager) -> Report:
    m1, m2 = load_model(args.model1), load_model(args.model2)
    name = args.kind or config.bisim.kind
    try:
        kind = BisimKind(name)
    except ValueError:
        choices = ", ".join(k.value for k in BisimKind)
        raise ITLBenchError(f"unknown bisimulation kind '{name}' (choose from {choices})") from None
    if args.family:
        fam = parse_family(Path(args.family).read_text(encoding="utf-8"), m1, m2)
        violations = verify_family(kind, fam)
        lines = [str(v) for v in violations] or [f"valid bounded {kind.value}-bisimulation of depth {fam.depth}"]
        data = {"kind": kind.value, "depth": fam.depth, "violations": [
            {"clause": v.clause, "level": v.level, "pair": list(v.pair),
             "witness": {k: str(x) for k, x in v.witness.items()}} for v in violations]}
        return Report("bisim", not violations, lines, data)

    depth = args.depth if args.depth is not None else config.bisim.depth
    if depth < 0:
        raise ITLBenchError(f"bisimulation depth must be non-negative, got {depth}")
    fam = max_family(kind, m1, m2, depth)
    if verify_family(kind, fam):
        raise InvariantFailure("computed family does not verify")
    text = serialize_family(fam)
    lines = [text.rstrip()]
    data = {"kind": kind.value, "depth": depth, "family": text}
    verdict: Any = depth
    if args.pair:
        levels = []
        for w1, w2 in args.pair:
            level = fam.deepest_level(w1, w2)
            lines.append(f"({w1},{w2}) deepest level: {level}")
            levels.append({"worlds": [w1, w2], "level": level})
        data["pairs"] = levels
        verdict = levels[0]["level"] if len(levels) == 1 else [row["level"] for row in levels]
    return Report("bisim", verdict, lines, data)


def cmd_normal_form(args, config: ConfigManager) -> Report:
    f = load_formula(args.formula)
    bounds = SearchBounds(max_worlds=config.suite.normal_form_max_worlds, atoms=("p", "q"),
                          frame_class=FrameClass.PERSISTENT, batch_size=config.search.batch_size)
    commute = DEFAULT_COMMUTATIONS if args.no_confirm else confirm_next_commutations(bounds)
    g = next_normal_form(f, commute)
    lines = [str(g)]
    data = {"formula": str(f), "normal_form": str(g), "commutations": sorted(commute)}
    if args.verify:
        result = check_equivalence(f, g, SearchBounds(
            max_worlds=bounds.max_worlds, frame_class=FrameClass.PERSISTENT,
            batch_size=bounds.batch_size))
        if result.found:
            raise InvariantFailure(f"normal form of {f} disagrees on a persistent model")
        lines.append(f"equivalent on persistent models: {result.verdict.value}")
        data["verification"] = result.verdict.value
    return Report("normal-form", str(g), lines, data)


def cmd_paper(args, config: ConfigManager) -> Report:
    settings = config.suite.quick() if args.quick else config.suite
    results = run_suite(settings, args.only, batch_size=config.search.batch_size)
    lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.key:<20} {r.title} ({r.seconds:.1f}s)" for r in results]
    passed = all(r.passed for r in results)
    lines.append(f"{sum(r.passed for r in results)}/{len(results)} items passed")
    data = suite_report(results)
    data["preset"] = "quick" if args.quick else "full"
    return Report("paper", passed, lines, data, status=0 if passed else 2)


def cmd_config(args, config: ConfigManager) -> Report:
    if args.action == "init":
        target = args.path or str(config.config_path)
        if not config.export_config(target):
            raise ITLBenchError(f"could not write {target}")
        return Report("config init", target, [f"wrote defaults to {target}"], {"path": target})
    data = config.to_dict()
    return Report("config show", str(config.config_path), [json.dumps(data, indent=2)], data)


# ---------------------------------------------------------------------------
# Parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="configuration file (default ~/.itlbench/config.json)")
    common.add_argument("--debug", action="store_true", help="log at DEBUG level")
    common.add_argument("--json", action="store_true", default=None, help="machine-readable report")

    searching = argparse.ArgumentParser(add_help=False)
    searching.add_argument("--class", dest="frame_class", choices=[c.value for c in FrameClass],
                           help="frame class to search")
    searching.add_argument("--max-worlds", type=int, help="largest model size")
    searching.add_argument("--atoms", help="comma-separated atoms (default: those of the formula)")
    searching.add_argument("--limit", type=int, help="stop after this many models")
    searching.add_argument("--seed", type=int, help="shuffle enumeration order")
    searching.add_argument("--batch-size", type=int, help="models per evaluation batch")

    parser = argparse.ArgumentParser(
        prog="itlbench",
        description="Workbench for intuitionistic temporal logic over dynamic posets",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  itlbench check @fisher-servi w "(X p -> X q) -> X(p -> q)"
  itlbench countermodel "G(G p -> q) | G(G q -> p)" --class ht --max-worlds 4
  itlbench bisim @H2 @H2 --kind until --depth 2 --pair 0_0 0_1
  itlbench countermodel get E3
  itlbench paper --only prop2
        """,
    )
    parser.add_argument("--version", action="version", version=f"itlbench {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="truth of a formula at a world")
    p.add_argument("model")
    p.add_argument("world")
    p.add_argument("formula")
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("valid", parents=[common], help="truth of formulas at every world")
    p.add_argument("model")
    p.add_argument("formula", nargs="?")
    p.add_argument("--file", help="formula file, one per line")
    p.set_defaults(handler=cmd_valid)

    p = sub.add_parser("countermodel", parents=[common, searching],
                       help="search for a falsifying model, or 'get NAME' for a named artifact")
    p.add_argument("formula", nargs="+")
    p.set_defaults(handler=cmd_countermodel)

    p = sub.add_parser("equiv", parents=[common, searching], help="search for a disagreement")
    p.add_argument("left")
    p.add_argument("right")
    p.set_defaults(handler=cmd_equiv)

    p = sub.add_parser("bisim", parents=[common], help="compute or verify bounded bisimulations")
    p.add_argument("model1")
    p.add_argument("model2")
    p.add_argument("--kind", choices=[k.value for k in BisimKind])
    p.add_argument("--depth", type=int)
    p.add_argument("--family", help="verify this family file instead of computing one")
    p.add_argument("--pair", nargs=2, action="append", metavar=("W1", "W2"),
                   help="report the deepest level of a pair (repeatable)")
    p.set_defaults(handler=cmd_bisim)

    p = sub.add_parser("normal-form", parents=[common], help="push X down to the atoms")
    p.add_argument("formula")
    p.add_argument("--no-confirm", action="store_true",
                   help="skip confirming the X/F and X/G commutations first")
    p.add_argument("--verify", action="store_true", help="check the result on persistent models")
    p.set_defaults(handler=cmd_normal_form)

    p = sub.add_parser("paper", parents=[common], help="run the reproduction suite")
    p.add_argument("--only", nargs="+", metavar="ITEM", help="item keys or groups")
    p.add_argument("--quick", action="store_true",
                   help="cut the normal-form grid to length 3 formulas")
    p.set_defaults(handler=cmd_paper)

    p = sub.add_parser("config", parents=[common], help="show or write configuration")
    p.add_argument("action", choices=["show", "init"])
    p.add_argument("path", nargs="?")
    p.set_defaults(handler=cmd_config)
    return parser


def _configure_logging(config: ConfigManager, debug: bool) -> None:
    level = logging.DEBUG if debug or config.developer.debug_mode else \
        getattr(logging, config.developer.log_level.upper(), logging.INFO)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    config = ConfigManager(args.config)
    _configure_logging(config, args.debug)
    as_json = config.output.json if args.json is None else args.json
    started = time.perf_counter()
    try:
        report = args.handler(args, config)
    except (ITLBenchError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except InvariantFailure as e:
        print(f"internal check failed: {e}", file=sys.stderr)
        return 2
    report.seconds = time.perf_counter() - started
    print(report.render(as_json))
    return report.status


if __name__ == "__main__":
    sys.exit(main())
