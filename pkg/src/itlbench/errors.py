"""
Exception hierarchy for itlbench.
Every error raised on bad user input derives from ITLBenchError so the CLI
can map it to exit status 1.
"""

from typing import Any, Iterable, Optional, Tuple


class ITLBenchError(Exception):
    """Base class for all itlbench errors."""


class FormulaSyntaxError(ITLBenchError):
    """A formula could not be parsed."""

    def __init__(self, message: str, position: Optional[int] = None,
                 expected: Iterable[str] = (), line: Optional[int] = None):
        self.reason = message
        self.position = position
        self.expected = tuple(sorted(expected))
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if position is not None:
            where.append(f"column {position + 1}")
        text = message
        if where:
            text = f"{message} at {', '.join(where)}"
        if self.expected:
            text += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(text)


class ModelError(ITLBenchError):
    """A model violates the dynamic-poset conditions or cannot be built."""


class UnknownWorldError(ModelError):
    def __init__(self, world: str, where: str = ""):
        self.world = world
        suffix = f" in {where}" if where else ""
        super().__init__(f"unknown world '{world}'{suffix}")


class AntisymmetryError(ModelError):
    def __init__(self, pair: Tuple[str, str]):
        self.pair = pair
        a, b = pair
        super().__init__(f"order is not antisymmetric: {a} <= {b} and {b} <= {a}")


class ConfluenceError(ModelError):
    def __init__(self, pair: Tuple[str, str], images: Tuple[str, str]):
        self.pair = pair
        self.images = images
        super().__init__(
            f"forward confluence fails: {pair[0]} <= {pair[1]} "
            f"but S({pair[0]}) = {images[0]} is not below S({pair[1]}) = {images[1]}"
        )


class MonotonicityError(ModelError):
    def __init__(self, atom: str, pair: Tuple[str, str]):
        self.atom = atom
        self.pair = pair
        super().__init__(
            f"valuation of '{atom}' is not monotone: holds at {pair[0]} "
            f"but not at {pair[1]} although {pair[0]} <= {pair[1]}"
        )


class ModelFormatError(ModelError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class FamilyFormatError(ITLBenchError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class NonDescendingChainError(ITLBenchError):
    """Z_{i+1} is not included in Z_i."""

    def __init__(self, level: int, pair: Tuple[str, str]):
        self.level = level
        self.pair = pair
        super().__init__(
            f"chain is not descending: ({pair[0]},{pair[1]}) is in level "
            f"{level + 1} but not in level {level}"
        )


class FragmentError(ITLBenchError):
    def __init__(self, formula: Any, kind: Any):
        self.formula = formula
        self.kind = kind
        super().__init__(f"formula '{formula}' lies outside the fragment of {kind}")


class SearchBoundsError(ITLBenchError):
    pass


class ArtifactNotFoundError(ITLBenchError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"no named artifact '{name}'")


class UnknownSuiteItemError(ITLBenchError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"no suite item or group named '{name}'")
