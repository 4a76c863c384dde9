"""
itlbench
========

A workbench for intuitionistic temporal logic over dynamic posets:
formula parsing, model checking, bounded bisimulations, countermodel
search and a reproduction suite for the known (un)definability results.

Version: 1.0.0
License: MIT
"""

__version__ = "1.0.0"
__license__ = "MIT"

from .formula import Formula, parse_formula, print_formula
from .model import FrameClass, Model, build_model, parse_model, serialize_model
from .checker import satisfies, valid_in_model
from .bisim import BisimKind, max_family, verify_family
from .search import SearchBounds, check_equivalence, find_countermodel
from .countermodels import get_artifact
from .config_manager import ConfigManager

__all__ = [
    'Formula', 'parse_formula', 'print_formula',
    'FrameClass', 'Model', 'build_model', 'parse_model', 'serialize_model',
    'satisfies', 'valid_in_model',
    'BisimKind', 'max_family', 'verify_family',
    'SearchBounds', 'check_equivalence', 'find_countermodel',
    'get_artifact', 'ConfigManager',
]
