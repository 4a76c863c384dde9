"""
Configuration Manager for itlbench
Holds search bounds, bisimulation defaults, reproduction-suite sizes and
developer settings, persisted as JSON.
"""

import json
import logging
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional

from .model import FrameClass
from .search import DEFAULT_BATCH_SIZE, DEFAULT_LIMIT, SearchBounds

logger = logging.getLogger(__name__)

QUICK_NORMAL_FORM_LENGTH = 3


@dataclass
class SearchSettings:
    frame_class: FrameClass = FrameClass.EXPANDING
    max_worlds: int = 3
    limit: Optional[int] = DEFAULT_LIMIT
    batch_size: int = DEFAULT_BATCH_SIZE
    seed: Optional[int] = None


@dataclass
class BisimSettings:
    depth: int = 2
    kind: str = "until"


@dataclass
class SuiteSettings:
    seed: int = 2019
    random_pairs: int = 1000
    random_max_worlds: int = 5
    random_max_length: int = 6
    preservation_random: int = 200
    preservation_max_depth: int = 3
    undefinability_depths: List[int] = field(default_factory=lambda: [1, 2, 3, 4])
    valid_max_worlds: int = 4
    ht_max_worlds: int = 6
    expanding_max_worlds: int = 8
    normal_form_max_worlds: int = 4
    normal_form_max_length: int = 4

    def quick(self) -> "SuiteSettings":
        """Same settings with the normal-form grid cut to length 3."""
        length = min(self.normal_form_max_length, QUICK_NORMAL_FORM_LENGTH)
        return replace(self, normal_form_max_length=length)


@dataclass
class OutputSettings:
    json: bool = False


@dataclass
class DeveloperSettings:
    debug_mode: bool = False
    log_level: str = "INFO"


_SECTIONS = {
    "search": SearchSettings,
    "bisim": BisimSettings,
    "suite": SuiteSettings,
    "output": OutputSettings,
    "developer": DeveloperSettings,
}


def _section_from_dict(cls, data: Dict[str, Any]):
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        logger.warning("ignoring unknown %s settings: %s", cls.__name__, ", ".join(unknown))
    values = {k: v for k, v in data.items() if k in known}
    if cls is SearchSettings and "frame_class" in values:
        values["frame_class"] = FrameClass(values["frame_class"])
    return cls(**values)


class ConfigManager:
    """Manages all workbench configuration."""

    DEFAULT_CONFIG_PATH = Path.home() / ".itlbench" / "config.json"

    def __init__(self, config_path: Optional[str] = None, load: bool = True):
        self.config_path = Path(config_path) if config_path else self.DEFAULT_CONFIG_PATH
        self.reset_to_defaults()
        if load:
            self.load_config()

    def reset_to_defaults(self):
        """Reset all settings to default values."""
        self.search = SearchSettings()
        self.bisim = BisimSettings()
        self.suite = SuiteSettings()
        self.output = OutputSettings()
        self.developer = DeveloperSettings()

    def load_config(self) -> bool:
        """Load configuration from file; missing sections keep their defaults."""
        if not self.config_path.exists():
            return False
        try:
            with open(self.config_path, "r", encoding="utf-8") as f:
                data = json.load(f)
            for name, cls in _SECTIONS.items():
                if name in data:
                    setattr(self, name, _section_from_dict(cls, data[name]))
        except (OSError, ValueError, TypeError) as e:
            logger.warning("failed to load config from %s: %s; using defaults", self.config_path, e)
            self.reset_to_defaults()
            return False
        logger.info("configuration loaded from %s", self.config_path)
        return True

    def to_dict(self) -> Dict[str, Any]:
        data = {name: asdict(getattr(self, name)) for name in _SECTIONS}
        data["search"]["frame_class"] = self.search.frame_class.value
        return data

    def save_config(self) -> bool:
        """Save configuration to file."""
        try:
            self.config_path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.config_path, "w", encoding="utf-8") as f:
                json.dump(self.to_dict(), f, indent=2)
        except OSError as e:
            logger.error("failed to save config to %s: %s", self.config_path, e)
            return False
        logger.info("configuration saved to %s", self.config_path)
        return True

    def export_config(self, path: str) -> bool:
        """Export configuration to a specific file."""
        old_path = self.config_path
        self.config_path = Path(path)
        try:
            return self.save_config()
        finally:
            self.config_path = old_path

    def import_config(self, path: str) -> bool:
        """Import configuration from a specific file."""
        old_path = self.config_path
        self.config_path = Path(path)
        try:
            return self.load_config()
        finally:
            self.config_path = old_path

    def get(self, key: str, default=None):
        """Get configuration value using dot notation, e.g. 'search.max_worlds'."""
        section, _, name = key.partition(".")
        if section not in _SECTIONS or not name:
            return default
        return getattr(getattr(self, section), name, default)

    def set(self, key: str, value):
        """Set configuration value using dot notation."""
        section, _, name = key.partition(".")
        if section not in _SECTIONS or not hasattr(getattr(self, section), name):
            raise KeyError(f"unknown setting '{key}'")
        if section == "search" and name == "frame_class":
            value = FrameClass(value)
        setattr(getattr(self, section), name, value)

    def search_bounds(self, atoms=(), **overrides) -> SearchBounds:
        """SearchBounds from the search section, with per-run overrides."""
        values = {
            "max_worlds": self.search.max_worlds,
            "frame_class": self.search.frame_class,
            "limit": self.search.limit,
            "seed": self.search.seed,
            "batch_size": self.search.batch_size,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return SearchBounds(atoms=tuple(atoms), **values)
