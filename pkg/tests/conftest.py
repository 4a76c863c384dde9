"""
Shared fixtures for the itlbench test suite.
"""

import sys
from pathlib import Path

import pytest

# Add src to path for testing
src_path = Path(__file__).parent.parent / "src"
sys.path.insert(0, str(src_path))

from itlbench.countermodels import expanding_family_E, fisher_servi_model, ht_family_H  # noqa: E402


@pytest.fixture
def fisher_servi():
    return fisher_servi_model()


@pytest.fixture
def h1():
    return ht_family_H(1)


@pytest.fixture
def e1():
    return expanding_family_E(1)


@pytest.fixture
def no_config(tmp_path):
    """Path of a config file that does not exist, so defaults are used."""
    return str(tmp_path / "missing.json")
