"""
conftest.py — Shared pytest configuration and fixtures

This file is automatically loaded by pytest.
"""

import sys
from pathlib import Path

import pytest

project_root = Path(__file__).parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

from cbrw.lattice import Box, SetK, origin, unit  # noqa: E402
from cbrw.laws import get_jump_law, get_offspring_law  # noqa: E402


# ============================================================================
# Markers
# ============================================================================

def pytest_configure(config):
    """Register custom markers."""
    config.addinivalue_line(
        "markers", "slow: marks tests as slow (deselect with '-m \"not slow\"')"
    )
    config.addinivalue_line(
        "markers", "integration: marks tests as integration tests"
    )


# ============================================================================
# Fixtures available to all tests
# ============================================================================

@pytest.fixture(scope="session")
def srw5():
    """Simple random walk on Z^5."""
    return get_jump_law("srw", 5)


@pytest.fixture(scope="session")
def binary():
    """Critical binary branching: 0 or 2 children."""
    return get_offspring_law("binary")


@pytest.fixture(scope="session")
def delta1():
    """One child always: the branching walk is a plain random walk."""
    return get_offspring_law("delta1")


@pytest.fixture
def K0():
    """The singleton {0} in Z^5."""
    return SetK.single(origin(5))


@pytest.fixture
def K2():
    """{0, e1} in Z^5."""
    return SetK.of([origin(5), unit(5)])


@pytest.fixture
def small_box():
    """[-3, 3]^5 around the origin: 16807 sites."""
    return Box(origin(5), 3)


@pytest.fixture
def tiny_box():
    """[-2, 2]^5 around the origin: 3125 sites."""
    return Box(origin(5), 2)
