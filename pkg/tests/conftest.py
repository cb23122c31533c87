"""
Test configuration and fixtures.

This file ensures the project root is on sys.path so tests can import the `src` package
when pytest is executed from the repository root. The run registry is pointed at an
in-memory SQLite database and file logging is switched off before `src` is imported.
"""
import os
import sys
from pathlib import Path

import pytest

os.environ.setdefault("STORAGE_URL", "sqlite://")
os.environ.setdefault("LOG_FILE_LOGGING", "false")

# Add project root to sys.path (two levels up from tests/)
ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))


@pytest.fixture
def call_at_zero():
    from src.models.integrands import ConvexSpec

    return ConvexSpec.call(0.0)


@pytest.fixture
def call_at_02():
    from src.models.integrands import ConvexSpec

    return ConvexSpec.call(0.2)
