"""
Pytest configuration and shared fixtures.
"""

from pathlib import Path

import pytest

from polarpo import PartialOrderEngine
from polarpo.models.config import EngineSettings
from polarpo.orders import BecOrder, BmscBounds, DegradationOrder, RuleEngine


@pytest.fixture
def settings() -> EngineSettings:
    """Return single-process settings so tests never spawn a pool."""
    return EngineSettings(workers=1)


@pytest.fixture
def engine(settings: EngineSettings) -> PartialOrderEngine:
    """
    Create an engine that ignores any .env file.

    Caches are dropped afterwards so tests do not share memoised state.
    """
    eng = PartialOrderEngine(settings=settings)
    yield eng
    eng.close()


@pytest.fixture
def deg(settings: EngineSettings) -> DegradationOrder:
    return DegradationOrder(settings)


@pytest.fixture
def bec(settings: EngineSettings) -> BecOrder:
    return BecOrder(settings)


@pytest.fixture
def bounds(settings: EngineSettings, bec: BecOrder) -> BmscBounds:
    return BmscBounds(settings, bec=bec)


@pytest.fixture
def rules(settings: EngineSettings, deg: DegradationOrder, bec: BecOrder, bounds: BmscBounds) -> RuleEngine:
    return RuleEngine(settings, deg=deg, bec=bec, bounds=bounds)


@pytest.fixture
def reliability_file(tmp_path: Path) -> Path:
    """Write a length-4 reliability sequence, least reliable first."""
    path = tmp_path / "seq.txt"
    path.write_text("# toy sequence\n0\n1\n2\n\n3\n", encoding="utf-8")
    return path
