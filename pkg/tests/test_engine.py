"""
Tests for the PartialOrderEngine façade.
"""

from pathlib import Path

import httpx
import pytest
import respx

from polarpo import PartialOrderEngine
from polarpo.exceptions import LengthMismatchError, UsageError
from polarpo.models.channels import BmsChannel
from polarpo.models.config import EngineSettings
from polarpo.models.paths import BitOrder
from polarpo.models.verdicts import Direction
from polarpo.podb import export


def test_settings_from_env(monkeypatch: pytest.MonkeyPatch) -> None:
    """Test that POLARPO_* variables are read and explicit values win."""
    monkeypatch.setenv("POLARPO_WORKERS", "3")
    monkeypatch.setenv("POLARPO_BIT_ORDER", "LSB")
    monkeypatch.setenv("POLARPO_TAU_BUDGET", "not-a-number")

    engine = PartialOrderEngine(load_env=False)
    assert engine.settings.workers == 3
    assert engine.settings.bit_order is BitOrder.LSB
    assert engine.settings.tau_budget == 3

    assert PartialOrderEngine(load_env=False, workers=1).settings.workers == 1


def test_context_manager() -> None:
    """Test the engine as a context manager."""
    with PartialOrderEngine(settings=EngineSettings(workers=1)) as engine:
        assert engine.compare("01", "01", "bec").direction is Direction.EQUAL


def test_compare_deg(engine: PartialOrderEngine) -> None:
    """Test a degradation comparison with its trace."""
    result = engine.compare("011", "101", "deg")

    assert result.kind == "DEG"
    assert result.direction is Direction.LEQ
    assert result.verdict == "011 ≼ 101"
    assert result.trace == ["011", "101"]


def test_compare_bec_reversed(engine: PartialOrderEngine) -> None:
    """Test that the verdict names the worse path first."""
    result = engine.compare("10", "01", "bec")

    assert result.direction is Direction.GEQ
    assert result.verdict == "01 ≼_BEC 10"
    assert result.witness is not None


def test_compare_z(engine: PartialOrderEngine) -> None:
    """Test the Z prover through the façade."""
    result = engine.compare("1100", "1011", "z")

    assert result.direction is Direction.LEQ
    assert result.verdict == "1100 ≼_Z 1011"
    assert result.rule == "prop10"
    assert result.premise == "1100 ≼_BEC 0111"


def test_compare_z_tries_both_directions(engine: PartialOrderEngine) -> None:
    """Test that a relation in the reverse direction is found."""
    result = engine.compare("1011", "1100", "Z")

    assert result.direction is Direction.GEQ
    assert result.verdict == "1100 ≼_Z 1011"


def test_compare_p(engine: PartialOrderEngine) -> None:
    """Test the P prover through the façade."""
    result = engine.compare("1000", "0111", "p")

    assert result.kind == "P"
    assert result.strategy == "S2"


def test_compare_equal(engine: PartialOrderEngine) -> None:
    """Test identical paths under a prover relation."""
    assert engine.compare("0110", "0110", "z").verdict == "EQUAL"


def test_compare_auto_degradation(engine: PartialOrderEngine) -> None:
    """Test that a degradation pair reports the implied kinds."""
    result = engine.compare("011", "101")

    assert result.kind == "DEG"
    assert result.also == ["Z", "P", "BEC"]


def test_compare_auto_criterion(engine: PartialOrderEngine) -> None:
    """Test that a DEG-incomparable pair is settled by the rule engine."""
    result = engine.compare("1100", "1011", "auto")

    assert result.kind == "Z"
    assert result.rule == "prop10"
    assert result.premise == "1100 ≼_BEC 0111"
    assert "BEC" in result.also
    assert result.proof.startswith("1100 ≼_Z 1011")


def test_compare_rejects(engine: PartialOrderEngine) -> None:
    """Test an unknown relation and unequal lengths."""
    with pytest.raises(UsageError):
        engine.compare("01", "10", "gamma")
    with pytest.raises(LengthMismatchError):
        engine.compare("01", "100", "deg")


def test_database_round_trip(tmp_path: Path) -> None:
    """Test building, storing under db_dir and loading by relative name."""
    engine = PartialOrderEngine(settings=EngineSettings(workers=1, db_dir=tmp_path))
    db = engine.build_db(3)
    export(db, "json", tmp_path / "po3.json")

    assert engine.resolve("po3.json") == tmp_path / "po3.json"
    loaded = engine.load_db("po3.json")
    assert engine.stats(loaded).z_total == engine.stats(db).z_total
    assert engine.beta_window(loaded).component.describe() == "[1, 1.618033989]"


def test_saturate(engine: PartialOrderEngine) -> None:
    """Test saturation through the façade."""
    store = engine.saturate(2)
    assert store.n == 2
    assert store.complete


def test_info_set_and_simulate(engine: PartialOrderEngine) -> None:
    """Test constructing a code and simulating it."""
    info = engine.info_set(2, 2, "bec:0.5")
    (result,) = engine.simulate([(None, BmsChannel.parse("awgn:0.01"))], info, frames=20)

    assert info.indices == [2, 3]
    assert result.fer == 0.0


def test_genie(engine: PartialOrderEngine) -> None:
    """Test the genie estimate through the façade."""
    est = engine.genie(BmsChannel.parse("bec:0.5"), "1", trials=4000, seed=3)

    assert est.path == "1"
    assert abs(est.z - 0.25) < 0.05


@respx.mock
def test_fetch_reliability(engine: PartialOrderEngine, tmp_path: Path) -> None:
    """Test downloading and saving a sequence."""
    url = "https://example.org/seq.txt"
    respx.get(url).mock(return_value=httpx.Response(200, text="0\n2\n1\n3\n"))

    assert engine.fetch_reliability(url) == [0, 2, 1, 3]
    target = tmp_path / "seq.txt"
    assert engine.fetch_reliability(url, target) == [0, 2, 1, 3]
    assert target.exists()
