"""
Tests for the relation database: build, queries and serialization.
"""

import json
import logging
import os

import pytest

from polarpo.exceptions import (
    IncompleteDatabaseError,
    InconsistentOrderError,
    UnknownDatabaseFormatError,
    UsageError,
)
from polarpo.models.config import EngineSettings
from polarpo.models.paths import BitOrder
from polarpo.models.relations import Kind, KindMask, Rule
from polarpo.podb import (
    HEADER,
    MAGIC,
    PU_PAIRS,
    PUBLISHED_DEG_COUNT_N10,
    PUBLISHED_DEG_COUNTS,
    TRIPLE,
    PoDb,
    build,
    contains_pu,
    export,
    index_code,
    load,
    stats,
    validate_bit_order,
)


@pytest.fixture
def db3(settings: EngineSettings) -> PoDb:
    return build(3, settings)


def test_build_n1(settings: EngineSettings) -> None:
    """Test the single pair of length 1."""
    db = build(1, settings)

    assert db.has(0, 1, KindMask.DEG | KindMask.Z)
    assert len(db) == 1


def test_build_n2_is_a_chain(settings: EngineSettings) -> None:
    """Test that all six pairs of length 2 are degradation pairs."""
    result = stats(build(2, settings))

    assert result.total_pairs == 6
    assert result.deg == 6
    assert result.z_total == 6
    assert result.z_new == 0
    assert result.unknown == 0


def test_build_n3_criterion_pair(db3: PoDb) -> None:
    """Test that 100 below 011 is found by the criterion only."""
    w, b = 0b100, 0b011

    assert db3.has(w, b, KindMask.Z)
    assert db3.has(w, b, KindMask.BEC)
    assert not db3.has(w, b, KindMask.DEG)
    assert db3.rule(w, b, KindMask.Z) is Rule.PROP9
    assert not db3.has(b, w, KindMask.Z)


def test_stats_n3(db3: PoDb) -> None:
    """Test the counts of length 3 add up."""
    result = stats(db3)

    assert result.total_pairs == 28
    assert result.z_total == result.deg + result.z_new
    assert result.z_new >= 1
    assert result.unknown == 28 - result.z_total
    assert result.config["deg_config"] == "base"


def test_reference_count_match_keeps_base(settings: EngineSettings, monkeypatch) -> None:
    """Test that a base closure matching the reference count is labelled base."""
    monkeypatch.setitem(PUBLISHED_DEG_COUNTS, 3, 27)
    db = build(3, settings)

    assert db.config["deg_base"] == 27
    assert db.config["deg_config"] == "base"
    assert "deg_rule3" not in db.config
    assert "deg_mismatch" not in db.config
    assert not db.rule3


def test_reference_count_mismatch_is_recorded(
    settings: EngineSettings, monkeypatch, caplog
) -> None:
    """Test that no closure matching the reference count gives deg_config none."""
    monkeypatch.setitem(PUBLISHED_DEG_COUNTS, 3, 26)
    with caplog.at_level(logging.WARNING, logger="polarpo.podb"):
        db = build(3, settings)

    assert db.config["deg_config"] == "none"
    mismatch = db.config["deg_mismatch"]
    assert mismatch["published"] == 26
    assert mismatch["base"] == 27
    assert mismatch["rule3"] == db.config["deg_rule3"]
    assert mismatch["rule3"] is not None
    assert not db.rule3
    assert db.count(KindMask.DEG) == 27
    assert any("no degradation configuration" in r.getMessage() for r in caplog.records)

    result = stats(db)
    assert result.deg_config == "none"
    assert result.deg_base == 27


def test_build_rejects_length(settings: EngineSettings) -> None:
    """Test the length guard."""
    with pytest.raises(UsageError):
        build(-1, settings)
    with pytest.raises(UsageError):
        build(settings.max_length + 1, settings)


def test_transitive_closure_marks_db(settings: EngineSettings) -> None:
    """Test that the closure flag and count are recorded."""
    db = build(3, settings, transitive=True)

    assert db.transitive
    assert db.config["z_closure"] == db.count(KindMask.Z)


def test_add_rejects_both_directions() -> None:
    """Test that a pair and its reverse cannot hold the same kind."""
    db = PoDb(2)
    db.add(0b01, 0b10, KindMask.Z, Rule.PROP9)

    with pytest.raises(InconsistentOrderError):
        db.add(0b10, 0b01, KindMask.Z | KindMask.P)
    # a different kind is fine
    assert db.add(0b10, 0b01, KindMask.P)


def test_add_rejects_reflexive_pair() -> None:
    """Test that a stored pair needs distinct paths."""
    with pytest.raises(ValueError):
        PoDb(2).add(1, 1, KindMask.DEG)


def test_transitive_close_records_premises() -> None:
    """Test that a composed pair points at its two halves."""
    db = PoDb(2)
    db.add(0, 1, KindMask.Z)
    db.add(1, 2, KindMask.Z)

    assert db.transitive_close(KindMask.Z) == 1
    assert db.rule(0, 2, KindMask.Z) is Rule.TRANS
    assert db.premises(0, 2, KindMask.Z) == [(2, 0, 1, "Z"), (2, 1, 2, "Z")]


def test_stats_needs_complete_db() -> None:
    """Test that a partial database has no statistics."""
    with pytest.raises(IncompleteDatabaseError):
        stats(PoDb(3, complete=False))


def test_json_export_and_load(db3: PoDb, tmp_path) -> None:
    """Test that the json form keeps pairs and rules."""
    target = tmp_path / "po3.json"
    export(db3, "json", target)

    doc = json.loads(target.read_text(encoding="utf-8"))
    assert doc["header"]["n"] == 3
    assert load(target) == db3


def test_binary_export_and_load(db3: PoDb, tmp_path) -> None:
    """Test that the binary form keeps pairs and kinds."""
    target = tmp_path / "po3.bin"
    payload = export(db3, "binary", target)

    assert payload[:4] == b"POLO"
    loaded = load(target)
    assert loaded.n == 3
    assert list(loaded.pairs()) == list(db3.pairs())
    assert all(loaded.kinds(w, b) == db3.kinds(w, b) for w, b in db3.pairs())
    assert stats(loaded).z_total == stats(db3).z_total


def test_binary_keeps_build_config(db3: PoDb) -> None:
    """Test that the degradation provenance survives a binary round trip."""
    data = db3.to_binary()
    trailer = json.dumps(db3.config, sort_keys=True).encode("utf-8")
    assert len(data) == 24 + 9 * len(list(db3.pairs())) + 4 + len(trailer)

    loaded = PoDb.from_binary(data)

    assert loaded.config == db3.config
    before, after = stats(db3), stats(loaded)
    assert after.deg_base == before.deg_base == 27
    assert after.deg_config == before.deg_config == "base"
    assert after.criterion == before.criterion
    assert after.config == before.config


def test_binary_version_1_still_loads(db3: PoDb) -> None:
    """Test that trailer-less version 1 files load with an empty config."""
    count = len(list(db3.pairs()))
    triples = db3.to_binary()[HEADER.size : HEADER.size + count * TRIPLE.size]
    legacy = HEADER.pack(MAGIC, 1, db3.n, db3.flags, count, db3.total_pairs) + triples

    loaded = PoDb.from_binary(legacy)
    assert list(loaded.pairs()) == list(db3.pairs())
    assert loaded.config == {}


def test_truncated_binary_is_rejected(db3: PoDb) -> None:
    """Test that a binary file with missing triples is refused."""
    with pytest.raises(UnknownDatabaseFormatError):
        PoDb.from_binary(db3.to_binary()[:-1])


def test_load_unknown_format(tmp_path) -> None:
    """Test that an unrelated file is refused."""
    target = tmp_path / "notes.txt"
    target.write_text("hello", encoding="utf-8")

    with pytest.raises(UnknownDatabaseFormatError):
        load(target)


def test_load_missing_file(tmp_path) -> None:
    """Test that a missing file is a usage error."""
    with pytest.raises(UsageError):
        load(tmp_path / "missing.json")


def test_export_unknown_format(db3: PoDb) -> None:
    """Test that only json, binary and dot are known."""
    with pytest.raises(UsageError):
        export(db3, "yaml")


def test_to_dot(db3: PoDb) -> None:
    """Test the Hasse diagram of the Z pairs."""
    dot = export(db3, "dot", kind=Kind.Z)

    assert dot.startswith("digraph po_n3_z {")
    assert '"100" -> "011";' in dot
    # 000 -> 111 is implied and dropped by the reduction
    assert '"000" -> "111";' not in dot


def test_index_code_conventions() -> None:
    """Test channel index translation in both bit orders."""
    assert index_code(719, 10, BitOrder.MSB) == 0b1011001111
    assert index_code(719, 10, BitOrder.LSB) == 0b1111001101


def test_contains_pu_needs_n10(db3: PoDb) -> None:
    """Test that the published pairs only exist for n = 10."""
    with pytest.raises(UsageError):
        contains_pu(db3)


def test_contains_pu_needs_complete_db() -> None:
    """Test that a partial database is refused."""
    with pytest.raises(IncompleteDatabaseError):
        contains_pu(PoDb(10, complete=False))


def test_contains_pu_on_planted_pairs() -> None:
    """Test the P_u check and bit-order detection on a database holding only those pairs."""
    db = PoDb(10)
    for better, worse in PU_PAIRS:
        w, b = index_code(worse, 10, BitOrder.MSB), index_code(better, 10, BitOrder.MSB)
        db.add(w, b, KindMask.Z, Rule.PROP9)

    assert contains_pu(db, BitOrder.MSB)
    assert not contains_pu(db, BitOrder.LSB)
    assert validate_bit_order(db) is BitOrder.MSB
    assert db.config["bit_order"] == "msb"


def test_contains_pu_rejects_degradation_pair() -> None:
    """Test that a pair already ordered by degradation does not count."""
    db = PoDb(10)
    codes = [
        (index_code(worse, 10, BitOrder.MSB), index_code(better, 10, BitOrder.MSB))
        for better, worse in PU_PAIRS
    ]
    for w, b in codes:
        db.add(w, b, KindMask.Z)
    db.add(*codes[0], KindMask.DEG)

    assert not contains_pu(db, BitOrder.MSB)
    assert validate_bit_order(db) is None


@pytest.mark.n10
@pytest.mark.skipif(
    not os.environ.get("POLARPO_RUN_N10"),
    reason="set POLARPO_RUN_N10=1 to build the n = 10 database",
)
def test_full_build_n10() -> None:
    """Test the counts of the length-10 database and the P_u pairs."""
    db = build(10, EngineSettings(workers=os.cpu_count() or 1))
    result = stats(db)

    assert result.total_pairs == 523776
    assert result.deg_base == 351692
    assert result.deg_rule3 == 351692
    assert result.deg_config == "none"
    assert db.config["deg_mismatch"]["published"] == PUBLISHED_DEG_COUNT_N10
    assert not db.rule3
    assert result.deg == 351692
    assert result.criterion > 0
    assert result.z_total == result.deg + result.z_new

    order = validate_bit_order(db)
    assert order is not None
    assert contains_pu(db, order)
    assert [o for o in BitOrder if contains_pu(db, o)] == [order]
