"""
Tests for the rule engine: targeted derivations, saturation and proof replay.
"""

from itertools import permutations

import pytest

from polarpo.exceptions import UsageError
from polarpo.models.config import EngineSettings
from polarpo.models.relations import Kind, KindMask, Relation, Rule
from polarpo.orders.bec import BecOrder
from polarpo.orders.bounds import BmscBounds
from polarpo.orders.rules import (
    CRITERION_Z,
    RuleEngine,
    criterion_premises,
    decompose_insert,
    decompose_suffix,
    rule_r1,
    rule_r2,
    rule_r6,
    rule_r7,
)
from polarpo.paths import code_to_str, str_to_code


def test_rule_r6_instance() -> None:
    """Test the Z insertion rule on a seven-bit premise."""
    assert rule_r6("0110001", "1001110", 1, 1, 1, 1, "01", 2) == ("00111000111", "10100111110")


def test_rule_r7_inserts_zeros() -> None:
    """Test that the P insertion rule inserts a run of zeros."""
    assert rule_r7("100", "011", 0, 0, 0, 0, "1", 2) == ("110000", "101100")


def test_insertion_rejects_wrong_shape() -> None:
    """Test that the premise must have the stated prefix and suffix runs."""
    with pytest.raises(ValueError):
        rule_r6("100", "011", 1, 0, 0, 0, "", 1)


def test_suffix_rules() -> None:
    """Test the suffix rules append the same run to both sides."""
    assert rule_r1("1010", "1010", "100", "011", 2) == ("101010011", "101001111")
    assert rule_r2("", "", "100", "011", 1) == ("1000", "0110")


def test_decompose_suffix_finds_premise() -> None:
    """Test that the R1 decomposition recovers its premise."""
    found = list(decompose_suffix("101010011", "101001111", "1"))
    assert ("1010", "1010", "100", "011", 2) in found


def test_decompose_insert_finds_premise() -> None:
    """Test that the R6 decomposition recovers its premise."""
    premises = [(w, b) for w, b, _ in decompose_insert("00111000111", "10100111110", "1")]
    assert ("0110001", "1001110") in premises


def test_criterion_premises() -> None:
    """Test the premise of each criterion shape."""
    assert criterion_premises(Rule.THM3, "110001", "101101") == [("11000", "01101")]
    assert criterion_premises(Rule.PROP10, "1100", "1011") == [("1100", "0111")]
    assert criterion_premises(Rule.THM3, "1100", "1011") == []
    assert criterion_premises(Rule.THM4, "110100", "101111")[0] == ("11010", "01111")
    assert criterion_premises(Rule.THM5, "1000", "0111") == [("1000", "0011")]


@pytest.mark.parametrize(
    "n",
    [1, 2, 3, 4, pytest.param(5, marks=pytest.mark.slow), pytest.param(6, marks=pytest.mark.slow)],
)
def test_criterion_shapes_agree_with_prove_z(n: int, bec: BecOrder, bounds: BmscBounds) -> None:
    """Test every applicable criterion shape against the unreduced prover on all ordered pairs."""
    for w, b in permutations(range(1 << n), 2):
        a, g = code_to_str(w, n), code_to_str(b, n)
        generic = bounds.prove_Z(a, g, reduce=False).proven
        assert bounds.prove_Z(a, g).proven == generic
        for rule in CRITERION_Z:
            for premise in criterion_premises(rule, a, g):
                assert bec.leq(*premise) == generic, (rule.value, a, g)


def test_derive_pair_thm3(rules: RuleEngine) -> None:
    """Test a Z pair derived from a half-length BEC premise."""
    rel = rules.derive_pair("110001", "101101", "Z")

    assert rel is not None
    assert rel.rule is Rule.THM3
    assert rel.premises[0].kind is Kind.BEC
    assert (rel.premises[0].worse, rel.premises[0].better) == ("11000", "01101")
    assert rules.replay(rel)


def test_derive_pair_thm4(rules: RuleEngine) -> None:
    """Test a P pair derived from the reduced Z-domain premise."""
    rel = rules.derive_pair("110100", "101111", Kind.P)

    assert rel is not None
    assert rel.rule is Rule.THM4
    assert rel.premises[0].statement() == "11010 ≼_BEC 01111"
    assert rules.replay(rel)


def test_derive_pair_undecided(rules: RuleEngine) -> None:
    """Test that the reverse of a strict order is not derived."""
    assert rules.derive_pair("10", "01", "Z") is None


def test_derive_pair_through_degradation(rules: RuleEngine) -> None:
    """Test that a degradation pair is lifted to Z."""
    rel = rules.derive_pair("011", "101", "Z")

    assert rel.rule is Rule.L1
    assert rel.premises[0].rule is Rule.DEG
    assert rel.premises[0].certificate == "bfs: 011 -> 101"
    assert rules.replay(rel)


def test_derive_pair_restricted_rules(rules: RuleEngine) -> None:
    """Test that excluding every applicable rule leaves the pair undecided."""
    assert rules.derive_pair("1100", "1011", "Z", rules=[Rule.DEG]) is None
    assert rules.derive_pair("1100", "1011", "Z", rules=[Rule.PROP10]).rule is Rule.PROP10


def test_replay_rejects_forged_relation(rules: RuleEngine) -> None:
    """Test that a valid leaf of the wrong shape fails replay."""
    forged = Relation(
        kind=Kind.Z, worse="10", better="01", rule=Rule.PROP9,
        premises=[Relation(kind=Kind.BEC, worse="01", better="10", rule=Rule.BEC)],
    )
    assert not rules.replay(forged)


def test_to_text_proof(rules: RuleEngine) -> None:
    """Test the indented text proof."""
    text = rules.derive_pair("110001", "101101", "Z").to_text()
    lines = text.splitlines()

    assert lines[0].startswith("110001 ≼_Z 101101  [thm3")
    assert lines[1].startswith("  11000 ≼_BEC 01101  [bec")


def test_saturate_n3(rules: RuleEngine) -> None:
    """Test that the DEG-incomparable pair of length 3 is ordered by Z."""
    store = rules.saturate(3)
    w, b = str_to_code("100"), str_to_code("011")

    assert store.complete
    assert store.has(w, b, KindMask.Z)
    assert store.has(w, b, KindMask.BEC)
    assert not store.has(w, b, KindMask.DEG)
    assert not store.has(b, w, KindMask.Z)
    assert rules.replay(rules.explain(Kind.Z, "100", "011"))


def test_saturate_subsumes_degradation(rules: RuleEngine) -> None:
    """Test that every DEG pair is also a Z and a P pair."""
    store = rules.saturate(3)
    for w, b in store.pairs(KindMask.DEG):
        assert store.has(w, b, KindMask.Z)
        assert store.has(w, b, KindMask.P)


def test_saturate_is_idempotent(settings: EngineSettings) -> None:
    """Test that saturating twice gives the same store."""
    first = RuleEngine(settings).saturate(3)
    second = RuleEngine(settings).saturate(3)
    assert first == second


def test_saturate_with_seed(rules: RuleEngine) -> None:
    """Test that an insertion rule fires on a seeded premise."""
    seed = Relation(kind=Kind.Z, worse="100", better="011", rule=Rule.PROP9)
    store = rules.saturate(5, rules=[Rule.R6], seeds=[seed])

    worse, better = rule_r6("100", "011", 0, 0, 0, 0, "1", 1)
    assert store.has(str_to_code(worse), str_to_code(better), KindMask.Z)
    assert store.rule(str_to_code(worse), str_to_code(better), KindMask.Z) is Rule.R6
    assert rules.stores[3].has(str_to_code("100"), str_to_code("011"), KindMask.Z)


def test_explain_unknown_pair(rules: RuleEngine) -> None:
    """Test that explaining a pair outside the store is a usage error."""
    rules.saturate(2)
    with pytest.raises(UsageError):
        rules.explain(Kind.Z, "11", "00")


def test_saturate_length_guard(rules: RuleEngine) -> None:
    """Test the resource guard on the length."""
    with pytest.raises(UsageError):
        rules.saturate(13)
    with pytest.raises(UsageError):
        rules.saturate(0)
