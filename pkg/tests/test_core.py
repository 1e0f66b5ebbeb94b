from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qaskit import limits
from qaskit.core import (
    AccessStructure,
    PlayerSet,
    authorized_table,
    default_players,
    is_authorized,
    is_maximal,
    minimize,
    tokenize,
    unauthorized_split,
    validate_quantum,
)
from qaskit.errors import SizeLimitError, StructureError
from qaskit.io import dumps, load_structure, structure_from_dict, structure_to_dict

from .conftest import quantum_structures
from .oracles import as_sets, authorized, complement_exactly_one, subsets

P5 = default_players(5)
FOUR_SET = AccessStructure.parse("P1P2 P1P4P5 P2P3P5 P2P3P4", 5)


def ps(text: str, players=P5) -> PlayerSet:
    return PlayerSet.of(players, text)


class TestPlayerSet:
    def test_label_and_complement(self):
        a = ps("P1P4P5")
        assert a.names == ["P1", "P4", "P5"]
        assert a.complement().label == "P2P3"
        assert len(a) == 3

    def test_set_operations(self):
        a, b = ps("P1P2"), ps("P2P3")
        assert (a & b).label == "P2"
        assert (a | b).label == "P1P2P3"
        assert (a & b) <= a
        assert not a.issubset(b)

    def test_bits_outside_universe(self):
        with pytest.raises(StructureError):
            PlayerSet(1 << 5, P5)

    def test_mixed_universes(self):
        with pytest.raises(StructureError):
            ps("P1") & PlayerSet.of(default_players(3), "P1")

    def test_tokenize_prefers_long_names(self):
        universe = tuple(f"P{i}" for i in range(1, 13))
        assert tokenize("P1P12P2", universe) == ["P1", "P12", "P2"]

    def test_unknown_player(self):
        with pytest.raises(StructureError, match="unknown player"):
            ps("P1P9")


class TestMinimize:
    def test_superset_absorbed(self):
        assert minimize([ps("P1P2"), ps("P1P2P3")]).labels() == ["P1P2"]

    def test_identity_on_antichain(self):
        assert minimize([ps("P1P2")]).labels() == ["P1P2"]

    def test_order_independent(self):
        shuffled = [ps(x) for x in ("P2P3P4", "P1P4P5", "P2P3P5", "P1P2")]
        assert minimize(shuffled) == FOUR_SET
        assert FOUR_SET.r == 4

    def test_empty_family(self):
        with pytest.raises(StructureError, match="no authorized sets"):
            minimize([])

    def test_constructor_rejects_non_antichain(self):
        with pytest.raises(StructureError):
            AccessStructure(P5, (0b11, 0b111))

    @given(quantum_structures(max_players=8))
    def test_idempotent(self, gamma):
        again = minimize(gamma.minimal_sets)
        assert again == gamma


class TestAuthorization:
    def test_examples(self):
        assert is_authorized(FOUR_SET, ps("P1P2P3"))
        assert not is_authorized(FOUR_SET, ps("P1P3"))
        assert not is_authorized(FOUR_SET, PlayerSet(0, P5))

    @settings(max_examples=60)
    @given(quantum_structures(max_players=7), st.integers(0, 127), st.integers(0, 127))
    def test_monotone(self, gamma, a, b):
        a &= gamma.full
        b &= gamma.full
        if gamma.authorizes(a):
            assert gamma.authorizes(a | b)

    @given(quantum_structures(max_players=8))
    def test_table_matches_direct_check(self, gamma):
        table = authorized_table(gamma)
        minimal = as_sets(gamma.masks)
        for a in subsets(gamma.n):
            assert table[sum(1 << i for i in a)] == authorized(minimal, a)


class TestValidity:
    def test_four_set_valid(self):
        assert validate_quantum(FOUR_SET).valid

    def test_disjoint_pair(self):
        gamma = AccessStructure.parse("P1P2 P3P4", 4)
        report = validate_quantum(gamma)
        assert not report.valid
        assert [s.label for s in report.witness] == ["P1P2", "P3P4"]
        assert report.to_dict()["witness"] == [["P1", "P2"], ["P3", "P4"]]

    def test_single_player(self):
        assert validate_quantum(AccessStructure.parse("P1", 1)).valid

    @settings(max_examples=60)
    @given(quantum_structures(max_players=8))
    def test_no_set_and_complement_both_authorized(self, gamma):
        table = authorized_table(gamma)
        for m in range(1 << gamma.n):
            assert not (table[m] and table[gamma.full & ~m])


class TestSplit:
    def test_four_set_candidates(self):
        split = unauthorized_split(FOUR_SET)
        assert sorted(s.label for s in split.a2) == sorted(
            ["P1P3", "P2P4", "P2P5", "P2P4P5", "P1P3P5", "P1P3P4"]
        )

    def test_majority_has_empty_a2(self):
        gamma = AccessStructure.from_masks(P5, [m for m in range(32) if bin(m).count("1") == 3])
        assert unauthorized_split(gamma).a2 == ()

    def test_single_pair_on_two_players(self):
        split = unauthorized_split(AccessStructure.parse("P1P2", 2))
        assert split.a1 == ()
        assert sorted(s.label for s in split.a2) == ["P1", "P2"]

    @settings(max_examples=60)
    @given(quantum_structures(max_players=7))
    def test_partition_and_complement_closure(self, gamma):
        split = unauthorized_split(gamma)
        a1 = {s.bits for s in split.a1}
        a2 = {s.bits for s in split.a2}
        unauth = {m for m in range(1, 1 << gamma.n) if not gamma.authorizes(m)}
        assert a1 | a2 == unauth
        assert not a1 & a2
        for m in a1:
            assert any(m & g == 0 for g in gamma.masks)
        for m in a2:
            assert all(m & g for g in gamma.masks)
            assert gamma.full & ~m in a2

    def test_enumeration_bound(self, monkeypatch):
        monkeypatch.setattr(limits, "LIMITS", limits.Limits(enumeration=4))
        with pytest.raises(SizeLimitError, match="enumeration"):
            unauthorized_split(FOUR_SET)


class TestMaximal:
    def test_examples(self):
        assert not is_maximal(FOUR_SET)
        assert is_maximal(AccessStructure.parse("P1P2 P1P3 P1P4P5 P2P3P5 P2P3P4", 5))
        assert is_maximal(AccessStructure.parse("P1P2 P1P3 P2P3", 3))

    @settings(max_examples=80)
    @given(quantum_structures(max_players=8, max_sets=12))
    def test_agrees_with_complement_oracle(self, gamma):
        assert is_maximal(gamma) == complement_exactly_one(gamma.masks, gamma.n)


class TestJson:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "g.json"
        path.write_text(dumps(structure_to_dict(FOUR_SET)))
        assert load_structure(path) == FOUR_SET

    def test_duplicates_warn(self, caplog):
        doc = {"players": ["A", "B"], "minimal_authorized_sets": [["A"], ["A"]]}
        assert structure_from_dict(doc).labels() == ["A"]
        assert "duplicate" in caplog.text

    def test_unknown_player(self):
        with pytest.raises(StructureError, match="unknown player"):
            structure_from_dict({"players": ["A"], "minimal_authorized_sets": [["B"]]})

    def test_malformed(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(StructureError, match="malformed"):
            load_structure(path)

    def test_dumps_is_canonical(self):
        assert json.loads(dumps(structure_to_dict(FOUR_SET))) == structure_to_dict(FOUR_SET)
        assert dumps({"b": 1, "a": 2}).index('"a"') < dumps({"b": 1, "a": 2}).index('"b"')


class TestLimits:
    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("QASKIT_LIMITS", "support=5,enumeration=3")
        parsed = limits._from_env()
        assert parsed.support == 5 and parsed.enumeration == 3

    def test_env_unknown_key(self, monkeypatch):
        monkeypatch.setenv("QASKIT_LIMITS", "bogus=1")
        with pytest.raises(SizeLimitError, match="unknown key"):
            limits._from_env()

    def test_player_cap(self):
        with pytest.raises(SizeLimitError):
            AccessStructure(tuple(f"Q{i}" for i in range(25)), (1,))
