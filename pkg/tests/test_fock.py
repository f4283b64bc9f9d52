"""Occupation families, packing, and the affected/unaffected split."""

from __future__ import annotations

from itertools import combinations, product

import pytest

from cvqe.fock import (
    AffectedPartition,
    SystemIndexing,
    family_from_string,
    family_of,
    family_to_string,
    index_of,
    merge_subfamilies,
    partition_from_affected,
    split_family,
)


class TestSystemIndexing:
    def test_basic_lookup(self):
        ix = SystemIndexing(("0u", "0d", "1u", "1d"))
        assert ix.size == 4
        assert ix.position("0u") == 0
        assert ix.position("1d") == 3
        assert ix.positions(("1u", "0d")) == (2, 1)

    def test_labels_are_frozen_tuple(self):
        ix = SystemIndexing(["a", "b"])
        assert ix.labels == ("a", "b")

    def test_unknown_label(self):
        ix = SystemIndexing(("a", "b"))
        with pytest.raises(KeyError):
            ix.position("c")

    def test_duplicate_labels_rejected(self):
        with pytest.raises(ValueError):
            SystemIndexing(("a", "a"))

    def test_empty_register_rejected(self):
        with pytest.raises(ValueError):
            SystemIndexing(())

    @pytest.mark.parametrize("bad", ["", "a b", "a:b", "a+b", "a,b", "a[0]"])
    def test_label_characters_rejected(self, bad):
        with pytest.raises(ValueError):
            SystemIndexing((bad, "ok"))


class TestFamilyPacking:
    def test_big_endian_example(self):
        # first label is the most significant bit
        assert index_of((1, 0, 0, 1)) == 9
        assert index_of((0, 0, 0, 0)) == 0
        assert index_of((1, 1, 1, 1)) == 15
        assert index_of((0, 0, 1)) == 1

    def test_family_of_inverts(self):
        assert family_of(9, 4) == (1, 0, 0, 1)
        for q in (1, 2, 4, 6):
            for idx in range(1 << q):
                assert index_of(family_of(idx, q)) == idx

    def test_bad_occupation_rejected(self):
        with pytest.raises(ValueError):
            index_of((0, 2, 0))

    def test_index_out_of_range(self):
        with pytest.raises(ValueError):
            family_of(16, 4)
        with pytest.raises(ValueError):
            family_of(-1, 4)
        with pytest.raises(ValueError):
            family_of(0, 0)

    def test_string_round_trip(self):
        assert family_to_string((1, 0, 0, 1)) == "1001"
        assert family_from_string("1001") == (1, 0, 0, 1)
        for q in (1, 3, 5):
            for idx in range(1 << q):
                fam = family_of(idx, q)
                assert family_from_string(family_to_string(fam)) == fam

    @pytest.mark.parametrize("bad", ["", "102", "1 0", "ab"])
    def test_bad_strings_rejected(self, bad):
        with pytest.raises(ValueError):
            family_from_string(bad)


class TestAffectedPartition:
    def test_register_order_preserved(self):
        ix = SystemIndexing(("0u", "0d", "1u", "1d"))
        part = partition_from_affected(ix, {"1u", "0u"})
        assert part.affected == ("0u", "1u")
        assert part.unaffected == ("0d", "1d")
        assert part.affected_positions == (0, 2)
        assert part.unaffected_positions == (1, 3)
        assert part.affected_count == 2

    def test_empty_affected(self):
        ix = SystemIndexing(("a", "b"))
        part = partition_from_affected(ix, ())
        assert part.affected == ()
        assert part.unaffected == ("a", "b")

    def test_unknown_label_rejected(self):
        ix = SystemIndexing(("a", "b"))
        with pytest.raises(KeyError):
            partition_from_affected(ix, {"c"})

    def test_incomplete_cover_rejected(self):
        ix = SystemIndexing(("a", "b", "c"))
        with pytest.raises(ValueError):
            AffectedPartition(ix, ("a",), ("b",))
        with pytest.raises(ValueError):
            AffectedPartition(ix, ("a", "b"), ("b", "c"))

    def test_misordered_sublist_rejected(self):
        ix = SystemIndexing(("a", "b", "c"))
        with pytest.raises(ValueError):
            AffectedPartition(ix, ("b", "a"), ("c",))


class TestSplitMerge:
    def test_worked_example(self):
        ix = SystemIndexing(("0u", "0d", "1u", "1d"))
        part = partition_from_affected(ix, ("0u", "1u"))
        dot, vec = split_family((0, 1, 1, 0), part)
        assert dot == (0, 1)
        assert vec == (1, 0)
        assert merge_subfamilies((1, 0), (1, 0), part) == (1, 1, 0, 0)

    def test_length_checks(self):
        ix = SystemIndexing(("a", "b", "c"))
        part = partition_from_affected(ix, ("b",))
        with pytest.raises(ValueError):
            split_family((0, 1), part)
        with pytest.raises(ValueError):
            merge_subfamilies((1, 0), (0,), part)

    @pytest.mark.parametrize("q", [1, 2, 4, 6])
    def test_exhaustive_inverse(self, q):
        ix = SystemIndexing(tuple(f"m{i}" for i in range(q)))
        for r in range(q + 1):
            for affected in combinations(ix.labels, r):
                part = partition_from_affected(ix, affected)
                for bits in product((0, 1), repeat=q):
                    dot, vec = split_family(bits, part)
                    assert merge_subfamilies(dot, vec, part) == bits
                # the reverse composition over all subfamily pairs
                for dot in product((0, 1), repeat=r):
                    for vec in product((0, 1), repeat=q - r):
                        merged = merge_subfamilies(dot, vec, part)
                        assert split_family(merged, part) == (dot, vec)
