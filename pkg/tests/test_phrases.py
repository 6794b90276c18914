import random

import pytest

from drtt.align import AlignmentMatrix
from drtt.corpus import corpus_from_token_lists
from drtt.phrases import (
    SpanPair,
    build_mapping,
    extract_phrases,
    read_phrase_table,
    write_phrase_table,
)

from oracles import bf_consistent_phrases


def make_pair(src_len, tgt_len):
    corpus = corpus_from_token_lists(
        [[f"s{i}" for i in range(src_len)]], [[f"t{j}" for j in range(tgt_len)]], "a", "b"
    )
    return corpus[0]


def spans(phrase_pairs):
    return {(sp.src_start, sp.src_end, sp.tgt_start, sp.tgt_end) for sp in phrase_pairs}


class TestExtractPhrases:
    def test_monotone_diagonal(self):
        pair = make_pair(2, 2)
        align = AlignmentMatrix(frozenset({(0, 0), (1, 1)}), 2, 2)
        assert spans(extract_phrases(pair, align)) == {
            (0, 1, 0, 1),
            (1, 2, 1, 2),
            (0, 2, 0, 2),
        }

    def test_empty_alignment(self):
        pair = make_pair(3, 3)
        align = AlignmentMatrix(frozenset(), 3, 3)
        assert extract_phrases(pair, align) == []

    def test_dimension_mismatch(self):
        pair = make_pair(2, 2)
        align = AlignmentMatrix(frozenset({(0, 0)}), 3, 2)
        with pytest.raises(ValueError):
            extract_phrases(pair, align)

    def test_unaligned_target_extensions(self):
        # t1 unaligned: spans may stretch over it
        pair = make_pair(2, 3)
        align = AlignmentMatrix(frozenset({(0, 0), (1, 2)}), 2, 3)
        got = spans(extract_phrases(pair, align))
        assert (0, 1, 0, 1) in got
        assert (0, 1, 0, 2) in got  # extended over unaligned t1
        assert (1, 2, 1, 3) in got
        assert (0, 2, 0, 3) in got

    def test_consistency_predicate_holds(self):
        rng = random.Random(3)
        for _ in range(100):
            m, n = rng.randint(1, 6), rng.randint(1, 6)
            links = frozenset(
                (i, j) for i in range(m) for j in range(n) if rng.random() < 0.35
            )
            align = AlignmentMatrix(links, m, n)
            pair = make_pair(m, n)
            for sp in extract_phrases(pair, align):
                inside = [
                    (i, j)
                    for (i, j) in links
                    if sp.src_start <= i < sp.src_end and sp.tgt_start <= j < sp.tgt_end
                ]
                assert inside
                for (i, j) in links:
                    in_src = sp.src_start <= i < sp.src_end
                    in_tgt = sp.tgt_start <= j < sp.tgt_end
                    assert in_src == in_tgt

    def test_matches_brute_force_enumeration(self):
        rng = random.Random(11)
        for _ in range(500):
            m, n = rng.randint(1, 6), rng.randint(1, 6)
            links = frozenset(
                (i, j) for i in range(m) for j in range(n) if rng.random() < 0.3
            )
            pair = make_pair(m, n)
            align = AlignmentMatrix(links, m, n)
            got = spans(extract_phrases(pair, align))
            want = bf_consistent_phrases(m, n, links, max_len=4)
            assert got == want

    def test_max_len_respected(self):
        pair = make_pair(6, 6)
        links = frozenset((i, i) for i in range(6))
        align = AlignmentMatrix(links, 6, 6)
        for sp in extract_phrases(pair, align, max_len=2):
            assert sp.src_end - sp.src_start <= 2
            assert sp.tgt_end - sp.tgt_start <= 2


class TestBuildMapping:
    def test_monotone_two_by_two(self):
        pair = make_pair(2, 2)
        align = AlignmentMatrix(frozenset({(0, 0), (1, 1)}), 2, 2)
        mapping = build_mapping(pair, extract_phrases(pair, align))
        assert mapping.segments == ((0, 1), (1, 2))
        assert mapping.p[0] == (0, 1)
        assert mapping.p[1] == (1, 2)

    def test_no_phrases_all_absent(self):
        pair = make_pair(3, 3)
        mapping = build_mapping(pair, [])
        assert mapping.segments == ((0, 1), (1, 2), (2, 3))
        assert all(mapping.p[i] is None for i in range(3))
        assert mapping.mapped_segments() == []

    def test_partial_cover(self):
        pair = make_pair(4, 4)
        mapping = build_mapping(pair, [SpanPair(1, 3, 0, 2)])
        assert mapping.segments == ((0, 1), (1, 3), (3, 4))
        assert mapping.p[0] is None
        assert mapping.p[1] == (0, 2)
        assert mapping.p[2] is None

    def test_segments_partition_source(self):
        rng = random.Random(9)
        for _ in range(200):
            m, n = rng.randint(1, 6), rng.randint(1, 6)
            links = frozenset(
                (i, j) for i in range(m) for j in range(n) if rng.random() < 0.4
            )
            pair = make_pair(m, n)
            align = AlignmentMatrix(links, m, n)
            mapping = build_mapping(pair, extract_phrases(pair, align))
            covered = []
            for start, end in mapping.segments:
                covered.extend(range(start, end))
            assert covered == list(range(m))
            for i, span in mapping.p.items():
                if span is not None:
                    assert 0 <= span[0] < span[1] <= n

    def test_shortest_strategy_prefers_small_spans(self):
        pair = make_pair(2, 2)
        pairs = [SpanPair(0, 2, 0, 2), SpanPair(0, 1, 0, 1), SpanPair(1, 2, 1, 2)]
        mapping = build_mapping(pair, pairs, strategy="shortest")
        assert mapping.segments == ((0, 1), (1, 2))

    def test_longest_strategy_prefers_big_spans(self):
        pair = make_pair(2, 2)
        pairs = [SpanPair(0, 2, 0, 2), SpanPair(0, 1, 0, 1), SpanPair(1, 2, 1, 2)]
        mapping = build_mapping(pair, pairs, strategy="longest")
        assert mapping.segments == ((0, 2),)
        assert mapping.p[0] == (0, 2)


class TestPhraseTableIo:
    def test_round_trip(self, tmp_path):
        rows = [(0, SpanPair(0, 1, 0, 2)), (1, SpanPair(2, 4, 1, 3))]
        path = tmp_path / "phrases.tsv"
        write_phrase_table(rows, path)
        assert read_phrase_table(path) == rows
