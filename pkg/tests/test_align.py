import random

import pytest

from drtt.align import (
    AlignmentMatrix,
    load_lexicon,
    read_pharaoh,
    save_lexicon,
    symmetrize,
    train_ibm1,
    viterbi_align,
    write_pharaoh,
)
from drtt.corpus import corpus_from_token_lists

from oracles import hand_em, hand_viterbi

GERMAN_TOY = corpus_from_token_lists(
    [["the", "house"], ["the", "book"]],
    [["das", "haus"], ["das", "buch"]],
    "en",
    "de",
)


def random_corpus(rng, n_pairs=8, vocab=6, max_len=5):
    src = [[f"s{rng.randint(0, vocab)}" for _ in range(rng.randint(1, max_len))] for _ in range(n_pairs)]
    tgt = [[f"t{rng.randint(0, vocab)}" for _ in range(rng.randint(1, max_len))] for _ in range(n_pairs)]
    return corpus_from_token_lists(src, tgt, "a", "b")


class TestTrainIbm1:
    def test_single_pair_forced_probability(self):
        corpus = corpus_from_token_lists([["a"]], [["b"]], "x", "y")
        lex = train_ibm1(corpus, iterations=5, diagonal_tension=0.0, p_null=0.0)
        assert lex.t[("a", "b")] == pytest.approx(1.0)

    def test_german_toy_matches_hand_em_oracle(self):
        lex = train_ibm1(GERMAN_TOY, iterations=10, diagonal_tension=0.0, p_null=0.0)
        # frozen from the hand-rolled EM oracle, run before the build
        assert lex.t[("the", "das")] == pytest.approx(0.982003652902086, abs=1e-6)
        assert lex.t[("the", "haus")] == pytest.approx(0.008998173548957, abs=1e-6)
        assert lex.t[("the", "buch")] == pytest.approx(0.008998173548957, abs=1e-6)
        assert lex.t[("house", "haus")] == pytest.approx(0.9036886221911258, abs=1e-6)
        assert lex.t[("house", "das")] == pytest.approx(0.09631137780887425, abs=1e-6)
        assert lex.t[("book", "buch")] == pytest.approx(0.9036886221911258, abs=1e-6)
        assert lex.t[("the", "das")] > lex.t[("the", "haus")]
        assert lex.t[("the", "das")] > lex.t[("the", "buch")]
        # the oracle and the library agree on the whole table
        oracle_t, oracle_ll = hand_em(
            [(list(p.src.tokens), list(p.tgt.tokens)) for p in GERMAN_TOY], 10
        )
        for key, val in oracle_t.items():
            assert lex.t.get(key, 0.0) == pytest.approx(val, abs=1e-6)
        assert lex.ll_history == pytest.approx(oracle_ll, abs=1e-9)

    def test_rows_normalize(self):
        rng = random.Random(3)
        for _ in range(10):
            corpus = random_corpus(rng)
            lex = train_ibm1(corpus, iterations=3, diagonal_tension=2.0, p_null=0.08)
            rows = {}
            for (s, _), p in lex.t.items():
                rows[s] = rows.get(s, 0.0) + p
                assert p >= 0.0
            for s, total in rows.items():
                assert total == pytest.approx(1.0, abs=1e-6)

    def test_log_likelihood_monotone(self):
        rng = random.Random(7)
        for trial in range(20):
            corpus = random_corpus(rng)
            tension = rng.choice([0.0, 2.0, 4.0])
            p_null = rng.choice([0.0, 0.08])
            lex = train_ibm1(corpus, iterations=4, diagonal_tension=tension, p_null=p_null)
            for before, after in zip(lex.ll_history, lex.ll_history[1:]):
                assert after >= before - 1e-9

    def test_empty_corpus_raises(self):
        with pytest.raises(ValueError):
            train_ibm1(corpus_from_token_lists([], [], "a", "b"))


class TestViterbi:
    def test_single_link(self):
        corpus = corpus_from_token_lists([["a"]], [["b"]], "x", "y")
        lex = train_ibm1(corpus, 5, 0.0, 0.0)
        matrix = viterbi_align(corpus[0], lex, 0.0, 0.0)
        assert matrix.links == {(0, 0)}

    def test_repeated_target_tokens_align_independently(self):
        corpus = corpus_from_token_lists([["a"]], [["b", "b"]], "x", "y")
        lex = train_ibm1(corpus, 5, 0.0, 0.0)
        matrix = viterbi_align(corpus[0], lex, 0.0, 0.0)
        assert matrix.links == {(0, 0), (0, 1)}

    def test_german_toy_matches_oracle_viterbi(self):
        lex = train_ibm1(GERMAN_TOY, iterations=10, diagonal_tension=0.0, p_null=0.0)
        oracle_t, _ = hand_em(
            [(list(p.src.tokens), list(p.tgt.tokens)) for p in GERMAN_TOY], 10
        )
        for pair in GERMAN_TOY:
            got = viterbi_align(pair, lex, 0.0, 0.0)
            want = hand_viterbi(list(pair.src.tokens), list(pair.tgt.tokens), oracle_t)
            assert got.links == want

    def test_deterministic(self):
        lex = train_ibm1(GERMAN_TOY, 5)
        a = viterbi_align(GERMAN_TOY[0], lex)
        b = viterbi_align(GERMAN_TOY[0], lex)
        assert a == b

    def test_unknown_tokens_use_floor(self):
        corpus = corpus_from_token_lists([["a"]], [["b"]], "x", "y")
        lex = train_ibm1(corpus, 2, 0.0, 0.0)
        unk = corpus_from_token_lists([["zz", "a"]], [["qq"]], "x", "y")
        matrix = viterbi_align(unk[0], lex, 0.0, 0.0)
        # both sources hit the floor; the smaller index wins the tie
        assert matrix.links == {(0, 0)}


def _random_matrix(rng, max_side=6, density=0.3):
    m = rng.randint(1, max_side)
    n = rng.randint(1, max_side)
    links = {
        (i, j) for i in range(m) for j in range(n) if rng.random() < density
    }
    return AlignmentMatrix(frozenset(links), m, n)


class TestSymmetrize:
    def test_identical_single_link(self):
        fwd = AlignmentMatrix(frozenset({(0, 0)}), 1, 1)
        rev = AlignmentMatrix(frozenset({(0, 0)}), 1, 1)
        for heuristic in ("intersection", "union", "grow_diag_final_and"):
            assert symmetrize(fwd, rev, heuristic).links == {(0, 0)}

    def test_set_semantics(self):
        fwd = AlignmentMatrix(frozenset({(0, 0)}), 2, 2)
        rev = AlignmentMatrix(frozenset({(1, 1)}), 2, 2)  # transposes to (1, 1)
        assert symmetrize(fwd, rev, "intersection").links == frozenset()
        assert symmetrize(fwd, rev, "union").links == {(0, 0), (1, 1)}

    def test_dimension_mismatch(self):
        fwd = AlignmentMatrix(frozenset(), 2, 3)
        rev = AlignmentMatrix(frozenset(), 2, 3)  # should be 3x2
        with pytest.raises(ValueError):
            symmetrize(fwd, rev)

    def test_containment_chain_randomized(self):
        rng = random.Random(23)
        for _ in range(500):
            m = rng.randint(1, 6)
            n = rng.randint(1, 6)
            fwd = AlignmentMatrix(
                frozenset((i, j) for i in range(m) for j in range(n) if rng.random() < 0.3),
                m,
                n,
            )
            rev = AlignmentMatrix(
                frozenset((j, i) for i in range(m) for j in range(n) if rng.random() < 0.3),
                n,
                m,
            )
            inter = symmetrize(fwd, rev, "intersection").links
            gdfa = symmetrize(fwd, rev, "grow_diag_final_and").links
            union = symmetrize(fwd, rev, "union").links
            assert inter <= gdfa <= union


class TestPharaoh:
    def test_write(self):
        matrix = AlignmentMatrix(frozenset({(0, 1), (2, 0)}), 3, 2)
        assert write_pharaoh(matrix) == "0-1 2-0"

    def test_read_empty(self):
        assert read_pharaoh("", 3, 2).links == frozenset()

    def test_round_trip_random(self):
        rng = random.Random(41)
        for _ in range(100):
            matrix = _random_matrix(rng)
            back = read_pharaoh(write_pharaoh(matrix), matrix.src_len, matrix.tgt_len)
            assert back == matrix

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            read_pharaoh("5-0", 2, 2)

    def test_garbage(self):
        with pytest.raises(ValueError):
            read_pharaoh("1:2", 3, 3)


class TestLexiconIo:
    def test_round_trip(self, tmp_path):
        lex = train_ibm1(GERMAN_TOY, 3)
        path = tmp_path / "lex.tsv"
        save_lexicon(lex, path)
        back = load_lexicon(path)
        assert back.t == pytest.approx(lex.t)
        assert back.src_vocab == lex.src_vocab
        assert back.tgt_vocab == lex.tgt_vocab
