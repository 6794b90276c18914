#!/usr/bin/env python3
# Word alignment by EM and phrase-pair extraction: the machinery that decides
# which source phrase maps to which target phrase before any replacement.

from drtt import (
    build_mapping,
    corpus_from_token_lists,
    extract_phrases,
    symmetrize,
    train_ibm1,
    viterbi_align,
    write_pharaoh,
)

# a tiny parallel corpus; real runs load files with load_parallel()
corpus = corpus_from_token_lists(
    [
        ["the", "house", "is", "small"],
        ["the", "book", "is", "old"],
        ["the", "house", "is", "old"],
    ],
    [
        ["das", "haus", "ist", "klein"],
        ["das", "buch", "ist", "alt"],
        ["das", "haus", "ist", "alt"],
    ],
    "en",
    "de",
)

# --- lexical EM with a diagonal prior ---------------------------------------
# tension 0 would be the plain uniform model; the default 4.0 prefers links
# near the diagonal, and p_null absorbs function words with no counterpart

fwd_lex = train_ibm1(corpus, iterations=5, diagonal_tension=4.0, p_null=0.08)
rev_lex = train_ibm1(corpus.swapped(), iterations=5, diagonal_tension=4.0, p_null=0.08)
print("log-likelihood per iteration:", [round(x, 4) for x in fwd_lex.ll_history])
print("t(haus|house) =", round(fwd_lex.t[("house", "haus")], 4))
print("t(das|the)    =", round(fwd_lex.t[("the", "das")], 4))

# --- Viterbi alignment + symmetrization --------------------------------------

pair = corpus[0]
fwd_align = viterbi_align(pair, fwd_lex)
rev_align = viterbi_align(pair.swapped(), rev_lex)
merged = symmetrize(fwd_align, rev_align, "grow_diag_final_and")
print("forward links :", write_pharaoh(fwd_align))
print("symmetrized   :", write_pharaoh(merged))

# --- consistent phrase pairs and the segment mapping -------------------------
# a span pair is kept when no alignment link crosses its boundary; the mapping
# greedily covers the source with the shortest spans so more segments are
# independently replaceable

phrase_pairs = extract_phrases(pair, merged, max_len=4)
for sp in phrase_pairs[:6]:
    src = " ".join(pair.src.tokens[sp.src_start : sp.src_end])
    tgt = " ".join(pair.tgt.tokens[sp.tgt_start : sp.tgt_end])
    print(f"  [{src}] <-> [{tgt}]")

mapping = build_mapping(pair, phrase_pairs)
print("segments:", mapping.segments)
print("p:", mapping.p)
