#!/usr/bin/env python3
# The doubly round-trip criterion end to end, on mock backends.
#
# The point of the second (target-side) round trip: a big source-side
# reconstruction loss can come from the backward model rather than the model
# under attack. Such "fake" adversaries pass the single-trip criterion and
# are filtered by the doubly round-trip one.

from drtt import (
    Backends,
    BackendHandle,
    CriterionConfig,
    DictionaryTranslator,
    GenConfig,
    LossyTranslator,
    TableMlm,
    TableTmlm,
    bil_adv_gen,
    build_mapping,
    corpus_from_token_lists,
    drtt_accept,
    extract_phrases,
    generate_corpus,
    rtt_accept,
    score_pair,
)
from drtt.align import AlignmentMatrix

en_fr = {"bag": "sac", "huge": "énorme", "light": "léger"}
fr_en = {v: k for k, v in en_fr.items()}
pair = corpus_from_token_lists([["bag", "huge"]], [["sac", "énorme"]], "en", "fr")[0]
cfg = CriterionConfig(beta=0.5, gamma=0.5)

# --- scenario 1: weak BACKWARD model -> fake adversary ------------------------
fwd = BackendHandle("translator", DictionaryTranslator(en_fr), "src2tgt")
bwd = BackendHandle("translator", LossyTranslator(fr_en, droplist=["light"]), "tgt2src")
scores = score_pair(pair, ["bag", "light"], fwd, bwd)
print("fake:      d_src=%.3f d_tgt=%.3f" % (scores.d_src, scores.d_tgt))
print("           single-trip accepts:", rtt_accept(scores, cfg))
print("           doubly-trip accepts:", drtt_accept(scores, cfg))

# --- scenario 2: weak FORWARD model -> authentic adversary --------------------
fwd = BackendHandle("translator", LossyTranslator(en_fr, droplist=["léger"]), "src2tgt")
bwd = BackendHandle("translator", DictionaryTranslator(fr_en), "tgt2src")
scores = score_pair(pair, ["bag", "light"], fwd, bwd)
print("authentic: d_src=%.3f d_tgt=%.3f" % (scores.d_src, scores.d_tgt))
print("           single-trip accepts:", rtt_accept(scores, cfg))
print("           doubly-trip accepts:", drtt_accept(scores, cfg))

# --- full generator: synchronized phrasal replacement -------------------------
# the masked-LM mock proposes source replacements; the source-conditioned mock
# rewrites the aligned target phrase so the pair stays parallel

backends = Backends(
    fwd=BackendHandle("translator", LossyTranslator(en_fr, droplist=["léger"]), "src2tgt"),
    bwd=BackendHandle("translator", DictionaryTranslator(fr_en), "tgt2src"),
    mmlm=BackendHandle("mmlm", TableMlm({"huge": ["light"]})),
    tmlm=BackendHandle("tmlm", TableTmlm({"light": "léger"})),
)

links = AlignmentMatrix(frozenset({(0, 0), (1, 1)}), 2, 2)
mapping = build_mapping(pair, extract_phrases(pair, links))
status, candidate = bil_adv_gen(pair, mapping, backends, GenConfig(beta=0.5, gamma=0.5))
print("status   :", status)
print("x        :", pair.src.text())
print("x_delta  :", candidate.x_delta.text())
print("y        :", pair.tgt.text())
print("y_delta  :", candidate.y_delta.text())
print("trace    :", candidate.trace)

# corpus-level driver; writes the JSONL sidecar used for gamma sweeps
corpus = corpus_from_token_lists([["bag", "huge"]], [["sac", "énorme"]], "en", "fr")
accepted, stats, records = generate_corpus(
    corpus, backends, GenConfig(beta=0.5, gamma=0.5), mappings={0: mapping}
)
print("stats    :", stats.as_dict())
print("record   :", records[0])
