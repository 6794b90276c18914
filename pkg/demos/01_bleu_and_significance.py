#!/usr/bin/env python3
# Similarity scoring and significance testing, the two primitives everything
# else builds on. Run top to bottom: python demos/01_bleu_and_significance.py

from drtt import corpus_bleu, paired_bootstrap, sentence_bleu

# --- sentence BLEU -----------------------------------------------------------
# scores live in [0, 1]; multiply by 100 for the familiar scale

ref = "the cat sat on the mat".split()
print("identical   ", sentence_bleu(ref, ref).value)            # 1.0
print("one token   ", sentence_bleu("the cat sat on the rug".split(), ref).value)
print("short hyp   ", sentence_bleu("the cat sat".split(), ref).value)
print("empty hyp   ", sentence_bleu([], ref).value)              # 0.0

# orders >= 2 are add-one smoothed, so short perturbed sentences still get a
# usable signal instead of collapsing to zero
score = sentence_bleu("the cat sat".split(), ref)
print("precisions  ", score.precisions)
print("brevity     ", score.brevity_penalty)

# --- corpus BLEU -------------------------------------------------------------
# micro-aggregated counts, one brevity penalty from total lengths, no smoothing

hyps = [
    "the cat sat on the mat".split(),
    "a dog barked all night long".split(),
]
refs = [
    "the cat sat on the mat".split(),
    "a dog barked through the night".split(),
]
print("corpus      ", corpus_bleu(hyps, refs).value)

# --- paired bootstrap --------------------------------------------------------
# resamples sentences with replacement; p is the fraction of resamples where
# system A fails to beat system B, so identical systems give exactly 1.0

system_a = [list(r) for r in refs]
system_b = [["the", "cat", "sat", "on", "a", "rug"], ["a", "dog", "howled", "at", "dawn", "today"]]
result = paired_bootstrap(system_a, system_b, refs, n_resamples=1000, seed=7)
print("p_value     ", result.p_value)
print("delta       ", result.delta)   # corpus score A minus B
