"""Bilingual adversarial pair generation and MT robustness evaluation.

The toolkit builds on the doubly round-trip translation criterion: a
perturbed source is an authentic adversarial example for a translation
model only when its source-side round trip degrades while the target-side
round trip stays stable, which rules out damage caused by the auxiliary
backward model. All model inference goes through pluggable backends, so
every pipeline runs offline against deterministic mocks.
"""

from .advgen import (
    Backends,
    Candidate,
    GenConfig,
    GenStats,
    bil_adv_gen,
    build_corpus_mappings,
    generate_corpus,
    select_best_candidate,
)
from .align import (
    AlignmentMatrix,
    LexiconTable,
    read_pharaoh,
    symmetrize,
    train_ibm1,
    viterbi_align,
    write_pharaoh,
)
from .backends import (
    BackendError,
    BackendHandle,
    DictionaryTranslator,
    FillCandidate,
    FillRequest,
    IdentityTranslator,
    LossyTranslator,
    TableMlm,
    TableTmlm,
    fill,
    open_backend,
    translate,
    translate_one,
)
from .corpus import (
    Corpus,
    ParallelPair,
    Sentence,
    corpus_from_token_lists,
    detokenize,
    load_parallel,
    load_tsv,
    tokenize,
)
from .criteria import (
    CriterionConfig,
    RttScores,
    UnusableSampleError,
    d_src,
    d_tgt,
    drtt_accept,
    mp_accept,
    rtt_accept,
    score_pair,
)
from .evaluation import (
    EvalReport,
    attack_eval,
    compare_systems,
    filter_records,
    forward_eval,
    rtt_eval,
)
from .metrics import BleuScore, SignificanceResult, corpus_bleu, paired_bootstrap, sentence_bleu
from .noise import EmbeddingTable, NoiseResources, NoiseSpec, load_embeddings, perturb, perturb_corpus
from .phrases import PhraseMapping, SpanPair, build_mapping, extract_phrases

__version__ = "0.1.0"
