"""Bilingual adversarial pair generation.

The generator perturbs a source sentence by synchronized phrasal
replacement: at each step it masks a not-yet-attacked source segment, asks
the monolingual mask-fill backend for candidates, keeps the one that
degrades the source round trip the most, and then rewrites the aligned
target phrase with the source-conditioned fill backend so the pair stays
parallel. A final doubly round-trip check decides acceptance.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .align import train_ibm1, viterbi_align, symmetrize
from .backends import BackendError, BackendHandle, FillCandidate, FillRequest, fill, translate_one
from .corpus import Corpus, ParallelPair, Sentence, detokenize
from .criteria import (
    CriterionConfig,
    RttScores,
    UnusableSampleError,
    drtt_accept,
    score_pair,
    sim,
)
from .phrases import PhraseMapping, build_mapping, extract_phrases

ACCEPTED = "accepted"
REJECTED = "rejected"
UNUSABLE = "unusable"

SEARCH_MODES = ("global", "left_to_right")
BUDGET_UNITS = ("segments", "tokens")


@dataclass(frozen=True)
class GenConfig:
    beta: float = 0.5
    gamma: float = 0.5
    c: float = 0.2
    k: int = 1
    max_len: int = 4
    strategy: str = "shortest"
    search: str = "global"
    budget_unit: str = "segments"
    seed: int = 0
    epsilon: float = 1e-6

    def __post_init__(self):
        if not (0.0 < self.c <= 1.0):
            raise ValueError("replacement ratio c must lie in (0, 1]")
        if self.k < 1:
            raise ValueError("candidate count k must be >= 1")
        if self.search not in SEARCH_MODES:
            raise ValueError(f"unknown search mode {self.search!r}")
        if self.budget_unit not in BUDGET_UNITS:
            raise ValueError(f"unknown budget unit {self.budget_unit!r}")

    def criterion(self) -> CriterionConfig:
        return CriterionConfig(
            beta=self.beta, gamma=self.gamma, epsilon_denominator=self.epsilon
        )


@dataclass(frozen=True)
class Backends:
    fwd: BackendHandle
    bwd: BackendHandle
    mmlm: BackendHandle
    tmlm: BackendHandle


@dataclass(frozen=True)
class TraceStep:
    segment: int
    src_from: tuple[str, ...]
    src_to: tuple[str, ...]
    tgt_from: tuple[str, ...]
    tgt_to: tuple[str, ...]


@dataclass
class Candidate:
    pair_id: int
    x_delta: Sentence
    y_delta: Sentence
    scores: RttScores | None
    trace: list[TraceStep]
    accepted: bool


@dataclass
class GenStats:
    accepted: int = 0
    rejected: int = 0
    unusable: int = 0
    errored: int = 0

    def as_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "rejected": self.rejected,
            "unusable": self.unusable,
            "errored": self.errored,
        }


def _round_trip_sim(tokens, fwd, bwd, memo):
    key = tuple(tokens)
    if key not in memo:
        forward = translate_one(fwd, list(tokens))
        back = translate_one(bwd, forward)
        memo[key] = sim(list(tokens), back)
    return memo[key]


def select_best_candidate(
    x_tokens: Sequence[str],
    span: tuple[int, int],
    candidates: Sequence[FillCandidate],
    fwd: BackendHandle,
    bwd: BackendHandle,
    epsilon: float = 1e-6,
    memo: dict | None = None,
) -> tuple[FillCandidate, float, int]:
    """Pick the candidate whose substitution degrades the round trip most.

    Returns (candidate, degradation, rank); ties go to the lower rank, i.e.
    the candidate the fill backend scored higher.
    """
    if not candidates:
        raise ValueError("candidates must not be empty")
    if memo is None:
        memo = {}
    base = _round_trip_sim(x_tokens, fwd, bwd, memo)
    if base < epsilon:
        raise UnusableSampleError(
            f"round trip of the current sentence scored {base}, below {epsilon}"
        )
    x = list(x_tokens)
    best = None
    for rank, cand in enumerate(candidates):
        x_cand = x[: span[0]] + list(cand.tokens) + x[span[1] :]
        cand_sim = _round_trip_sim(x_cand, fwd, bwd, memo)
        d_val = (base - cand_sim) / base
        if best is None or d_val > best[1]:
            best = (cand, d_val, rank)
    return best


def bil_adv_gen(
    pair: ParallelPair,
    mapping: PhraseMapping,
    backends: Backends,
    cfg: GenConfig,
) -> tuple[str, Candidate | None]:
    """Generate one bilingual adversarial candidate for a pair.

    Returns (status, candidate) where status is ACCEPTED, REJECTED or
    UNUSABLE; the candidate is None only for UNUSABLE samples.
    """
    n_segments = len(mapping.segments)
    if cfg.budget_unit == "segments":
        budget = math.ceil(n_segments * cfg.c)
    else:
        budget = math.ceil(len(pair.src) * cfg.c)

    src_spans = [list(s) for s in mapping.segments]
    tgt_spans = [
        list(mapping.p[i]) if mapping.p.get(i) is not None else None
        for i in range(n_segments)
    ]
    cur_x = list(pair.src.tokens)
    cur_y = list(pair.tgt.tokens)
    attacked: set[int] = set()
    dead: set[int] = set()
    trace: list[TraceStep] = []
    memo: dict = {}

    for _ in range(budget):
        best = None  # (degradation, segment, rank, candidate)
        base_unusable = False
        for si in range(n_segments):
            if si in attacked or si in dead or tgt_spans[si] is None:
                continue
            span = src_spans[si]
            req = FillRequest(tuple(cur_x), span[0], span[1], cfg.k)
            cands = fill(backends.mmlm, req)
            if not cands:
                dead.add(si)
                continue
            try:
                cand, d_val, rank = select_best_candidate(
                    cur_x, (span[0], span[1]), cands, backends.fwd, backends.bwd,
                    cfg.epsilon, memo,
                )
            except UnusableSampleError:
                base_unusable = True
                break
            if best is None or d_val > best[0]:
                best = (d_val, si, rank, cand)
            if cfg.search == "left_to_right":
                break
        if base_unusable:
            if not trace:
                return UNUSABLE, None
            break
        if best is None:
            break

        _, si, _, cand = best
        span = src_spans[si]
        src_from = tuple(cur_x[span[0] : span[1]])
        cur_x[span[0] : span[1]] = list(cand.tokens)
        delta = len(cand.tokens) - (span[1] - span[0])
        old_end = span[1]
        span[1] += delta
        for sj, sp in enumerate(src_spans):
            if sj != si and sp[0] >= old_end:
                sp[0] += delta
                sp[1] += delta
        attacked.add(si)

        # rewrite the aligned target phrase; its fill sees the committed source
        ta, tb = tgt_spans[si]
        ta = max(0, min(ta, len(cur_y)))
        tb = min(tb, len(cur_y))
        tgt_from = tuple(cur_y[ta:tb])
        tgt_to = tgt_from
        if tb > ta:
            treq = FillRequest(tuple(cur_y), ta, tb, 1, context_src=tuple(cur_x))
            tcands = fill(backends.tmlm, treq)
            if tcands:
                tgt_to = tcands[0].tokens
                cur_y[ta:tb] = list(tgt_to)
                tdelta = len(tgt_to) - (tb - ta)
                tgt_spans[si] = [ta, ta + len(tgt_to)]
                for sj, sp in enumerate(tgt_spans):
                    if sp is not None and sj != si and sp[0] >= tb:
                        sp[0] += tdelta
                        sp[1] += tdelta
        trace.append(TraceStep(si, src_from, tuple(cand.tokens), tgt_from, tgt_to))

    x_delta = Sentence(tuple(cur_x), pair.src.lang)
    y_delta = Sentence(tuple(cur_y), pair.tgt.lang)
    if not trace:
        return REJECTED, Candidate(pair.id, x_delta, y_delta, None, [], False)
    try:
        scores = score_pair(pair, cur_x, backends.fwd, backends.bwd, cfg.epsilon)
    except UnusableSampleError:
        return UNUSABLE, None
    accepted = drtt_accept(scores, cfg.criterion())
    status = ACCEPTED if accepted else REJECTED
    return status, Candidate(pair.id, x_delta, y_delta, scores, trace, accepted)


def candidate_record(pair: ParallelPair, cand: Candidate) -> dict:
    """JSONL record for one candidate, rejected ones included."""
    return {
        "id": pair.id,
        "x": pair.src.text(),
        "y": pair.tgt.text(),
        "x_delta": cand.x_delta.text(),
        "y_delta": cand.y_delta.text(),
        "d_src": None if cand.scores is None else cand.scores.d_src,
        "d_tgt": None if cand.scores is None else cand.scores.d_tgt,
        "accepted": cand.accepted,
        "trace": [
            {
                "i": step.segment,
                "src_from": detokenize(step.src_from),
                "src_to": detokenize(step.src_to),
                "tgt_from": detokenize(step.tgt_from),
                "tgt_to": detokenize(step.tgt_to),
            }
            for step in cand.trace
        ],
    }


def write_candidates_jsonl(records: Sequence[dict], path: str | Path) -> None:
    text = "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records)
    Path(path).write_text(text, encoding="utf-8")


def read_candidates_jsonl(path: str | Path) -> list[dict]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line:
            records.append(json.loads(line))
    return records


def build_corpus_mappings(
    corpus: Corpus,
    max_len: int = 4,
    strategy: str = "shortest",
    iterations: int = 5,
    diagonal_tension: float = 4.0,
    p_null: float = 0.08,
    heuristic: str = "grow_diag_final_and",
    alignment: str = "symmetrized",
) -> dict[int, PhraseMapping]:
    """Train both alignment directions on the corpus and build phrase mappings.

    alignment="forward" skips symmetrization and uses the source-to-target
    Viterbi alignment alone.
    """
    if alignment not in ("symmetrized", "forward"):
        raise ValueError(f"unknown alignment mode {alignment!r}")
    fwd_lex = train_ibm1(corpus, iterations, diagonal_tension, p_null)
    rev_lex = None
    if alignment == "symmetrized":
        rev_lex = train_ibm1(corpus.swapped(), iterations, diagonal_tension, p_null)
    mappings = {}
    for pair in corpus:
        fwd_a = viterbi_align(pair, fwd_lex, diagonal_tension, p_null)
        if alignment == "symmetrized":
            rev_a = viterbi_align(pair.swapped(), rev_lex, diagonal_tension, p_null)
            merged = symmetrize(fwd_a, rev_a, heuristic)
        else:
            merged = fwd_a
        phrase_pairs = extract_phrases(pair, merged, max_len)
        mappings[pair.id] = build_mapping(pair, phrase_pairs, strategy)
    return mappings


def generate_corpus(
    corpus: Corpus,
    backends: Backends,
    cfg: GenConfig,
    mappings: dict[int, PhraseMapping] | None = None,
    jsonl_path: str | Path | None = None,
    workers: int = 1,
) -> tuple[list[Candidate], GenStats, list[dict]]:
    """Run the generator over a corpus.

    Returns the accepted candidates, run statistics, and the full record list
    (accepted and rejected) that is also written to ``jsonl_path`` when
    given. Deterministic given the config seed and mock backends.
    """
    if mappings is None:
        mappings = build_corpus_mappings(corpus, max_len=cfg.max_len, strategy=cfg.strategy)

    def run_one(pair):
        return bil_adv_gen(pair, mappings[pair.id], backends, cfg)

    stats = GenStats()
    accepted: list[Candidate] = []
    records: list[dict] = []
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_safe_run, ((run_one, p) for p in corpus)))
    else:
        outcomes = [_safe_run((run_one, p)) for p in corpus]
    for pair, outcome in zip(corpus, outcomes):
        if outcome is None:
            stats.errored += 1
            continue
        status, cand = outcome
        if status == UNUSABLE:
            stats.unusable += 1
            continue
        records.append(candidate_record(pair, cand))
        if status == ACCEPTED:
            stats.accepted += 1
            accepted.append(cand)
        else:
            stats.rejected += 1
    if jsonl_path is not None:
        write_candidates_jsonl(records, jsonl_path)
    return accepted, stats, records


def _safe_run(job):
    run_one, pair = job
    try:
        return run_one(pair)
    except BackendError:
        return None
