"""Lexical-translation EM training and symmetrized word alignment.

The model is IBM Model 1 extended with a diagonal-favoring alignment prior:
the prior for source position i generating target position j in an (m, n)
pair is proportional to exp(-tension * |(i+1)/m - (j+1)/n|), renormalized
per target position, plus an optional null source token that absorbs
probability mass p_null. tension = 0 and p_null = 0 recover the plain
uniform-prior model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Corpus, ParallelPair

NULL_TOKEN = "<null>"

# probability assigned to lexicon entries never seen in training
UNKNOWN_FLOOR = 1e-12

HEURISTICS = ("intersection", "union", "grow_diag_final_and")

_NEIGHBORS = ((-1, 0), (0, -1), (1, 0), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1))


@dataclass
class LexiconTable:
    """Sparse conditional table t[(src, tgt)] = P(tgt | src).

    Rows are normalized per source token; ``ll_history`` holds the corpus
    log-likelihood evaluated at the start of each EM iteration.
    """

    t: dict[tuple[str, str], float]
    src_vocab: frozenset[str]
    tgt_vocab: frozenset[str]
    ll_history: list[float] = field(default_factory=list)

    def prob(self, src: str, tgt: str) -> float:
        return self.t.get((src, tgt), UNKNOWN_FLOOR)


@dataclass(frozen=True)
class AlignmentMatrix:
    """Word alignment links (i, j): source token i aligned to target token j."""

    links: frozenset[tuple[int, int]]
    src_len: int
    tgt_len: int

    def __post_init__(self):
        object.__setattr__(self, "links", frozenset(self.links))
        if self.src_len <= 0 or self.tgt_len <= 0:
            raise ValueError("alignment dimensions must be positive")
        for i, j in self.links:
            if not (0 <= i < self.src_len and 0 <= j < self.tgt_len):
                raise ValueError(f"link ({i},{j}) outside {self.src_len}x{self.tgt_len}")


def _position_priors(m: int, n: int, tension: float, p_null: float) -> list[list[float]]:
    """priors[j][i] = P(source position i | target position j), summing to 1 - p_null."""
    priors = []
    for j in range(n):
        weights = [math.exp(-tension * abs((i + 1) / m - (j + 1) / n)) for i in range(m)]
        z = sum(weights)
        priors.append([(1.0 - p_null) * w / z for w in weights])
    return priors


def train_ibm1(
    corpus: Corpus,
    iterations: int = 5,
    diagonal_tension: float = 4.0,
    p_null: float = 0.08,
) -> LexiconTable:
    """EM-train the lexical table t(tgt | src) on a parallel corpus.

    The corpus log-likelihood recorded per iteration is non-decreasing; rows
    of the returned table sum to 1 within 1e-6.
    """
    if len(corpus) == 0:
        raise ValueError("cannot train on an empty corpus")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if not (0.0 <= p_null < 1.0):
        raise ValueError("p_null must lie in [0, 1)")
    if diagonal_tension < 0:
        raise ValueError("diagonal_tension must be >= 0")

    tgt_vocab = sorted({w for pair in corpus for w in pair.tgt.tokens})
    src_vocab = sorted({s for pair in corpus for s in pair.src.tokens})
    use_null = p_null > 0.0

    uniform = 1.0 / len(tgt_vocab)
    t: dict[tuple[str, str], float] = {}
    for pair in corpus:
        for s in pair.src.tokens:
            for w in pair.tgt.tokens:
                t[(s, w)] = uniform
        if use_null:
            for w in pair.tgt.tokens:
                t[(NULL_TOKEN, w)] = uniform

    prior_cache: dict[tuple[int, int], list[list[float]]] = {}
    history: list[float] = []
    for _ in range(iterations):
        counts: dict[tuple[str, str], float] = dict.fromkeys(t, 0.0)
        ll = 0.0
        for pair in corpus:
            src, tgt = pair.src.tokens, pair.tgt.tokens
            m, n = len(src), len(tgt)
            key = (m, n)
            if key not in prior_cache:
                prior_cache[key] = _position_priors(m, n, diagonal_tension, p_null)
            priors = prior_cache[key]
            for j, w in enumerate(tgt):
                scores = [priors[j][i] * t[(s, w)] for i, s in enumerate(src)]
                null_score = p_null * t[(NULL_TOKEN, w)] if use_null else 0.0
                marginal = sum(scores) + null_score
                ll += math.log(marginal)
                for i, s in enumerate(src):
                    counts[(s, w)] += scores[i] / marginal
                if use_null:
                    counts[(NULL_TOKEN, w)] += null_score / marginal
        history.append(ll)
        row_sums: dict[str, float] = {}
        for (s, _), c in counts.items():
            row_sums[s] = row_sums.get(s, 0.0) + c
        for (s, w), c in counts.items():
            z = row_sums[s]
            if z > 0:
                t[(s, w)] = c / z
    return LexiconTable(
        t=t,
        src_vocab=frozenset(src_vocab + ([NULL_TOKEN] if use_null else [])),
        tgt_vocab=frozenset(tgt_vocab),
        ll_history=history,
    )


def viterbi_align(
    pair: ParallelPair,
    lex: LexiconTable,
    diagonal_tension: float = 4.0,
    p_null: float = 0.08,
) -> AlignmentMatrix:
    """Link each target token to its most probable source token.

    A win for the null token emits no link. Ties between source positions go
    to the smaller index; a tie against null keeps null.
    """
    src, tgt = pair.src.tokens, pair.tgt.tokens
    m, n = len(src), len(tgt)
    priors = _position_priors(m, n, diagonal_tension, p_null)
    links = set()
    for j, w in enumerate(tgt):
        best_i = None
        best_score = p_null * lex.prob(NULL_TOKEN, w) if p_null > 0 else 0.0
        for i, s in enumerate(src):
            score = priors[j][i] * lex.prob(s, w)
            if score > best_score:
                best_score = score
                best_i = i
        if best_i is not None:
            links.add((best_i, j))
    return AlignmentMatrix(frozenset(links), m, n)


def _transpose(a: AlignmentMatrix) -> AlignmentMatrix:
    return AlignmentMatrix(frozenset((j, i) for i, j in a.links), a.tgt_len, a.src_len)


def symmetrize(
    fwd: AlignmentMatrix,
    rev: AlignmentMatrix,
    heuristic: str = "grow_diag_final_and",
) -> AlignmentMatrix:
    """Merge a forward alignment with a reverse-direction one.

    ``rev`` is the alignment of the same pair with source/target roles
    swapped; its links are transposed into the forward frame before merging.
    """
    if heuristic not in HEURISTICS:
        raise ValueError(f"unknown heuristic {heuristic!r}")
    if (rev.src_len, rev.tgt_len) != (fwd.tgt_len, fwd.src_len):
        raise ValueError(
            f"dimension mismatch: fwd is {fwd.src_len}x{fwd.tgt_len}, "
            f"rev is {rev.src_len}x{rev.tgt_len}"
        )
    rev_t = _transpose(rev)
    inter = fwd.links & rev_t.links
    union = fwd.links | rev_t.links
    if heuristic == "intersection":
        return AlignmentMatrix(inter, fwd.src_len, fwd.tgt_len)
    if heuristic == "union":
        return AlignmentMatrix(union, fwd.src_len, fwd.tgt_len)

    links = set(inter)
    src_aligned = {i for i, _ in links}
    tgt_aligned = {j for _, j in links}
    grew = True
    while grew:
        grew = False
        for i, j in sorted(links):
            for di, dj in _NEIGHBORS:
                cand = (i + di, j + dj)
                if cand in links or cand not in union:
                    continue
                if cand[0] not in src_aligned or cand[1] not in tgt_aligned:
                    links.add(cand)
                    src_aligned.add(cand[0])
                    tgt_aligned.add(cand[1])
                    grew = True
    for i, j in sorted(union - links):
        if i not in src_aligned and j not in tgt_aligned:
            links.add((i, j))
            src_aligned.add(i)
            tgt_aligned.add(j)
    return AlignmentMatrix(frozenset(links), fwd.src_len, fwd.tgt_len)


def write_pharaoh(align: AlignmentMatrix) -> str:
    """Serialize links as space-separated "i-j" items sorted by (i, j)."""
    return " ".join(f"{i}-{j}" for i, j in sorted(align.links))


def read_pharaoh(line: str, src_len: int, tgt_len: int) -> AlignmentMatrix:
    links = set()
    for item in line.split():
        try:
            i_text, j_text = item.split("-")
            i, j = int(i_text), int(j_text)
        except ValueError as exc:
            raise ValueError(f"bad pharaoh item {item!r}") from exc
        if not (0 <= i < src_len and 0 <= j < tgt_len):
            raise ValueError(f"link {item!r} out of range for {src_len}x{tgt_len}")
        links.add((i, j))
    return AlignmentMatrix(frozenset(links), src_len, tgt_len)


def save_lexicon(lex: LexiconTable, path: str | Path) -> None:
    lines = [f"{s}\t{w}\t{p!r}\n" for (s, w), p in sorted(lex.t.items())]
    Path(path).write_text("".join(lines), encoding="utf-8")


def load_lexicon(path: str | Path) -> LexiconTable:
    t: dict[tuple[str, str], float] = {}
    for i, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines()):
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise ValueError(f"{path}: line {i + 1} has {len(cols)} columns, expected 3")
        t[(cols[0], cols[1])] = float(cols[2])
    if not t:
        raise ValueError(f"{path}: empty lexicon")
    return LexiconTable(
        t=t,
        src_vocab=frozenset(s for s, _ in t),
        tgt_vocab=frozenset(w for _, w in t),
    )
