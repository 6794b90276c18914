"""Synthetic noise generators for robustness test sets.

Five perturbation kinds over the source side of a corpus: deletion, swap
with the right neighbor, in-place duplication (insertion), embedding-based
replacement (rep_src), and synchronized masked-LM replacement on both sides
(rep_both). The number of perturbed positions per sentence is
max(1, floor(len * ratio)) for ratio > 0 and 0 for ratio = 0, capped by the
number of perturbable positions (swap excludes the final token; rep_src
skips out-of-vocabulary tokens). Shortfalls are reported as warnings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .align import AlignmentMatrix
from .backends import BackendHandle, FillRequest, fill
from .corpus import Corpus, ParallelPair, Sentence

NOISE_KINDS = ("deletion", "swap", "insertion", "rep_src", "rep_both")


@dataclass(frozen=True)
class NoiseSpec:
    kind: str
    ratio: float
    seed: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not (0.0 <= self.ratio <= 1.0):
            raise ValueError("noise ratio must lie in [0, 1]")


@dataclass
class EmbeddingTable:
    dim: int
    vectors: dict[str, np.ndarray]
    dropped: int = 0

    def __post_init__(self):
        for tok, v in self.vectors.items():
            if v.shape != (self.dim,):
                raise ValueError(f"vector for {tok!r} has shape {v.shape}, want ({self.dim},)")

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def nearest(self, token: str) -> str | None:
        """Cosine nearest neighbour, excluding the token itself.

        Exhaustive scan; returns None for out-of-vocabulary tokens or when no
        other token exists. Zero vectors compare at similarity -1.
        """
        if token not in self.vectors:
            return None
        v = self.vectors[token]
        nv = float(np.linalg.norm(v))
        best = None
        best_cos = -2.0
        for other in sorted(self.vectors):
            if other == token:
                continue
            u = self.vectors[other]
            nu = float(np.linalg.norm(u))
            cos = float(v @ u / (nv * nu)) if nv > 0 and nu > 0 else -1.0
            if cos > best_cos:
                best_cos = cos
                best = other
        return best


def load_embeddings(path: str | Path) -> EmbeddingTable:
    """Parse text-format word vectors: optional "count dim" header, then
    one "token v1 ... vd" line each. Lines of the wrong width are dropped
    and counted."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    start = 0
    if lines and len(lines[0].split()) == 2:
        head = lines[0].split()
        if all(x.lstrip("-").isdigit() for x in head):
            start = 1
    dim = None
    vectors: dict[str, np.ndarray] = {}
    dropped = 0
    for line in lines[start:]:
        if not line.strip():
            continue
        parts = line.rstrip().split(" ")
        if len(parts) < 2:
            dropped += 1
            continue
        token, values = parts[0], parts[1:]
        if dim is None:
            dim = len(values)
        if len(values) != dim:
            dropped += 1
            continue
        try:
            vectors[token] = np.array([float(x) for x in values], dtype=float)
        except ValueError:
            dropped += 1
    if not vectors:
        raise ValueError(f"{path}: no valid embedding lines")
    return EmbeddingTable(dim=dim, vectors=vectors, dropped=dropped)


@dataclass
class NoiseResources:
    embeddings: EmbeddingTable | None = None
    mmlm: BackendHandle | None = None
    tmlm: BackendHandle | None = None
    aligner: Callable[[Sequence[str], Sequence[str]], AlignmentMatrix] | None = None


@dataclass
class PerturbResult:
    src: Sentence
    tgt: Sentence | None
    positions: tuple[int, ...]
    warnings: int = 0


def perturbed_count(length: int, ratio: float) -> int:
    """The position-count law: 0 at ratio 0, else max(1, floor(len*ratio))."""
    if ratio == 0.0 or length == 0:
        return 0
    return max(1, math.floor(length * ratio))


def _required(spec: NoiseSpec, resources: NoiseResources | None):
    resources = resources or NoiseResources()
    if spec.kind == "rep_src" and resources.embeddings is None:
        raise ValueError("rep_src noise requires an EmbeddingTable resource")
    if spec.kind == "rep_both" and (
        resources.mmlm is None or resources.tmlm is None or resources.aligner is None
    ):
        raise ValueError("rep_both noise requires mmlm, tmlm and aligner resources")
    return resources


def perturb(
    sentence: Sentence,
    spec: NoiseSpec,
    resources: NoiseResources | None = None,
    *,
    target: Sentence | None = None,
    rng: np.random.Generator | None = None,
) -> PerturbResult:
    """Perturb one sentence (and, for rep_both, its target too).

    Positions are drawn without replacement from the perturbable positions.
    ``rng`` defaults to a fresh stream seeded with spec.seed; corpus runs
    derive one stream per sentence from (seed, sentence id).
    """
    resources = _required(spec, resources)
    if spec.kind == "rep_both" and target is None:
        raise ValueError("rep_both requires the target sentence")
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    tokens = list(sentence.tokens)
    n = len(tokens)
    want = perturbed_count(n, spec.ratio)

    if spec.kind == "swap":
        eligible = list(range(n - 1))
    elif spec.kind == "rep_src":
        emb = resources.embeddings
        eligible = [p for p in range(n) if tokens[p] in emb and len(emb.vectors) >= 2]
    elif spec.kind == "rep_both":
        alignment = resources.aligner(sentence.tokens, target.tokens)
        aligned = {}
        for i, j in sorted(alignment.links):
            aligned.setdefault(i, j)
        eligible = [p for p in range(n) if p in aligned]
    else:
        eligible = list(range(n))

    take = min(want, len(eligible))
    warnings = want - take
    if take == 0:
        return PerturbResult(sentence, target if spec.kind == "rep_both" else None, (), warnings)
    chosen = sorted(int(p) for p in rng.choice(eligible, size=take, replace=False))

    out_tgt = target
    if spec.kind == "deletion":
        drop = set(chosen)
        tokens = [t for i, t in enumerate(tokens) if i not in drop]
    elif spec.kind == "swap":
        for p in chosen:
            tokens[p], tokens[p + 1] = tokens[p + 1], tokens[p]
    elif spec.kind == "insertion":
        for p in reversed(chosen):
            tokens.insert(p, tokens[p])
    elif spec.kind == "rep_src":
        for p in chosen:
            tokens[p] = resources.embeddings.nearest(tokens[p])
    else:  # rep_both
        tgt_tokens = list(target.tokens)
        applied = []
        for p in reversed(chosen):
            req = FillRequest(tuple(tokens), p, p + 1, 1)
            cands = fill(resources.mmlm, req)
            if not cands:
                warnings += 1
                continue
            tokens[p : p + 1] = list(cands[0].tokens)
            applied.append(p)
        for p in applied:
            j = aligned[p]
            if j >= len(tgt_tokens):
                continue
            treq = FillRequest(tuple(tgt_tokens), j, j + 1, 1, context_src=tuple(tokens))
            tcands = fill(resources.tmlm, treq)
            if tcands:
                tgt_tokens[j : j + 1] = list(tcands[0].tokens)
        chosen = sorted(applied)
        out_tgt = Sentence(tuple(tgt_tokens), target.lang)

    return PerturbResult(
        src=Sentence(tuple(tokens), sentence.lang),
        tgt=out_tgt if spec.kind == "rep_both" else None,
        positions=tuple(chosen),
        warnings=warnings,
    )


def perturb_corpus(
    corpus: Corpus,
    spec: NoiseSpec,
    resources: NoiseResources | None = None,
) -> tuple[Corpus, list[dict]]:
    """Perturb every source sentence; deterministic given spec.seed.

    Each sentence gets its own RNG stream derived from (seed, pair id), so
    the output does not depend on processing order. The manifest records the
    perturbed positions per sentence.
    """
    resources = _required(spec, resources)
    new_pairs = []
    manifest = []
    for pair in corpus:
        rng = np.random.default_rng([spec.seed, pair.id])
        result = perturb(pair.src, spec, resources, target=pair.tgt, rng=rng)
        tgt = result.tgt if result.tgt is not None else pair.tgt
        new_pairs.append(ParallelPair(result.src, tgt, pair.id))
        manifest.append({"id": pair.id, "kind": spec.kind, "positions": list(result.positions)})
    return Corpus(tuple(new_pairs), provenance=corpus.provenance, dropped=corpus.dropped), manifest
