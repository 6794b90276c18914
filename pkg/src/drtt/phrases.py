"""Consistent phrase-pair extraction and source-segment mapping.

A span pair is consistent with an alignment when no link crosses its
boundary (every link touching the source span lands inside the target span
and vice versa) and at least one link lies inside. Target spans are extended
over unaligned boundary words, as in standard phrase-based extraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .align import AlignmentMatrix
from .corpus import ParallelPair

STRATEGIES = ("shortest", "longest")


@dataclass(frozen=True)
class SpanPair:
    src_start: int
    src_end: int
    tgt_start: int
    tgt_end: int

    def __post_init__(self):
        if not (0 <= self.src_start < self.src_end and 0 <= self.tgt_start < self.tgt_end):
            raise ValueError(f"spans must be non-empty half-open ranges, got {self}")

    @property
    def src_span(self) -> tuple[int, int]:
        return (self.src_start, self.src_end)

    @property
    def tgt_span(self) -> tuple[int, int]:
        return (self.tgt_start, self.tgt_end)


@dataclass(frozen=True)
class PhraseMapping:
    """A left-to-right segmentation of the source with per-segment target spans.

    ``segments`` partitions [0, src_len); ``p[i]`` is the target span aligned
    to segment i, or None when the segment has no extracted phrase (such
    segments are never replaced).
    """

    segments: tuple[tuple[int, int], ...]
    p: dict[int, tuple[int, int] | None]

    def mapped_segments(self) -> list[int]:
        return [i for i in range(len(self.segments)) if self.p.get(i) is not None]


def extract_phrases(
    pair: ParallelPair,
    align: AlignmentMatrix,
    max_len: int = 4,
) -> list[SpanPair]:
    """All alignment-consistent span pairs with both sides <= max_len tokens."""
    src_len, tgt_len = len(pair.src), len(pair.tgt)
    if (align.src_len, align.tgt_len) != (src_len, tgt_len):
        raise ValueError(
            f"alignment is {align.src_len}x{align.tgt_len}, pair is {src_len}x{tgt_len}"
        )
    links = align.links
    aligned_tgt = {j for _, j in links}
    out = []
    for i1 in range(src_len):
        for i2 in range(i1 + 1, min(i1 + max_len, src_len) + 1):
            linked_js = {j for i, j in links if i1 <= i < i2}
            if not linked_js:
                continue
            j1, j2 = min(linked_js), max(linked_js) + 1
            if any(not (i1 <= i < i2) for i, j in links if j1 <= j < j2):
                continue
            lo_min = j1
            while lo_min > 0 and (lo_min - 1) not in aligned_tgt:
                lo_min -= 1
            hi_max = j2
            while hi_max < tgt_len and hi_max not in aligned_tgt:
                hi_max += 1
            for lo in range(lo_min, j1 + 1):
                for hi in range(j2, hi_max + 1):
                    if hi - lo <= max_len:
                        out.append(SpanPair(i1, i2, lo, hi))
    out.sort(key=lambda sp: (sp.src_start, sp.src_end, sp.tgt_start, sp.tgt_end))
    return out


def build_mapping(
    pair: ParallelPair,
    phrase_pairs: Sequence[SpanPair],
    strategy: str = "shortest",
) -> PhraseMapping:
    """Greedy left-to-right cover of the source sentence by extracted phrases.

    At each uncovered position the shortest (or, with strategy="longest",
    the longest) available source span starting there is taken, preferring
    the shortest target side and then the leftmost target span on ties.
    Positions no phrase covers become single-token segments with no mapping.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    src_len = len(pair.src)
    tgt_len = len(pair.tgt)
    by_start: dict[int, list[SpanPair]] = {}
    for sp in phrase_pairs:
        if sp.src_end > src_len or sp.tgt_end > tgt_len:
            raise ValueError(f"{sp} does not fit pair {pair.id}")
        by_start.setdefault(sp.src_start, []).append(sp)

    segments: list[tuple[int, int]] = []
    p: dict[int, tuple[int, int] | None] = {}
    pos = 0
    while pos < src_len:
        options = by_start.get(pos, [])
        if not options:
            p[len(segments)] = None
            segments.append((pos, pos + 1))
            pos += 1
            continue
        sign = 1 if strategy == "shortest" else -1
        best = min(
            options,
            key=lambda sp: (sign * sp.src_end, sp.tgt_end - sp.tgt_start, sp.tgt_start),
        )
        p[len(segments)] = best.tgt_span
        segments.append(best.src_span)
        pos = best.src_end
    return PhraseMapping(tuple(segments), p)


def write_phrase_table(rows: Sequence[tuple[int, SpanPair]], path: str | Path) -> None:
    """TSV serialization: pair_id, src_start, src_end, tgt_start, tgt_end."""
    lines = [
        f"{pid}\t{sp.src_start}\t{sp.src_end}\t{sp.tgt_start}\t{sp.tgt_end}\n"
        for pid, sp in rows
    ]
    Path(path).write_text("".join(lines), encoding="utf-8")


def read_phrase_table(path: str | Path) -> list[tuple[int, SpanPair]]:
    rows = []
    for i, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines()):
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) != 5:
            raise ValueError(f"{path}: line {i + 1} has {len(cols)} columns, expected 5")
        pid, a, b, c, d = (int(x) for x in cols)
        rows.append((pid, SpanPair(a, b, c, d)))
    return rows
