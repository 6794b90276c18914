"""Parallel corpus loading, tokenization, and the basic sentence types."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence


@dataclass(frozen=True)
class Sentence:
    """A tokenized sentence tagged with its language.

    Tokens may be empty for intermediate pipeline products (e.g. a fully
    deleted perturbation); corpus loading never admits empty sentences.
    """

    tokens: tuple[str, ...]
    lang: str

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        for tok in self.tokens:
            if tok == "" or any(ch.isspace() for ch in tok):
                raise ValueError(f"bad token {tok!r}: empty or contains whitespace")
        if not self.lang or self.lang != self.lang.lower():
            raise ValueError(f"lang tag must be non-empty lowercase, got {self.lang!r}")

    def __len__(self) -> int:
        return len(self.tokens)

    def text(self) -> str:
        return detokenize(self.tokens)


@dataclass(frozen=True)
class ParallelPair:
    src: Sentence
    tgt: Sentence
    id: int

    def __post_init__(self):
        if self.src.lang == self.tgt.lang:
            raise ValueError("source and target language tags must differ")

    def swapped(self) -> "ParallelPair":
        return ParallelPair(src=self.tgt, tgt=self.src, id=self.id)


@dataclass(frozen=True)
class Corpus:
    """An immutable, id-ordered list of parallel pairs."""

    pairs: tuple[ParallelPair, ...]
    provenance: str = ""
    dropped: int = 0

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))
        for expect, pair in enumerate(self.pairs):
            if pair.id != expect:
                raise ValueError(f"pair ids must be 0..n-1 in order, got {pair.id} at {expect}")

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[ParallelPair]:
        return iter(self.pairs)

    def __getitem__(self, i: int) -> ParallelPair:
        return self.pairs[i]

    def swapped(self) -> "Corpus":
        return Corpus(tuple(p.swapped() for p in self.pairs), self.provenance, self.dropped)


def tokenize(text: str, mode: str = "whitespace") -> list[str]:
    """Split raw text into tokens.

    whitespace mode splits on any unicode whitespace run; char mode yields one
    token per non-whitespace character.
    """
    if mode == "whitespace":
        return text.split()
    if mode == "char":
        return [ch for ch in text if not ch.isspace()]
    raise ValueError(f"unknown tokenize mode {mode!r}")


def detokenize(tokens: Sequence[str]) -> str:
    return " ".join(tokens)


def _read_lines(path: Path) -> list[str]:
    data = path.read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        line_no = data[: exc.start].count(b"\n") + 1
        raise ValueError(f"{path}: undecodable UTF-8 at line {line_no}") from exc
    # normalize CRLF, drop a single trailing newline so it doesn't count as a line
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    if text.endswith("\n"):
        text = text[:-1]
    return text.split("\n") if text else []


def _build_corpus(src_lines, tgt_lines, src_lang, tgt_lang, provenance, mode):
    pairs = []
    dropped = 0
    for src_line, tgt_line in zip(src_lines, tgt_lines):
        src_tokens = tokenize(src_line, mode)
        tgt_tokens = tokenize(tgt_line, mode)
        if not src_tokens or not tgt_tokens:
            dropped += 1
            continue
        pairs.append(
            ParallelPair(
                src=Sentence(tuple(src_tokens), src_lang),
                tgt=Sentence(tuple(tgt_tokens), tgt_lang),
                id=len(pairs),
            )
        )
    return Corpus(tuple(pairs), provenance=provenance, dropped=dropped)


def load_parallel(
    src_path: str | Path,
    tgt_path: str | Path,
    src_lang: str,
    tgt_lang: str,
    mode: str = "whitespace",
) -> Corpus:
    """Load a parallel corpus from two one-sentence-per-line UTF-8 files.

    Line i of each file becomes pair i. Pairs where either side tokenizes to
    nothing are dropped and counted in ``Corpus.dropped``.
    """
    src_path, tgt_path = Path(src_path), Path(tgt_path)
    src_lines = _read_lines(src_path)
    tgt_lines = _read_lines(tgt_path)
    if len(src_lines) != len(tgt_lines):
        raise ValueError(
            f"line-count mismatch: {src_path} has {len(src_lines)} lines, "
            f"{tgt_path} has {len(tgt_lines)}"
        )
    provenance = f"{src_path}||{tgt_path}"
    return _build_corpus(src_lines, tgt_lines, src_lang, tgt_lang, provenance, mode)


def load_tsv(path: str | Path, src_lang: str, tgt_lang: str, mode: str = "whitespace") -> Corpus:
    """Load a parallel corpus from one TSV file: source TAB target per line."""
    path = Path(path)
    src_lines, tgt_lines = [], []
    for i, line in enumerate(_read_lines(path)):
        cols = line.split("\t")
        if len(cols) != 2:
            raise ValueError(f"{path}: line {i + 1} has {len(cols)} columns, expected 2")
        src_lines.append(cols[0])
        tgt_lines.append(cols[1])
    return _build_corpus(src_lines, tgt_lines, src_lang, tgt_lang, str(path), mode)


def write_parallel(corpus: Corpus, src_path: str | Path, tgt_path: str | Path) -> None:
    src_text = "".join(p.src.text() + "\n" for p in corpus)
    tgt_text = "".join(p.tgt.text() + "\n" for p in corpus)
    Path(src_path).write_text(src_text, encoding="utf-8")
    Path(tgt_path).write_text(tgt_text, encoding="utf-8")


def corpus_from_token_lists(
    src: Sequence[Sequence[str]],
    tgt: Sequence[Sequence[str]],
    src_lang: str = "src",
    tgt_lang: str = "tgt",
) -> Corpus:
    """Convenience constructor used by pipelines and tests."""
    if len(src) != len(tgt):
        raise ValueError(f"line-count mismatch: {len(src)} vs {len(tgt)}")
    pairs = tuple(
        ParallelPair(Sentence(tuple(s), src_lang), Sentence(tuple(t), tgt_lang), id=i)
        for i, (s, t) in enumerate(zip(src, tgt))
    )
    return Corpus(pairs, provenance="<memory>")
