"""Robustness evaluation: forward BLEU, round-trip BLEU, attack sweeps.

Reports hold one cell per (noise kind, ratio) plus a clean column shared by
all kinds, and can be rendered as JSON or an aligned plain-text table with
BLEU shown in percent. Cells keep their hypothesis/reference token lists so
two systems' reports can be compared with the paired bootstrap afterwards.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .advgen import read_candidates_jsonl
from .backends import BackendError, BackendHandle, translate
from .corpus import Corpus
from .metrics import corpus_bleu, paired_bootstrap
from .noise import NoiseResources, NoiseSpec, perturb_corpus


@dataclass
class Cell:
    bleu: float | None
    n: int = 0
    hyps: list = field(default_factory=list)
    refs: list = field(default_factory=list)
    dropped: int = 0
    failed: bool = False
    error: str = ""


@dataclass
class EvalReport:
    clean: Cell | None
    cells: dict[tuple[str, float], Cell]
    metadata: dict = field(default_factory=dict)

    def kinds(self) -> list[str]:
        seen = []
        for kind, _ in self.cells:
            if kind not in seen:
                seen.append(kind)
        return seen

    def ratios(self, kind: str) -> list[float]:
        return sorted(r for k, r in self.cells if k == kind)

    def average(self, kind: str) -> float | None:
        """Mean BLEU over this kind's noise-ratio cells (clean excluded)."""
        values = [self.cells[(kind, r)].bleu for r in self.ratios(kind)]
        if not values or any(v is None for v in values):
            return None
        return sum(values) / len(values)

    def to_json_dict(self) -> dict:
        def cell_dict(cell):
            return {
                "bleu": cell.bleu,
                "n": cell.n,
                "dropped": cell.dropped,
                "failed": cell.failed,
                "error": cell.error,
            }

        return {
            "metadata": self.metadata,
            "clean": cell_dict(self.clean) if self.clean is not None else None,
            "cells": {
                f"{kind}@{ratio:g}": cell_dict(cell)
                for (kind, ratio), cell in sorted(self.cells.items())
            },
            "avg": {kind: self.average(kind) for kind in self.kinds()},
        }

    def format_table(self) -> str:
        """Aligned text table, one row per noise kind, BLEU in percent."""
        all_ratios = sorted({r for _, r in self.cells})
        headers = ["noise", "clean"] + [f"{r:g}" for r in all_ratios] + ["AVG"]
        rows = []
        for kind in self.kinds():
            row = [kind, _fmt(self.clean.bleu if self.clean else None)]
            for r in all_ratios:
                cell = self.cells.get((kind, r))
                row.append(_fmt(cell.bleu) if cell and not cell.failed else "FAILED" if cell else "-")
            row.append(_fmt(self.average(kind)))
            rows.append(row)
        widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
                  for i, h in enumerate(headers)]
        lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
        for row in rows:
            lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
        return "\n".join(lines) + "\n"


def _fmt(value: float | None) -> str:
    return "-" if value is None else f"{100.0 * value:.2f}"


def _clean_refs(srcs, refs):
    """Drop sentences whose (possibly perturbed) reference side is empty."""
    kept_s, kept_r, dropped = [], [], 0
    for s, r in zip(srcs, refs):
        if len(r) == 0:
            dropped += 1
            continue
        kept_s.append(s)
        kept_r.append(r)
    return kept_s, kept_r, dropped


def forward_eval(
    test: Corpus,
    noise: Sequence[NoiseSpec],
    fwd: BackendHandle,
    resources: NoiseResources | None = None,
) -> EvalReport:
    """Translate noisy sources and score against the original targets."""
    refs = [list(p.tgt.tokens) for p in test]
    clean_srcs = [list(p.src.tokens) for p in test]
    clean = _translate_cell(fwd, clean_srcs, refs)
    cells = {}
    for spec in noise:
        try:
            noisy, _ = perturb_corpus(test, spec, resources)
        except (ValueError, BackendError) as exc:
            cells[(spec.kind, spec.ratio)] = Cell(None, failed=True, error=str(exc))
            continue
        srcs = [list(p.src.tokens) for p in noisy]
        kept_srcs, kept_refs, dropped = _clean_refs(srcs, refs)
        cell = _translate_cell(fwd, kept_srcs, kept_refs)
        cell.dropped = dropped
        cells[(spec.kind, spec.ratio)] = cell
    return EvalReport(clean=clean, cells=cells, metadata={"mode": "forward"})


def rtt_eval(
    test: Corpus,
    noise: Sequence[NoiseSpec],
    fwd: BackendHandle,
    bwd: BackendHandle,
    resources: NoiseResources | None = None,
) -> EvalReport:
    """Round-trip the noisy sources and score the reconstructions against
    the perturbed inputs themselves."""
    clean_srcs = [list(p.src.tokens) for p in test]
    clean = _rtt_cell(fwd, bwd, clean_srcs)
    cells = {}
    for spec in noise:
        try:
            noisy, _ = perturb_corpus(test, spec, resources)
        except (ValueError, BackendError) as exc:
            cells[(spec.kind, spec.ratio)] = Cell(None, failed=True, error=str(exc))
            continue
        srcs = [list(p.src.tokens) for p in noisy]
        srcs = [s for s in srcs if len(s) > 0]
        cell = _rtt_cell(fwd, bwd, srcs)
        cell.dropped = len(noisy) - len(srcs)
        cells[(spec.kind, spec.ratio)] = cell
    return EvalReport(clean=clean, cells=cells, metadata={"mode": "rtt"})


def _translate_cell(fwd, srcs, refs) -> Cell:
    if not srcs:
        return Cell(None, n=0, failed=True, error="no scorable sentences")
    try:
        hyps = translate(fwd, srcs)
    except BackendError as exc:
        return Cell(None, n=len(srcs), failed=True, error=str(exc))
    return Cell(corpus_bleu(hyps, refs).value, n=len(srcs), hyps=hyps, refs=refs)


def _rtt_cell(fwd, bwd, srcs) -> Cell:
    if not srcs:
        return Cell(None, n=0, failed=True, error="no scorable sentences")
    try:
        hyps = translate(bwd, translate(fwd, srcs))
    except BackendError as exc:
        return Cell(None, n=len(srcs), failed=True, error=str(exc))
    return Cell(corpus_bleu(hyps, srcs).value, n=len(srcs), hyps=hyps, refs=srcs)


# ---------------------------------------------------------------------------
# Attack-effectiveness sweep over the acceptance threshold gamma
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    gamma: float
    n_accepted: int
    bleu: float | None


def filter_records(records: Sequence[dict], beta: float, gamma: float) -> list[dict]:
    """Re-apply the doubly round-trip acceptance to sidecar records."""
    return [
        r
        for r in records
        if r.get("d_src") is not None
        and r.get("d_tgt") is not None
        and r["d_src"] > beta
        and r["d_tgt"] < gamma
    ]


def attack_eval(
    candidates: Sequence[dict] | str | Path,
    victim: BackendHandle,
    gamma_grid: Sequence[float],
    beta: float,
) -> list[SweepRow]:
    """Score a victim translator on the candidate sets surviving each gamma.

    Lower BLEU against the paired adversarial targets means a more effective
    attack set. Rows are sorted by gamma; an empty accepted set yields a row
    with BLEU None.
    """
    if isinstance(candidates, (str, Path)):
        records = read_candidates_jsonl(candidates)
    else:
        records = list(candidates)
    rows = []
    for gamma in sorted(gamma_grid):
        accepted = filter_records(records, beta, gamma)
        if not accepted:
            rows.append(SweepRow(gamma, 0, None))
            continue
        srcs = [r["x_delta"].split() for r in accepted]
        refs = [r["y_delta"].split() for r in accepted]
        hyps = translate(victim, srcs)
        rows.append(SweepRow(gamma, len(accepted), corpus_bleu(hyps, refs).value))
    return rows


def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    lines = ["gamma,n_accepted,bleu"]
    for row in rows:
        bleu = "" if row.bleu is None else f"{100.0 * row.bleu:.4f}"
        lines.append(f"{row.gamma:g},{row.n_accepted},{bleu}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# System comparison with significance stars
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CellSignificance:
    p_value: float
    delta: float
    stars: str


def _stars(p: float) -> str:
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


def compare_systems(
    report_a: EvalReport,
    report_b: EvalReport,
    refs: Sequence[Sequence[str]] | None = None,
    seed: int = 0,
    n_resamples: int = 1000,
) -> dict[str, CellSignificance]:
    """Paired bootstrap per shared cell; stars mark A significantly better.

    When ``refs`` is None each cell uses its own stored references (both
    reports must have been produced on identical perturbed inputs).
    """
    out: dict[str, CellSignificance] = {}
    keys = [("clean", report_a.clean, report_b.clean)] + [
        (f"{kind}@{ratio:g}", report_a.cells.get((kind, ratio)), report_b.cells.get((kind, ratio)))
        for (kind, ratio) in sorted(report_a.cells)
    ]
    for name, cell_a, cell_b in keys:
        if cell_a is None or cell_b is None or cell_a.failed or cell_b.failed:
            continue
        cell_refs = list(refs) if refs is not None else cell_a.refs
        if len(cell_a.hyps) != len(cell_b.hyps) or len(cell_a.hyps) != len(cell_refs):
            raise ValueError(f"cell {name}: reports are not paired")
        result = paired_bootstrap(cell_a.hyps, cell_b.hyps, cell_refs, n_resamples, seed)
        out[name] = CellSignificance(result.p_value, result.delta, _stars(result.p_value))
    return out


def report_to_json(report: EvalReport, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report.to_json_dict(), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
