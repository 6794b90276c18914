"""Command-line entry point.

Every command reads an optional TOML config (--config), applies environment
overrides DRTT_BACKEND_<ROLE> for backend endpoints, then flag overrides,
and writes a manifest.json with the resolved config next to its outputs.
Exit codes: 0 success, 1 config/validation error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import advgen, align, evaluation, noise as noise_mod, phrases as phrases_mod
from .backends import BackendError, open_backend
from .config import (
    ConfigError,
    config_hash,
    effective_workers,
    load_config_file,
    resolve,
    write_manifest,
)
from .corpus import Corpus, corpus_from_token_lists, load_parallel, load_tsv
from .metrics import corpus_bleu, paired_bootstrap


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="drtt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, flags):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="TOML config or manifest.json")
        p.add_argument("--out-dir", dest="out_dir", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        for args, kwargs in flags:
            p.add_argument(*args, **kwargs)
        return p

    corpus_flags = [
        (("--src",), {"default": None, "help": "source-side text file"}),
        (("--tgt",), {"default": None, "help": "target-side text file"}),
        (("--tsv",), {"default": None, "help": "TSV parallel file (source TAB target)"}),
        (("--src-lang",), {"dest": "src_lang", "default": None}),
        (("--tgt-lang",), {"dest": "tgt_lang", "default": None}),
    ]
    align_flags = [
        (("--iterations",), {"type": int, "default": None}),
        (("--tension",), {"type": float, "default": None}),
        (("--p-null",), {"dest": "p_null", "type": float, "default": None}),
    ]
    backend_flags = lambda *roles: [
        ((f"--{role}",), {"default": None, "help": f"{role} backend endpoint"})
        for role in roles
    ]

    add("align-train", "EM-train forward and reverse lexicons", corpus_flags + align_flags)
    add(
        "align-apply",
        "Viterbi-align a corpus with trained lexicons and symmetrize",
        corpus_flags
        + align_flags
        + [
            (("--lexicon-fwd",), {"dest": "lexicon_fwd", "default": None}),
            (("--lexicon-rev",), {"dest": "lexicon_rev", "default": None}),
            (("--heuristic",), {"default": None}),
        ],
    )
    add(
        "phrases",
        "Extract consistent phrase pairs from pharaoh alignments",
        corpus_flags
        + [
            (("--alignments",), {"default": None}),
            (("--max-len",), {"dest": "max_len", "type": int, "default": None}),
            (("--strategy",), {"default": None}),
        ],
    )
    add(
        "generate",
        "Generate bilingual adversarial pairs",
        corpus_flags
        + backend_flags("fwd", "bwd", "mmlm", "tmlm")
        + [
            (("--beta",), {"type": float, "default": None}),
            (("--gamma",), {"type": float, "default": None}),
            (("--c",), {"type": float, "default": None}),
            (("--k",), {"type": int, "default": None}),
            (("--max-len",), {"dest": "max_len", "type": int, "default": None}),
            (("--strategy",), {"default": None}),
            (("--search",), {"default": None}),
        ],
    )
    add(
        "perturb",
        "Write a noisy copy of a corpus",
        corpus_flags
        + backend_flags("mmlm", "tmlm")
        + [
            (("--kind",), {"default": None, "choices": noise_mod.NOISE_KINDS}),
            (("--ratio",), {"type": float, "default": None}),
            (("--embeddings",), {"default": None}),
        ],
    )
    add(
        "eval-forward",
        "Forward-translation BLEU on noisy test sets",
        corpus_flags
        + backend_flags("fwd", "mmlm", "tmlm")
        + [
            (("--kinds",), {"default": None, "help": "comma-separated noise kinds"}),
            (("--ratios",), {"default": None, "help": "comma-separated ratios"}),
            (("--embeddings",), {"default": None}),
        ],
    )
    add(
        "eval-rtt",
        "Round-trip BLEU on noisy test sets",
        corpus_flags
        + backend_flags("fwd", "bwd", "mmlm", "tmlm")
        + [
            (("--kinds",), {"default": None}),
            (("--ratios",), {"default": None}),
            (("--embeddings",), {"default": None}),
        ],
    )
    add(
        "attack-sweep",
        "Re-filter a candidates sidecar over a gamma grid and attack a victim",
        backend_flags("victim")
        + [
            (("--candidates",), {"default": None}),
            (("--gammas",), {"default": None, "help": "comma-separated gamma grid"}),
            (("--beta",), {"type": float, "default": None}),
        ],
    )
    add(
        "score-bleu",
        "Corpus BLEU between two token files",
        [
            (("--hyp",), {"default": None}),
            (("--ref",), {"default": None}),
        ],
    )
    add(
        "significance",
        "Paired bootstrap between two hypothesis files",
        [
            (("--hyp-a",), {"dest": "hyp_a", "default": None}),
            (("--hyp-b",), {"dest": "hyp_b", "default": None}),
            (("--ref",), {"default": None}),
            (("--n-resamples",), {"dest": "n_resamples", "type": int, "default": None}),
        ],
    )
    return parser


_FLAG_MAP = {
    "src": ("paths", "src"),
    "tgt": ("paths", "tgt"),
    "tsv": ("paths", "tsv"),
    "out_dir": ("paths", "out_dir"),
    "embeddings": ("paths", "embeddings"),
    "lexicon_fwd": ("paths", "lexicon_fwd"),
    "lexicon_rev": ("paths", "lexicon_rev"),
    "alignments": ("paths", "alignments"),
    "candidates": ("paths", "candidates"),
    "hyp": ("paths", "hyp"),
    "ref": ("paths", "ref"),
    "hyp_a": ("paths", "hyp_a"),
    "hyp_b": ("paths", "hyp_b"),
    "src_lang": ("langs", "src"),
    "tgt_lang": ("langs", "tgt"),
    "fwd": ("backends", "fwd"),
    "bwd": ("backends", "bwd"),
    "mmlm": ("backends", "mmlm"),
    "tmlm": ("backends", "tmlm"),
    "victim": ("backends", "victim"),
    "beta": ("generate", "beta"),
    "gamma": ("generate", "gamma"),
    "c": ("generate", "c"),
    "k": ("generate", "k"),
    "max_len": ("generate", "max_len"),
    "strategy": ("generate", "strategy"),
    "search": ("generate", "search"),
    "iterations": ("align", "iterations"),
    "tension": ("align", "tension"),
    "p_null": ("align", "p_null"),
    "heuristic": ("align", "heuristic"),
    "n_resamples": ("eval", "n_resamples"),
    "workers": ("run", "workers"),
    "seed": ("run", "seed"),
}


def _resolve_config(args: argparse.Namespace) -> dict:
    file_cfg = load_config_file(args.config) if args.config else None
    overrides = {}
    for flag, dest in _FLAG_MAP.items():
        if hasattr(args, flag):
            overrides[dest] = getattr(args, flag)
    # list-valued flags arrive as comma-separated strings
    if getattr(args, "kinds", None) is not None:
        overrides[("noise", "kinds")] = [k for k in args.kinds.split(",") if k]
    if getattr(args, "ratios", None) is not None:
        overrides[("noise", "ratios")] = [float(x) for x in args.ratios.split(",") if x]
    if getattr(args, "gammas", None) is not None:
        overrides[("eval", "gammas")] = [float(x) for x in args.gammas.split(",") if x]
    if getattr(args, "kind", None) is not None:
        overrides[("noise", "kinds")] = [args.kind]
    if getattr(args, "ratio", None) is not None:
        overrides[("noise", "ratios")] = [args.ratio]
    if getattr(args, "seed", None) is not None:
        overrides[("noise", "seed")] = args.seed
        overrides[("generate", "seed")] = args.seed
        overrides[("eval", "seed")] = args.seed
    return resolve(file_cfg, overrides)


def _need(cfg: dict, section: str, key: str, what: str) -> str:
    value = cfg[section][key]
    if not value:
        raise ConfigError(f"{what} required: set {section}.{key} or the matching flag")
    return value


def _load_corpus(cfg: dict) -> Corpus:
    langs = cfg["langs"]
    if cfg["paths"]["tsv"]:
        return load_tsv(cfg["paths"]["tsv"], langs["src"], langs["tgt"])
    src = _need(cfg, "paths", "src", "source file")
    tgt = _need(cfg, "paths", "tgt", "target file")
    return load_parallel(src, tgt, langs["src"], langs["tgt"])


def _backend(cfg: dict, role: str, kind: str, direction: str | None = None):
    descriptor = cfg["backends"][role]
    if not descriptor:
        raise ConfigError(f"no endpoint configured for backend role '{role}'")
    return open_backend(kind, descriptor, direction)


def _gen_config(cfg: dict) -> advgen.GenConfig:
    g = cfg["generate"]
    return advgen.GenConfig(
        beta=g["beta"],
        gamma=g["gamma"],
        c=g["c"],
        k=g["k"],
        max_len=g["max_len"],
        strategy=g["strategy"],
        search=g["search"],
        budget_unit=g["budget_unit"],
        seed=g["seed"],
    )


def _noise_specs(cfg: dict) -> list[noise_mod.NoiseSpec]:
    block = cfg["noise"]
    return [
        noise_mod.NoiseSpec(kind, ratio, block["seed"])
        for kind in block["kinds"]
        for ratio in block["ratios"]
    ]


def _noise_resources(cfg: dict, corpus: Corpus | None) -> noise_mod.NoiseResources:
    res = noise_mod.NoiseResources()
    if cfg["paths"]["embeddings"]:
        res.embeddings = noise_mod.load_embeddings(cfg["paths"]["embeddings"])
    if cfg["backends"]["mmlm"]:
        res.mmlm = _backend(cfg, "mmlm", "mmlm")
    if cfg["backends"]["tmlm"]:
        res.tmlm = _backend(cfg, "tmlm", "tmlm")
    needs_aligner = any(k == "rep_both" for k in cfg["noise"]["kinds"])
    if needs_aligner and corpus is not None:
        a = cfg["align"]
        fwd_lex = align.train_ibm1(corpus, a["iterations"], a["tension"], a["p_null"])

        def aligner(src_tokens, tgt_tokens, _lex=fwd_lex, _a=a):
            from .corpus import ParallelPair, Sentence

            pair = ParallelPair(
                Sentence(tuple(src_tokens), cfg["langs"]["src"]),
                Sentence(tuple(tgt_tokens), cfg["langs"]["tgt"]),
                0,
            )
            return align.viterbi_align(pair, _lex, _a["tension"], _a["p_null"])

        res.aligner = aligner
    return res


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------

def _cmd_align_train(cfg: dict) -> int:
    corpus = _load_corpus(cfg)
    a = cfg["align"]
    out_dir = Path(cfg["paths"]["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    fwd = align.train_ibm1(corpus, a["iterations"], a["tension"], a["p_null"])
    rev = align.train_ibm1(corpus.swapped(), a["iterations"], a["tension"], a["p_null"])
    align.save_lexicon(fwd, out_dir / "lexicon.fwd.tsv")
    align.save_lexicon(rev, out_dir / "lexicon.rev.tsv")
    write_manifest(out_dir, "align-train", cfg, ["lexicon.fwd.tsv", "lexicon.rev.tsv"])
    print(f"trained on {len(corpus)} pairs ({corpus.dropped} dropped); "
          f"final log-likelihood {fwd.ll_history[-1]:.6f}")
    return 0


def _cmd_align_apply(cfg: dict) -> int:
    corpus = _load_corpus(cfg)
    a = cfg["align"]
    fwd_lex = align.load_lexicon(_need(cfg, "paths", "lexicon_fwd", "forward lexicon"))
    rev_lex = align.load_lexicon(_need(cfg, "paths", "lexicon_rev", "reverse lexicon"))
    out_dir = Path(cfg["paths"]["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = []
    for pair in corpus:
        fwd_a = align.viterbi_align(pair, fwd_lex, a["tension"], a["p_null"])
        rev_a = align.viterbi_align(pair.swapped(), rev_lex, a["tension"], a["p_null"])
        merged = align.symmetrize(fwd_a, rev_a, a["heuristic"])
        lines.append(align.write_pharaoh(merged) + "\n")
    (out_dir / "alignments.txt").write_text("".join(lines), encoding="utf-8")
    write_manifest(out_dir, "align-apply", cfg, ["alignments.txt"])
    print(f"aligned {len(corpus)} pairs")
    return 0


def _cmd_phrases(cfg: dict) -> int:
    corpus = _load_corpus(cfg)
    g = cfg["generate"]
    alignment_path = _need(cfg, "paths", "alignments", "alignment file")
    lines = Path(alignment_path).read_text(encoding="utf-8").splitlines()
    if len(lines) != len(corpus):
        raise ValueError(
            f"{alignment_path} has {len(lines)} lines for {len(corpus)} pairs"
        )
    out_dir = Path(cfg["paths"]["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for pair, line in zip(corpus, lines):
        matrix = align.read_pharaoh(line, len(pair.src), len(pair.tgt))
        for sp in phrases_mod.extract_phrases(pair, matrix, g["max_len"]):
            rows.append((pair.id, sp))
    phrases_mod.write_phrase_table(rows, out_dir / "phrases.tsv")
    write_manifest(out_dir, "phrases", cfg, ["phrases.tsv"])
    print(f"extracted {len(rows)} phrase pairs")
    return 0


def _cmd_generate(cfg: dict) -> int:
    corpus = _load_corpus(cfg)
    backends = advgen.Backends(
        fwd=_backend(cfg, "fwd", "translator", "src2tgt"),
        bwd=_backend(cfg, "bwd", "translator", "tgt2src"),
        mmlm=_backend(cfg, "mmlm", "mmlm"),
        tmlm=_backend(cfg, "tmlm", "tmlm"),
    )
    gen_cfg = _gen_config(cfg)
    a = cfg["align"]
    mappings = advgen.build_corpus_mappings(
        corpus,
        max_len=gen_cfg.max_len,
        strategy=gen_cfg.strategy,
        iterations=a["iterations"],
        diagonal_tension=a["tension"],
        p_null=a["p_null"],
        heuristic=a["heuristic"],
    )
    out_dir = Path(cfg["paths"]["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    _, stats, _ = advgen.generate_corpus(
        corpus,
        backends,
        gen_cfg,
        mappings=mappings,
        jsonl_path=out_dir / "candidates.jsonl",
        workers=effective_workers(cfg),
    )
    (out_dir / "report.json").write_text(
        json.dumps(stats.as_dict(), indent=2) + "\n", encoding="utf-8"
    )
    write_manifest(out_dir, "generate", cfg, ["candidates.jsonl", "report.json"])
    print(
        f"accepted {stats.accepted}  rejected {stats.rejected}  "
        f"unusable {stats.unusable}  errored {stats.errored}"
    )
    return 0


def _cmd_perturb(cfg: dict) -> int:
    langs = cfg["langs"]
    kind = cfg["noise"]["kinds"][0]
    ratio = cfg["noise"]["ratios"][0]
    spec = noise_mod.NoiseSpec(kind, ratio, cfg["noise"]["seed"])
    if kind == "rep_both":
        corpus = _load_corpus(cfg)
    elif cfg["paths"]["tgt"] or cfg["paths"]["tsv"]:
        corpus = _load_corpus(cfg)
    else:
        # source-only input: pair each sentence with a placeholder token
        src = _need(cfg, "paths", "src", "source file")
        lines = Path(src).read_text(encoding="utf-8").splitlines()
        tokens = [line.split() for line in lines if line.split()]
        corpus = corpus_from_token_lists(
            tokens, [["-"]] * len(tokens), langs["src"], langs["tgt"]
        )
    resources = _noise_resources(cfg, corpus)
    noisy, manifest = noise_mod.perturb_corpus(corpus, spec, resources)
    out_dir = Path(cfg["paths"]["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "perturbed.src").write_text(
        "".join(p.src.text() + "\n" for p in noisy), encoding="utf-8"
    )
    outputs = ["perturbed.src", "noise_manifest.jsonl"]
    if kind == "rep_both":
        (out_dir / "perturbed.tgt").write_text(
            "".join(p.tgt.text() + "\n" for p in noisy), encoding="utf-8"
        )
        outputs.insert(1, "perturbed.tgt")
    (out_dir / "noise_manifest.jsonl").write_text(
        "".join(json.dumps(m, ensure_ascii=False) + "\n" for m in manifest),
        encoding="utf-8",
    )
    write_manifest(out_dir, "perturb", cfg, outputs)
    print(f"perturbed {len(noisy)} sentences with {kind}@{ratio:g}")
    return 0


def _cmd_eval(cfg: dict, mode: str) -> int:
    corpus = _load_corpus(cfg)
    specs = _noise_specs(cfg)
    resources = _noise_resources(cfg, corpus)
    fwd = _backend(cfg, "fwd", "translator", "src2tgt")
    if mode == "forward":
        report = evaluation.forward_eval(corpus, specs, fwd, resources)
    else:
        bwd = _backend(cfg, "bwd", "translator", "tgt2src")
        report = evaluation.rtt_eval(corpus, specs, fwd, bwd, resources)
    report.metadata.update(
        {
            "backends": {k: v for k, v in cfg["backends"].items() if v},
            "noise_seed": cfg["noise"]["seed"],
            "config_hash": config_hash(cfg),
        }
    )
    out_dir = Path(cfg["paths"]["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    evaluation.report_to_json(report, out_dir / "report.json")
    write_manifest(out_dir, f"eval-{mode}", cfg, ["report.json"])
    print(report.format_table(), end="")
    return 0


def _cmd_attack_sweep(cfg: dict) -> int:
    candidates = _need(cfg, "paths", "candidates", "candidates sidecar")
    victim = _backend(cfg, "victim", "translator", "src2tgt")
    beta = cfg["generate"]["beta"]
    rows = evaluation.attack_eval(candidates, victim, cfg["eval"]["gammas"], beta)
    out_dir = Path(cfg["paths"]["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_text = evaluation.sweep_to_csv(rows)
    (out_dir / "sweep.csv").write_text(csv_text, encoding="utf-8")
    write_manifest(out_dir, "attack-sweep", cfg, ["sweep.csv"])
    print(csv_text, end="")
    return 0


def _read_token_lines(path: str) -> list[list[str]]:
    return [line.split() for line in Path(path).read_text(encoding="utf-8").splitlines()]


def _cmd_score_bleu(cfg: dict) -> int:
    hyp_path = _need(cfg, "paths", "hyp", "hypothesis file")
    ref_path = _need(cfg, "paths", "ref", "reference file")
    score = corpus_bleu(_read_token_lines(hyp_path), _read_token_lines(ref_path))
    print(f"{100.0 * score.value:.2f}")
    return 0


def _cmd_significance(cfg: dict) -> int:
    path_a = _need(cfg, "paths", "hyp_a", "hypothesis file A")
    path_b = _need(cfg, "paths", "hyp_b", "hypothesis file B")
    path_r = _need(cfg, "paths", "ref", "reference file")
    hyps_a = _read_token_lines(path_a)
    hyps_b = _read_token_lines(path_b)
    refs = _read_token_lines(path_r)
    e = cfg["eval"]
    result = paired_bootstrap(hyps_a, hyps_b, refs, e["n_resamples"], e["seed"])
    print(f"p_value={result.p_value:.4f}")
    print(f"delta={100.0 * result.delta:.4f}")
    return 0


_COMMANDS = {
    "align-train": _cmd_align_train,
    "align-apply": _cmd_align_apply,
    "phrases": _cmd_phrases,
    "generate": _cmd_generate,
    "perturb": _cmd_perturb,
    "eval-forward": lambda cfg: _cmd_eval(cfg, "forward"),
    "eval-rtt": lambda cfg: _cmd_eval(cfg, "rtt"),
    "attack-sweep": _cmd_attack_sweep,
    "score-bleu": _cmd_score_bleu,
    "significance": _cmd_significance,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (BackendError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    raise SystemExit(main())
