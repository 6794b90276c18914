"""Real-model providers built on Hugging Face transformers.

These are the reference realizations of the four roles. Each process hosts
exactly one role. Imports are lazy so the stub mode works without torch or
transformers installed; install the ``models`` extra to use them.

The tmlm role concatenates the source tokens and the masked target with a
separator sentinel before fill, so the predictor sees the full source
context.
"""

from __future__ import annotations

SEP = "[SEP]"


def _require_transformers():
    try:
        import transformers  # noqa: F401
    except ImportError as exc:  # pragma: no cover - exercised without extras
        raise RuntimeError(
            "model mode needs the 'models' extra: pip install drtt-model-server[models]"
        ) from exc


class TranslatorModel:
    """Seq2seq translation for one direction."""

    def __init__(self, model_id: str, device: str = "cpu", max_batch: int = 16):
        _require_transformers()
        from transformers import AutoModelForSeq2SeqLM, AutoTokenizer

        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModelForSeq2SeqLM.from_pretrained(model_id).to(device)
        self.device = device
        self.max_batch = max_batch

    def answer(self, request: dict) -> dict:
        text = " ".join(request["tokens"])
        inputs = self.tokenizer([text], return_tensors="pt", truncation=True).to(self.device)
        output = self.model.generate(**inputs, max_new_tokens=256)
        decoded = self.tokenizer.batch_decode(output, skip_special_tokens=True)[0]
        return {"id": request["id"], "ok": True, "tokens": decoded.split()}


class MaskFillModel:
    """Masked-phrase fill; the tmlm flavor prepends the source context."""

    def __init__(self, model_id: str, device: str = "cpu", with_context: bool = False):
        _require_transformers()
        from transformers import pipeline

        self.pipe = pipeline("fill-mask", model=model_id, device=device)
        self.with_context = with_context
        self.mask_token = self.pipe.tokenizer.mask_token

    def answer(self, request: dict) -> dict:
        tokens = list(request["tokens"])
        start, end = request["mask_start"], request["mask_end"]
        masked = tokens[:start] + [self.mask_token] + tokens[end:]
        text = " ".join(masked)
        if self.with_context:
            context = request.get("context_src") or []
            text = " ".join(context) + f" {SEP} " + text
        original = tuple(tokens[start:end])
        outputs = self.pipe(text, top_k=request["k"] + 1)
        candidates = []
        for out in outputs:
            phrase = out["token_str"].strip().split()
            if tuple(phrase) == original or not phrase:
                continue
            candidates.append({"tokens": phrase, "score": float(out["score"])})
            if len(candidates) == request["k"]:
                break
        return {"id": request["id"], "ok": True, "candidates": candidates}


def build_provider(role: str, model_id: str, device: str, max_batch: int):
    if role in ("translator-fwd", "translator-bwd"):
        return TranslatorModel(model_id, device, max_batch)
    if role == "mmlm":
        return MaskFillModel(model_id, device, with_context=False)
    if role == "tmlm":
        return MaskFillModel(model_id, device, with_context=True)
    raise ValueError(f"unknown role {role!r}")
