"""Wire-protocol message handling: newline-delimited JSON, one object per line.

Requests:  {"id": u64, "op": "translate"|"fill",
            "direction": "src2tgt"|"tgt2src",      # translate only
            "tokens": [...],
            "context_src": [...],                   # tmlm fill only
            "mask_start": int, "mask_end": int,     # fill only
            "k": int}                               # fill only
Responses: {"id": u64, "ok": bool, "tokens": [...]} for translate,
           {"id": u64, "ok": true, "candidates": [{"tokens": [...],
            "score": float}]} for fill, or {"id": ..., "ok": false,
            "error": "..."} on any failure.

A malformed request never kills the process; it produces an ok=false
response carrying whatever id could be recovered.
"""

from __future__ import annotations

import json

OPS = ("translate", "fill")
DIRECTIONS = ("src2tgt", "tgt2src")


class ProtocolError(ValueError):
    pass


def parse_line(line: str):
    """Parse one request line. Returns (request dict, None) or (id, error)."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        return None, f"invalid JSON: {exc.msg}"
    if not isinstance(obj, dict):
        return None, "request must be a JSON object"
    rid = obj.get("id")
    if not isinstance(rid, int) or rid < 0:
        return None, "missing or invalid 'id'"
    try:
        _validate(obj)
    except ProtocolError as exc:
        return rid, str(exc)
    return obj, None


def _token_list(obj, key, required=True):
    value = obj.get(key)
    if value is None:
        if required:
            raise ProtocolError(f"missing '{key}'")
        return None
    if not isinstance(value, list) or not all(isinstance(t, str) for t in value):
        raise ProtocolError(f"'{key}' must be a list of strings")
    return value


def _validate(obj):
    op = obj.get("op")
    if op not in OPS:
        raise ProtocolError(f"unknown op {op!r}")
    tokens = _token_list(obj, "tokens")
    if op == "translate":
        if obj.get("direction") not in DIRECTIONS:
            raise ProtocolError("translate requires 'direction' of src2tgt or tgt2src")
        return
    # fill
    mask_start = obj.get("mask_start")
    mask_end = obj.get("mask_end")
    k = obj.get("k")
    if not isinstance(mask_start, int) or not isinstance(mask_end, int):
        raise ProtocolError("fill requires integer 'mask_start' and 'mask_end'")
    if not (0 <= mask_start < mask_end <= len(tokens)):
        raise ProtocolError(
            f"mask [{mask_start},{mask_end}) outside sentence of length {len(tokens)}"
        )
    if not isinstance(k, int) or k < 1:
        raise ProtocolError("fill requires integer 'k' >= 1")
    _token_list(obj, "context_src", required=False)


def error_response(rid, message: str) -> dict:
    return {"id": rid, "ok": False, "error": message}


def encode(response: dict) -> str:
    """Canonical one-line encoding; replays are byte-identical."""
    return json.dumps(response, ensure_ascii=False) + "\n"


def clamp_candidates(response: dict, k: int) -> dict:
    """Enforce the protocol bound: a fill response carries at most k candidates."""
    cands = response.get("candidates")
    if cands is not None and len(cands) > k:
        response = dict(response)
        response["candidates"] = cands[:k]
    return response
