#!/usr/bin/env python3
"""Record the golden conformance session for stub mode.

Deterministically builds a 50-line request session (well-formed requests,
fixture misses, and malformed lines), the stub fixture answering it, and the
expected response transcript produced by the real serve loop with a reorder
window of 4. Outputs land in tests/fixtures/ and are committed; the
conformance test replays the session and compares bytes.
"""

from __future__ import annotations

import io
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from drtt_server.server import serve_stream  # noqa: E402
from drtt_server.stub import StubProvider  # noqa: E402

FIXTURES = Path(__file__).resolve().parents[1] / "tests" / "fixtures"

WORDS = ["river", "stone", "light", "harbor", "wind", "glass", "ember", "pine"]


def toy_translate(tokens, direction):
    if direction == "src2tgt":
        return [t.upper() for t in tokens]
    return [t.lower() for t in tokens]


def toy_fill(tokens, mask_start, mask_end, k, context):
    base = "-".join(tokens[mask_start:mask_end])
    prefix = "ctx" if context is not None else "fill"
    return [
        {"tokens": [f"{prefix}_{base}_{i}"], "score": round(1.0 / (i + 1), 6)}
        for i in range(k)
    ]


def build_session():
    requests = []
    fixture = []
    rid = 1000

    def add(request, response_body):
        requests.append(json.dumps(request, ensure_ascii=False))
        fixture.append(
            {"request": request, "response": {"ok": True, **response_body}}
        )

    for i in range(22):
        tokens = [WORDS[(i + j) % len(WORDS)] for j in range(2 + i % 4)]
        direction = "src2tgt" if i % 3 else "tgt2src"
        request = {"id": rid, "op": "translate", "direction": direction, "tokens": tokens}
        add(request, {"tokens": toy_translate(tokens, direction)})
        rid += 3

    for i in range(16):
        tokens = [WORDS[(2 * i + j) % len(WORDS)] for j in range(3 + i % 3)]
        mask_start = i % (len(tokens) - 1)
        mask_end = mask_start + 1 + (i % 2 and mask_start + 2 <= len(tokens))
        k = 1 if i % 2 else 3
        request = {
            "id": rid,
            "op": "fill",
            "tokens": tokens,
            "mask_start": mask_start,
            "mask_end": mask_end,
            "k": k,
        }
        add(request, {"candidates": toy_fill(tokens, mask_start, mask_end, k, None)})
        rid += 3

    for i in range(6):
        tokens = [WORDS[(i + j) % len(WORDS)] for j in range(3)]
        context = [WORDS[(5 * i + j) % len(WORDS)] for j in range(4)]
        request = {
            "id": rid,
            "op": "fill",
            "tokens": tokens,
            "mask_start": i % 2,
            "mask_end": i % 2 + 1,
            "k": 1,
            "context_src": context,
        }
        add(request, {"candidates": toy_fill(tokens, i % 2, i % 2 + 1, 1, context)})
        rid += 3

    # three requests with no fixture entry: the stub must answer ok=false
    for i in range(3):
        request = {
            "id": rid,
            "op": "translate",
            "direction": "src2tgt",
            "tokens": [f"unrecorded{i}"],
        }
        requests.append(json.dumps(request, ensure_ascii=False))
        rid += 3

    # three malformed lines: bad JSON, bad op, bad mask bounds
    requests.append("{this is not json")
    requests.append(json.dumps({"id": rid, "op": "reticulate", "tokens": ["x"]}))
    rid += 3
    requests.append(
        json.dumps(
            {"id": rid, "op": "fill", "tokens": ["a"], "mask_start": 0, "mask_end": 5, "k": 1}
        )
    )
    assert len(requests) == 50, len(requests)
    return requests, fixture


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    requests, fixture = build_session()
    (FIXTURES / "golden_requests.jsonl").write_text(
        "\n".join(requests) + "\n", encoding="utf-8"
    )
    (FIXTURES / "stub_session.jsonl").write_text(
        "".join(json.dumps(e, ensure_ascii=False) + "\n" for e in fixture),
        encoding="utf-8",
    )
    provider = StubProvider(FIXTURES / "stub_session.jsonl")
    out = io.StringIO()
    serve_stream(io.StringIO("\n".join(requests) + "\n"), out, provider, reorder_window=4)
    (FIXTURES / "golden_transcript.jsonl").write_text(out.getvalue(), encoding="utf-8")
    print(f"wrote 50 requests, {len(fixture)} fixture entries, transcript "
          f"{len(out.getvalue().splitlines())} lines")


if __name__ == "__main__":
    main()
