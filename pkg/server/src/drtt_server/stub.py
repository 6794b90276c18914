"""Stub provider: answers requests from a recorded fixture file.

The fixture is JSONL of {"request": {...}, "response": {...}} pairs. Lookup
ignores the request id, so a replayed session with fresh ids still matches;
the response is emitted with the incoming id. Used for protocol-conformance
testing without loading any model.
"""

from __future__ import annotations

import json
from pathlib import Path


def _key(request: dict) -> str:
    body = {k: v for k, v in request.items() if k != "id"}
    return json.dumps(body, sort_keys=True, ensure_ascii=False)


class StubProvider:
    def __init__(self, fixture_path: str | Path):
        self.table: dict[str, dict] = {}
        for i, line in enumerate(Path(fixture_path).read_text(encoding="utf-8").splitlines()):
            if not line.strip():
                continue
            try:
                entry = json.loads(line)
                request, response = entry["request"], entry["response"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{fixture_path}: bad fixture entry at line {i + 1}: {exc}")
            self.table[_key(request)] = response

    def answer(self, request: dict) -> dict:
        recorded = self.table.get(_key(request))
        if recorded is None:
            return {"id": request["id"], "ok": False, "error": "no fixture entry for request"}
        response = {"id": request["id"]}
        response.update({k: v for k, v in recorded.items() if k != "id"})
        return response
