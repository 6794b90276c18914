"""Pluggable translation and mask-fill backends.

All model inference is delegated to providers behind two tiny interfaces:
translators expose ``translate_batch(list of token lists)`` and fill
providers expose ``fill(FillRequest)``. Deterministic in-process mocks make
the whole pipeline runnable offline; the wire client speaks
newline-delimited JSON to an external model server over TCP or a stdio
subprocess.

Wire protocol (one JSON object per line):

    request:  {"id": u64, "op": "translate"|"fill",
               "direction": "src2tgt"|"tgt2src",      # translate only
               "tokens": [...],
               "context_src": [...],                   # tmlm fill only
               "mask_start": int, "mask_end": int,     # fill only
               "k": int}                               # fill only
    response: {"id": u64, "ok": bool,
               "tokens": [...],                        # translate
               "candidates": [{"tokens": [...], "score": float}],  # fill
               "error": str}                           # when ok is false

Responses may arrive in any order; "id" correlates them.
"""

from __future__ import annotations

import itertools
import json
import math
import shlex
import socket
import subprocess
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

TRANSLATOR = "translator"
MMLM = "mmlm"
TMLM = "tmlm"
KINDS = (TRANSLATOR, MMLM, TMLM)
DIRECTIONS = ("src2tgt", "tgt2src")


class BackendError(RuntimeError):
    """A backend call failed (timeout, protocol error, or server-side error)."""


@dataclass(frozen=True)
class FillRequest:
    """A mask-fill request with exactly one contiguous masked gap.

    ``tokens`` is the full sentence; [mask_start, mask_end) marks the gap and
    still holds the original phrase, so providers may exclude it from the
    candidates. T-MLM requests additionally carry the full source sentence.
    """

    tokens: tuple[str, ...]
    mask_start: int
    mask_end: int
    k: int
    context_src: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if self.context_src is not None:
            object.__setattr__(self, "context_src", tuple(self.context_src))
        if not (0 <= self.mask_start < self.mask_end <= len(self.tokens)):
            raise ValueError(
                f"mask [{self.mask_start},{self.mask_end}) outside sentence of "
                f"length {len(self.tokens)}"
            )
        if self.k < 1:
            raise ValueError("k must be >= 1")

    @property
    def masked_phrase(self) -> tuple[str, ...]:
        return self.tokens[self.mask_start : self.mask_end]


@dataclass(frozen=True)
class FillCandidate:
    tokens: tuple[str, ...]
    score: float


@dataclass
class CacheEntry:
    key: tuple
    value: object
    hit_count: int = 0


class ResponseCache:
    """Maps request keys to the first response seen; identical thereafter."""

    def __init__(self):
        self._entries: dict[tuple, CacheEntry] = {}
        self._lock = threading.Lock()

    def lookup(self, key: tuple) -> CacheEntry | None:
        with self._lock:
            entry = self._entries.get(key)
            if entry is not None:
                entry.hit_count += 1
            return entry

    def store(self, key: tuple, value) -> CacheEntry:
        with self._lock:
            # last-writer-wins is safe: identical keys carry identical values
            entry = self._entries.setdefault(key, CacheEntry(key, value))
            return entry

    def __len__(self) -> int:
        return len(self._entries)


# ---------------------------------------------------------------------------
# Mock providers (normative for tests)
# ---------------------------------------------------------------------------

def _phrase(key) -> tuple[str, ...]:
    if isinstance(key, str):
        return tuple(key.split())
    return tuple(key)


class IdentityTranslator:
    """Echoes its input."""

    def translate_batch(self, sentences):
        return [list(s) for s in sentences]


class DictionaryTranslator:
    """Per-token table lookup; unknown tokens are copied through by default."""

    def __init__(self, table: dict[str, str], default: str = "copy"):
        if default not in ("copy", "drop"):
            raise ValueError("default must be 'copy' or 'drop'")
        self.table = dict(table)
        self.default = default

    def _one(self, token: str) -> list[str]:
        if token in self.table:
            return self.table[token].split()
        return [token] if self.default == "copy" else []

    def translate_batch(self, sentences):
        return [[t for tok in s for t in self._one(tok)] for s in sentences]


class LossyTranslator(DictionaryTranslator):
    """Dictionary lookup followed by deletion of droplist tokens.

    Models a weak backward model: reconstructions that pass through droplist
    vocabulary lose those tokens.
    """

    def __init__(self, table: dict[str, str], droplist: Sequence[str], default: str = "copy"):
        super().__init__(table, default)
        self.droplist = frozenset(droplist)

    def translate_batch(self, sentences):
        out = super().translate_batch(sentences)
        return [[tok for tok in s if tok not in self.droplist] for s in out]


class TableMlm:
    """Masked-phrase fill from a fixed table of alternatives.

    Scores are rank-based (1/(rank+1)); alternatives equal to the masked
    phrase are excluded.
    """

    def __init__(self, table: dict):
        self.table = {_phrase(k): [_phrase(v) for v in vs] for k, vs in table.items()}

    def fill(self, req: FillRequest) -> list[FillCandidate]:
        original = req.masked_phrase
        alts = [a for a in self.table.get(original, []) if a != original]
        return [FillCandidate(a, 1.0 / (rank + 1)) for rank, a in enumerate(alts[: req.k])]


class TableTmlm:
    """Source-conditioned fill keyed on source phrases present in the context.

    Among the table keys occurring in ``context_src``, the one whose relative
    source position lies closest to the masked gap's relative target position
    wins (a diagonal prior), with earlier-then-longer occurrences breaking
    ties. Its mapped target phrase is the single candidate, unless it equals
    the masked phrase.
    """

    def __init__(self, table: dict):
        self.table = {_phrase(k): _phrase(v) for k, v in table.items()}

    def fill(self, req: FillRequest) -> list[FillCandidate]:
        if req.context_src is None:
            raise BackendError("tmlm fill requires context_src")
        ctx = req.context_src
        m = max(len(ctx), 1)
        gap_rel = req.mask_start / max(len(req.tokens), 1)
        best = None  # (distance, position, -key length, key)
        for key in self.table:
            klen = len(key)
            for pos in range(len(ctx) - klen + 1):
                if tuple(ctx[pos : pos + klen]) == key:
                    entry = (abs(pos / m - gap_rel), pos, -klen, key)
                    if best is None or entry < best:
                        best = entry
        if best is None:
            return []
        phrase = self.table[best[3]]
        if phrase == req.masked_phrase:
            return []
        return [FillCandidate(phrase, 1.0)][: req.k]


# ---------------------------------------------------------------------------
# Wire-protocol client
# ---------------------------------------------------------------------------

class WireClient:
    """Newline-delimited JSON client over TCP or a stdio subprocess.

    Supports multiple in-flight requests: a reader thread files responses by
    id and request() blocks until its own id arrives. Failed requests are
    retried once.
    """

    def __init__(self, endpoint: str, timeout: float = 30.0):
        self.endpoint = endpoint
        self.timeout = timeout
        self._ids = itertools.count(1)
        self._pending: dict[int, dict] = {}
        self._cond = threading.Condition()
        self._send_lock = threading.Lock()
        self._closed = False
        self._proc = None
        self._sock = None
        if endpoint.startswith("tcp:"):
            _, host, port = endpoint.split(":", 2)
            self._sock = socket.create_connection((host, int(port)), timeout=timeout)
            self._rfile = self._sock.makefile("r", encoding="utf-8")
            self._wfile = self._sock.makefile("w", encoding="utf-8")
        elif endpoint.startswith("stdio:"):
            cmd = shlex.split(endpoint[len("stdio:") :])
            self._proc = subprocess.Popen(
                cmd,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
            )
            self._rfile = self._proc.stdout
            self._wfile = self._proc.stdin
        else:
            raise ValueError(f"unknown wire endpoint {endpoint!r}")
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def _read_loop(self):
        try:
            for line in self._rfile:
                line = line.strip()
                if not line:
                    continue
                try:
                    msg = json.loads(line)
                except json.JSONDecodeError:
                    continue
                with self._cond:
                    self._pending[msg.get("id")] = msg
                    self._cond.notify_all()
        except (ValueError, OSError):
            pass
        with self._cond:
            self._closed = True
            self._cond.notify_all()

    def _request_once(self, payload: dict) -> dict:
        rid = next(self._ids)
        line = json.dumps({"id": rid, **payload}, ensure_ascii=False)
        with self._send_lock:
            self._wfile.write(line + "\n")
            self._wfile.flush()
        with self._cond:
            remaining = self.timeout
            while rid not in self._pending:
                if self._closed:
                    raise BackendError(f"{self.endpoint}: connection closed")
                if not self._cond.wait(timeout=remaining):
                    raise BackendError(f"{self.endpoint}: timeout waiting for id {rid}")
            resp = self._pending.pop(rid)
        if not resp.get("ok", False):
            raise BackendError(f"{self.endpoint}: {resp.get('error', 'unknown error')}")
        return resp

    def request(self, payload: dict) -> dict:
        try:
            return self._request_once(payload)
        except BackendError:
            # one retry with a fresh id, then give up
            return self._request_once(payload)

    def close(self):
        try:
            if self._sock is not None:
                try:
                    self._sock.shutdown(socket.SHUT_RDWR)
                except OSError:
                    pass
                self._rfile.close()
                self._wfile.close()
                self._sock.close()
            if self._proc is not None:
                if self._proc.stdin:
                    self._proc.stdin.close()
                self._proc.terminate()
                self._proc.wait(timeout=5)
        except OSError:
            pass


class WireTranslator:
    def __init__(self, client: WireClient, direction: str):
        self.client = client
        self.direction = direction

    def translate_batch(self, sentences):
        out = []
        for s in sentences:
            resp = self.client.request(
                {"op": "translate", "direction": self.direction, "tokens": list(s)}
            )
            out.append([str(t) for t in resp["tokens"]])
        return out


class WireFill:
    def __init__(self, client: WireClient):
        self.client = client

    def fill(self, req: FillRequest) -> list[FillCandidate]:
        payload = {
            "op": "fill",
            "tokens": list(req.tokens),
            "mask_start": req.mask_start,
            "mask_end": req.mask_end,
            "k": req.k,
        }
        if req.context_src is not None:
            payload["context_src"] = list(req.context_src)
        resp = self.client.request(payload)
        return [
            FillCandidate(tuple(c["tokens"]), float(c["score"]))
            for c in resp.get("candidates", [])
        ]


# ---------------------------------------------------------------------------
# Handles and the two public operations
# ---------------------------------------------------------------------------

@dataclass
class BackendHandle:
    """A direction-tagged connection to a translator or mask-fill provider."""

    kind: str
    provider: object
    direction: str | None = None
    endpoint: str = "mock"
    timeout: float = 30.0
    cache: ResponseCache = field(default_factory=ResponseCache)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.kind == TRANSLATOR and self.direction not in DIRECTIONS:
            raise ValueError("translator handles must carry a direction")
        if self.kind != TRANSLATOR and self.direction is not None:
            raise ValueError("fill handles must not carry a direction")


def translate(handle: BackendHandle, sentences: Sequence[Sequence[str]]) -> list[list[str]]:
    """Translate a batch, one output per input, order-preserving and cached."""
    if handle.kind != TRANSLATOR:
        raise ValueError(f"translate needs a translator handle, got {handle.kind}")
    keys = [("translate", handle.direction, tuple(s)) for s in sentences]
    out: list[list[str] | None] = []
    miss_idx = []
    for key in keys:
        entry = handle.cache.lookup(key)
        out.append(list(entry.value) if entry is not None else None)
        if entry is None:
            miss_idx.append(len(out) - 1)
    if miss_idx:
        try:
            results = handle.provider.translate_batch([list(sentences[i]) for i in miss_idx])
        except BackendError:
            raise
        except Exception as exc:
            raise BackendError(f"{handle.endpoint}: {exc}") from exc
        if len(results) != len(miss_idx):
            raise BackendError(
                f"{handle.endpoint}: got {len(results)} outputs for {len(miss_idx)} inputs"
            )
        for i, res in zip(miss_idx, results):
            res = [str(t) for t in res]
            handle.cache.store(keys[i], tuple(res))
            out[i] = res
    return out  # type: ignore[return-value]


def translate_one(handle: BackendHandle, tokens: Sequence[str]) -> list[str]:
    return translate(handle, [tokens])[0]


def fill(handle: BackendHandle, req: FillRequest) -> list[FillCandidate]:
    """Query a mask-fill provider; at most k candidates, scores descending.

    Candidates equal to the original masked phrase are dropped. An empty
    result means the phrase is unreplaceable.
    """
    if handle.kind not in (MMLM, TMLM):
        raise ValueError(f"fill needs an mmlm or tmlm handle, got {handle.kind}")
    if handle.kind == TMLM and req.context_src is None:
        raise ValueError("tmlm fill requests must carry context_src")
    key = ("fill", handle.kind, req.tokens, req.mask_start, req.mask_end, req.k, req.context_src)
    entry = handle.cache.lookup(key)
    if entry is not None:
        return list(entry.value)
    try:
        raw = handle.provider.fill(req)
    except BackendError:
        raise
    except Exception as exc:
        raise BackendError(f"{handle.endpoint}: {exc}") from exc
    cands = [c for c in raw if c.tokens != req.masked_phrase]
    for c in cands:
        if not math.isfinite(c.score):
            raise BackendError(f"{handle.endpoint}: non-finite candidate score")
    cands.sort(key=lambda c: -c.score)
    cands = cands[: req.k]
    handle.cache.store(key, tuple(cands))
    return cands


# ---------------------------------------------------------------------------
# Endpoint descriptors
# ---------------------------------------------------------------------------

def _mock_from_spec(spec: dict):
    mock_type = spec.get("type")
    if mock_type == "identity":
        return IdentityTranslator()
    if mock_type == "dictionary":
        return DictionaryTranslator(spec.get("table", {}), spec.get("default", "copy"))
    if mock_type == "lossy":
        return LossyTranslator(
            spec.get("table", {}), spec.get("droplist", []), spec.get("default", "copy")
        )
    if mock_type == "mlm":
        return TableMlm(spec.get("table", {}))
    if mock_type == "tmlm":
        return TableTmlm(spec.get("table", {}))
    raise ValueError(f"unknown mock type {mock_type!r}")


def open_backend(
    kind: str,
    descriptor: str,
    direction: str | None = None,
    timeout: float = 30.0,
) -> BackendHandle:
    """Build a handle from an endpoint descriptor.

    Descriptors: "mock:identity", "mock:<spec.json>", "tcp:<host>:<port>",
    "stdio:<command line>".
    """
    if descriptor.startswith("mock:"):
        rest = descriptor[len("mock:") :]
        if rest == "identity":
            provider = IdentityTranslator()
        else:
            spec = json.loads(Path(rest).read_text(encoding="utf-8"))
            provider = _mock_from_spec(spec)
    elif descriptor.startswith(("tcp:", "stdio:")):
        client = WireClient(descriptor, timeout=timeout)
        provider = WireTranslator(client, direction) if kind == TRANSLATOR else WireFill(client)
    else:
        raise ValueError(f"unknown endpoint descriptor {descriptor!r}")
    return BackendHandle(
        kind=kind, provider=provider, direction=direction, endpoint=descriptor, timeout=timeout
    )
