import json
import socket
import socketserver
import sys
import threading

import pytest

from drtt.backends import (
    MMLM,
    TMLM,
    TRANSLATOR,
    BackendError,
    BackendHandle,
    DictionaryTranslator,
    FillCandidate,
    FillRequest,
    IdentityTranslator,
    LossyTranslator,
    TableMlm,
    TableTmlm,
    WireClient,
    fill,
    open_backend,
    translate,
    translate_one,
)


def translator_handle(provider):
    return BackendHandle(kind=TRANSLATOR, provider=provider, direction="src2tgt")


def mlm_handle(provider, kind=MMLM):
    return BackendHandle(kind=kind, provider=provider)


class TestHandles:
    def test_translator_needs_direction(self):
        with pytest.raises(ValueError):
            BackendHandle(kind=TRANSLATOR, provider=IdentityTranslator())

    def test_fill_rejects_direction(self):
        with pytest.raises(ValueError):
            BackendHandle(kind=MMLM, provider=TableMlm({}), direction="src2tgt")


class TestFillRequest:
    def test_mask_must_be_inside(self):
        with pytest.raises(ValueError):
            FillRequest(("a", "b"), 1, 3, 1)

    def test_mask_must_be_nonempty(self):
        with pytest.raises(ValueError):
            FillRequest(("a", "b"), 1, 1, 1)

    def test_k_positive(self):
        with pytest.raises(ValueError):
            FillRequest(("a", "b"), 0, 1, 0)


class TestMocks:
    def test_identity(self):
        handle = translator_handle(IdentityTranslator())
        assert translate(handle, [["a", "b"]]) == [["a", "b"]]

    def test_dictionary(self):
        handle = translator_handle(DictionaryTranslator({"a": "x", "b": "y"}))
        assert translate(handle, [["a", "b"]]) == [["x", "y"]]

    def test_dictionary_default_copy(self):
        handle = translator_handle(DictionaryTranslator({"a": "x"}))
        assert translate_one(handle, ["a", "unk"]) == ["x", "unk"]

    def test_dictionary_multi_token_output(self):
        handle = translator_handle(DictionaryTranslator({"a": "x y"}))
        assert translate_one(handle, ["a"]) == ["x", "y"]

    def test_lossy_drops_after_lookup(self):
        handle = translator_handle(
            LossyTranslator({"le": "the", "sac": "bag"}, droplist=["bag"])
        )
        assert translate_one(handle, ["le", "sac"]) == ["the"]

    def test_table_mlm_ranked_candidates(self):
        handle = mlm_handle(TableMlm({"huge": ["light", "big"]}))
        req = FillRequest(("the", "huge", "bag"), 1, 2, 2)
        got = fill(handle, req)
        assert [c.tokens for c in got] == [("light",), ("big",)]
        assert got[0].score >= got[1].score

    def test_table_mlm_k_bound(self):
        handle = mlm_handle(TableMlm({"huge": ["light", "big", "vast"]}))
        req = FillRequest(("huge",), 0, 1, 1)
        assert len(fill(handle, req)) == 1

    def test_table_mlm_excludes_original(self):
        handle = mlm_handle(TableMlm({"huge": ["huge", "light"]}))
        req = FillRequest(("huge",), 0, 1, 5)
        assert [c.tokens for c in fill(handle, req)] == [("light",)]

    def test_table_mlm_unknown_phrase_empty(self):
        handle = mlm_handle(TableMlm({"huge": ["light"]}))
        req = FillRequest(("tiny",), 0, 1, 3)
        assert fill(handle, req) == []

    def test_table_tmlm_uses_source_context(self):
        handle = mlm_handle(TableTmlm({"light": "léger"}), kind=TMLM)
        req = FillRequest(
            ("le", "sac", "énorme"), 2, 3, 1, context_src=("the", "light", "bag")
        )
        got = fill(handle, req)
        assert [c.tokens for c in got] == [("léger",)]

    def test_table_tmlm_no_match_empty(self):
        handle = mlm_handle(TableTmlm({"light": "léger"}), kind=TMLM)
        req = FillRequest(("le", "sac"), 0, 1, 1, context_src=("the", "bag"))
        assert fill(handle, req) == []

    def test_tmlm_requires_context(self):
        handle = mlm_handle(TableTmlm({}), kind=TMLM)
        req = FillRequest(("a",), 0, 1, 1)
        with pytest.raises(ValueError):
            fill(handle, req)


class TestCache:
    def test_translate_cache_hit(self):
        calls = []

        class Counting(IdentityTranslator):
            def translate_batch(self, sentences):
                calls.append(len(sentences))
                return super().translate_batch(sentences)

        handle = translator_handle(Counting())
        first = translate(handle, [["a", "b"]])
        second = translate(handle, [["a", "b"]])
        assert first == second
        assert calls == [1]
        entry = handle.cache.lookup(("translate", "src2tgt", ("a", "b")))
        assert entry is not None and entry.hit_count >= 2

    def test_fill_cache_hit(self):
        calls = []

        class Counting(TableMlm):
            def fill(self, req):
                calls.append(req)
                return super().fill(req)

        handle = mlm_handle(Counting({"a": ["b"]}))
        req = FillRequest(("a",), 0, 1, 1)
        assert fill(handle, req) == fill(handle, req)
        assert len(calls) == 1

    def test_batch_partial_cache(self):
        handle = translator_handle(DictionaryTranslator({"a": "x", "b": "y"}))
        translate(handle, [["a"]])
        out = translate(handle, [["a"], ["b"]])
        assert out == [["x"], ["y"]]

    def test_length_and_order_preserved(self):
        handle = translator_handle(IdentityTranslator())
        batch = [["c"], ["a"], ["b"], ["a"]]
        assert translate(handle, batch) == batch


# ---------------------------------------------------------------------------
# wire protocol
# ---------------------------------------------------------------------------

SERVER_SCRIPT = r"""
import json, sys

reorder = "--reorder" in sys.argv
buffer = []

def respond(req):
    if req.get("op") == "translate":
        toks = req["tokens"]
        if toks and toks[0] == "BOOM":
            return {"id": req["id"], "ok": False, "error": "BOOM requested"}
        return {"id": req["id"], "ok": True, "tokens": [t.upper() for t in toks]}
    k = req["k"]
    cands = [
        {"tokens": [f"z{i}"], "score": 1.0 / (1 + i)}
        for i in range(k)
    ]
    return {"id": req["id"], "ok": True, "candidates": cands}

def emit(resp):
    sys.stdout.write(json.dumps(resp) + "\n")
    sys.stdout.flush()

for line in sys.stdin:
    line = line.strip()
    if not line:
        continue
    req = json.loads(line)
    if reorder:
        buffer.append(req)
        if len(buffer) == 2:
            emit(respond(buffer[1]))
            emit(respond(buffer[0]))
            buffer = []
    else:
        emit(respond(req))
"""


def stdio_endpoint(*extra):
    args = " ".join(extra)
    return f"stdio:{sys.executable} -c '{SERVER_SCRIPT}' {args}".rstrip()


@pytest.fixture
def stdio_client():
    client = WireClient(stdio_endpoint(), timeout=10.0)
    yield client
    client.close()


class TestWireClient:
    def test_translate_round_trip(self, stdio_client):
        resp = stdio_client.request({"op": "translate", "direction": "src2tgt", "tokens": ["a", "b"]})
        assert resp["tokens"] == ["A", "B"]

    def test_fill_round_trip(self, stdio_client):
        resp = stdio_client.request(
            {"op": "fill", "tokens": ["a"], "mask_start": 0, "mask_end": 1, "k": 2}
        )
        assert [c["tokens"] for c in resp["candidates"]] == [["z0"], ["z1"]]

    def test_server_error_raises_after_retry(self, stdio_client):
        with pytest.raises(BackendError, match="BOOM"):
            stdio_client.request({"op": "translate", "direction": "src2tgt", "tokens": ["BOOM"]})

    def test_out_of_order_correlation(self):
        client = WireClient(stdio_endpoint("--reorder"), timeout=10.0)
        try:
            results = {}

            def ask(tok):
                resp = client.request(
                    {"op": "translate", "direction": "src2tgt", "tokens": [tok]}
                )
                results[tok] = resp["tokens"]

            threads = [threading.Thread(target=ask, args=(t,)) for t in ("a", "b")]
            for t in threads:
                t.start()
            for t in threads:
                t.join(timeout=10)
            assert results == {"a": ["A"], "b": ["B"]}
        finally:
            client.close()

    def test_handle_integration(self):
        handle = open_backend(TRANSLATOR, stdio_endpoint(), direction="src2tgt", timeout=10.0)
        try:
            assert translate_one(handle, ["hi"]) == ["HI"]
        finally:
            handle.provider.client.close()

    def test_fill_handle_k_bound(self):
        handle = open_backend(MMLM, stdio_endpoint(), timeout=10.0)
        try:
            req = FillRequest(("a", "b"), 0, 1, 1)
            got = fill(handle, req)
            assert len(got) <= 1
            assert got[0].tokens == ("z0",)
        finally:
            handle.provider.client.close()


class _TcpHandler(socketserver.StreamRequestHandler):
    def handle(self):
        for raw in self.rfile:
            line = raw.decode("utf-8").strip()
            if not line:
                continue
            req = json.loads(line)
            resp = {"id": req["id"], "ok": True, "tokens": list(reversed(req["tokens"]))}
            self.wfile.write((json.dumps(resp) + "\n").encode("utf-8"))
            self.wfile.flush()


class TestWireTcp:
    def test_tcp_transport(self):
        server = socketserver.ThreadingTCPServer(("127.0.0.1", 0), _TcpHandler)
        port = server.server_address[1]
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            client = WireClient(f"tcp:127.0.0.1:{port}", timeout=10.0)
            resp = client.request({"op": "translate", "direction": "src2tgt", "tokens": ["a", "b"]})
            assert resp["tokens"] == ["b", "a"]
            client.close()
        finally:
            server.shutdown()
            server.server_close()


class TestOpenBackend:
    def test_mock_identity(self):
        handle = open_backend(TRANSLATOR, "mock:identity", direction="src2tgt")
        assert translate_one(handle, ["x"]) == ["x"]

    def test_mock_from_spec_file(self, tmp_path):
        spec = tmp_path / "dict.json"
        spec.write_text(json.dumps({"type": "dictionary", "table": {"a": "x"}}))
        handle = open_backend(TRANSLATOR, f"mock:{spec}", direction="src2tgt")
        assert translate_one(handle, ["a"]) == ["x"]

    def test_mock_mlm_spec(self, tmp_path):
        spec = tmp_path / "mlm.json"
        spec.write_text(json.dumps({"type": "mlm", "table": {"big bag": ["small sack"]}}))
        handle = open_backend(MMLM, f"mock:{spec}")
        req = FillRequest(("a", "big", "bag"), 1, 3, 1)
        assert [c.tokens for c in fill(handle, req)] == [("small", "sack")]

    def test_unknown_descriptor(self):
        with pytest.raises(ValueError):
            open_backend(TRANSLATOR, "carrier-pigeon:coop5", direction="src2tgt")
