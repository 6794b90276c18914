"""The serve loop: newline-delimited JSON over stdio or TCP.

One role per process. Responses may be emitted out of request order (the
reorder window deterministically reverses each window of N requests), and
clients must correlate by id. A malformed request yields an ok=false
response; nothing a client sends can crash the process.
"""

from __future__ import annotations

import socketserver
from dataclasses import dataclass

from .protocol import clamp_candidates, encode, error_response, parse_line

ROLES = ("translator-fwd", "translator-bwd", "mmlm", "tmlm")


@dataclass
class ServerConfig:
    role: str
    model_id: str = ""
    device: str = "cpu"
    max_batch: int = 16
    listen: str = ""  # "host:port", empty means stdio
    stub_fixture: str = ""
    reorder_window: int = 1

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}; expected one of {ROLES}")
        if self.reorder_window < 1:
            raise ValueError("reorder_window must be >= 1")
        if not self.stub_fixture and not self.model_id:
            raise ValueError("either a model identifier or --stub fixture is required")


def build_provider(config: ServerConfig):
    if config.stub_fixture:
        from .stub import StubProvider

        return StubProvider(config.stub_fixture)
    from .models import build_provider as build_model

    return build_model(config.role, config.model_id, config.device, config.max_batch)


def handle_line(line: str, provider) -> dict:
    parsed, error = parse_line(line)
    if error is not None:
        return error_response(parsed if isinstance(parsed, int) else None, error)
    try:
        response = provider.answer(parsed)
    except Exception as exc:  # a single bad request must not kill the server
        return error_response(parsed["id"], f"provider failure: {exc}")
    if parsed.get("op") == "fill" and response.get("ok"):
        response = clamp_candidates(response, parsed["k"])
    return response


class _Window:
    """Buffers responses and flushes each full window in reverse order."""

    def __init__(self, size: int, write):
        self.size = size
        self.write = write
        self.pending: list[dict] = []

    def push(self, response: dict):
        self.pending.append(response)
        if len(self.pending) >= self.size:
            self.flush()

    def flush(self):
        for response in reversed(self.pending):
            self.write(encode(response))
        self.pending.clear()


def serve_stream(rfile, wfile, provider, reorder_window: int = 1):
    """Run the protocol over a pair of text streams until EOF."""

    def write(text: str):
        wfile.write(text)
        wfile.flush()

    window = _Window(reorder_window, write)
    for raw in rfile:
        line = raw.strip()
        if not line:
            continue
        window.push(handle_line(line, provider))
    window.flush()


def serve(config: ServerConfig) -> None:
    """Entry point: serve stdio, or TCP when a listen address is given."""
    provider = build_provider(config)
    if not config.listen:
        import sys

        serve_stream(sys.stdin, sys.stdout, provider, config.reorder_window)
        return

    host, port_text = config.listen.rsplit(":", 1)
    window = config.reorder_window

    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            rfile = (raw.decode("utf-8") for raw in self.rfile)

            def wfile_write(text: str):
                self.wfile.write(text.encode("utf-8"))
                self.wfile.flush()

            class W:
                write = staticmethod(wfile_write)
                flush = staticmethod(lambda: None)

            serve_stream(rfile, W, provider, window)

    with socketserver.ThreadingTCPServer((host or "127.0.0.1", int(port_text)), Handler) as srv:
        srv.daemon_threads = True
        srv.serve_forever()
