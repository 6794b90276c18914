#!/usr/bin/env python3
# Talking to an external model server over the newline-delimited JSON
# protocol. Here the server is the stub from the server/ package, answering
# from a recorded fixture; a real deployment serves actual models with the
# same transport.
#
# Needs the server package importable (pip install -e server, or run from the
# repo root so server/src is on PYTHONPATH via the env below).

import os
import sys
from pathlib import Path

from drtt import FillRequest, fill, open_backend, translate_one

repo = Path(__file__).resolve().parents[1]
fixture = repo / "server" / "tests" / "fixtures" / "stub_session.jsonl"
os.environ["PYTHONPATH"] = str(repo / "server" / "src") + ":" + os.environ.get("PYTHONPATH", "")

endpoint = f"stdio:{sys.executable} -m drtt_server.cli --role translator-fwd --stub {fixture}"
handle = open_backend("translator", endpoint, direction="src2tgt", timeout=30.0)

# the fixture recorded this sentence with its toy uppercase "translation"
print(translate_one(handle, ["stone", "light", "harbor"]))

# responses are cached by (handle, input): the second call is free
print(translate_one(handle, ["stone", "light", "harbor"]))
print("cache entries:", len(handle.cache._entries))

handle.provider.client.close()

# fill requests express the masked gap as token indices into the sentence
mlm = open_backend("mmlm", f"stdio:{sys.executable} -m drtt_server.cli --role mmlm --stub {fixture}")
request = FillRequest(("river", "stone", "light"), 0, 1, k=3)
for candidate in fill(mlm, request):
    print(candidate.tokens, round(candidate.score, 3))
mlm.provider.client.close()
