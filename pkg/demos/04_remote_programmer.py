"""Walkthrough: refining through the HTTP edit service.

Requires the companion service package:  pip install -e service/
Run from the repository root:  python3 demos/04_remote_programmer.py
"""

import json
import socket
import tempfile
import threading
import time

import uvicorn

from progsvc import BackendConfig, create_app
from sgrefine import (
    Instance,
    RefinementConfig,
    RemoteProgrammer,
    parse_graph,
    refine,
    serialize_graph,
)

# --- stand up an oracle-mode service in-process -----------------------------
gold_text = "( cat , on , mat ) , ( cat , is , black ) , ( mat , near , window )"
with tempfile.NamedTemporaryFile("w", suffix=".jsonl", delete=False) as fh:
    fh.write(json.dumps({"id": "demo", "graph": gold_text}) + "\n")
    gold_path = fh.name

with socket.socket() as s:
    s.bind(("127.0.0.1", 0))
    port = s.getsockname()[1]

server = uvicorn.Server(
    uvicorn.Config(
        create_app(BackendConfig(mode="oracle", gold_path=gold_path)),
        host="127.0.0.1",
        port=port,
        log_level="warning",
    )
)
threading.Thread(target=server.run, daemon=True).start()
while not server.started:
    time.sleep(0.01)
endpoint = f"http://127.0.0.1:{port}"

# --- refine against it over real HTTP ---------------------------------------
client = RemoteProgrammer(endpoint, instance_id="demo")
print("service health:", client.health())

noisy = parse_graph("( cat , on , mat ) , ( dog , under , table )")
instance = Instance(id="demo", caption="A black cat on a mat near a window.")
final, trace = refine(instance, noisy, RefinementConfig(iterations=2), client)

print("initial:", serialize_graph(noisy))
print("final:  ", serialize_graph(final))
print("matches gold:", final.triple_set() == parse_graph(gold_text).triple_set())

server.should_exit = True
