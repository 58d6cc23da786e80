"""The serving loop: strictly sequential request/response over one session.

Frame discipline: exactly one JSON object per line; prediction ids echo the
request; value counts match instance counts. A malformed or out-of-protocol
frame gets an error frame and the session continues; shutdown or EOF ends
it. Responses are deterministic to full double precision for a fixed model
artifact.
"""

from __future__ import annotations

import math
import socket
import sys
from dataclasses import dataclass

import numpy as np

from .models import ModelBundle
from .protocol import PROTOCOL_VERSION, encode_frame, parse_frame


@dataclass(frozen=True)
class ServerConfig:
    model_spec: str
    mode: str = "stdio"  # "stdio" or "tcp"
    port: int = 0
    batch_cap: int = 4096

    def __post_init__(self):
        if self.batch_cap < 1:
            raise ValueError("batch cap must be >= 1")
        if self.mode not in ("stdio", "tcp"):
            raise ValueError(f"mode must be stdio or tcp, got {self.mode!r}")


class Session:
    def __init__(self, bundle: ModelBundle, batch_cap: int, reader, writer):
        self.bundle = bundle
        self.batch_cap = batch_cap
        self.reader = reader
        self.writer = writer
        self.greeted = False

    def send(self, obj: dict):
        self.writer.write(encode_frame(obj))
        self.writer.flush()

    def error(self, message: str):
        self.send({"type": "error", "message": message})

    def run(self):
        for line in self.reader:
            if not line.strip():
                continue
            frame = parse_frame(line)
            if frame is None:
                self.error("malformed frame")
                continue
            kind = frame.get("type")
            if kind == "hello":
                self.handle_hello(frame)
            elif kind == "predict":
                self.handle_predict(frame)
            elif kind == "shutdown":
                return
            else:
                self.error(f"unexpected frame type {kind!r}")

    def handle_hello(self, frame: dict):
        if frame.get("version") != PROTOCOL_VERSION:
            self.error(
                f"unsupported protocol version {frame.get('version')!r}; "
                f"this server speaks {PROTOCOL_VERSION}"
            )
            return
        m = frame.get("m")
        if not isinstance(m, int) or m < 1:
            self.error("hello needs a positive integer attribute count")
            return
        if self.bundle.m is not None and m != self.bundle.m:
            self.error(
                f"model expects {self.bundle.m} attributes, client declared {m}"
            )
            return
        self.session_m = m
        self.greeted = True
        self.send({"type": "ready", "version": PROTOCOL_VERSION})

    def handle_predict(self, frame: dict):
        if not self.greeted:
            self.error("predict before hello")
            return
        batch_id = frame.get("id")
        if not isinstance(batch_id, int):
            self.error("predict needs an integer id")
            return
        instances = frame.get("instances")
        if not isinstance(instances, list) or not instances:
            self.error("predict needs a nonempty instance list")
            return
        if len(instances) > self.batch_cap:
            self.error(
                f"batch of {len(instances)} exceeds the cap of {self.batch_cap}"
            )
            return
        rows = []
        for row in instances:
            if (
                not isinstance(row, list)
                or len(row) != self.session_m
                or not all(
                    isinstance(v, (int, float))
                    and not isinstance(v, bool)
                    and math.isfinite(v)
                    for v in row
                )
            ):
                self.error(
                    f"instances must be rows of {self.session_m} finite numbers"
                )
                return
            rows.append([float(v) for v in row])
        values = self.bundle(np.asarray(rows, dtype=float))
        self.send(
            {
                "type": "prediction",
                "id": batch_id,
                "values": [float(v) for v in values],
            }
        )


def serve(config: ServerConfig, bundle: ModelBundle) -> int:
    if config.mode == "stdio":
        session = Session(
            bundle, config.batch_cap, sys.stdin.buffer, sys.stdout.buffer
        )
        session.run()
        return 0
    listener = socket.create_server(("127.0.0.1", config.port))
    port = listener.getsockname()[1]
    print(f"listening on 127.0.0.1:{port}", file=sys.stderr, flush=True)
    conn, _ = listener.accept()
    listener.close()
    with conn:
        reader = conn.makefile("rb")
        writer = conn.makefile("wb")
        Session(bundle, config.batch_cap, reader, writer).run()
    return 0
