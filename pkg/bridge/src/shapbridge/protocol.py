"""Frame encoding for the line-delimited JSON prediction protocol.

One JSON object per line, newline-terminated, UTF-8. Numbers are finite
doubles serialized in shortest round-trip decimal form (Python's default
float repr).
"""

from __future__ import annotations

import json

PROTOCOL_VERSION = 1


def encode_frame(obj: dict) -> bytes:
    return (json.dumps(obj, separators=(",", ":"), allow_nan=False) + "\n").encode(
        "utf-8"
    )


def parse_frame(line: bytes) -> dict | None:
    """Decode one frame; None when the line is not a JSON object."""
    try:
        obj = json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        return None
    if not isinstance(obj, dict):
        return None
    return obj
