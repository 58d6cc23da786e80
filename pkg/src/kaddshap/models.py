"""Built-in models and the client side of the model wire protocol.

The wire protocol is line-delimited JSON over a child process's standard
streams or a TCP connection. One JSON object per line, newline-terminated,
numbers as finite doubles in shortest round-trip decimal form:

    client: {"type":"hello","version":1,"m":<int>}
    server: {"type":"ready","version":1}
    client: {"type":"predict","id":<int>,"instances":[[f64 x m],...]}
    server: {"type":"prediction","id":<int>,"values":[f64 x batch]}
    client: {"type":"shutdown"}

Anything else on the stream is a protocol error; the client never retries.
"""

from __future__ import annotations

import json
import math
import select
import shlex
import socket
import subprocess
import time
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    FitError,
    FrameError,
    HandshakeError,
    PredictionCountError,
    TransportTimeout,
)

PROTOCOL_VERSION = 1


class LinearModel:
    """Ordinary least-squares regression; coefficients are exposed so tests
    can compare against the analytic attribution closed form."""

    def __init__(self, intercept: float, coefficients: np.ndarray):
        self.intercept_ = float(intercept)
        self.coef_ = np.asarray(coefficients, dtype=float)

    @classmethod
    def fit(cls, X, y) -> "LinearModel":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float).reshape(-1)
        n, m = X.shape
        if n < m + 1:
            raise FitError(
                f"need at least {m + 1} training rows for {m} attributes, got {n}"
            )
        design = np.column_stack([np.ones(n), X])
        params, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
        if rank < m + 1:
            raise FitError("singular design: attributes are linearly dependent")
        return cls(params[0], params[1:])

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        return self.intercept_ + np.asarray(X, dtype=float) @ self.coef_


class SyntheticInteractionModel:
    """Polynomial of monomial terms: sum of c_t * prod_{j in t} x_j.

    A term with no attributes is a constant; an empty term list is the zero
    model. Useful as a ground truth whose induced game has interactions of
    known order.
    """

    def __init__(self, terms):
        parsed = []
        for coeff, indices in terms:
            idx = tuple(int(j) for j in indices)
            if any(j < 0 for j in idx):
                raise ValueError("term indices must be nonnegative")
            if len(set(idx)) != len(idx):
                raise ValueError("term indices must be distinct")
            parsed.append((float(coeff), idx))
        self.terms = tuple(parsed)

    @property
    def degree(self) -> int:
        return max((len(idx) for _, idx in self.terms), default=0)

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = np.zeros(X.shape[0])
        for coeff, idx in self.terms:
            if any(j >= X.shape[1] for j in idx):
                raise ValueError(
                    f"term {idx} references attributes beyond m={X.shape[1]}"
                )
            if idx:
                out += coeff * np.prod(X[:, list(idx)], axis=1)
            else:
                out += coeff
        return out


def encode_frame(obj: dict) -> bytes:
    """Serialize one frame: compact JSON, shortest round-trip decimals,
    newline-terminated."""
    return (json.dumps(obj, separators=(",", ":"), allow_nan=False) + "\n").encode(
        "utf-8"
    )


def decode_frame(line: bytes) -> dict:
    try:
        obj = json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FrameError(f"malformed frame: {exc}") from exc
    if not isinstance(obj, dict) or "type" not in obj:
        raise FrameError(f"frame is not an object with a 'type': {line[:80]!r}")
    return obj


class _StdioTransport:
    def __init__(self, command: str):
        self.proc = subprocess.Popen(
            shlex.split(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
        )
        self._buffer = b""

    def send(self, data: bytes):
        self.proc.stdin.write(data)
        self.proc.stdin.flush()

    def recv_line(self, timeout: float) -> bytes:
        deadline = time.monotonic() + timeout
        fd = self.proc.stdout.fileno()
        while b"\n" not in self._buffer:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise TransportTimeout(f"no frame within {timeout} s")
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                continue
            chunk = self.proc.stdout.read1(65536)
            if not chunk:
                raise FrameError("server closed the stream mid-session")
            self._buffer += chunk
        line, self._buffer = self._buffer.split(b"\n", 1)
        return line

    def close(self):
        try:
            if self.proc.stdin and not self.proc.stdin.closed:
                self.proc.stdin.close()
        except BrokenPipeError:
            pass
        try:
            self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self.proc.kill()
            self.proc.wait()


class _TcpTransport:
    def __init__(self, address: str, timeout: float):
        host, _, port = address.rpartition(":")
        if not host or not port.isdigit():
            raise ValueError(f"TCP address must be host:port, got {address!r}")
        self.sock = socket.create_connection((host, int(port)), timeout=timeout)
        self._buffer = b""

    def send(self, data: bytes):
        self.sock.sendall(data)

    def recv_line(self, timeout: float) -> bytes:
        self.sock.settimeout(timeout)
        while b"\n" not in self._buffer:
            try:
                chunk = self.sock.recv(65536)
            except socket.timeout as exc:
                raise TransportTimeout(f"no frame within {timeout} s") from exc
            if not chunk:
                raise FrameError("server closed the stream mid-session")
            self._buffer += chunk
        line, self._buffer = self._buffer.split(b"\n", 1)
        return line

    def close(self):
        try:
            self.sock.close()
        except OSError:
            pass


class RemoteModelClient:
    """BlackBoxModel backed by an external server speaking the wire protocol.

    ``command`` launches a child process bridged over stdio; ``address``
    connects to host:port instead. The client fails fast on any protocol
    violation and never retries.
    """

    def __init__(self, m: int, command: str | None = None,
                 address: str | None = None, timeout: float = 30.0,
                 frame_log: list | None = None):
        if (command is None) == (address is None):
            raise ValueError("exactly one of command / address must be given")
        self.m = int(m)
        self.timeout = timeout
        self.frame_log = frame_log
        self._next_id = 0
        self._transport = (
            _StdioTransport(command) if command else _TcpTransport(address, timeout)
        )
        try:
            self._handshake()
        except Exception:
            self._transport.close()
            raise

    def _send(self, obj: dict):
        data = encode_frame(obj)
        if self.frame_log is not None:
            self.frame_log.append(("send", data))
        self._transport.send(data)

    def _recv(self) -> dict:
        line = self._transport.recv_line(self.timeout)
        if self.frame_log is not None:
            self.frame_log.append(("recv", line + b"\n"))
        return decode_frame(line)

    def _handshake(self):
        self._send({"type": "hello", "version": PROTOCOL_VERSION, "m": self.m})
        try:
            reply = self._recv()
        except FrameError as exc:
            raise HandshakeError(f"handshake failed: {exc}") from exc
        if reply.get("type") != "ready" or reply.get("version") != PROTOCOL_VERSION:
            raise HandshakeError(f"expected ready/version={PROTOCOL_VERSION}, got {reply}")

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.m:
            raise ValueError(f"batch must be (n, {self.m}), got {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValueError("instances must be finite")
        batch_id = self._next_id
        self._next_id += 1
        self._send(
            {"type": "predict", "id": batch_id, "instances": X.tolist()}
        )
        reply = self._recv()
        if reply.get("type") == "error":
            raise FrameError(
                f"server error for batch {batch_id}: {reply.get('message')}"
            )
        if reply.get("type") != "prediction":
            raise FrameError(f"expected a prediction frame, got {reply.get('type')!r}")
        if reply.get("id") != batch_id:
            raise PredictionCountError(
                f"prediction id {reply.get('id')} does not match request {batch_id}"
            )
        values = reply.get("values")
        if not isinstance(values, list) or len(values) != X.shape[0]:
            got = len(values) if isinstance(values, list) else values
            raise PredictionCountError(
                f"batch {batch_id}: expected {X.shape[0]} values, got {got}"
            )
        out = np.empty(len(values))
        for i, v in enumerate(values):
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                raise FrameError(f"batch {batch_id}: value {i} is not a finite number")
            out[i] = float(v)
        return out

    def shutdown(self):
        try:
            self._send({"type": "shutdown"})
        except (BrokenPipeError, OSError):
            pass
        self._transport.close()

    def close(self):
        self.shutdown()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.shutdown()


@dataclass
class ServeCheckReport:
    batches: int
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def serve_check(m: int, command: str | None = None, address: str | None = None,
                batches: int = 100, batch_size: int = 8, seed: int | None = 0,
                timeout: float = 30.0) -> ServeCheckReport:
    """Drive a server through a handshake and randomized prediction batches,
    recording every frame violation instead of failing on the first."""
    rng = np.random.default_rng(seed)
    violations: list[str] = []
    try:
        client = RemoteModelClient(m, command=command, address=address, timeout=timeout)
    except Exception as exc:
        return ServeCheckReport(batches=0, violations=[f"handshake: {exc}"])
    done = 0
    try:
        for i in range(batches):
            size = int(rng.integers(1, batch_size + 1))
            X = rng.uniform(-1.0, 1.0, size=(size, m))
            try:
                values = client.predict_batch(X)
            except Exception as exc:
                violations.append(f"batch {i}: {exc}")
                break
            if values.shape != (size,):
                violations.append(f"batch {i}: bad shape {values.shape}")
                break
            done += 1
    finally:
        client.shutdown()
    return ServeCheckReport(batches=done, violations=violations)


