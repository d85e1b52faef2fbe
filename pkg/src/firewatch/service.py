"""Telemetry/alert service: ingestion API, append-only store, live stream.

The store is a line-delimited JSON log with strictly increasing record
ids; restarting on the same file replays it and serves identical query
responses. ``GET /stream`` is a server-sent-event feed that delivers every
record appended after the subscriber joined, in store order. A control
endpoint forwards operator events into an attached live simulation.
"""

from __future__ import annotations

import json
import queue
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from firewatch.wire import WireError, decode

RECORD_KINDS = ("telemetry", "alert", "trace")

ALERT_REQUIRED_FIELDS = {
    "alert_id": str,
    "node": int,
    "azimuth_deg": (int, float),
    "signal": (int, float),
    "t_trigger_ms": int,
    "t_dispatched_ms": int,
    "verdict_cells": list,
}

CONTROL_EVENT_KINDS = ("place_fire", "move_fire", "extinguish_fire",
                       "rain_start", "rain_stop")


class ValidationError(ValueError):
    pass


def validate_alert_body(body: dict):
    if not isinstance(body, dict):
        raise ValidationError("alert body must be a JSON object")
    for field, types in ALERT_REQUIRED_FIELDS.items():
        if field not in body:
            raise ValidationError(f"missing field: {field}")
        if isinstance(body[field], bool) or not isinstance(body[field], types):
            raise ValidationError(f"bad type for field: {field}")


class RecordStore:
    """Append-only record log with an in-memory index and live listeners."""

    def __init__(self, path: str | Path | None = None, now_ms=None):
        self._lock = threading.Lock()
        self._records: list[dict] = []
        self._listeners: list[queue.SimpleQueue] = []
        self._now_ms = now_ms if now_ms is not None else (lambda: int(time.time() * 1000))
        self._path = Path(path) if path is not None else None
        self._fh = None
        if self._path is not None:
            if self._path.exists():
                for line in self._path.read_text(encoding="utf-8").splitlines():
                    if line.strip():
                        self._records.append(json.loads(line))
            self._fh = open(self._path, "a", encoding="utf-8")

    def append(self, kind: str, body: dict) -> dict:
        if kind not in RECORD_KINDS:
            raise ValidationError(f"unknown record kind: {kind}")
        with self._lock:
            record = {
                "id": self._records[-1]["id"] + 1 if self._records else 1,
                "kind": kind,
                "received_at_ms": self._now_ms(),
                "body": body,
            }
            self._records.append(record)
            if self._fh is not None:
                self._fh.write(json.dumps(record, separators=(",", ":")) + "\n")
                self._fh.flush()
            for listener in self._listeners:
                listener.put(record)
        return record

    def records(self, since_id: int = 0, kind: str | None = None) -> list[dict]:
        with self._lock:
            return [r for r in self._records
                    if r["id"] > since_id and (kind is None or r["kind"] == kind)]

    def latest_nodes(self) -> dict:
        """Most recent telemetry per node, keyed by stringified node id."""
        nodes: dict[str, dict] = {}
        for r in self.records(kind="telemetry"):
            node_id = r["body"].get("node_id")
            nodes[str(node_id)] = {"record_id": r["id"],
                                   "received_at_ms": r["received_at_ms"],
                                   "body": r["body"]}
        return nodes

    def subscribe(self) -> queue.SimpleQueue:
        q: queue.SimpleQueue = queue.SimpleQueue()
        with self._lock:
            self._listeners.append(q)
        return q

    def unsubscribe(self, q):
        with self._lock:
            if q in self._listeners:
                self._listeners.remove(q)

    def close(self):
        with self._lock:
            if self._fh is not None:
                self._fh.close()
                self._fh = None


class TelemetryService:
    """HTTP front end over a RecordStore.

    Endpoints: POST /telemetry, /alerts, /trace; GET /nodes,
    /alerts?since_id=N, /stream (SSE); POST /control/event when a live
    simulation's control queue is attached.
    """

    def __init__(self, store: RecordStore, host: str = "127.0.0.1", port: int = 0,
                 control_queue=None):
        self.store = store
        self.control_queue = control_queue
        service = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, *args):
                pass

            def _send_json(self, status: int, payload: dict):
                data = json.dumps(payload).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.send_header("Access-Control-Allow-Origin", "*")
                self.end_headers()
                self.wfile.write(data)

            def _read_body(self):
                length = int(self.headers.get("Content-Length", 0))
                raw = self.rfile.read(length)
                try:
                    return json.loads(raw)
                except json.JSONDecodeError as e:
                    raise ValidationError(f"body is not valid JSON: {e.msg}") from e

            def do_OPTIONS(self):
                self.send_response(204)
                self.send_header("Access-Control-Allow-Origin", "*")
                self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
                self.send_header("Access-Control-Allow-Headers", "Content-Type")
                self.send_header("Content-Length", "0")
                self.end_headers()

            def do_POST(self):
                path = urlparse(self.path).path
                try:
                    if path == "/telemetry":
                        body = self._read_body()
                        try:
                            decode(json.dumps(body).encode("utf-8"))
                        except WireError as e:
                            raise ValidationError(str(e)) from e
                        record = service.store.append("telemetry", body)
                        self._send_json(201, {"id": record["id"]})
                    elif path == "/alerts":
                        body = self._read_body()
                        validate_alert_body(body)
                        record = service.store.append("alert", body)
                        self._send_json(201, {"id": record["id"]})
                    elif path == "/trace":
                        body = self._read_body()
                        if not isinstance(body, dict) or "event" not in body:
                            raise ValidationError("trace record needs an 'event' field")
                        record = service.store.append("trace", body)
                        self._send_json(201, {"id": record["id"]})
                    elif path == "/control/event":
                        if service.control_queue is None:
                            self._send_json(404, {"error": "no live simulation attached"})
                            return
                        body = self._read_body()
                        if not isinstance(body, dict) or body.get("event") not in CONTROL_EVENT_KINDS:
                            raise ValidationError(
                                f"event must be one of {list(CONTROL_EVENT_KINDS)}")
                        service.control_queue.put(body)
                        self._send_json(202, {"accepted": True})
                    else:
                        self._send_json(404, {"error": f"unknown path: {path}"})
                except ValidationError as e:
                    self._send_json(400, {"error": str(e)})

            def do_GET(self):
                url = urlparse(self.path)
                if url.path == "/nodes":
                    self._send_json(200, {"nodes": service.store.latest_nodes()})
                elif url.path == "/alerts":
                    params = parse_qs(url.query)
                    try:
                        since_id = int(params.get("since_id", ["0"])[0])
                    except ValueError:
                        self._send_json(400, {"error": "since_id must be an integer"})
                        return
                    self._send_json(200, {"alerts": service.store.records(
                        since_id=since_id, kind="alert")})
                elif url.path == "/records":
                    params = parse_qs(url.query)
                    since_id = int(params.get("since_id", ["0"])[0])
                    self._send_json(200, {"records": service.store.records(since_id=since_id)})
                elif url.path == "/stream":
                    self._serve_stream()
                else:
                    self._send_json(404, {"error": f"unknown path: {url.path}"})

            def _serve_stream(self):
                q = service.store.subscribe()
                try:
                    self.send_response(200)
                    self.send_header("Content-Type", "text/event-stream")
                    self.send_header("Cache-Control", "no-cache")
                    self.send_header("Access-Control-Allow-Origin", "*")
                    self.end_headers()
                    while not service._shutting_down:
                        try:
                            record = q.get(timeout=0.25)
                        except queue.Empty:
                            # SSE comment as keepalive; also detects dead sockets.
                            self.wfile.write(b": keepalive\n\n")
                            self.wfile.flush()
                            continue
                        data = json.dumps(record, separators=(",", ":"))
                        frame = f"id: {record['id']}\nevent: {record['kind']}\ndata: {data}\n\n"
                        self.wfile.write(frame.encode("utf-8"))
                        self.wfile.flush()
                except (BrokenPipeError, ConnectionResetError):
                    pass
                finally:
                    service.store.unsubscribe(q)

        self._shutting_down = False
        self._server = ThreadingHTTPServer((host, port), Handler)
        self._server.daemon_threads = True
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def start(self):
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    def stop(self):
        self._shutting_down = True
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
