"""In-repo stub server implementing the provider wire protocol for tests."""
from __future__ import annotations

import json
import threading
from contextlib import contextmanager
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from ..errors import TableTidyError
from .base import GenerationRequest, GoalProvider
from .synthetic import SyntheticProvider


def _make_handler(provider: GoalProvider):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args):  # keep test output quiet
            pass

        def do_POST(self):
            if self.path != "/generate":
                self.send_error(404, "unknown endpoint")
                return
            try:
                length = int(self.headers.get("Content-Length", "0"))
                doc = json.loads(self.rfile.read(length))
                request = GenerationRequest.from_json(doc)
                batch = provider.generate_batch(request)
                body = json.dumps(
                    {"candidates": [c.to_json() for c in batch]}).encode()
            except (TableTidyError, ValueError, KeyError) as err:
                self.send_error(400, str(err)[:200])
                return
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

    return Handler


class StubServer:
    """Threaded HTTP server wrapping any provider; binds an ephemeral port."""

    def __init__(self, provider: GoalProvider | None = None, port: int = 0):
        self.provider = provider or SyntheticProvider("place-setting")
        self._httpd = ThreadingHTTPServer(("127.0.0.1", port), _make_handler(self.provider))
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "StubServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        self._thread.join(timeout=5)


@contextmanager
def serve(provider: GoalProvider | None = None, port: int = 0):
    server = StubServer(provider, port).start()
    try:
        yield server
    finally:
        server.stop()
