"""A threaded HTTP server in front of :class:`~glosis_ld.service.app.App`."""

from __future__ import annotations

import logging
import os
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlsplit

from .app import App

log = logging.getLogger(__name__)
BIND_ENV = "GLOSIS_BIND"
MAX_BODY = 1 << 20


def make_handler(app: App) -> type[BaseHTTPRequestHandler]:
    class Handler(BaseHTTPRequestHandler):
        server_version = "glosis-ld"

        def _dispatch(self, method: str) -> None:
            parts = urlsplit(self.path)
            params = parse_qs(parts.query, keep_blank_values=True, errors="replace")
            length = int(self.headers.get("Content-Length") or 0)
            if length > MAX_BODY:
                self.send_error(413)
                return
            body = self.rfile.read(length) if length else b""
            response = app.handle(method, parts.path, params, dict(self.headers.items()), body)
            self.send_response(response.status)
            self.send_header("Content-Type", response.content_type)
            self.send_header("Content-Length", str(len(response.body)))
            self.end_headers()
            self.wfile.write(response.body)

        def do_GET(self) -> None:  # noqa: N802 (http.server naming)
            self._dispatch("GET")

        def do_POST(self) -> None:  # noqa: N802
            self._dispatch("POST")

        def log_message(self, fmt: str, *args) -> None:
            log.info("%s %s", self.address_string(), fmt % args)

    return Handler


def bind_address(host: str, port: int) -> tuple[str, int]:
    """``GLOSIS_BIND=host:port`` overrides the configured address."""
    override = os.environ.get(BIND_ENV)
    if override:
        h, _, p = override.rpartition(":")
        return (h or host, int(p))
    return host, port


def make_server(app: App, host: str | None = None, port: int | None = None) -> ThreadingHTTPServer:
    address = (host if host is not None else app.config.host, port if port is not None else app.config.port)
    server = ThreadingHTTPServer(address, make_handler(app))
    server.daemon_threads = True
    return server


def serve_in_thread(app: App, host: str = "127.0.0.1", port: int = 0) -> tuple[ThreadingHTTPServer, str]:
    """Start a server on a background thread; returns it with its base URL."""
    server = make_server(app, host, port)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    h, p = server.server_address[:2]
    return server, f"http://{h}:{p}"


def serve(app: App) -> None:
    host, port = bind_address(app.config.host, app.config.port)
    server = make_server(app, host, port)
    log.info("serving on http://%s:%d", host, port)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
