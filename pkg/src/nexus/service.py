"""HTTP single point of access over the portal.

Plain JSON endpoints under /api/v1; GETs never mutate, mutations go through
the portal's writer lock and return the new graph version. Errors are
structured bodies {code, message, details} with the module's stable codes.
"""

from __future__ import annotations

import json
import signal
import threading
from email.parser import BytesParser
from email.policy import default as default_policy
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional
from urllib.parse import parse_qs, unquote, urlparse

from nexus import guide as guide_mod
from nexus import ingest as ingest_mod
from nexus.errors import DomainError
from nexus.portal import Portal, ServiceConfig

_STATUS_BY_CODE = {
    "unknown-id": 404,
    "unknown-target": 404,
    "unknown-annotation": 404,
    "unknown-guide": 404,
    "unknown-person": 404,
    "unknown-pair": 404,
    "unknown-repository": 404,
    "not-found": 404,
    "duplicate-id": 409,
    "kind-conflict": 409,
    "already-moderated": 409,
}


def _status_for(code: str) -> int:
    return _STATUS_BY_CODE.get(code, 400)


class PortalHTTPServer:
    """Runs the API over a portal; usable embedded (tests) or via serve()."""

    def __init__(self, portal: Portal, host: str = "127.0.0.1", port: int = 0):
        self.portal = portal
        handler = _make_handler(portal)
        self._server = ThreadingHTTPServer((host, port), handler)
        self._thread: Optional[threading.Thread] = None

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def start_background(self) -> None:
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    def serve_forever(self) -> None:
        self._server.serve_forever()

    def shutdown(self) -> None:
        self._server.shutdown()
        self._server.server_close()


def _make_handler(portal: Portal):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, *args) -> None:
            return

        # -- plumbing -----------------------------------------------------

        def _send(self, status: int, payload: dict | list) -> None:
            body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def _error(self, exc: DomainError) -> None:
            self._send(_status_for(exc.code), exc.to_dict())

        def _not_found(self) -> None:
            self._send(404, {"code": "not-found", "message": "no such endpoint",
                             "details": {"path": self.path}})

        def _json_body(self) -> dict:
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length) if length else b"{}"
            try:
                return json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise DomainError("bad-request", f"body is not valid JSON: {exc}") from exc

        def _multipart(self) -> dict[str, bytes]:
            content_type = self.headers.get("Content-Type", "")
            if "multipart/form-data" not in content_type:
                raise DomainError("bad-request", "expected multipart/form-data")
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length)
            message = BytesParser(policy=default_policy).parsebytes(
                b"Content-Type: " + content_type.encode("ascii") + b"\r\n\r\n" + raw)
            parts: dict[str, bytes] = {}
            for part in message.iter_parts():
                name = part.get_param("name", header="content-disposition")
                if name:
                    parts[name] = part.get_payload(decode=True) or b""
            return parts

        # -- routing ------------------------------------------------------

        def do_GET(self) -> None:  # noqa: N802 - http.server API
            parsed = urlparse(self.path)
            segments = [unquote(s) for s in parsed.path.strip("/").split("/")]
            params = {k: v[0] for k, v in parse_qs(parsed.query).items()}
            try:
                if segments[:2] != ["api", "v1"]:
                    return self._not_found()
                rest = segments[2:]
                if rest == ["health"]:
                    return self._send(200, portal.health())
                if rest == ["repositories"]:
                    return self._send(200, portal.repositories())
                if len(rest) == 2 and rest[0] == "repositories":
                    return self._get_repository(rest[1])
                if rest and rest[0] == "units" and len(rest) > 1:
                    return self._send(200, portal.unit_view("/".join(rest[1:])))
                if rest == ["search"]:
                    return self._search(params)
                if len(rest) >= 2 and rest[0] == "guide":
                    return self._guide(rest[1:], params)
                return self._not_found()
            except DomainError as exc:
                return self._error(exc)

        def do_POST(self) -> None:  # noqa: N802 - http.server API
            parsed = urlparse(self.path)
            segments = [unquote(s) for s in parsed.path.strip("/").split("/")]
            try:
                if segments[:2] != ["api", "v1"]:
                    return self._not_found()
                rest = segments[2:]
                if rest == ["ingest"]:
                    return self._ingest()
                if rest == ["annotations"]:
                    return self._create_annotation()
                if len(rest) == 3 and rest[0] == "annotations" and rest[2] == "moderate":
                    return self._moderate(rest[1])
                if rest == ["helpdesk", "ask"]:
                    return self._ask()
                return self._not_found()
            except DomainError as exc:
                return self._error(exc)

        # -- handlers -----------------------------------------------------

        def _get_repository(self, ehri_id: str) -> None:
            for entry in portal.repositories():
                if entry["ehriId"] == ehri_id or entry.get("code") == ehri_id:
                    return self._send(200, entry)
            raise DomainError("unknown-repository", f"no repository {ehri_id!r}", id=ehri_id)

        def _search(self, params: dict) -> None:
            if "q" not in params:
                raise DomainError("bad-request", "missing query parameter q")
            languages = [s for s in params.get("lang", "").split(",") if s] or None
            filters: dict[str, list[str]] = {}
            for pair in params.get("facets", "").split(","):
                if not pair:
                    continue
                if ":" not in pair:
                    raise DomainError("invalid-facet", f"facet constraint {pair!r} is not name:value")
                name, value = pair.split(":", 1)
                filters.setdefault(name, []).append(value)
            page = int(params.get("page", "1"))
            size = int(params.get("size", "0")) or None
            result = portal.search(params["q"], languages, filters or None, page, size)
            return self._send(200, result.to_dict())

        def _guide(self, rest: list[str], params: dict) -> None:
            built = portal.get_guide(rest[0])
            if len(rest) == 1:
                return self._send(200, built.to_dict())
            if rest[1] == "map":
                return self._send(200, guide_mod.map_features(built, portal.graph, portal.store))
            if rest[1] == "timeline":
                events = guide_mod.timeline_query(
                    built, portal.graph, params.get("from", "0001"), params.get("to", "9999"))
                return self._send(200, [e.to_dict() for e in events])
            if rest[1] == "persons" and len(rest) == 3:
                return self._send(
                    200, guide_mod.biography(built, portal.graph, portal.store, rest[2]))
            return self._not_found()

        def _ingest(self) -> None:
            parts = self._multipart()
            if "repo" not in parts or "profile" not in parts:
                raise DomainError("bad-request", "multipart needs repo and profile parts")
            repo_code = parts["repo"].decode("utf-8").strip()
            profile = ingest_mod.profile_from_dict(json.loads(parts["profile"].decode("utf-8")))
            if "url" in parts:
                report = portal.ingest_harvest(repo_code, profile,
                                               parts["url"].decode("utf-8").strip())
            elif "data" in parts:
                report = portal.ingest_bytes(repo_code, profile, parts["data"])
            else:
                raise DomainError("bad-request", "multipart needs a data file or a url part")
            return self._send(200, report.to_dict() | {"graphVersion": portal.version})

        def _create_annotation(self) -> None:
            body = self._json_body()
            annotation_body = body.get("body", {})
            annotation = portal.annotate(
                target_id=body.get("targetId", ""),
                body_type=annotation_body.get("type", ""),
                body_value=annotation_body.get("value", ""),
                author=body.get("author", "anonymous"),
                body_url=annotation_body.get("url", ""),
            )
            return self._send(201, annotation.to_dict() | {"graphVersion": portal.version})

        def _moderate(self, annotation_id: str) -> None:
            body = self._json_body()
            annotation = portal.moderate(
                annotation_id,
                decision=body.get("decision", ""),
                moderator=body.get("moderator", "moderator"),
                note=body.get("note", ""),
            )
            return self._send(200, annotation.to_dict() | {"graphVersion": portal.version})

        def _ask(self) -> None:
            body = self._json_body()
            question = body.get("question", "")
            languages = body.get("languages") or None
            answer = portal.ask(question, languages)
            return self._send(200, answer.to_dict())

    return Handler


def serve(config: ServiceConfig) -> int:
    """Run until SIGINT/SIGTERM; snapshot on shutdown. Exit codes: 0 clean,
    2 invalid config, 3 port unavailable."""
    try:
        config.validate()
        portal = Portal.open(config)
    except DomainError as exc:
        print(json.dumps(exc.to_dict()), flush=True)
        return 2
    host, _, port_text = config.listen_address.rpartition(":")
    try:
        server = PortalHTTPServer(portal, host, int(port_text))
    except OSError as exc:
        print(json.dumps({"code": "port-unavailable", "message": str(exc)}), flush=True)
        return 3
    stopping = threading.Event()

    def handle_signal(signum, frame) -> None:
        if stopping.is_set():  # repeated signals must not race the shutdown
            return
        stopping.set()
        # shutdown() blocks until serve_forever returns, so it must not run
        # on this thread (the one inside serve_forever)
        threading.Thread(target=server.shutdown, daemon=True).start()

    signal.signal(signal.SIGINT, handle_signal)
    signal.signal(signal.SIGTERM, handle_signal)
    print(json.dumps({"status": "serving", "url": server.url}), flush=True)
    server.serve_forever()
    portal.save()
    return 0
