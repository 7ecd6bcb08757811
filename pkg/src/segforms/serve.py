"""HTTP JSON API for the review workflow (coding decisions + ontology labels).

Backed by the append-only codebook journal; every write is serialized
through the Codebook lock, so concurrent coders see a consistent state.
Routes:

    GET  /health
    GET  /candidates?status=&arity=&q=&page=&page_size=
    POST /decisions            {term, coder_id, round, verdict, comment}
    GET  /discrepancies
    POST /rounds/resolve       {resolutions: [{term, verdict, note}]}
    GET  /progress
    GET  /labeling
    POST /labeling             {term, labels: [..]}
    GET  /                     static review UI files (when configured)

Errors are JSON {error, detail}. A shared token, when configured, must be
presented in the X-Auth-Token header.
"""

from __future__ import annotations

import json
import mimetypes
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from . import __version__
from .codebook import Codebook, STATUS_UNDECIDED
from .corpus import CorpusStore
from .extract import CandidateSet
from .ontology import MAX_LABELS_PER_FORM

DEFAULT_PAGE_SIZE = 50


class LabelingStore:
    """Form -> labels assignments persisted as one JSON file."""

    def __init__(self, path: Path | None, universe: list[str] | None = None):
        self.path = path
        self.universe = sorted(universe) if universe else None
        self.labels: dict[str, list[str]] = {}
        self._lock = threading.Lock()
        if path is not None and path.exists():
            data = json.loads(path.read_text(encoding="utf-8"))
            self.labels = {k: list(v) for k, v in data.get("labels", {}).items()}
            if self.universe is None and data.get("universe"):
                self.universe = sorted(data["universe"])

    def set_labels(self, term: str, labels: list[str]) -> None:
        if not (1 <= len(labels) <= MAX_LABELS_PER_FORM):
            raise ValueError(f"a form carries 1..{MAX_LABELS_PER_FORM} labels, got {len(labels)}")
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate labels")
        if self.universe is not None:
            unknown = [l for l in labels if l not in self.universe]
            if unknown:
                raise ValueError(f"unknown types: {unknown}")
        with self._lock:
            self.labels[term] = list(labels)
            self._save()

    def _save(self) -> None:
        if self.path is None:
            return
        payload = {"labels": self.labels, "universe": self.universe}
        self.path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "forms": dict(sorted(self.labels.items())),
                "universe": self.universe,
                "bounds": {"min": 1, "max": MAX_LABELS_PER_FORM},
            }


class AppState:
    def __init__(
        self,
        codebook: Codebook,
        candidates: CandidateSet,
        store: CorpusStore | None = None,
        labeling: LabelingStore | None = None,
        token: str | None = None,
        static_dir: Path | None = None,
    ):
        self.codebook = codebook
        self.candidates = candidates
        self.store = store
        self.labeling = labeling or LabelingStore(None)
        self.token = token
        self.static_dir = static_dir
        self.by_term = {" ".join(t): c for t, c in candidates.items()}

    def contexts_for(self, term: str, limit: int = 3) -> list[dict]:
        cand = self.by_term.get(term)
        if cand is None or self.store is None:
            return []
        out = []
        for doc_id in sorted(cand.docs)[:limit]:
            record = self.store.by_id.get(doc_id)
            if record is not None:
                out.append({"doc_id": doc_id, "year": record.year, "title": record.title})
        return out

    def candidate_payload(self, term: str) -> dict:
        cand = self.by_term[term]
        state = self.codebook.state
        cstate = state.candidates.get(term)
        verdicts = (
            {coder: d.verdict for coder, d in sorted(cstate.latest.items())} if cstate else {}
        )
        comments = (
            {coder: d.comment for coder, d in sorted(cstate.latest.items()) if d.comment}
            if cstate
            else {}
        )
        return {
            "term": term,
            "arity": cand.arity,
            "n_docs": cand.n_docs,
            "n_occurrences": cand.n_occurrences,
            "first_year": cand.first_year,
            "status": state.status_of(term),
            "verdicts": verdicts,
            "comments": comments,
            "round": state.open_round,
            "contexts": self.contexts_for(term),
        }


def make_handler(app: AppState):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        # -- plumbing ---------------------------------------------------------

        def _send(self, status: int, payload: dict | list | bytes, content_type="application/json"):
            if not isinstance(payload, bytes):
                payload = (json.dumps(payload) + "\n").encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(payload)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Headers", "Content-Type, X-Auth-Token")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.end_headers()
            self.wfile.write(payload)

        def _error(self, status: int, error: str, detail: str = ""):
            self._send(status, {"error": error, "detail": detail})

        def _body(self) -> dict:
            length = int(self.headers.get("Content-Length", 0))
            if length == 0:
                return {}
            return json.loads(self.rfile.read(length).decode("utf-8"))

        def _authorized(self) -> bool:
            if app.token is None:
                return True
            return self.headers.get("X-Auth-Token") == app.token

        # -- routing --------------------------------------------------------------

        def do_OPTIONS(self):
            self._send(204, b"")

        def do_GET(self):
            url = urlparse(self.path)
            if not self._authorized():
                return self._error(401, "unauthorized", "missing or bad X-Auth-Token")
            if url.path == "/health":
                return self._send(200, {"status": "ok", "version": __version__})
            if url.path == "/candidates":
                return self._candidates(parse_qs(url.query))
            if url.path == "/discrepancies":
                items = [
                    {"term": term, "verdicts": verdicts}
                    for term, verdicts in app.codebook.state.discrepancies()
                ]
                return self._send(200, {"items": items})
            if url.path == "/progress":
                return self._send(200, app.codebook.state.progress())
            if url.path == "/labeling":
                return self._send(200, app.labeling.snapshot())
            if app.static_dir is not None:
                return self._static(url.path)
            return self._error(404, "not found", url.path)

        def do_POST(self):
            url = urlparse(self.path)
            if not self._authorized():
                return self._error(401, "unauthorized", "missing or bad X-Auth-Token")
            try:
                body = self._body()
            except json.JSONDecodeError as exc:
                return self._error(400, "bad json", str(exc))
            try:
                if url.path == "/decisions":
                    return self._post_decision(body)
                if url.path == "/rounds/resolve":
                    return self._post_resolve(body)
                if url.path == "/labeling":
                    return self._post_labeling(body)
            except KeyError as exc:
                return self._error(404, "unknown candidate", str(exc))
            except (ValueError, TypeError) as exc:
                return self._error(400, "invalid request", str(exc))
            return self._error(404, "not found", url.path)

        # -- endpoints ----------------------------------------------------------------

        def _candidates(self, query: dict):
            status = query.get("status", [None])[0]
            arity = query.get("arity", [None])[0]
            text = (query.get("q", [""])[0] or "").lower()
            try:
                page = max(1, int(query.get("page", ["1"])[0]))
                page_size = min(500, max(1, int(query.get("page_size", [str(DEFAULT_PAGE_SIZE)])[0])))
                if arity is not None:
                    arity = int(arity)
            except ValueError as exc:
                return self._error(400, "invalid request", f"bad query parameter: {exc}")
            terms = sorted(app.by_term)
            rows = []
            for term in terms:
                if arity and app.by_term[term].arity != arity:
                    continue
                if text and text not in term:
                    continue
                term_status = app.codebook.state.status_of(term)
                if status and term_status != status:
                    continue
                rows.append(term)
            total = len(rows)
            start = (page - 1) * page_size
            items = [app.candidate_payload(t) for t in rows[start : start + page_size]]
            return self._send(
                200,
                {
                    "items": items,
                    "total": total,
                    "page": page,
                    "page_size": page_size,
                    "n_pages": (total + page_size - 1) // page_size if total else 0,
                },
            )

        def _post_decision(self, body: dict):
            for field in ("term", "coder_id", "round", "verdict"):
                if field not in body:
                    raise ValueError(f"missing field {field!r}")
            decision = app.codebook.record_decision(
                term=body["term"],
                coder_id=body["coder_id"],
                round=int(body["round"]),
                verdict=body["verdict"],
                comment=body.get("comment", ""),
            )
            return self._send(
                200,
                {
                    "ok": True,
                    "candidate": app.candidate_payload(body["term"]),
                    "ts": decision.timestamp,
                },
            )

        def _post_resolve(self, body: dict):
            resolutions = [
                (r["term"], r["verdict"], r.get("note", "")) for r in body.get("resolutions", [])
            ]
            version = app.codebook.resolve_round(resolutions)
            return self._send(
                200,
                {"ok": True, "version": version, "open_round": app.codebook.state.open_round},
            )

        def _post_labeling(self, body: dict):
            if "term" not in body or "labels" not in body:
                raise ValueError("missing term or labels")
            app.labeling.set_labels(body["term"], list(body["labels"]))
            return self._send(200, {"ok": True, "term": body["term"], "labels": body["labels"]})

        def _static(self, path: str):
            rel = path.lstrip("/") or "index.html"
            target = (app.static_dir / rel).resolve()
            if not str(target).startswith(str(app.static_dir.resolve())) or not target.is_file():
                return self._error(404, "not found", path)
            ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
            self._send(200, target.read_bytes(), content_type=ctype)

    return Handler


def serve(app: AppState, host: str = "127.0.0.1", port: int = 8008) -> ThreadingHTTPServer:
    """Create the server (caller runs serve_forever, possibly in a thread)."""
    handler = make_handler(app)
    server = ThreadingHTTPServer((host, port), handler)
    server.app = app  # handy for tests
    return server
