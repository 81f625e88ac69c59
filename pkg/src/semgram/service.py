"""HTTP front of an induction session, for the browser review UI.

Plain HTTP + JSON on the standard library server; this is a single-user
local tool, so there is no authentication. The session loop (parse pass,
candidate proposal) runs in a background thread and the endpoints stay
responsive for polling:

    GET  /session           descriptor: status, iteration, pending flag
    GET  /session/candidate pending rule + frequency + sample sentences
    POST /session/decision  {"property": ..., "token": ...}
    GET  /session/history   per-iteration statistics series
    GET  /grammar           current grammar in display notation

Each candidate carries an idempotency token; a decision is applied exactly
once no matter how many times it is posted.
"""

from __future__ import annotations

import json
import os
import queue
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from .grammar import PROPERTIES
from .induction import InductionSession

DEFAULT_BIND = os.environ.get("SEMGRAM_BIND", "127.0.0.1:8765")

IDLE = "idle"
PARSING = "parsing"
AWAITING = "awaiting-decision"
STOPPED = "stopped"


class SessionService:
    """Runs a session loop in a thread and answers state queries."""

    def __init__(self, session: InductionSession, iterations: int,
                 auto: bool = False, checkpoint_dir: Optional[str] = None,
                 session_id: str = "session"):
        self.session = session
        self.iterations = iterations
        self.auto = auto
        self.checkpoint_dir = checkpoint_dir
        self.session_id = session_id
        self.status = IDLE
        self.token: Optional[str] = None
        self._accepted: Optional[str] = None
        self._applied: dict[str, str] = {}  # token -> property
        self._decisions: queue.Queue = queue.Queue()
        self._lock = threading.Lock()
        self._thread: Optional[threading.Thread] = None

    # -- session loop

    def start(self) -> None:
        self._thread = threading.Thread(target=self._loop, daemon=True)
        self._thread.start()

    def join(self, timeout: Optional[float] = None) -> None:
        if self._thread is not None:
            self._thread.join(timeout)

    def _checkpoint(self) -> None:
        if self.checkpoint_dir:
            self.session.checkpoint(self.checkpoint_dir)

    def _loop(self) -> None:
        session = self.session
        for _ in range(self.iterations):
            if session.stopped or (session.should_stop() and not self.auto):
                break
            if session.pending is None:
                with self._lock:
                    self.status = PARSING
                candidate = session.run_iteration()
                self._checkpoint()
                if candidate is None:
                    break
            token = f"iter-{session.iteration + 1}"
            with self._lock:
                self.token = token
                self._accepted = None
                self.status = AWAITING
            got_token, prop = self._decisions.get()
            assert got_token == token
            session.apply_decision(prop)
            self._checkpoint()
            with self._lock:
                self._applied[token] = prop
                self.token = None
        with self._lock:
            self.status = STOPPED
            self.token = None

    # -- queries

    def descriptor(self) -> dict:
        session = self.session
        with self._lock:
            status = self.status
            token = self.token
        return {
            "session_id": self.session_id,
            "status": status,
            "iteration": session.iteration,
            "pending": token is not None,
            "grammar_version": session.grammar.version,
            "grammar_rules": len(session.grammar),
            "corpus_sentences": len(session.sentences),
        }

    def candidate_view(self) -> Optional[dict]:
        with self._lock:
            token = self.token
        candidate = self.session.pending
        if token is None or candidate is None:
            return None
        return {
            "token": token,
            "iteration": self.session.iteration + 1,
            "rule": candidate.display(),
            "frequency": candidate.frequency,
            "samples": [self._sample_view(s) for s in candidate.samples],
            "properties": [p for p in PROPERTIES],
        }

    def _sample_view(self, ref) -> dict:
        sentence = self.session.by_id[ref.sentence_id]
        return {
            "sentence_id": ref.sentence_id,
            "start": ref.start,
            "end": ref.end,
            "words": list(sentence.words),
            "layers": {
                name: [{"v": t.value, "s": t.start, "e": t.end} for t in toks]
                for name, toks in sorted(sentence.layers.items())
            },
        }

    def history_view(self) -> dict:
        rows = [dict(zip(row.FIELDS, row.as_list()))
                for row in self.session.history]
        return {"rows": rows}

    def decide(self, token: str, prop: str) -> tuple[int, dict]:
        """Apply a decision exactly once per token."""
        if prop not in PROPERTIES:
            return 400, {"error": f"unknown property {prop!r}",
                         "properties": list(PROPERTIES)}
        with self._lock:
            if token in self._applied or token == self._accepted:
                return 200, {"status": "already-applied", "token": token}
            if self.token is None or token != self.token:
                return 409, {"error": "no pending candidate for this token",
                             "token": token}
            self._accepted = token
        self._decisions.put((token, prop))
        return 200, {"status": "accepted", "token": token, "property": prop}

    def grammar_text(self) -> str:
        lines = [f"# start: <{self.session.grammar.start_symbol}>"]
        for rule in self.session.grammar:
            lines.append(f"{rule.property}\t{rule.display()}"
                         f"\ttp={rule.trigger_probability!r}"
                         f"\torigin={rule.origin}")
        return "\n".join(lines) + "\n"


def _make_handler(service: SessionService):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, fmt, *args):  # quiet by default
            pass

        def _send(self, code: int, body, content_type="application/json"):
            if isinstance(body, (dict, list)):
                data = json.dumps(body).encode("utf-8")
            else:
                data = str(body).encode("utf-8")
            self.send_response(code)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(data)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(data)

        def do_GET(self):
            path = self.path.split("?", 1)[0].rstrip("/") or "/"
            if path == "/session":
                self._send(200, service.descriptor())
            elif path == "/session/candidate":
                view = service.candidate_view()
                if view is None:
                    self._send(404, {"error": "no pending candidate",
                                     "status": service.descriptor()["status"]})
                else:
                    self._send(200, view)
            elif path == "/session/history":
                self._send(200, service.history_view())
            elif path == "/grammar":
                self._send(200, service.grammar_text(),
                           content_type="text/plain; charset=utf-8")
            else:
                self._send(404, {"error": f"unknown path {path!r}"})

        def do_POST(self):
            path = self.path.split("?", 1)[0].rstrip("/")
            if path != "/session/decision":
                self._send(404, {"error": f"unknown path {path!r}"})
                return
            try:
                length = int(self.headers.get("Content-Length", "0"))
                body = json.loads(self.rfile.read(length) or b"{}")
                prop = body["property"]
                token = body["token"]
            except (ValueError, KeyError) as exc:
                self._send(400, {"error": f"bad request body: {exc}"})
                return
            code, reply = service.decide(token, prop)
            self._send(code, reply)

    return Handler


def serve(service: SessionService, bind: str = DEFAULT_BIND,
          ) -> ThreadingHTTPServer:
    """Start the session loop and the HTTP server (in its own thread).

    Returns the server; call ``shutdown()`` to stop serving. The bind
    address defaults to the SEMGRAM_BIND environment variable.
    """
    host, _, port = bind.partition(":")
    server = ThreadingHTTPServer((host or "127.0.0.1", int(port or 0)),
                                 _make_handler(service))
    service.start()
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server
