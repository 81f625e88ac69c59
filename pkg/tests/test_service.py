import json
import os
import threading
import time
import urllib.error
import urllib.request

import pytest

from semgram.induction import InductionSession, LayerPriority, run_scripted
from semgram.grammar import Grammar, save_grammar
from semgram.service import SessionService, serve

DECISIONS = {1: "positive", 2: "neutral", 3: "positive"}


def fresh_session(corpus, seed_grammar, tmp=None):
    grammar = Grammar(seed_grammar.start_symbol)
    for rule in seed_grammar:
        grammar.add_rule(rule.lhs, rule.rhs, property=rule.property,
                         origin=rule.origin)
    return InductionSession(grammar, corpus,
                            LayerPriority(("class", "lexical")), seed=7)


@pytest.fixture
def server(corpus, seed_grammar):
    session = fresh_session(corpus, seed_grammar)
    service = SessionService(session, iterations=3, session_id="test")
    httpd = serve(service, "127.0.0.1:0")
    host, port = httpd.server_address[:2]
    base = f"http://{host}:{port}"
    try:
        yield base, service, session
    finally:
        httpd.shutdown()


def get(base, path):
    with urllib.request.urlopen(base + path, timeout=10) as resp:
        return resp.status, json.loads(resp.read())


def get_text(base, path):
    with urllib.request.urlopen(base + path, timeout=10) as resp:
        return resp.status, resp.read().decode()


def post(base, path, body):
    req = urllib.request.Request(
        base + path, data=json.dumps(body).encode(),
        headers={"Content-Type": "application/json"}, method="POST")
    try:
        with urllib.request.urlopen(req, timeout=10) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read())


def wait_for(predicate, timeout=30.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        if predicate():
            return True
        time.sleep(0.02)
    return False


def wait_awaiting(base):
    def ready():
        status, body = get(base, "/session")
        return body["status"] == "awaiting-decision"
    assert wait_for(ready), "session never reached awaiting-decision"


class TestEndpoints:
    def test_descriptor_reflects_state(self, server):
        base, service, session = server
        wait_awaiting(base)
        status, body = get(base, "/session")
        assert status == 200
        assert body["session_id"] == "test"
        assert body["pending"] is True
        assert body["iteration"] == 0
        assert body["corpus_sentences"] == len(session.sentences)

    def test_candidate_view_carries_rule_and_samples(self, server):
        base, service, session = server
        wait_awaiting(base)
        status, body = get(base, "/session/candidate")
        assert status == 200
        assert body["rule"].startswith("<")
        assert "::=" in body["rule"]
        assert body["frequency"] >= 1
        assert 1 <= len(body["samples"]) <= 10
        sample = body["samples"][0]
        assert sample["words"]
        assert 0 <= sample["start"] < sample["end"] <= len(sample["words"])
        assert "class" in sample["layers"]
        assert body["token"] == "iter-1"

    def test_decision_advances_exactly_once(self, server):
        base, service, session = server
        wait_awaiting(base)
        _s, cand = get(base, "/session/candidate")
        token = cand["token"]
        status1, first = post(base, "/session/decision",
                              {"property": "positive", "token": token})
        status2, second = post(base, "/session/decision",
                               {"property": "positive", "token": token})
        assert status1 == 200
        assert status2 == 200
        assert {first["status"], second["status"]} == {"accepted",
                                                       "already-applied"}
        assert wait_for(lambda: session.iteration == 1)
        # the double post did not consume the next candidate
        wait_awaiting(base)
        _s, nxt = get(base, "/session/candidate")
        assert nxt["token"] == "iter-2"

    def test_stale_token_conflicts(self, server):
        base, service, session = server
        wait_awaiting(base)
        status, body = post(base, "/session/decision",
                            {"property": "positive", "token": "iter-99"})
        assert status == 409

    def test_unknown_property_is_bad_request(self, server):
        base, service, session = server
        wait_awaiting(base)
        status, body = post(base, "/session/decision",
                            {"property": "sideways", "token": "iter-1"})
        assert status == 400

    def test_history_and_grammar_views(self, server):
        base, service, session = server
        for expected in ("iter-1", "iter-2", "iter-3"):
            wait_awaiting(base)
            _s, cand = get(base, "/session/candidate")
            post(base, "/session/decision",
                 {"property": DECISIONS[int(expected.split('-')[1])],
                  "token": cand["token"]})
            wait_for(lambda: service.token != expected)
        assert wait_for(lambda: service.status == "stopped")
        _s, history = get(base, "/session/history")
        assert [row["iteration"] for row in history["rows"]] == [1, 3]
        for row in history["rows"]:
            assert set(row) >= {"coverage", "fully_parsed", "avg_operations",
                                "rule", "frequency"}
        _s, text = get_text(base, "/grammar")
        assert "::=" in text
        assert "origin=induced:1" in text

    def test_unknown_path_404(self, server):
        base, _service, _session = server
        with pytest.raises(urllib.error.HTTPError) as err:
            urllib.request.urlopen(base + "/nope", timeout=10)
        assert err.value.code == 404


class TestUiContract:
    """The committed frontend fixtures must stay shaped like live payloads."""

    FIXTURES = os.path.join(os.path.dirname(__file__), "..", "frontend",
                            "tests", "fixtures")

    def load(self, name):
        path = os.path.join(self.FIXTURES, name)
        if not os.path.exists(path):
            pytest.skip("frontend fixtures not present")
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)

    def test_candidate_payload_matches_fixture_shape(self, server):
        base, _service, _session = server
        wait_awaiting(base)
        _s, live = get(base, "/session/candidate")
        fixture = self.load("candidate.json")
        assert set(live) == set(fixture)
        assert set(live["samples"][0]) == set(fixture["samples"][0])
        assert isinstance(live["frequency"], int)

    def test_descriptor_and_history_match_fixture_shape(self, server):
        base, _service, _session = server
        wait_awaiting(base)
        _s, live = get(base, "/session")
        assert set(live) == set(self.load("session.json"))
        _s, history = get(base, "/session/history")
        fixture_rows = self.load("history.json")["rows"]
        assert fixture_rows, "fixture should carry recorded iterations"
        # live history is empty before any decision; compare row shape from
        # the fixture against the session history row fields
        from semgram.induction import HistoryRow
        assert set(fixture_rows[0]) == set(HistoryRow.FIELDS)
        assert isinstance(history["rows"], list)

    def test_rendered_rule_round_trips_display_notation(self, server):
        from semgram.grammar import parse_rule_text, Symbol
        base, _service, _session = server
        wait_awaiting(base)
        _s, cand = get(base, "/session/candidate")
        lhs, rhs = parse_rule_text(cand["rule"])
        rendered = f"{lhs.display()} ::= {' '.join(s.display() for s in rhs)}"
        assert rendered == cand["rule"]
        fixture = self.load("candidate.json")
        lhs, rhs = parse_rule_text(fixture["rule"])
        rendered = f"{lhs.display()} ::= {' '.join(s.display() for s in rhs)}"
        assert rendered == fixture["rule"]


class TestEquivalence:
    def test_served_decisions_equal_scripted_run(self, tmp_path, corpus,
                                                 seed_grammar):
        scripted = fresh_session(corpus, seed_grammar)
        run_scripted(scripted, DECISIONS, 3)
        scripted_path = tmp_path / "scripted.txt"
        save_grammar(scripted.grammar, scripted_path)

        session = fresh_session(corpus, seed_grammar)
        service = SessionService(session, iterations=3)
        httpd = serve(service, "127.0.0.1:0")
        base = "http://{}:{}".format(*httpd.server_address[:2])
        try:
            for it in (1, 2, 3):
                wait_awaiting(base)
                _s, cand = get(base, "/session/candidate")
                post(base, "/session/decision",
                     {"property": DECISIONS[it], "token": cand["token"]})
                wait_for(lambda: session.iteration >= it)
            wait_for(lambda: service.status == "stopped")
        finally:
            httpd.shutdown()
        served_path = tmp_path / "served.txt"
        save_grammar(session.grammar, served_path)
        assert served_path.read_bytes() == scripted_path.read_bytes()

    def test_checkpoint_resume_same_pending(self, tmp_path, corpus,
                                            seed_grammar):
        from semgram.induction import load_session
        ckpt = tmp_path / "ckpt"
        session = fresh_session(corpus, seed_grammar)
        service = SessionService(session, iterations=3, checkpoint_dir=str(ckpt))
        service.start()
        assert wait_for(lambda: service.token == "iter-1")
        pending = session.pending
        # simulate a crash: drop the service, reload from disk
        restored = load_session(str(ckpt), corpus)
        assert restored.pending == pending
        assert restored.iteration == 0
        service2 = SessionService(restored, iterations=1)
        service2.start()
        assert wait_for(lambda: service2.token == "iter-1")
        code, body = service2.decide("iter-1", "positive")
        assert code == 200
        assert wait_for(lambda: restored.iteration == 1)
