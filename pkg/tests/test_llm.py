import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest

from mhrag.llm import ChatCompletionClient, LlmError, make_question_generator, question_prompt
from mhrag.store import MultiAspectEmbedding
from mhrag.strategies import QueryEmbedding, QuestionGenerationError


class StubHandler(BaseHTTPRequestHandler):
    behavior = {"status": 200, "reply": "stub reply"}
    seen = []

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        body = json.loads(self.rfile.read(length))
        StubHandler.seen.append({"body": body, "auth": self.headers.get("Authorization")})
        status = StubHandler.behavior["status"]
        if status != 200:
            self.send_response(status)
            self.end_headers()
            self.wfile.write(b'{"error": "denied"}')
            return
        payload = StubHandler.behavior.get("payload")
        if payload is None:
            payload = {"choices": [{"message": {"content": StubHandler.behavior["reply"]}}]}
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(json.dumps(payload).encode())

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    StubHandler.behavior = {"status": 200, "reply": "stub reply"}
    StubHandler.seen = []
    yield f"http://127.0.0.1:{server.server_port}/v1/chat/completions"
    server.shutdown()


def test_client_happy_path(stub_server, monkeypatch):
    monkeypatch.setenv("MHRAG_API_KEY", "sekret")
    client = ChatCompletionClient(endpoint=stub_server, model="test-model")
    assert client.complete("hello") == "stub reply"
    request = StubHandler.seen[0]
    assert request["auth"] == "Bearer sekret"
    assert request["body"]["model"] == "test-model"
    assert request["body"]["temperature"] == 0.0
    assert request["body"]["messages"] == [{"role": "user", "content": "hello"}]


def test_client_without_key_sends_no_auth(stub_server, monkeypatch):
    monkeypatch.delenv("MHRAG_API_KEY", raising=False)
    ChatCompletionClient(endpoint=stub_server, model="m").complete("x")
    assert StubHandler.seen[0]["auth"] is None


def test_client_surfaces_http_errors(stub_server):
    StubHandler.behavior = {"status": 401}
    client = ChatCompletionClient(endpoint=stub_server, model="m")
    with pytest.raises(LlmError, match="401.*denied"):
        client.complete("x")


def test_client_rejects_malformed_payload(stub_server):
    StubHandler.behavior = {"status": 200, "payload": {"unexpected": True}}
    with pytest.raises(LlmError, match="malformed"):
        ChatCompletionClient(endpoint=stub_server, model="m").complete("x")


def test_client_wraps_transport_failure():
    client = ChatCompletionClient(endpoint="http://127.0.0.1:9/nope", model="m", timeout=0.5)
    with pytest.raises(LlmError, match="failed"):
        client.complete("x")


def fake_embedder(texts):
    return [
        QueryEmbedding(heads=MultiAspectEmbedding(np.full((2, 3), float(i + 1))))
        for i, _ in enumerate(texts)
    ]


def test_question_generator_happy_path():
    def complete(prompt):
        assert "3" in prompt  # asks for the right count
        return "what is A?\nwhat is B?\nwhat is C?\n"

    gen = make_question_generator(complete, fake_embedder)
    out = gen("tell me about A, B and C", 3)
    assert [q for q, _ in out] == ["what is A?", "what is B?", "what is C?"]
    assert out[0][1].heads.heads[0, 0] == 1.0


def test_question_generator_wraps_provider_failure():
    def broken(prompt):
        raise LlmError("upstream on fire")

    gen = make_question_generator(broken, fake_embedder)
    with pytest.raises(QuestionGenerationError, match="upstream on fire"):
        gen("q", 2)


def test_question_generator_checks_count():
    gen = make_question_generator(lambda p: "only one line", fake_embedder)
    with pytest.raises(QuestionGenerationError, match="1 questions"):
        gen("q", 3)


def test_question_generator_checks_embedding_count():
    gen = make_question_generator(lambda p: "a\nb", lambda texts: [])
    with pytest.raises(QuestionGenerationError, match="0 embeddings"):
        gen("q", 2)


def test_question_prompt_mentions_query():
    prompt = question_prompt("find the thing", 4)
    assert "find the thing" in prompt and "4" in prompt
