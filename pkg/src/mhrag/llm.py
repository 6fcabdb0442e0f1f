"""Minimal chat-completion HTTP client.

Provider-agnostic: any endpoint speaking the common JSON chat shape works
({"model", "messages", "temperature"} in, choices[0].message.content out).
The API key is read from an environment variable at request time and sent
as a bearer token when present.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable

import requests

from .errors import ExternalServiceError
from .strategies import QueryEmbedding, QuestionGenerationError

DEFAULT_API_KEY_ENV = "MHRAG_API_KEY"


class LlmError(ExternalServiceError):
    """Transport, auth, or response-shape failure; carries the provider message."""


@dataclass
class ChatCompletionClient:
    endpoint: str
    model: str
    api_key_env: str = DEFAULT_API_KEY_ENV
    temperature: float = 0.0
    timeout: float = 120.0

    def complete(self, prompt: str) -> str:
        """Send one user message and return the assistant text."""
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
        }
        try:
            resp = requests.post(self.endpoint, json=payload, headers=headers, timeout=self.timeout)
        except requests.RequestException as exc:
            raise LlmError(f"request to {self.endpoint} failed: {exc}") from exc
        if resp.status_code != 200:
            raise LlmError(f"provider returned {resp.status_code}: {resp.text.strip()[:500]}")
        try:
            body = resp.json()
            content = body["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise LlmError(f"malformed provider response: {resp.text.strip()[:500]}") from exc
        if not isinstance(content, str):
            raise LlmError("provider response content is not text")
        return content


def question_prompt(query_text: str, num_questions: int) -> str:
    return (
        f"Write {num_questions} diverse short search questions that together cover "
        f"the following request. Output one question per line, no numbering, "
        f"no additional text.\n\n{query_text}"
    )


def make_question_generator(
    complete: Callable[[str], str],
    embed: Callable[[list[str]], list[QueryEmbedding]],
):
    """Build a fusion question generator from a chat client and an embedder.

    Failures of either provider surface as QuestionGenerationError with the
    underlying message attached.
    """

    def generate(query_text: str, num_questions: int) -> list[tuple[str, QueryEmbedding]]:
        try:
            raw = complete(question_prompt(query_text, num_questions))
        except Exception as exc:
            raise QuestionGenerationError(f"question generation failed: {exc}") from exc
        lines = [line.strip() for line in raw.splitlines() if line.strip()]
        questions = lines[:num_questions]
        if len(questions) < num_questions:
            raise QuestionGenerationError(
                f"provider produced {len(questions)} questions, wanted {num_questions}"
            )
        try:
            embeddings = embed(questions)
        except Exception as exc:
            raise QuestionGenerationError(f"question embedding failed: {exc}") from exc
        if len(embeddings) != len(questions):
            raise QuestionGenerationError(
                f"embedder returned {len(embeddings)} embeddings for {len(questions)} questions"
            )
        return list(zip(questions, embeddings))

    return generate
