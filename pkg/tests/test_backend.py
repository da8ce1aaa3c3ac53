"""Backend contract tests: scripted lookup, the bounded repair loop, and the
HTTP adapter's transport behavior (via a mock httpx transport)."""

from __future__ import annotations

import json

import httpx
import pytest

from adjudicator.backend import (
    BackendConfig,
    ChatRequest,
    HttpBackend,
    ScriptedBackend,
    scripted_oracle,
)
from adjudicator.errors import ProviderError, SchemaViolation, UnknownScriptKey

VALID_CHECKLIST = {
    "items": [
        {
            "item_id": "i1",
            "category": "required_element",
            "text": "The claimant used a substance.",
            "statute_citation": "C.R.S. 1-2-3",
        }
    ],
    "source_passage_ids": ["p1"],
}


def checklist_request(case_id="c1", allowed=("p1",)):
    return ChatRequest(
        system_prompt="s",
        user_prompt="u",
        response_schema_id="checklist",
        stage="extract",
        case_id=case_id,
        context={"allowed_passage_ids": list(allowed)},
    )


class TestScripted:
    def test_lookup_by_stage_and_case(self):
        b = scripted_oracle({("extract", "c1"): VALID_CHECKLIST})
        resp = b.complete(checklist_request())
        assert resp.parsed == VALID_CHECKLIST
        assert resp.attempts == 1

    def test_unknown_key_fails_loudly(self):
        b = scripted_oracle({})
        with pytest.raises(UnknownScriptKey):
            b.complete(checklist_request())

    def test_free_text_returns_raw(self):
        b = scripted_oracle({("answer", "c1"): "She is eligible."})
        resp = b.complete(
            ChatRequest(system_prompt="s", user_prompt="u", stage="answer", case_id="c1")
        )
        assert resp.raw_text == "She is eligible."
        assert resp.parsed is None

    def test_unknown_schema_id_rejected_at_request_construction(self):
        with pytest.raises(ValueError):
            ChatRequest(system_prompt="s", user_prompt="u", response_schema_id="nope")


class TestRepairLoop:
    def test_bad_then_good_output_succeeds_on_second_attempt(self):
        b = scripted_oracle(
            {("extract", "c1"): ["not json", json.dumps(VALID_CHECKLIST)]}
        )
        resp = b.complete(checklist_request())
        assert resp.attempts == 2
        assert resp.parsed == VALID_CHECKLIST

    def test_repair_prompt_carries_rejection_message(self):
        seen = []

        class Spy(ScriptedBackend):
            def generate_raw(self, request, attempt):
                seen.append(request.user_prompt)
                return super().generate_raw(request, attempt)

        b = Spy({("extract", "c1"): ["[]", json.dumps(VALID_CHECKLIST)]})
        b.complete(checklist_request())
        assert "Your previous response was rejected" in seen[1]

    def test_exhaustion_raises_schema_violation_with_raw_text(self):
        b = scripted_oracle({("extract", "c1"): "still not json"})
        with pytest.raises(SchemaViolation) as exc_info:
            b.complete(checklist_request())
        assert exc_info.value.attempts == 3  # 1 + max_parse_retries(2)
        assert exc_info.value.raw_text == "still not json"

    def test_unretrieved_source_citation_triggers_reprompt(self):
        bad = dict(VALID_CHECKLIST, source_passage_ids=["p1", "phantom"])
        b = scripted_oracle({("extract", "c1"): [bad, VALID_CHECKLIST]})
        resp = b.complete(checklist_request())
        assert resp.attempts == 2

    def test_call_count_tracks_every_attempt(self):
        b = scripted_oracle(
            {("extract", "c1"): ["not json", json.dumps(VALID_CHECKLIST)]}
        )
        b.complete(checklist_request())
        assert b.call_count == 2


class TestHttpBackend:
    def config(self, **kw):
        base = dict(
            kind="http", model_name="m", endpoint_url="https://api.test/v1/chat",
            auth_env_var="TEST_API_KEY",
        )
        base.update(kw)
        return BackendConfig(**base)

    def client_returning(self, handler):
        return httpx.Client(transport=httpx.MockTransport(handler))

    def test_credentials_come_from_env_not_config(self, monkeypatch):
        monkeypatch.setenv("TEST_API_KEY", "sekret")
        captured = {}

        def handler(request):
            captured["auth"] = request.headers.get("authorization")
            return httpx.Response(
                200, json={"choices": [{"message": {"content": "hello"}}]}
            )

        b = HttpBackend(self.config(), client=self.client_returning(handler))
        resp = b.complete(ChatRequest(system_prompt="s", user_prompt="u"))
        assert resp.raw_text == "hello"
        assert captured["auth"] == "Bearer sekret"
        # the credential value never appears in the config object
        assert "sekret" not in repr(b.config)

    def test_missing_credential_env_is_an_error(self, monkeypatch):
        monkeypatch.delenv("TEST_API_KEY", raising=False)
        b = HttpBackend(
            self.config(),
            client=self.client_returning(lambda r: httpx.Response(200, json={})),
        )
        with pytest.raises(ProviderError, match="TEST_API_KEY"):
            b.complete(ChatRequest(system_prompt="s", user_prompt="u"))

    def test_client_error_is_not_retried(self, monkeypatch):
        monkeypatch.setenv("TEST_API_KEY", "k")
        calls = []

        def handler(request):
            calls.append(1)
            return httpx.Response(400, text="bad request")

        b = HttpBackend(self.config(), client=self.client_returning(handler))
        with pytest.raises(ProviderError, match="rejected"):
            b.complete(ChatRequest(system_prompt="s", user_prompt="u"))
        assert len(calls) == 1

    def test_server_error_is_retried(self, monkeypatch):
        monkeypatch.setenv("TEST_API_KEY", "k")
        monkeypatch.setattr("adjudicator.backend.BACKOFF_INITIAL_S", 0.0)
        calls = []

        def handler(request):
            calls.append(1)
            if len(calls) < 3:
                return httpx.Response(500, text="boom")
            return httpx.Response(
                200, json={"choices": [{"message": {"content": "ok"}}]}
            )

        b = HttpBackend(self.config(), client=self.client_returning(handler))
        assert b.complete(ChatRequest(system_prompt="s", user_prompt="u")).raw_text == "ok"
        assert len(calls) == 3

    def test_payload_shape(self, monkeypatch):
        monkeypatch.setenv("TEST_API_KEY", "k")
        captured = {}

        def handler(request):
            captured.update(json.loads(request.content))
            return httpx.Response(
                200, json={"choices": [{"message": {"content": "x"}}]}
            )

        b = HttpBackend(self.config(), client=self.client_returning(handler))
        b.complete(
            ChatRequest(system_prompt="sys", user_prompt="usr", temperature=0.0)
        )
        assert captured["model"] == "m"
        assert captured["temperature"] == 0.0
        assert captured["messages"] == [
            {"role": "system", "content": "sys"},
            {"role": "user", "content": "usr"},
        ]
