"""Language-model backend interface.

All provider differences live behind :class:`Backend`. The structured-output
contract is enforced here: when a request names a response schema, the raw
text is parsed and validated, with a bounded repair re-prompt on failure.
Malformed output reaches the pipeline only as a SchemaViolation.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field, replace

import httpx

from . import stages
from .errors import ProviderError, SchemaViolation, Timeout, UnknownScriptKey
from .stages import ValidationFailure

DEFAULT_MAX_PARSE_RETRIES = 2   # so at most 3 attempts per request
TRANSPORT_RETRIES = 3
BACKOFF_INITIAL_S = 0.5


@dataclass(frozen=True)
class ChatRequest:
    system_prompt: str
    user_prompt: str
    response_schema_id: str = "free_text"
    temperature: float = 0.0
    max_output_tokens: int = 4096
    # Routing metadata for scripted backends; HTTP providers ignore these.
    stage: str = ""
    case_id: str = ""
    # Validation context for schema checks that need the case at hand
    # (narrative for quote checks, item ids for coverage, question type).
    context: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.response_schema_id not in stages.SCHEMA_IDS:
            raise ValueError(f"unknown response schema {self.response_schema_id!r}")
        if not 0.0 <= self.temperature <= 1.0:
            raise ValueError("temperature must be in [0, 1]")


@dataclass(frozen=True)
class ChatResponse:
    raw_text: str
    parsed: dict | None
    attempts: int
    latency_ms: int


@dataclass(frozen=True)
class BackendConfig:
    kind: str  # "http" | "scripted"
    model_name: str = ""
    endpoint_url: str = ""
    auth_env_var: str = ""
    timeout_ms: int = 60_000
    max_parse_retries: int = DEFAULT_MAX_PARSE_RETRIES
    requests_per_minute: int = 0  # 0 = unlimited


# ---------------------------------------------------------------------------
# Schema validation dispatch


def validate_structured(schema_id: str, obj: dict, context: dict) -> None:
    """Validate a parsed JSON object against a stage schema.

    Raises ValidationFailure with a message suitable for a repair re-prompt.
    """
    narrative = context.get("narrative", "")
    item_ids = context.get("expected_item_ids", [])
    question_type = context.get("question_type", "eligibility")
    allowed_sources = context.get("allowed_passage_ids")

    def _check_sources(cl):
        if allowed_sources is None:
            return
        extra = set(cl.source_passage_ids) - set(allowed_sources)
        if extra:
            raise ValidationFailure(
                f"checklist cites passages that were not retrieved: {sorted(extra)}"
            )

    if schema_id == "planner":
        stages.parse_planner(obj)
    elif schema_id == "checklist":
        _check_sources(stages.parse_checklist(obj))
    elif schema_id == "assessment":
        stages.parse_assessments(obj, narrative=narrative, expected_item_ids=item_ids)
    elif schema_id == "supervisor":
        stages.parse_supervisor(obj, narrative=narrative, expected_item_ids=item_ids)
    elif schema_id == "determination":
        stages.parse_determination(obj, question_type=question_type)
    elif schema_id == "extract_verify":
        cl = stages.parse_checklist(_sub(obj, "checklist"))
        _check_sources(cl)
        stages.parse_assessments(
            _sub(obj, "assessments", wrap="assessments"),
            narrative=narrative,
            expected_item_ids=cl.item_ids(),
        )
    elif schema_id == "verify_supervise":
        stages.parse_supervisor(
            _sub(obj, "supervisor"), narrative=narrative, expected_item_ids=item_ids
        )
    elif schema_id == "single":
        cl = stages.parse_checklist(_sub(obj, "checklist"))
        _check_sources(cl)
        stages.parse_supervisor(
            _sub(obj, "supervisor"), narrative=narrative, expected_item_ids=cl.item_ids()
        )
    elif schema_id == "free_text":
        pass
    else:  # pragma: no cover - guarded by ChatRequest
        raise ValidationFailure(f"unknown schema {schema_id!r}")


def _sub(obj: dict, name: str, wrap: str | None = None) -> dict:
    if name not in obj:
        raise ValidationFailure(f"missing top-level field {name!r}")
    value = obj[name]
    if wrap is not None:
        return {wrap: value}
    if not isinstance(value, dict):
        raise ValidationFailure(f"field {name!r} must be an object")
    return value


# ---------------------------------------------------------------------------
# Backends


class _TokenBucket:
    """Per-backend rate limiter so parallel case runs cannot stampede."""

    def __init__(self, requests_per_minute: int):
        self._rpm = requests_per_minute
        self._tokens = float(requests_per_minute)
        self._last = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        if self._rpm <= 0:
            return
        while True:
            with self._lock:
                now = time.monotonic()
                self._tokens = min(self._rpm, self._tokens + (now - self._last) * self._rpm / 60.0)
                self._last = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) * 60.0 / self._rpm
            time.sleep(wait)


class Backend:
    """Base backend: owns the parse/validate/re-prompt loop.

    Subclasses implement :meth:`generate_raw`. Thread-safe across cases.
    """

    def __init__(self, config: BackendConfig):
        self.config = config
        self._bucket = _TokenBucket(config.requests_per_minute)
        self._calls = 0
        self._calls_lock = threading.Lock()

    @property
    def call_count(self) -> int:
        return self._calls

    def generate_raw(self, request: ChatRequest, attempt: int) -> str:
        raise NotImplementedError

    def complete(self, request: ChatRequest) -> ChatResponse:
        start = time.monotonic()
        attempts = 0
        req = request
        last_error = ""
        raw = ""
        while attempts <= self.config.max_parse_retries:
            attempts += 1
            self._bucket.acquire()
            with self._calls_lock:
                self._calls += 1
            raw = self.generate_raw(req, attempts)
            if request.response_schema_id == "free_text":
                return ChatResponse(
                    raw_text=raw, parsed=None, attempts=attempts,
                    latency_ms=int((time.monotonic() - start) * 1000),
                )
            try:
                obj = stages.extract_json_object(raw)
                validate_structured(request.response_schema_id, obj, request.context)
            except ValidationFailure as exc:
                last_error = str(exc)
                repair = (
                    f"{request.user_prompt}\n\n"
                    f"Your previous response was rejected: {last_error}\n"
                    "Respond again with a single valid JSON object and nothing else."
                )
                req = replace(request, user_prompt=repair)
                continue
            return ChatResponse(
                raw_text=raw, parsed=obj, attempts=attempts,
                latency_ms=int((time.monotonic() - start) * 1000),
            )
        raise SchemaViolation(
            f"schema {request.response_schema_id!r} validation failed after "
            f"{attempts} attempts: {last_error}",
            raw_text=raw,
            attempts=attempts,
        )


class ScriptedBackend(Backend):
    """Answers by exact (stage, case_id) lookup; fails loudly on unknown keys.

    A script value may be a dict (serialized once as JSON), a string, or a
    list of strings consumed one per attempt within a single complete()
    call (the last entry repeats). Bit-reproducible by construction.
    """

    def __init__(self, script: dict[tuple[str, str], object], config: BackendConfig | None = None):
        super().__init__(config or BackendConfig(kind="scripted", model_name="scripted"))
        self._script = dict(script)

    def generate_raw(self, request: ChatRequest, attempt: int) -> str:
        key = (request.stage, request.case_id)
        if key not in self._script:
            raise UnknownScriptKey(f"no script entry for stage={key[0]!r} case={key[1]!r}")
        value = self._script[key]
        if isinstance(value, list):
            value = value[min(attempt - 1, len(value) - 1)]
        if isinstance(value, dict):
            return json.dumps(value)
        return str(value)


class HttpBackend(Backend):
    """Generic OpenAI-style chat-completions adapter.

    Credentials come from the environment variable named in the config and
    are sent as a bearer token; they are never written to disk.
    """

    def __init__(self, config: BackendConfig, client: httpx.Client | None = None):
        super().__init__(config)
        if not config.endpoint_url:
            raise ValueError("HttpBackend requires endpoint_url")
        self._client = client or httpx.Client(timeout=config.timeout_ms / 1000.0)

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.config.auth_env_var:
            token = os.environ.get(self.config.auth_env_var)
            if not token:
                raise ProviderError(
                    f"credential env var {self.config.auth_env_var!r} is not set"
                )
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def generate_raw(self, request: ChatRequest, attempt: int) -> str:
        payload = {
            "model": self.config.model_name,
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": request.user_prompt},
            ],
        }
        delay = BACKOFF_INITIAL_S
        last_exc: Exception | None = None
        for i in range(TRANSPORT_RETRIES):
            try:
                resp = self._client.post(
                    self.config.endpoint_url, json=payload, headers=self._headers()
                )
                if resp.status_code >= 500:
                    raise ProviderError(f"provider returned {resp.status_code}")
                if resp.status_code >= 400:
                    # Client errors will not improve on retry.
                    raise ProviderError(
                        f"provider rejected request: {resp.status_code} {resp.text[:500]}"
                    ) from None
                body = resp.json()
                return body["choices"][0]["message"]["content"]
            except httpx.TimeoutException as exc:
                last_exc = Timeout(f"provider timeout: {exc}")
            except (httpx.TransportError, ProviderError, KeyError, ValueError) as exc:
                if isinstance(exc, ProviderError) and "rejected" in str(exc):
                    raise
                last_exc = exc if isinstance(exc, ProviderError) else ProviderError(str(exc))
            if i < TRANSPORT_RETRIES - 1:
                time.sleep(delay)
                delay *= 2
        assert last_exc is not None
        raise last_exc


def scripted_oracle(script: dict[tuple[str, str], object]) -> ScriptedBackend:
    """Build a scripted backend from a (stage, case id) -> output map."""
    return ScriptedBackend(script)
