"""HTTP service hosting the interactive fact-finding loop.

Sessions hold a case draft (narrative plus appended facts); each run
snapshots the narrative it ran against and stores the full trace. One run
per session at a time (409 on overlap). Errors are problem-detail JSON
with stable machine-readable codes.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .casefile import QUESTION_TYPES, RedactedCase
from .config import RunConfig, make_backend
from .corpus import load_corpus
from .errors import AdjudicatorError
from .pipeline import CaseAborted, run_pipeline

API_SCHEMA_VERSION = 1


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


class CreateSessionBody(BaseModel):
    narrative: str = Field(min_length=1)
    question_type: str = "eligibility"


class AddFactBody(BaseModel):
    text: str = Field(min_length=1)


@dataclass
class Session:
    session_id: str
    narrative: str
    question_type: str
    facts: list[str] = field(default_factory=list)
    runs: list[dict] = field(default_factory=list)
    run_lock: threading.Lock = field(default_factory=threading.Lock)

    def current_narrative(self) -> str:
        return " ".join([self.narrative, *self.facts])

    def to_dict(self) -> dict:
        return {
            "schema_version": API_SCHEMA_VERSION,
            "session_id": self.session_id,
            "narrative": self.narrative,
            "question_type": self.question_type,
            "facts": list(self.facts),
            "runs": list(self.runs),
        }


def create_app(config: RunConfig) -> FastAPI:
    config = config.validated()
    corpus = load_corpus(config.corpus_path)
    backend = make_backend(config.backend)
    sessions: dict[str, Session] = {}
    traces: dict[str, dict] = {}
    store_lock = threading.Lock()

    app = FastAPI(title="adjudicator", version="0.1.0")

    @app.exception_handler(ApiError)
    async def _api_error(_req: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    def get_session(session_id: str) -> Session:
        with store_lock:
            session = sessions.get(session_id)
        if session is None:
            raise ApiError(404, "session_not_found", f"unknown session {session_id!r}")
        return session

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        if body.question_type not in QUESTION_TYPES:
            raise ApiError(
                400, "bad_question_type",
                f"question_type must be one of {list(QUESTION_TYPES)}",
            )
        session = Session(
            session_id=uuid.uuid4().hex[:12],
            narrative=body.narrative,
            question_type=body.question_type,
        )
        with store_lock:
            sessions[session.session_id] = session
        return session.to_dict()

    @app.get("/sessions/{session_id}")
    def read_session(session_id: str):
        return get_session(session_id).to_dict()

    @app.post("/sessions/{session_id}/facts", status_code=201)
    def add_fact(session_id: str, body: AddFactBody):
        session = get_session(session_id)
        session.facts.append(body.text)
        return session.to_dict()

    @app.post("/sessions/{session_id}/run")
    def run_session(session_id: str):
        session = get_session(session_id)
        if not session.run_lock.acquire(blocking=False):
            raise ApiError(409, "run_in_progress", "a run is already in progress")
        try:
            narrative = session.current_narrative()
            case = RedactedCase(
                id=f"session-{session.session_id}",
                narrative=narrative,
                question_type=session.question_type,
            )
            try:
                det, trace = run_pipeline(
                    case, corpus, config.mode, backend,
                    k=config.retrieval_k, trace_seq=len(session.runs),
                )
            except CaseAborted as exc:
                traces[exc.trace.trace_id] = exc.trace.to_dict()
                raise ApiError(503, "backend_error", str(exc))
            traces[trace.trace_id] = trace.to_dict()
            entry = {
                "trace_id": trace.trace_id,
                "narrative": narrative,
                "determination": det.to_dict(),
                "gap_set": trace.gap_set,
                "overrides": trace.overrides,
            }
            session.runs.append(entry)
            return entry
        finally:
            session.run_lock.release()

    @app.get("/traces/{trace_id}")
    def read_trace(trace_id: str):
        if trace_id not in traces:
            raise ApiError(404, "trace_not_found", f"unknown trace {trace_id!r}")
        return traces[trace_id]

    @app.get("/corpus/passages/{passage_id}")
    def read_passage(passage_id: str):
        if passage_id not in corpus:
            raise ApiError(404, "passage_not_found", f"unknown passage {passage_id!r}")
        return corpus.get(passage_id).to_dict()

    return app
