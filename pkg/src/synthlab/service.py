"""HTTP service exposing synthesis sessions.

One process owns one data directory. Each session applies writes under its
own lock (single-writer), and a write is acknowledged only after its event
is fsynced to the log. Sessions whose logs cannot be read back are
quarantined: they answer 503 and are never written to.
"""

from __future__ import annotations

import threading
from contextlib import asynccontextmanager, contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Optional

from fastapi import FastAPI, Query, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from synthlab import analytics, analyze, distill, ingest, synthesize
from synthlab.errors import (
    AuthError,
    CorruptLog,
    GroupArchived,
    SameGroup,
    SynthLabError,
    TransportError,
    UnknownAnnotation,
    UnknownDocument,
    UnknownEntity,
    UnknownGroup,
    UnknownSession,
)
from synthlab.events import append_event
from synthlab.ingest import IngestConfig
from synthlab.model import Clock, SynthesisSession, serialize_session
from synthlab.store import SessionStore

DEFAULT_LISTEN = "127.0.0.1:8787"
DEFAULT_DATA_DIR = "./synthlab-data"

_STATUS_BY_ERROR: tuple[tuple[tuple[type, ...], int], ...] = (
    ((UnknownSession, UnknownAnnotation, UnknownGroup, UnknownEntity, UnknownDocument), 404),
    ((GroupArchived, SameGroup), 409),
    ((AuthError, TransportError), 502),
    ((CorruptLog,), 503),
)


@dataclass
class ServiceConfig:
    listen: str = DEFAULT_LISTEN
    data_dir: Path = Path(DEFAULT_DATA_DIR)
    ingest: IngestConfig = field(default_factory=IngestConfig)
    snapshot_every: int = 100
    strategy_thresholds: tuple[float, float] = analytics.DEFAULT_THRESHOLDS
    fsync: bool = True

    def __post_init__(self) -> None:
        self.data_dir = Path(self.data_dir)
        deductive, inductive = self.strategy_thresholds
        if not 0.0 <= inductive <= deductive <= 1.0:
            raise ValueError("strategy_thresholds must satisfy 0 <= inductive <= deductive <= 1")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")


class SessionManager:
    """Loads sessions at startup and serializes access per session."""

    def __init__(self, config: ServiceConfig, *, clock: Optional[Clock] = None):
        self.config = config
        self.clock = clock
        self.store = SessionStore(
            config.data_dir, snapshot_every=config.snapshot_every, fsync=config.fsync
        )
        self.sessions, self.quarantined = self.store.load_all(clock=clock)
        for session in self.sessions.values():
            self.store.attach(session)
        self._locks = {session_id: threading.Lock() for session_id in self.sessions}
        self._create_lock = threading.Lock()

    def create_session(self, owner: str, source_uris: list[str]) -> SynthesisSession:
        with self._create_lock:
            session_id = self.store.next_session_id()
            session = SynthesisSession()
            if self.clock is not None:
                session.clock = self.clock
            self.store.attach(session)
            append_event(
                session,
                "session_created",
                {"session_id": session_id, "owner": owner, "source_uris": source_uris},
            )
            self.sessions[session_id] = session
            self._locks[session_id] = threading.Lock()
            return session

    @contextmanager
    def locked(self, session_id: str) -> Iterator[SynthesisSession]:
        if session_id in self.quarantined:
            raise CorruptLog(
                f"session {session_id} is quarantined: {self.quarantined[session_id]}"
            )
        session = self.sessions.get(session_id)
        if session is None:
            raise UnknownSession(f"no such session: {session_id}")
        with self._locks[session_id]:
            yield session

    def close(self) -> None:
        self.store.close()


# -- request bodies ----------------------------------------------------------


class CreateSessionBody(BaseModel):
    owner: str
    source_uris: list[str] = []


class IngestBody(BaseModel):
    source_uri: Optional[str] = None
    records: Optional[list[dict[str, Any]]] = None
    fixture_path: Optional[str] = None


class CreateGroupBody(BaseModel):
    label: str
    description: str = ""


class MembershipBody(BaseModel):
    annotation_id: str


class TransferBody(BaseModel):
    annotation_id: str
    from_group_id: str
    to_group_id: str


class MergeBody(BaseModel):
    group_ids: list[str]
    label: str


class NoteBody(BaseModel):
    text: str
    linked_annotation_ids: list[str] = []
    linked_group_ids: list[str] = []


class CreateDocumentBody(BaseModel):
    level: str
    source_uri: Optional[str] = None


class EditDocumentBody(BaseModel):
    body: str


# -- app ----------------------------------------------------------------------


def create_app(config: Optional[ServiceConfig] = None, *, clock: Optional[Clock] = None) -> FastAPI:
    config = config or ServiceConfig()
    manager = SessionManager(config, clock=clock)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        try:
            yield
        finally:
            manager.close()

    app = FastAPI(title="synthlab", docs_url=None, redoc_url=None, lifespan=lifespan)
    app.state.manager = manager

    @app.exception_handler(SynthLabError)
    def _domain_error(request, exc: SynthLabError) -> JSONResponse:
        status = 400
        for classes, code in _STATUS_BY_ERROR:
            if isinstance(exc, classes):
                status = code
                break
        return JSONResponse(
            status_code=status, content={"error": type(exc).__name__, "detail": str(exc)}
        )

    @app.exception_handler(RequestValidationError)
    def _validation_error(request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=400, content={"error": "ValidationError", "detail": str(exc)}
        )

    def _session_response(session: SynthesisSession, status: int = 200) -> Response:
        return Response(
            content=serialize_session(session),
            status_code=status,
            media_type="application/json",
        )

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody) -> Response:
        session = manager.create_session(body.owner, list(body.source_uris))
        return _session_response(session, status=201)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> Response:
        with manager.locked(session_id) as session:
            return _session_response(session)

    @app.post("/sessions/{session_id}/ingest")
    def ingest_annotations(session_id: str, body: IngestBody) -> dict[str, Any]:
        modes = [
            value
            for value in (body.source_uri, body.records, body.fixture_path)
            if value is not None
        ]
        if len(modes) != 1:
            raise SynthLabError(
                "ingest request must specify exactly one of source_uri, records, fixture_path"
            )
        # Fetch and parse outside the session lock; only the apply is serialized.
        if body.source_uri is not None:
            annotations = ingest.fetch_annotations(manager.config.ingest, body.source_uri)
            origin, requested_uri = "api", body.source_uri
        elif body.records is not None:
            annotations = ingest.sort_annotations(
                ingest.parse_annotation(raw, where=f"record at index {i}")
                for i, raw in enumerate(body.records)
            )
            origin, requested_uri = "upload", None
        else:
            annotations = ingest.load_fixture(body.fixture_path)
            origin, requested_uri = "fixture", None
        with manager.locked(session_id) as session:
            new = ingest.ingest_into_session(
                session, annotations, source_uri=requested_uri, origin=origin
            )
            return {
                "new": len(new),
                "new_ids": [a.id for a in new],
                "total_annotations": len(session.annotations),
            }

    @app.get("/sessions/{session_id}/annotations")
    def list_annotations(
        session_id: str,
        keywords: list[str] = Query(default=[]),
        authors: list[str] = Query(default=[]),
        tags: list[str] = Query(default=[]),
        include_replies: bool = Query(default=True),
    ) -> dict[str, Any]:
        query = distill.FilterQuery(
            keywords=tuple(keywords),
            authors=tuple(authors),
            tags=tuple(tags),
            include_replies=include_replies,
        )
        with manager.locked(session_id) as session:
            results = distill.filter_session(session, query)
            return {
                "query": query.to_dict(),
                "annotations": [a.to_dict() for a in results],
            }

    @app.post("/sessions/{session_id}/groups", status_code=201)
    def create_group(session_id: str, body: CreateGroupBody) -> dict[str, Any]:
        with manager.locked(session_id) as session:
            return analyze.create_group(session, body.label, body.description).to_dict()

    @app.post("/sessions/{session_id}/groups/{group_id}/assign")
    def assign_annotation(session_id: str, group_id: str, body: MembershipBody) -> dict[str, Any]:
        with manager.locked(session_id) as session:
            return analyze.assign(session, body.annotation_id, group_id).to_dict()

    @app.post("/sessions/{session_id}/groups/{group_id}/remove")
    def remove_annotation(session_id: str, group_id: str, body: MembershipBody) -> dict[str, Any]:
        with manager.locked(session_id) as session:
            return analyze.remove(session, body.annotation_id, group_id).to_dict()

    @app.post("/sessions/{session_id}/transfers")
    def transfer_annotation(session_id: str, body: TransferBody) -> dict[str, Any]:
        with manager.locked(session_id) as session:
            source, target = analyze.transfer(
                session, body.annotation_id, body.from_group_id, body.to_group_id
            )
            return {"from_group": source.to_dict(), "to_group": target.to_dict()}

    @app.post("/sessions/{session_id}/merges", status_code=201)
    def merge_groups(session_id: str, body: MergeBody) -> dict[str, Any]:
        with manager.locked(session_id) as session:
            return analyze.merge(session, body.group_ids, body.label).to_dict()

    @app.post("/sessions/{session_id}/notes", status_code=201)
    def create_note(session_id: str, body: NoteBody) -> dict[str, Any]:
        with manager.locked(session_id) as session:
            note = analyze.add_note(
                session, body.text, body.linked_annotation_ids, body.linked_group_ids
            )
            return note.to_dict()

    @app.get("/sessions/{session_id}/entities/{entity_id}/backlinks")
    def entity_backlinks(session_id: str, entity_id: str) -> dict[str, Any]:
        with manager.locked(session_id) as session:
            results = analyze.backlinks(session, entity_id)
            return {
                "entity_id": entity_id,
                "backlinks": [
                    {"kind": session.entity_kind(entity.id), "entity": entity.to_dict()}
                    for entity in results
                ],
            }

    @app.post("/sessions/{session_id}/documents", status_code=201)
    def create_document(session_id: str, body: CreateDocumentBody) -> dict[str, Any]:
        with manager.locked(session_id) as session:
            return synthesize.create_document(session, body.level, body.source_uri).to_dict()

    @app.put("/sessions/{session_id}/documents/{document_id}")
    def edit_document(session_id: str, document_id: str, body: EditDocumentBody) -> dict[str, Any]:
        with manager.locked(session_id) as session:
            return synthesize.edit_document(session, document_id, body.body).to_dict()

    @app.get("/sessions/{session_id}/documents/{document_id}/export")
    def export_document(
        session_id: str, document_id: str, format: str = Query(default="markdown")
    ) -> Response:
        with manager.locked(session_id) as session:
            rendered = synthesize.export_document(session, document_id, format)
        media = "text/markdown" if format == "markdown" else "text/html"
        return Response(content=rendered, media_type=f"{media}; charset=utf-8")

    @app.get("/sessions/{session_id}/analytics")
    def session_analytics(session_id: str) -> dict[str, Any]:
        with manager.locked(session_id) as session:
            report = analytics.analyze_log(
                session.event_log, manager.config.strategy_thresholds
            )
            iteration = analytics.iteration_metrics(session.event_log)
        return {"strategy": report.to_dict(), "iteration": iteration}

    @app.get("/sessions/{session_id}/events")
    def session_events(session_id: str, since: int = Query(default=0, ge=0)) -> dict[str, Any]:
        with manager.locked(session_id) as session:
            events = [e.to_dict() for e in session.event_log if e.seq > since]
            return {"events": events, "last_seq": session.last_seq}

    return app
