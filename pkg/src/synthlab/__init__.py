"""Collaborative knowledge-synthesis sessions over shared annotations.

Pull a reading group's annotations into a private workspace, filter them,
organize them into groups with notes, and draft synthesis documents whose
citations stay linked back to the evidence. All state is event-sourced and
survives restarts byte-for-byte.
"""

from synthlab.analytics import StrategyReport, analyze_log, iteration_metrics
from synthlab.analyze import (
    add_note,
    assign,
    backlinks,
    create_group,
    link_note,
    merge,
    remove,
    transfer,
)
from synthlab.distill import FilterQuery, apply_filter, filter_session
from synthlab.errors import SynthLabError
from synthlab.events import append_event, create_session, replay
from synthlab.ingest import (
    IngestConfig,
    fetch_annotations,
    ingest_into_session,
    load_fixture,
    parse_annotation,
)
from synthlab.model import (
    Annotation,
    AnnotationGroup,
    EventRecord,
    InTheMomentNote,
    SynthesisDocument,
    SynthesisSession,
    serialize_session,
    validate_session,
)
from synthlab.service import ServiceConfig, create_app
from synthlab.store import SessionStore
from synthlab.synthesize import create_document, edit_document, export_document

__version__ = "0.1.0"

__all__ = [
    "Annotation",
    "AnnotationGroup",
    "EventRecord",
    "FilterQuery",
    "IngestConfig",
    "InTheMomentNote",
    "ServiceConfig",
    "SessionStore",
    "StrategyReport",
    "SynthLabError",
    "SynthesisDocument",
    "SynthesisSession",
    "add_note",
    "analyze_log",
    "append_event",
    "apply_filter",
    "assign",
    "backlinks",
    "create_app",
    "create_document",
    "create_group",
    "create_session",
    "edit_document",
    "export_document",
    "fetch_annotations",
    "filter_session",
    "ingest_into_session",
    "iteration_metrics",
    "link_note",
    "load_fixture",
    "merge",
    "parse_annotation",
    "remove",
    "replay",
    "serialize_session",
    "transfer",
    "validate_session",
]
