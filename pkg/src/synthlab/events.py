"""Event kinds, payload schemas, and the append/apply/replay machinery.

Session state is only ever changed by applying an event. Commands (in the
workspace modules) validate preconditions, build a payload carrying every
generated id, and call :func:`append_event`; replay folds :func:`apply_event`
over a stored log and reproduces the exact same state, ids and timestamps.
"""

from __future__ import annotations

import json
from dataclasses import replace as _replace
from typing import Any, Iterable, Mapping

from synthlab.errors import MalformedLog
from synthlab.model import (
    Annotation,
    AnnotationGroup,
    EventRecord,
    InTheMomentNote,
    SynthesisDocument,
    SynthesisSession,
    compact_json,
)

# Payload schema per kind: exactly these keys, no more, no fewer.
EVENT_SCHEMAS: dict[str, frozenset[str]] = {
    "session_created": frozenset({"session_id", "owner", "source_uris"}),
    "annotations_ingested": frozenset({"source_uri", "origin", "annotations"}),
    "filter_applied": frozenset({"query"}),
    "group_created": frozenset({"group_id", "label", "description"}),
    "annotation_assigned": frozenset({"group_id", "annotation_id"}),
    "annotation_removed": frozenset({"group_id", "annotation_id"}),
    "annotation_transferred": frozenset({"annotation_id", "from_group_id", "to_group_id"}),
    "groups_merged": frozenset({"group_id", "label", "parent_group_ids", "member_ids"}),
    "note_created": frozenset({"note_id", "text", "linked_annotation_ids", "linked_group_ids"}),
    "note_linked": frozenset({"note_id", "linked_annotation_ids", "linked_group_ids"}),
    "document_created": frozenset({"document_id", "level", "source_uri"}),
    "document_edited": frozenset({"document_id", "body"}),
}

EVENT_KINDS = frozenset(EVENT_SCHEMAS)


def check_payload(kind: str, payload: Mapping[str, Any]) -> None:
    schema = EVENT_SCHEMAS.get(kind)
    if schema is None:
        raise MalformedLog(f"unknown event kind {kind!r}")
    keys = frozenset(payload)
    if keys != schema:
        missing = sorted(schema - keys)
        extra = sorted(keys - schema)
        raise MalformedLog(f"payload for {kind} mismatched (missing {missing}, extra {extra})")


def append_event(session: SynthesisSession, kind: str, payload: dict[str, Any]) -> EventRecord:
    """Stamp, append, apply, and persist (via the session's on_event hook)."""
    check_payload(kind, payload)
    event = EventRecord(seq=session.last_seq + 1, at=session.clock(), kind=kind, payload=payload)
    session.event_log.append(event)
    apply_event(session, event)
    if session.on_event is not None:
        session.on_event(event)
    return event


def create_session(
    session_id: str,
    owner: str,
    source_uris: Iterable[str] = (),
    *,
    clock=None,
    on_event=None,
) -> SynthesisSession:
    """Bootstrap a new session; the session_created event is its first entry."""
    session = SynthesisSession()
    if clock is not None:
        session.clock = clock
    if on_event is not None:
        session.on_event = on_event
    append_event(
        session,
        "session_created",
        {"session_id": session_id, "owner": owner, "source_uris": list(source_uris)},
    )
    return session


def apply_event(session: SynthesisSession, event: EventRecord) -> None:
    """Pure state transition: everything derives from the stored payload."""
    payload = event.payload
    kind = event.kind

    if kind == "session_created":
        session.id = payload["session_id"]
        session.owner = payload["owner"]
        session.created_at = event.at
        session.source_uris = list(payload["source_uris"])

    elif kind == "annotations_ingested":
        requested_uri = payload["source_uri"]
        if requested_uri and requested_uri not in session.source_uris:
            session.source_uris.append(requested_uri)
        for raw in payload["annotations"]:
            ann = Annotation.from_dict(raw)
            if ann.id in session.annotations:
                continue
            session.annotations[ann.id] = ann
            if ann.source_uri not in session.source_uris:
                session.source_uris.append(ann.source_uri)
        session.refresh_missing_ancestors()

    elif kind == "filter_applied":
        pass  # process record only; filtering is a view

    elif kind == "group_created":
        group = AnnotationGroup(
            id=payload["group_id"],
            label=payload["label"],
            description=payload["description"],
            member_ids=(),
            parent_group_ids=(),
            archived=False,
            created_at=event.at,
        )
        session.groups[group.id] = group

    elif kind == "annotation_assigned":
        group = session.groups[payload["group_id"]]
        if payload["annotation_id"] not in group.member_ids:
            session.groups[group.id] = _replace(
                group, member_ids=group.member_ids + (payload["annotation_id"],)
            )

    elif kind == "annotation_removed":
        group = session.groups[payload["group_id"]]
        session.groups[group.id] = _replace(
            group, member_ids=tuple(m for m in group.member_ids if m != payload["annotation_id"])
        )

    elif kind == "annotation_transferred":
        ann_id = payload["annotation_id"]
        source = session.groups[payload["from_group_id"]]
        session.groups[source.id] = _replace(
            source, member_ids=tuple(m for m in source.member_ids if m != ann_id)
        )
        target = session.groups[payload["to_group_id"]]
        if ann_id not in target.member_ids:
            session.groups[target.id] = _replace(target, member_ids=target.member_ids + (ann_id,))

    elif kind == "groups_merged":
        merged = AnnotationGroup(
            id=payload["group_id"],
            label=payload["label"],
            description="",
            member_ids=tuple(payload["member_ids"]),
            parent_group_ids=tuple(payload["parent_group_ids"]),
            archived=False,
            created_at=event.at,
        )
        session.groups[merged.id] = merged
        for parent_id in merged.parent_group_ids:
            session.groups[parent_id] = _replace(session.groups[parent_id], archived=True)

    elif kind == "note_created":
        note = InTheMomentNote(
            id=payload["note_id"],
            text=payload["text"],
            created_at=event.at,
            linked_annotation_ids=tuple(payload["linked_annotation_ids"]),
            linked_group_ids=tuple(payload["linked_group_ids"]),
        )
        session.notes[note.id] = note
        for entity_id in note.linked_ids:
            session.backlinks.add(entity_id, note.id)

    elif kind == "note_linked":
        note = session.notes[payload["note_id"]]
        new_ann = tuple(
            a for a in payload["linked_annotation_ids"] if a not in note.linked_annotation_ids
        )
        new_grp = tuple(g for g in payload["linked_group_ids"] if g not in note.linked_group_ids)
        session.notes[note.id] = _replace(
            note,
            linked_annotation_ids=note.linked_annotation_ids + new_ann,
            linked_group_ids=note.linked_group_ids + new_grp,
        )
        for entity_id in new_ann + new_grp:
            session.backlinks.add(entity_id, note.id)

    elif kind == "document_created":
        doc = SynthesisDocument(
            id=payload["document_id"],
            level=payload["level"],
            source_uri=payload["source_uri"],
            body="",
            created_at=event.at,
            updated_at=event.at,
        )
        session.documents[doc.id] = doc

    elif kind == "document_edited":
        doc = session.documents[payload["document_id"]]
        for old_ref in doc.ref_ids:
            session.backlinks.discard(old_ref, doc.id)
        updated_doc = _replace(doc, body=payload["body"], updated_at=event.at)
        session.documents[doc.id] = updated_doc
        for new_ref in updated_doc.ref_ids:
            session.backlinks.add(new_ref, doc.id)

    else:  # pragma: no cover - check_payload rejects unknown kinds first
        raise MalformedLog(f"unknown event kind {kind!r}")


def replay(events: Iterable[EventRecord], *, clock=None) -> SynthesisSession:
    """Rebuild a session from its log; ids and timestamps come from the events."""
    session = SynthesisSession()
    if clock is not None:
        session.clock = clock
    expected = 0
    for event in events:
        expected += 1
        if event.seq != expected:
            raise MalformedLog(f"event log gap: expected seq {expected}, found {event.seq}")
        check_payload(event.kind, event.payload)
        session.event_log.append(event)
        apply_event(session, event)
    return session


def event_to_line(event: EventRecord) -> str:
    return compact_json(event.to_dict())


def event_from_line(line: str) -> EventRecord:
    data = json.loads(line)
    return EventRecord.from_dict(data)
