"""Shared domain types, identifier discipline, and structural invariants.

Everything here is either an immutable value (the entity dataclasses, event
records) or the mutable :class:`SynthesisSession` container whose state is, by
construction, the deterministic replay of its event log. Canonical JSON
serialization lives here too so that snapshots, API responses and tests all
produce byte-identical output for identical state.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Any, Callable, Iterable, Mapping

SESSION_FORMAT = "synthlab-session/1"

SESSION_ID_PREFIX = "ses"
GROUP_ID_PREFIX = "grp"
NOTE_ID_PREFIX = "note"
DOCUMENT_ID_PREFIX = "doc"

DOCUMENT_LEVELS = ("per_source_summary", "cross_source_synthesis")

# Inline citation token embedded in synthesis bodies: ((ref:ENTITY_ID))
REF_TOKEN_RE = re.compile(r"\(\(ref:([A-Za-z0-9_.:\-]+)\)\)")

Clock = Callable[[], str]


# --- timestamps ---------------------------------------------------------------

def utc_now_iso() -> str:
    """Current UTC time in the canonical fixed-width form used everywhere."""
    return format_timestamp(datetime.now(timezone.utc))


def format_timestamp(dt: datetime) -> str:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    dt = dt.astimezone(timezone.utc)
    return dt.isoformat(timespec="microseconds").replace("+00:00", "Z")


_FRACTION_RE = re.compile(r"(?<=\d)\.(\d{1,9})(?=[+\-Z]|$)")


def normalize_timestamp(value: str) -> str:
    """Normalize any ISO-8601 timestamp to canonical UTC form.

    Raises ValueError on unparseable input. Canonical form sorts
    lexicographically in chronological order.
    """
    text = value.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    # fromisoformat (3.10) insists on 3- or 6-digit fractions; pad or truncate
    text = _FRACTION_RE.sub(lambda m: "." + m.group(1)[:6].ljust(6, "0"), text)
    return format_timestamp(datetime.fromisoformat(text))


EPOCH_TIMESTAMP = "1970-01-01T00:00:00.000000Z"


# --- identifiers --------------------------------------------------------------

def make_id(prefix: str, n: int) -> str:
    return f"{prefix}-{n:06d}"


def next_id(existing: Iterable[str], prefix: str) -> str:
    """Next monotonic id for a prefix, derived from the ids already in use.

    Deterministic function of session state, which keeps replayed sessions
    assigning the same ids as the original run.
    """
    lead = prefix + "-"
    highest = 0
    for entity_id in existing:
        if entity_id.startswith(lead):
            suffix = entity_id[len(lead):]
            if suffix.isdigit():
                highest = max(highest, int(suffix))
    return make_id(prefix, highest + 1)


def normalize_tags(tags: Iterable[str]) -> tuple[str, ...]:
    """Drop case-insensitive duplicate tags, keeping the first casing seen."""
    seen: set[str] = set()
    out: list[str] = []
    for tag in tags:
        key = tag.casefold()
        if key not in seen:
            seen.add(key)
            out.append(tag)
    return tuple(out)


def extract_ref_ids(body: str) -> tuple[str, ...]:
    """Distinct ((ref:ID)) targets in first-appearance order."""
    seen: set[str] = set()
    out: list[str] = []
    for match in REF_TOKEN_RE.finditer(body):
        ref_id = match.group(1)
        if ref_id not in seen:
            seen.add(ref_id)
            out.append(ref_id)
    return tuple(out)


# --- entities -----------------------------------------------------------------

@dataclass(frozen=True)
class Annotation:
    """One peer contribution pulled from the annotation platform."""

    id: str
    source_uri: str
    source_title: str
    author: str
    quote: str
    body: str
    tags: tuple[str, ...]
    created_at: str
    updated_at: str
    reply_to: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "source_uri": self.source_uri,
            "source_title": self.source_title,
            "author": self.author,
            "quote": self.quote,
            "body": self.body,
            "tags": list(self.tags),
            "created_at": self.created_at,
            "updated_at": self.updated_at,
            "reply_to": list(self.reply_to),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Annotation":
        return cls(
            id=data["id"],
            source_uri=data["source_uri"],
            source_title=data.get("source_title", ""),
            author=data.get("author", ""),
            quote=data.get("quote", ""),
            body=data.get("body", ""),
            tags=normalize_tags(data.get("tags", ())),
            created_at=data.get("created_at", EPOCH_TIMESTAMP),
            updated_at=data.get("updated_at", data.get("created_at", EPOCH_TIMESTAMP)),
            reply_to=tuple(data.get("reply_to") or ()),
        )


@dataclass(frozen=True)
class AnnotationGroup:
    """A named category of annotations (conceptual building block)."""

    id: str
    label: str
    description: str
    member_ids: tuple[str, ...]
    parent_group_ids: tuple[str, ...]
    archived: bool
    created_at: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "label": self.label,
            "description": self.description,
            "member_ids": list(self.member_ids),
            "parent_group_ids": list(self.parent_group_ids),
            "archived": self.archived,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "AnnotationGroup":
        return cls(
            id=data["id"],
            label=data["label"],
            description=data.get("description", ""),
            member_ids=tuple(data.get("member_ids", ())),
            parent_group_ids=tuple(data.get("parent_group_ids", ())),
            archived=bool(data.get("archived", False)),
            created_at=data.get("created_at", EPOCH_TIMESTAMP),
        )


@dataclass(frozen=True)
class InTheMomentNote:
    """Timestamped contextual note, bidirectionally linked to entities."""

    id: str
    text: str
    created_at: str
    linked_annotation_ids: tuple[str, ...]
    linked_group_ids: tuple[str, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "text": self.text,
            "created_at": self.created_at,
            "linked_annotation_ids": list(self.linked_annotation_ids),
            "linked_group_ids": list(self.linked_group_ids),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "InTheMomentNote":
        return cls(
            id=data["id"],
            text=data["text"],
            created_at=data.get("created_at", EPOCH_TIMESTAMP),
            linked_annotation_ids=tuple(data.get("linked_annotation_ids", ())),
            linked_group_ids=tuple(data.get("linked_group_ids", ())),
        )

    @property
    def linked_ids(self) -> tuple[str, ...]:
        return self.linked_annotation_ids + self.linked_group_ids


@dataclass(frozen=True)
class SynthesisDocument:
    """Per-source summary or cross-source synthesis with ((ref:..)) tokens."""

    id: str
    level: str
    source_uri: str | None
    body: str
    created_at: str
    updated_at: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "level": self.level,
            "source_uri": self.source_uri,
            "body": self.body,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SynthesisDocument":
        return cls(
            id=data["id"],
            level=data["level"],
            source_uri=data.get("source_uri"),
            body=data.get("body", ""),
            created_at=data.get("created_at", EPOCH_TIMESTAMP),
            updated_at=data.get("updated_at", data.get("created_at", EPOCH_TIMESTAMP)),
        )

    @property
    def ref_ids(self) -> tuple[str, ...]:
        return extract_ref_ids(self.body)


@dataclass(frozen=True)
class EventRecord:
    """Append-only record of one workspace mutation."""

    seq: int
    at: str
    kind: str
    payload: dict[str, Any]

    def to_dict(self) -> dict[str, Any]:
        return {"seq": self.seq, "at": self.at, "kind": self.kind, "payload": self.payload}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "EventRecord":
        return cls(seq=data["seq"], at=data["at"], kind=data["kind"], payload=dict(data["payload"]))


# --- backlinks ----------------------------------------------------------------

class BacklinkIndex:
    """Reverse edges: entity id -> ids of the notes/documents referencing it.

    Maintained incrementally as events apply; ``rebuild`` recomputes it from
    the entity stores alone, which the test suite uses as the divergence
    oracle.
    """

    def __init__(self) -> None:
        self._refs: dict[str, set[str]] = {}

    def add(self, entity_id: str, referrer_id: str) -> None:
        self._refs.setdefault(entity_id, set()).add(referrer_id)

    def discard(self, entity_id: str, referrer_id: str) -> None:
        bucket = self._refs.get(entity_id)
        if bucket is not None:
            bucket.discard(referrer_id)
            if not bucket:
                del self._refs[entity_id]

    def referrers(self, entity_id: str) -> frozenset[str]:
        return frozenset(self._refs.get(entity_id, ()))

    def as_dict(self) -> dict[str, frozenset[str]]:
        return {eid: frozenset(bucket) for eid, bucket in self._refs.items() if bucket}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BacklinkIndex):
            return NotImplemented
        return self.as_dict() == other.as_dict()

    def __repr__(self) -> str:
        return f"BacklinkIndex({self.as_dict()!r})"

    @classmethod
    def rebuild(cls, session: "SynthesisSession") -> "BacklinkIndex":
        index = cls()
        for note in session.notes.values():
            for entity_id in note.linked_ids:
                index.add(entity_id, note.id)
        for doc in session.documents.values():
            for entity_id in doc.ref_ids:
                index.add(entity_id, doc.id)
        return index


# --- session ------------------------------------------------------------------

@dataclass
class SynthesisSession:
    """One student's workspace: entity stores plus the event log.

    State is exactly the result of replaying ``event_log`` from empty; all
    mutation goes through :func:`synthlab.events.append_event`.
    """

    id: str = ""
    owner: str = ""
    created_at: str = ""
    source_uris: list[str] = field(default_factory=list)
    annotations: dict[str, Annotation] = field(default_factory=dict)
    groups: dict[str, AnnotationGroup] = field(default_factory=dict)
    notes: dict[str, InTheMomentNote] = field(default_factory=dict)
    documents: dict[str, SynthesisDocument] = field(default_factory=dict)
    event_log: list[EventRecord] = field(default_factory=list)

    # Runtime plumbing, not part of serialized state.
    clock: Clock = field(default=utc_now_iso, repr=False, compare=False)
    on_event: Callable[[EventRecord], None] | None = field(default=None, repr=False, compare=False)
    backlinks: BacklinkIndex = field(default_factory=BacklinkIndex, repr=False, compare=False)
    missing_ancestors: dict[str, tuple[str, ...]] = field(default_factory=dict, repr=False, compare=False)

    @property
    def last_seq(self) -> int:
        return self.event_log[-1].seq if self.event_log else 0

    def entity_kind(self, entity_id: str) -> str | None:
        if entity_id in self.annotations:
            return "annotation"
        if entity_id in self.groups:
            return "group"
        if entity_id in self.notes:
            return "note"
        if entity_id in self.documents:
            return "document"
        return None

    def next_group_id(self) -> str:
        return next_id(self.groups, GROUP_ID_PREFIX)

    def next_note_id(self) -> str:
        return next_id(self.notes, NOTE_ID_PREFIX)

    def next_document_id(self) -> str:
        return next_id(self.documents, DOCUMENT_ID_PREFIX)

    def to_dict(self) -> dict[str, Any]:
        """Canonical state document: fixed key order, log excluded."""
        return {
            "format": SESSION_FORMAT,
            "id": self.id,
            "owner": self.owner,
            "created_at": self.created_at,
            "source_uris": list(self.source_uris),
            "last_seq": self.last_seq,
            "annotations": [a.to_dict() for a in self.annotations.values()],
            "groups": [g.to_dict() for g in self.groups.values()],
            "notes": [n.to_dict() for n in self.notes.values()],
            "documents": [d.to_dict() for d in self.documents.values()],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SynthesisSession":
        """Restore state from a canonical document (derived indexes rebuilt).

        The event log is not part of the document; the caller attaches it.
        """
        session = cls(
            id=data["id"],
            owner=data["owner"],
            created_at=data["created_at"],
            source_uris=list(data.get("source_uris", ())),
        )
        for raw in data.get("annotations", ()):
            ann = Annotation.from_dict(raw)
            session.annotations[ann.id] = ann
        for raw in data.get("groups", ()):
            group = AnnotationGroup.from_dict(raw)
            session.groups[group.id] = group
        for raw in data.get("notes", ()):
            note = InTheMomentNote.from_dict(raw)
            session.notes[note.id] = note
        for raw in data.get("documents", ()):
            doc = SynthesisDocument.from_dict(raw)
            session.documents[doc.id] = doc
        session.backlinks = BacklinkIndex.rebuild(session)
        session.refresh_missing_ancestors()
        return session

    def refresh_missing_ancestors(self) -> None:
        """Recompute which reply_to references point outside the session."""
        self.missing_ancestors = {}
        for ann in self.annotations.values():
            missing = tuple(ref for ref in ann.reply_to if ref not in self.annotations)
            if missing:
                self.missing_ancestors[ann.id] = missing


def canonical_json(data: Any) -> str:
    """Deterministic JSON for state documents: stable bytes for stable state."""
    return json.dumps(data, ensure_ascii=False, indent=2) + "\n"


def compact_json(data: Any) -> str:
    """Single-line JSON used for event log lines."""
    return json.dumps(data, ensure_ascii=False, separators=(",", ":"))


def serialize_session(session: SynthesisSession) -> str:
    return canonical_json(session.to_dict())


# --- validation ----------------------------------------------------------------

def validate_session(session: SynthesisSession) -> list[str]:
    """Check every structural invariant; violations are data, not failures.

    Returns one human-readable description per broken invariant, empty when
    the session is fully consistent (including state == replay(event_log)).
    """
    violations: list[str] = []

    for ann in session.annotations.values():
        lowered = [t.casefold() for t in ann.tags]
        if len(set(lowered)) != len(lowered):
            violations.append(f"annotation {ann.id}: duplicate tags after normalization: {list(ann.tags)}")
        for ref in ann.reply_to:
            if ref not in session.annotations and ref not in session.missing_ancestors.get(ann.id, ()):
                violations.append(f"annotation {ann.id}: reply_to {ref!r} unresolved and not flagged missing-ancestor")

    for group in session.groups.values():
        if not group.label:
            violations.append(f"group {group.id}: empty label")
        if len(set(group.member_ids)) != len(group.member_ids):
            violations.append(f"group {group.id}: duplicate member_ids")
        for member in group.member_ids:
            if member not in session.annotations:
                violations.append(f"group {group.id}: member {member!r} does not resolve to an annotation")
        if group.parent_group_ids:
            for parent_id in group.parent_group_ids:
                parent = session.groups.get(parent_id)
                if parent is None:
                    violations.append(f"group {group.id}: merge parent {parent_id!r} does not exist")
                elif not parent.archived:
                    violations.append(f"group {group.id}: merge parent {parent_id} is not archived")
        if _lineage_has_cycle(session, group.id):
            violations.append(f"group {group.id}: merge lineage contains a cycle")

    for note in session.notes.values():
        if not note.text:
            violations.append(f"note {note.id}: empty text")
        for entity_id in note.linked_annotation_ids:
            if entity_id not in session.annotations:
                violations.append(f"note {note.id}: linked annotation {entity_id!r} does not exist")
        for entity_id in note.linked_group_ids:
            if entity_id not in session.groups:
                violations.append(f"note {note.id}: linked group {entity_id!r} does not exist")
        for entity_id in note.linked_ids:
            if note.id not in session.backlinks.referrers(entity_id):
                violations.append(f"note {note.id}: backlink index missing entry under {entity_id}")

    for doc in session.documents.values():
        if doc.level not in DOCUMENT_LEVELS:
            violations.append(f"document {doc.id}: invalid level {doc.level!r}")
        if doc.level == "per_source_summary":
            if not doc.source_uri:
                violations.append(f"document {doc.id}: per-source summary without source_uri")
        elif doc.source_uri is not None:
            violations.append(f"document {doc.id}: cross-source synthesis carries source_uri")
        for ref_id in doc.ref_ids:
            kind = session.entity_kind(ref_id)
            if kind is None or kind == "document":
                violations.append(f"document {doc.id}: reference {ref_id!r} does not resolve")
            elif (
                doc.level == "per_source_summary"
                and kind == "annotation"
                and session.annotations[ref_id].source_uri != doc.source_uri
            ):
                violations.append(
                    f"document {doc.id}: annotation {ref_id} is outside source {doc.source_uri!r}"
                )
            if kind in ("annotation", "group", "note") and doc.id not in session.backlinks.referrers(ref_id):
                violations.append(f"document {doc.id}: backlink index missing entry under {ref_id}")

    expected = 0
    for event in session.event_log:
        expected += 1
        if event.seq != expected:
            violations.append(f"event log: expected seq {expected}, found {event.seq}")
            expected = event.seq

    if session.backlinks != BacklinkIndex.rebuild(session):
        violations.append("backlink index: incremental state diverges from rebuild")

    if session.event_log:
        from synthlab.events import replay  # local import: events depends on model

        try:
            replayed = replay(session.event_log)
        except Exception as exc:  # noqa: BLE001 - any replay failure is a violation
            violations.append(f"event log: replay failed: {exc}")
        else:
            if serialize_session(replayed) != serialize_session(session):
                violations.append("session state diverges from event-log replay")

    return violations


def _lineage_has_cycle(session: SynthesisSession, group_id: str) -> bool:
    seen: set[str] = set()
    stack = [group_id]
    while stack:
        current = stack.pop()
        if current == group_id and seen:
            return True
        if current in seen:
            continue
        seen.add(current)
        parent = session.groups.get(current)
        if parent is not None:
            stack.extend(parent.parent_group_ids)
    return False
