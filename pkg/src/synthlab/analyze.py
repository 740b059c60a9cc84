"""Grouping workspace: collect annotations into labeled groups, reorganize
them by transfer and merge, and capture in-the-moment notes linked to the
entities they are about.

Every mutation validates its preconditions against current state, then emits
exactly one event carrying all generated ids, so replay is deterministic.
"""

from __future__ import annotations

from typing import Iterable, Union

from synthlab.errors import (
    EmptyLabel,
    EmptyNote,
    GroupArchived,
    NeedTwoGroups,
    NotAMember,
    SameGroup,
    UnknownAnnotation,
    UnknownEntity,
    UnknownGroup,
)
from synthlab.events import append_event
from synthlab.model import (
    AnnotationGroup,
    InTheMomentNote,
    SynthesisDocument,
    SynthesisSession,
)


def _require_group(session: SynthesisSession, group_id: str, *, active: bool = True) -> AnnotationGroup:
    group = session.groups.get(group_id)
    if group is None:
        raise UnknownGroup(f"no such group: {group_id}")
    if active and group.archived:
        raise GroupArchived(f"group {group_id} is archived")
    return group


def _require_annotation(session: SynthesisSession, annotation_id: str) -> None:
    if annotation_id not in session.annotations:
        raise UnknownAnnotation(f"no such annotation: {annotation_id}")


def create_group(session: SynthesisSession, label: str, description: str = "") -> AnnotationGroup:
    label = label.strip()
    if not label:
        raise EmptyLabel("group label must be non-empty")
    group_id = session.next_group_id()
    append_event(
        session,
        "group_created",
        {"group_id": group_id, "label": label, "description": description},
    )
    return session.groups[group_id]


def assign(session: SynthesisSession, annotation_id: str, group_id: str) -> AnnotationGroup:
    """Add an annotation to a group; already-a-member is a silent no-op."""
    _require_annotation(session, annotation_id)
    group = _require_group(session, group_id)
    if annotation_id in group.member_ids:
        return group
    append_event(
        session,
        "annotation_assigned",
        {"group_id": group_id, "annotation_id": annotation_id},
    )
    return session.groups[group_id]


def remove(session: SynthesisSession, annotation_id: str, group_id: str) -> AnnotationGroup:
    group = _require_group(session, group_id)
    if annotation_id not in group.member_ids:
        raise NotAMember(f"annotation {annotation_id} is not in group {group_id}")
    append_event(
        session,
        "annotation_removed",
        {"group_id": group_id, "annotation_id": annotation_id},
    )
    return session.groups[group_id]


def transfer(
    session: SynthesisSession, annotation_id: str, from_group_id: str, to_group_id: str
) -> tuple[AnnotationGroup, AnnotationGroup]:
    """Atomically move an annotation between groups (one event)."""
    if from_group_id == to_group_id:
        raise SameGroup("transfer requires two distinct groups")
    source = _require_group(session, from_group_id)
    _require_group(session, to_group_id)
    if annotation_id not in source.member_ids:
        raise NotAMember(f"annotation {annotation_id} is not in group {from_group_id}")
    append_event(
        session,
        "annotation_transferred",
        {
            "annotation_id": annotation_id,
            "from_group_id": from_group_id,
            "to_group_id": to_group_id,
        },
    )
    return session.groups[from_group_id], session.groups[to_group_id]


def merge(session: SynthesisSession, group_ids: Iterable[str], new_label: str) -> AnnotationGroup:
    """Fold two or more groups into a new one and archive the parents.

    Members are the ordered union of the parents' members: parents in the
    given order, each parent's members in their stored order, first
    occurrence of a duplicate wins.
    """
    parent_ids = list(group_ids)
    if len(parent_ids) < 2 or len(set(parent_ids)) != len(parent_ids):
        raise NeedTwoGroups("merge requires at least two distinct groups")
    new_label = new_label.strip()
    if not new_label:
        raise EmptyLabel("merged group label must be non-empty")
    parents = [_require_group(session, gid) for gid in parent_ids]

    member_ids: list[str] = []
    seen: set[str] = set()
    for parent in parents:
        for member in parent.member_ids:
            if member not in seen:
                seen.add(member)
                member_ids.append(member)

    group_id = session.next_group_id()
    append_event(
        session,
        "groups_merged",
        {
            "group_id": group_id,
            "label": new_label,
            "parent_group_ids": parent_ids,
            "member_ids": member_ids,
        },
    )
    return session.groups[group_id]


def add_note(
    session: SynthesisSession,
    text: str,
    linked_annotation_ids: Iterable[str] = (),
    linked_group_ids: Iterable[str] = (),
) -> InTheMomentNote:
    """Capture an immutable note, optionally linked to annotations/groups."""
    if not text.strip():
        raise EmptyNote("note text must be non-empty")
    ann_ids = _dedup(linked_annotation_ids)
    grp_ids = _dedup(linked_group_ids)
    for ann_id in ann_ids:
        if ann_id not in session.annotations:
            raise UnknownEntity(f"note links unknown annotation: {ann_id}")
    for grp_id in grp_ids:
        if grp_id not in session.groups:
            raise UnknownEntity(f"note links unknown group: {grp_id}")
    note_id = session.next_note_id()
    append_event(
        session,
        "note_created",
        {
            "note_id": note_id,
            "text": text,
            "linked_annotation_ids": ann_ids,
            "linked_group_ids": grp_ids,
        },
    )
    return session.notes[note_id]


def link_note(
    session: SynthesisSession,
    note_id: str,
    annotation_ids: Iterable[str] = (),
    group_ids: Iterable[str] = (),
) -> InTheMomentNote:
    """Attach more link targets to an existing note; its text never changes."""
    note = session.notes.get(note_id)
    if note is None:
        raise UnknownEntity(f"no such note: {note_id}")
    ann_ids = [a for a in _dedup(annotation_ids) if a not in note.linked_annotation_ids]
    grp_ids = [g for g in _dedup(group_ids) if g not in note.linked_group_ids]
    for ann_id in ann_ids:
        if ann_id not in session.annotations:
            raise UnknownEntity(f"note links unknown annotation: {ann_id}")
    for grp_id in grp_ids:
        if grp_id not in session.groups:
            raise UnknownEntity(f"note links unknown group: {grp_id}")
    if not ann_ids and not grp_ids:
        return note
    append_event(
        session,
        "note_linked",
        {"note_id": note_id, "linked_annotation_ids": ann_ids, "linked_group_ids": grp_ids},
    )
    return session.notes[note_id]


def backlinks(
    session: SynthesisSession, entity_id: str
) -> list[Union[InTheMomentNote, SynthesisDocument]]:
    """Every note and document that references the entity, oldest first."""
    if session.entity_kind(entity_id) is None:
        raise UnknownEntity(f"no such entity: {entity_id}")
    results: list[Union[InTheMomentNote, SynthesisDocument]] = []
    for referrer_id in session.backlinks.referrers(entity_id):
        if referrer_id in session.notes:
            results.append(session.notes[referrer_id])
        elif referrer_id in session.documents:
            results.append(session.documents[referrer_id])
    results.sort(key=lambda e: (e.created_at, e.id))
    return results


def _dedup(values: Iterable[str]) -> list[str]:
    out: list[str] = []
    for value in values:
        if value not in out:
            out.append(value)
    return out
