import pytest

from synthlab import create_session, ingest_into_session, replay, serialize_session
from synthlab.errors import MalformedLog
from synthlab.events import (
    EVENT_SCHEMAS,
    append_event,
    check_payload,
    event_from_line,
    event_to_line,
)
from synthlab.model import EventRecord


def test_twelve_event_kinds():
    assert len(EVENT_SCHEMAS) == 12
    assert set(EVENT_SCHEMAS) == {
        "session_created", "annotations_ingested", "filter_applied", "group_created",
        "annotation_assigned", "annotation_removed", "annotation_transferred",
        "groups_merged", "note_created", "note_linked", "document_created",
        "document_edited",
    }


def test_check_payload_requires_exact_keys():
    check_payload("filter_applied", {"query": {}})
    with pytest.raises(MalformedLog):
        check_payload("filter_applied", {})
    with pytest.raises(MalformedLog):
        check_payload("filter_applied", {"query": {}, "extra": 1})
    with pytest.raises(MalformedLog):
        check_payload("no_such_kind", {})


def test_session_created_is_first_event(clock):
    s = create_session("ses-000001", "maya", ["https://x.org/a"], clock=clock)
    assert s.last_seq == 1
    first = s.event_log[0]
    assert first.kind == "session_created"
    assert first.seq == 1
    assert s.id == "ses-000001"
    assert s.owner == "maya"
    assert s.created_at == first.at
    assert s.source_uris == ["https://x.org/a"]


def test_seq_is_gapless_and_increasing(session):
    seqs = [e.seq for e in session.event_log]
    assert seqs == list(range(1, len(seqs) + 1))


def test_timestamps_never_decrease(session):
    stamps = [e.at for e in session.event_log]
    assert stamps == sorted(stamps)


def test_every_mutation_is_one_event(session, corpus):
    before = session.last_seq
    ingest_into_session(session, list(corpus))  # all duplicates
    assert session.last_seq == before + 1
    assert session.event_log[-1].payload["annotations"] == []


def test_on_event_hook_fires_after_apply(clock):
    seen = []
    s = create_session("ses-000001", "o", clock=clock)
    s.on_event = lambda event: seen.append((event.seq, s.last_seq))
    append_event(s, "group_created", {"group_id": "grp-000001", "label": "x", "description": ""})
    assert seen == [(2, 2)]  # hook sees the event already in the log


def test_replay_rejects_gaps(session):
    from synthlab import create_group

    create_group(session, "one")
    create_group(session, "two")
    events = list(session.event_log)
    events[3] = EventRecord(seq=99, at=events[3].at, kind=events[3].kind, payload=events[3].payload)
    with pytest.raises(MalformedLog):
        replay(events)


def test_replay_reproduces_state_and_ids(session):
    from synthlab import add_note, create_document, create_group, edit_document, merge

    g1 = create_group(session, "one")
    g2 = create_group(session, "two")
    merge(session, [g1.id, g2.id], "both")
    add_note(session, "note", linked_group_ids=[g1.id])
    doc = create_document(session, "cross_source_synthesis")
    edit_document(session, doc.id, "((ref:k3VbNq8wRA))")

    replayed = replay(session.event_log)
    assert serialize_session(replayed) == serialize_session(session)
    # ids come from the recorded payloads, not regenerated
    assert set(replayed.groups) == set(session.groups)
    assert set(replayed.notes) == set(session.notes)
    assert set(replayed.documents) == set(session.documents)
    # and derived indexes are rebuilt identically
    assert replayed.backlinks == session.backlinks


def test_event_line_round_trip(session):
    for event in session.event_log:
        line = event_to_line(event)
        assert "\n" not in line
        assert event_from_line(line) == event


def test_ingest_event_unions_source_uris(clock):
    from synthlab.model import Annotation

    s = create_session("ses-000001", "o", ["https://pre.example/listed"], clock=clock)
    ann = Annotation(
        id="x1", source_uri="https://other.example/doc", source_title="", author="a",
        quote="", body="", tags=(), created_at="2026-01-01T00:00:00.000000Z",
        updated_at="2026-01-01T00:00:00.000000Z",
    )
    ingest_into_session(s, [ann], source_uri="https://req.example/page")
    assert s.source_uris == [
        "https://pre.example/listed",
        "https://req.example/page",
        "https://other.example/doc",
    ]


def test_missing_reply_ancestors_are_flagged_not_fatal(clock):
    from synthlab.model import Annotation

    s = create_session("ses-000001", "o", clock=clock)
    orphan = Annotation(
        id="child", source_uri="https://x.org/a", source_title="", author="a",
        quote="", body="", tags=(), created_at="2026-01-01T00:00:00.000000Z",
        updated_at="2026-01-01T00:00:00.000000Z", reply_to=("gone",),
    )
    ingest_into_session(s, [orphan])
    assert s.missing_ancestors == {"child": ("gone",)}
    parent = Annotation(
        id="gone", source_uri="https://x.org/a", source_title="", author="b",
        quote="", body="", tags=(), created_at="2026-01-01T00:00:00.000000Z",
        updated_at="2026-01-01T00:00:00.000000Z",
    )
    ingest_into_session(s, [parent])
    assert s.missing_ancestors == {}
