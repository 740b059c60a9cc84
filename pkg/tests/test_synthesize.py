import pytest

from synthlab import (
    add_note,
    backlinks,
    create_document,
    create_group,
    edit_document,
    export_document,
    merge,
)
from synthlab.errors import (
    DanglingReference,
    MissingSource,
    ScopeViolation,
    SynthLabError,
    UnknownDocument,
    UnknownSource,
)

CSCL = "https://journals.example.edu/cscl/synthesis-practices"
LSCI = "https://journals.example.edu/lsci/annotation-review"


# -- creation ---------------------------------------------------------------

def test_create_documents_both_levels(session):
    per = create_document(session, "per_source_summary", CSCL)
    cross = create_document(session, "cross_source_synthesis")
    assert per.id == "doc-000001" and cross.id == "doc-000002"
    assert per.source_uri == CSCL and cross.source_uri is None
    assert per.body == ""


def test_create_document_source_rules(session):
    with pytest.raises(MissingSource):
        create_document(session, "per_source_summary")
    with pytest.raises(UnknownSource):
        create_document(session, "per_source_summary", "https://nowhere.example/")
    with pytest.raises(SynthLabError):
        create_document(session, "cross_source_synthesis", CSCL)
    with pytest.raises(SynthLabError):
        create_document(session, "haiku")


# -- editing ------------------------------------------------------------------

def test_edit_replaces_body_and_updates_timestamp(session):
    doc = create_document(session, "cross_source_synthesis")
    edited = edit_document(session, doc.id, "first")
    again = edit_document(session, doc.id, "second")
    assert again.body == "second"
    assert again.created_at == doc.created_at
    assert again.updated_at > edited.created_at


def test_edit_rejects_dangling_reference(session):
    doc = create_document(session, "cross_source_synthesis")
    with pytest.raises(DanglingReference) as err:
        edit_document(session, doc.id, "see ((ref:nope-123))")
    assert err.value.ref_id == "nope-123"
    assert session.documents[doc.id].body == ""  # rejected edit left no trace


def test_documents_are_not_citable(session):
    doc = create_document(session, "cross_source_synthesis")
    other = create_document(session, "cross_source_synthesis")
    with pytest.raises(DanglingReference):
        edit_document(session, doc.id, f"loop ((ref:{other.id}))")


def test_per_source_scope_enforced(session):
    doc = create_document(session, "per_source_summary", LSCI)
    # u6NjBw9vRF is from LSCI: allowed
    edit_document(session, doc.id, "ok ((ref:u6NjBw9vRF))")
    # k3VbNq8wRA is from the CSCL article: out of scope
    with pytest.raises(ScopeViolation):
        edit_document(session, doc.id, "bad ((ref:k3VbNq8wRA))")


def test_per_source_doc_may_cite_groups_and_notes(session):
    group = create_group(session, "g")
    note = add_note(session, "n", linked_group_ids=[group.id])
    doc = create_document(session, "per_source_summary", LSCI)
    edited = edit_document(session, doc.id, f"((ref:{group.id})) ((ref:{note.id}))")
    assert edited.ref_ids == (group.id, note.id)


def test_edit_unknown_document(session):
    with pytest.raises(UnknownDocument):
        edit_document(session, "doc-999999", "x")


def test_edits_keep_backlinks_current(session):
    doc = create_document(session, "cross_source_synthesis")
    edit_document(session, doc.id, "((ref:k3VbNq8wRA))")
    assert [b.id for b in backlinks(session, "k3VbNq8wRA")] == [doc.id]
    edit_document(session, doc.id, "((ref:m9PdXs2kQB))")
    assert backlinks(session, "k3VbNq8wRA") == []
    assert [b.id for b in backlinks(session, "m9PdXs2kQB")] == [doc.id]


# -- export ---------------------------------------------------------------------

def test_export_numbers_by_first_appearance_and_dedups(session):
    doc = create_document(session, "cross_source_synthesis")
    edit_document(
        session, doc.id,
        "B ((ref:m9PdXs2kQB)) then A ((ref:k3VbNq8wRA)) then B again ((ref:m9PdXs2kQB)).",
    )
    out = export_document(session, doc.id, "markdown")
    body = out.split("\n\n## References", 1)[0]
    assert body == "B [1] then A [2] then B again [1]."
    assert out.count("[1] Annotation m9PdXs2kQB") == 1
    assert "((ref:" not in out


def test_export_reference_lines_per_kind(session):
    group = create_group(session, "Key themes")
    note = add_note(session, "remember this", linked_group_ids=[group.id])
    doc = create_document(session, "cross_source_synthesis")
    edit_document(
        session, doc.id,
        f"((ref:k3VbNq8wRA)) ((ref:{group.id})) ((ref:{note.id})) ((ref:q7LgZu1sRD))",
    )
    out = export_document(session, doc.id, "markdown")
    assert '[1] Annotation k3VbNq8wRA by maya: "learners rarely revisit' in out
    assert '[2] Group grp-000001 "Key themes" (0 members)' in out
    assert '[3] Note note-000001: "remember this"' in out
    # q7LgZu1sRD is the page note: no quote to cite
    assert "[4] Annotation q7LgZu1sRD by priya (page note)" in out


def test_export_singular_member_count(session):
    from synthlab import assign

    group = create_group(session, "Solo")
    assign(session, "k3VbNq8wRA", group.id)
    doc = create_document(session, "cross_source_synthesis")
    edit_document(session, doc.id, f"((ref:{group.id}))")
    assert "(1 member)" in export_document(session, doc.id, "markdown")


def test_export_empty_body_still_has_appendix_header(session):
    doc = create_document(session, "cross_source_synthesis")
    out = export_document(session, doc.id, "markdown")
    assert out == "\n\n## References\n"


def test_export_is_deterministic(session):
    doc = create_document(session, "cross_source_synthesis")
    edit_document(session, doc.id, "((ref:k3VbNq8wRA)) and ((ref:m9PdXs2kQB))")
    first = export_document(session, doc.id, "markdown")
    second = export_document(session, doc.id, "markdown")
    assert first == second
    assert export_document(session, doc.id, "html") == export_document(session, doc.id, "html")


def test_html_export_escapes_and_links(session):
    doc = create_document(session, "cross_source_synthesis")
    edit_document(session, doc.id, "a < b & c ((ref:k3VbNq8wRA))\n\nnext <para>")
    html_out = export_document(session, doc.id, "html")
    assert "<p>a &lt; b &amp; c <a href=\"#ref-1\">[1]</a></p>" in html_out
    assert "<p>next &lt;para&gt;</p>" in html_out
    assert html_out.startswith("<!DOCTYPE html>")
    assert '<li id="ref-1">' in html_out
    assert "<para>" not in html_out


def test_export_unknown_document_and_format(session):
    with pytest.raises(UnknownDocument):
        export_document(session, "doc-999999")
    doc = create_document(session, "cross_source_synthesis")
    with pytest.raises(SynthLabError):
        export_document(session, doc.id, "pdf")


def test_merged_group_citation_reflects_member_count(session):
    from synthlab import assign

    g1 = create_group(session, "one")
    g2 = create_group(session, "two")
    assign(session, "k3VbNq8wRA", g1.id)
    assign(session, "m9PdXs2kQB", g2.id)
    merged = merge(session, [g1.id, g2.id], "Both themes")
    doc = create_document(session, "cross_source_synthesis")
    edit_document(session, doc.id, f"((ref:{merged.id}))")
    assert '[1] Group grp-000003 "Both themes" (2 members)' in export_document(session, doc.id)
