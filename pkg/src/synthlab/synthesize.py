"""Synthesis documents: per-source summaries and cross-source syntheses.

Document bodies cite workspace entities with ``((ref:ID))`` tokens. Edits
reject tokens that do not resolve, and per-source summaries may only cite
annotations from their own source. Export rewrites tokens to ``[n]``
citations (numbered by first appearance, deduplicated) and appends a
references section; Markdown and HTML are rendered from the same
intermediate form, byte-for-byte deterministically.
"""

from __future__ import annotations

import html
from typing import Optional

from synthlab.errors import (
    DanglingReference,
    MissingSource,
    ScopeViolation,
    SynthLabError,
    UnknownDocument,
    UnknownSource,
)
from synthlab.events import append_event
from synthlab.model import (
    DOCUMENT_LEVELS,
    REF_TOKEN_RE,
    SynthesisDocument,
    SynthesisSession,
)

EXPORT_FORMATS = ("markdown", "html")


def create_document(
    session: SynthesisSession, level: str, source_uri: Optional[str] = None
) -> SynthesisDocument:
    """Open an empty document at one of the two synthesis levels."""
    if level not in DOCUMENT_LEVELS:
        raise SynthLabError(f"unknown document level: {level!r}")
    if level == "per_source_summary":
        if not source_uri:
            raise MissingSource("per_source_summary requires a source_uri")
        if source_uri not in session.source_uris:
            raise UnknownSource(f"source_uri not in this session: {source_uri}")
    else:
        if source_uri:
            raise SynthLabError("cross_source_synthesis does not take a source_uri")
        source_uri = None
    document_id = session.next_document_id()
    append_event(
        session,
        "document_created",
        {"document_id": document_id, "level": level, "source_uri": source_uri},
    )
    return session.documents[document_id]


def edit_document(session: SynthesisSession, document_id: str, body: str) -> SynthesisDocument:
    """Replace the body after checking every reference token."""
    doc = session.documents.get(document_id)
    if doc is None:
        raise UnknownDocument(f"no such document: {document_id}")
    check_references(session, doc, body)
    append_event(session, "document_edited", {"document_id": document_id, "body": body})
    return session.documents[document_id]


def check_references(session: SynthesisSession, doc: SynthesisDocument, body: str) -> None:
    for ref_id in _token_ids(body):
        kind = session.entity_kind(ref_id)
        if kind is None or kind == "document":
            raise DanglingReference(ref_id)
        if (
            kind == "annotation"
            and doc.level == "per_source_summary"
            and session.annotations[ref_id].source_uri != doc.source_uri
        ):
            raise ScopeViolation(
                f"per-source summary for {doc.source_uri} cannot cite {ref_id} "
                f"from {session.annotations[ref_id].source_uri}"
            )


def export_document(
    session: SynthesisSession, document_id: str, fmt: str = "markdown"
) -> str:
    """Render a document with numbered citations and a references appendix."""
    if fmt not in EXPORT_FORMATS:
        raise SynthLabError(f"unsupported export format: {fmt!r}")
    doc = session.documents.get(document_id)
    if doc is None:
        raise UnknownDocument(f"no such document: {document_id}")
    parts, order = _segment(doc.body)
    numbers = {entity_id: i + 1 for i, entity_id in enumerate(order)}
    references = [_reference_text(session, entity_id, numbers[entity_id]) for entity_id in order]
    if fmt == "markdown":
        return _render_markdown(parts, numbers, references)
    return _render_html(doc, parts, numbers, references)


def _token_ids(body: str) -> list[str]:
    return [m.group(1) for m in REF_TOKEN_RE.finditer(body)]


def _segment(body: str) -> tuple[list[tuple[str, str]], list[str]]:
    """Split a body into ("text", chunk) / ("cite", entity_id) parts.

    Returns the parts plus cited entity ids in first-appearance order.
    """
    parts: list[tuple[str, str]] = []
    order: list[str] = []
    pos = 0
    for match in REF_TOKEN_RE.finditer(body):
        if match.start() > pos:
            parts.append(("text", body[pos : match.start()]))
        entity_id = match.group(1)
        if entity_id not in order:
            order.append(entity_id)
        parts.append(("cite", entity_id))
        pos = match.end()
    if pos < len(body) or not parts:
        parts.append(("text", body[pos:]))
    return parts, order


def _reference_text(session: SynthesisSession, entity_id: str, number: int) -> str:
    """One plain-text appendix line (without the [n] prefix)."""
    kind = session.entity_kind(entity_id)
    if kind == "annotation":
        ann = session.annotations[entity_id]
        author = ann.author or "unknown"
        if ann.quote:
            return f'Annotation {entity_id} by {author}: "{ann.quote}"'
        return f"Annotation {entity_id} by {author} (page note)"
    if kind == "group":
        group = session.groups[entity_id]
        count = len(group.member_ids)
        noun = "member" if count == 1 else "members"
        return f'Group {entity_id} "{group.label}" ({count} {noun})'
    if kind == "note":
        note = session.notes[entity_id]
        return f'Note {entity_id}: "{note.text}"'
    raise DanglingReference(entity_id)


def _render_markdown(
    parts: list[tuple[str, str]], numbers: dict[str, int], references: list[str]
) -> str:
    body = "".join(
        chunk if kind == "text" else f"[{numbers[chunk]}]" for kind, chunk in parts
    )
    out = body.rstrip("\n") + "\n\n## References\n"
    if references:
        out += "\n"
        for i, line in enumerate(references, start=1):
            out += f"[{i}] {line}\n"
    return out


def _render_html(
    doc: SynthesisDocument,
    parts: list[tuple[str, str]],
    numbers: dict[str, int],
    references: list[str],
) -> str:
    flowed = "".join(
        html.escape(chunk)
        if kind == "text"
        else f'<a href="#ref-{numbers[chunk]}">[{numbers[chunk]}]</a>'
        for kind, chunk in parts
    )
    paragraphs = [p for p in flowed.split("\n\n") if p.strip()]
    lines = [
        "<!DOCTYPE html>",
        '<html lang="en">',
        "<head>",
        '<meta charset="utf-8">',
        f"<title>{html.escape(doc.id)}</title>",
        "</head>",
        "<body>",
        "<article>",
    ]
    for para in paragraphs:
        lines.append(f"<p>{para}</p>")
    lines.extend(["</article>", "<section>", "<h2>References</h2>"])
    if references:
        lines.append("<ol>")
        for i, ref in enumerate(references, start=1):
            lines.append(f'<li id="ref-{i}">{html.escape(ref)}</li>')
        lines.append("</ol>")
    lines.extend(["</section>", "</body>", "</html>"])
    return "\n".join(lines) + "\n"
