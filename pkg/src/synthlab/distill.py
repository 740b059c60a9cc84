"""Faceted filtering over a session's annotation pool.

A filter is a conjunction of clauses; each clause is a disjunction of terms.
Keywords match case-insensitively as substrings of body or quote, authors and
tags match case-insensitively as whole values. Replies can be excluded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

from synthlab.events import append_event
from synthlab.model import Annotation, EventRecord, SynthesisSession


def _clean_terms(values: Iterable[str]) -> tuple[str, ...]:
    """Strip, drop empties, and dedup case-insensitively keeping first casing."""
    out: list[str] = []
    seen: set[str] = set()
    for value in values:
        term = value.strip()
        if not term or term.lower() in seen:
            continue
        seen.add(term.lower())
        out.append(term)
    return tuple(out)


@dataclass(frozen=True)
class FilterQuery:
    """One faceted query; empty clauses impose no constraint."""

    keywords: tuple[str, ...] = ()
    authors: tuple[str, ...] = ()
    tags: tuple[str, ...] = ()
    include_replies: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "keywords", _clean_terms(self.keywords))
        object.__setattr__(self, "authors", _clean_terms(self.authors))
        object.__setattr__(self, "tags", _clean_terms(self.tags))

    @property
    def is_identity(self) -> bool:
        """True when the query cannot exclude anything."""
        return not self.keywords and not self.authors and not self.tags and self.include_replies

    def to_dict(self) -> dict[str, Any]:
        return {
            "keywords": list(self.keywords),
            "authors": list(self.authors),
            "tags": list(self.tags),
            "include_replies": self.include_replies,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "FilterQuery":
        return cls(
            keywords=tuple(data.get("keywords", ())),
            authors=tuple(data.get("authors", ())),
            tags=tuple(data.get("tags", ())),
            include_replies=bool(data.get("include_replies", True)),
        )


def matches(annotation: Annotation, query: FilterQuery) -> bool:
    if not query.include_replies and annotation.reply_to:
        return False
    if query.keywords:
        body = annotation.body.lower()
        quote = annotation.quote.lower()
        if not any(kw.lower() in body or kw.lower() in quote for kw in query.keywords):
            return False
    if query.authors:
        author = annotation.author.lower()
        if not any(a.lower() == author for a in query.authors):
            return False
    if query.tags:
        tags = {t.lower() for t in annotation.tags}
        if not any(t.lower() in tags for t in query.tags):
            return False
    return True


def apply_filter(annotations: Sequence[Annotation], query: FilterQuery) -> list[Annotation]:
    """Filter without reordering; input order is preserved."""
    return [a for a in annotations if matches(a, query)]


def filter_session(session: SynthesisSession, query: FilterQuery) -> list[Annotation]:
    """Filter the pool in (created_at, id) order and log non-identity queries."""
    if not query.is_identity:
        record_filter(session, query)
    pool = sorted(session.annotations.values(), key=lambda a: (a.created_at, a.id))
    return apply_filter(pool, query)


def record_filter(session: SynthesisSession, query: FilterQuery) -> EventRecord:
    return append_event(session, "filter_applied", {"query": query.to_dict()})
