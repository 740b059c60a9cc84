"""Pulling annotations into a session from the annotation platform.

Reads the platform's JSON wire format (as served by its /search endpoint or
saved to fixture files), maps records into :class:`Annotation`, and appends
one annotations_ingested event per batch. Re-ingesting the same records is
a no-op for annotations already present, keyed by upstream id.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Optional, Sequence

import requests

from synthlab.errors import AuthError, FileError, SchemaError, TransportError
from synthlab.events import append_event
from synthlab.model import (
    EPOCH_TIMESTAMP,
    Annotation,
    SynthesisSession,
    normalize_tags,
    normalize_timestamp,
)

DEFAULT_API_BASE_URL = "https://api.hypothes.is/api"

BACKOFF_BASE_SECONDS = 1.0
BACKOFF_FACTOR = 2.0

_RETRYABLE_STATUSES = frozenset({429, 500, 502, 503, 504})


@dataclass
class IngestConfig:
    """Connection settings for the upstream annotation API."""

    api_base_url: str = DEFAULT_API_BASE_URL
    api_token: Optional[str] = None
    api_group_id: Optional[str] = None
    page_size: int = 100
    max_retries: int = 3
    timeout: float = 30.0

    def __post_init__(self) -> None:
        if not 1 <= self.page_size <= 200:
            raise ValueError("page_size must be in 1..200")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")

    @classmethod
    def from_env(cls, environ: Mapping[str, str] = os.environ) -> "IngestConfig":
        return cls(
            api_base_url=environ.get("SYNTHLAB_API_BASE_URL", DEFAULT_API_BASE_URL),
            api_token=environ.get("SYNTHLAB_API_TOKEN") or None,
            api_group_id=environ.get("SYNTHLAB_API_GROUP") or None,
        )


def parse_annotation(raw: Mapping[str, Any], where: str = "") -> Annotation:
    """Map one wire record to an Annotation.

    Only id and uri are required; everything else degrades to empty values.
    Raises SchemaError naming the record for structurally broken input.
    """
    label = where or f"record {raw.get('id', '?')!r}"
    if not isinstance(raw, Mapping):
        raise SchemaError(f"{label}: not an object")
    record_id = raw.get("id")
    if not isinstance(record_id, str) or not record_id:
        raise SchemaError(f"{label}: missing id")
    uri = raw.get("uri")
    if not isinstance(uri, str) or not uri:
        raise SchemaError(f"{label}: missing uri")

    tags = raw.get("tags") or []
    if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
        raise SchemaError(f"{label}: tags must be a list of strings")
    references = raw.get("references") or []
    if not isinstance(references, list) or not all(isinstance(r, str) for r in references):
        raise SchemaError(f"{label}: references must be a list of strings")
    body = raw.get("text") or ""
    if not isinstance(body, str):
        raise SchemaError(f"{label}: text must be a string")

    return Annotation(
        id=record_id,
        source_uri=uri,
        source_title=_document_title(raw),
        author=_short_username(raw.get("user")),
        quote=_quote_from_targets(raw.get("target")),
        body=body,
        tags=normalize_tags(tags),
        created_at=_timestamp_or_epoch(raw.get("created")),
        updated_at=_timestamp_or_epoch(raw.get("updated"), raw.get("created")),
        reply_to=tuple(references),
    )


def _short_username(user: Any) -> str:
    """acct:jdoe@hypothes.is -> jdoe; anything unrecognizable -> empty."""
    if not isinstance(user, str):
        return ""
    name = user[5:] if user.startswith("acct:") else user
    return name.split("@", 1)[0]


def _quote_from_targets(targets: Any) -> str:
    """The exact selected text, when a quote selector is present."""
    if not isinstance(targets, list):
        return ""
    for target in targets:
        if not isinstance(target, Mapping):
            continue
        selectors = target.get("selector")
        if not isinstance(selectors, list):
            continue
        for selector in selectors:
            if (
                isinstance(selector, Mapping)
                and selector.get("type") == "TextQuoteSelector"
                and isinstance(selector.get("exact"), str)
            ):
                return selector["exact"]
    return ""


def _document_title(raw: Mapping[str, Any]) -> str:
    document = raw.get("document")
    if not isinstance(document, Mapping):
        return ""
    title = document.get("title")
    if isinstance(title, str):
        return title
    if isinstance(title, list) and title and isinstance(title[0], str):
        return title[0]
    return ""


def _timestamp_or_epoch(value: Any, fallback: Any = None) -> str:
    for candidate in (value, fallback):
        if isinstance(candidate, str) and candidate:
            try:
                return normalize_timestamp(candidate)
            except ValueError:
                continue
    return EPOCH_TIMESTAMP


def sort_annotations(annotations: Iterable[Annotation]) -> list[Annotation]:
    """Deterministic batch order regardless of upstream page order."""
    unique: dict[str, Annotation] = {}
    for ann in annotations:
        unique.setdefault(ann.id, ann)
    return sorted(unique.values(), key=lambda a: (a.created_at, a.id))


def load_fixture(path: str | Path) -> list[Annotation]:
    """Read a JSON array of wire records from disk."""
    fixture_path = Path(path)
    try:
        text = fixture_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileError(f"cannot read fixture {fixture_path}: {exc}") from exc
    try:
        data = json.loads(text)
    except ValueError as exc:
        raise SchemaError(f"fixture {fixture_path} is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise SchemaError(f"fixture {fixture_path}: top level must be a JSON array")
    annotations = []
    for index, raw in enumerate(data):
        annotations.append(parse_annotation(raw, where=f"record at index {index}"))
    return sort_annotations(annotations)


def fetch_annotations(
    config: IngestConfig,
    source_uri: str,
    *,
    sleep: Callable[[float], None] = time.sleep,
) -> list[Annotation]:
    """Pull every annotation for a source document, following the cursor.

    Pages by search_after on the last record's created timestamp, retries
    transient failures with exponential backoff (1s, 2s, 4s, ...), and
    raises AuthError immediately on a 401/403.
    """
    annotations: list[Annotation] = []
    search_after: Optional[str] = None
    while True:
        params: dict[str, Any] = {
            "uri": source_uri,
            "limit": config.page_size,
            "sort": "created",
            "order": "asc",
        }
        if config.api_group_id:
            params["group"] = config.api_group_id
        if search_after is not None:
            params["search_after"] = search_after
        page = _get_page(config, params, sleep)
        rows = page.get("rows")
        if not isinstance(rows, list):
            raise SchemaError("page has no 'rows' array")
        for raw in rows:
            annotations.append(parse_annotation(raw))
        if len(rows) < config.page_size:
            break
        last_created = rows[-1].get("created") if isinstance(rows[-1], Mapping) else None
        if not isinstance(last_created, str) or last_created == search_after:
            break  # cursor cannot advance; stop rather than loop forever
        search_after = last_created
    return sort_annotations(annotations)


def _get_page(
    config: IngestConfig,
    params: dict[str, Any],
    sleep: Callable[[float], None],
) -> dict[str, Any]:
    url = config.api_base_url.rstrip("/") + "/search"
    headers = {"Accept": "application/json"}
    if config.api_token:
        headers["Authorization"] = f"Bearer {config.api_token}"
    delay = BACKOFF_BASE_SECONDS
    failure: Optional[str] = None
    for attempt in range(config.max_retries + 1):
        try:
            response = requests.get(url, params=params, headers=headers, timeout=config.timeout)
        except requests.RequestException as exc:
            failure = f"request failed: {exc}"
        else:
            if response.status_code in (401, 403):
                raise AuthError(f"upstream rejected credentials (HTTP {response.status_code})")
            if response.status_code == 200:
                try:
                    page = response.json()
                except ValueError as exc:
                    raise SchemaError(f"page is not valid JSON: {exc}") from exc
                if not isinstance(page, dict):
                    raise SchemaError("page is not a JSON object")
                return page
            if response.status_code in _RETRYABLE_STATUSES:
                failure = f"HTTP {response.status_code}"
            else:
                raise TransportError(f"unexpected HTTP {response.status_code} from upstream")
        if attempt < config.max_retries:
            sleep(delay)
            delay *= BACKOFF_FACTOR
    raise TransportError(f"upstream unreachable after {config.max_retries + 1} attempts ({failure})")


def ingest_into_session(
    session: SynthesisSession,
    annotations: Sequence[Annotation],
    source_uri: Optional[str] = None,
    origin: str = "api",
) -> list[Annotation]:
    """Append one ingest event; returns the annotations that were new.

    Always appends (even for an all-duplicate batch) so the log records
    that an ingest happened.
    """
    new = [a for a in annotations if a.id not in session.annotations]
    append_event(
        session,
        "annotations_ingested",
        {
            "source_uri": source_uri,
            "origin": origin,
            "annotations": [a.to_dict() for a in new],
        },
    )
    return new
