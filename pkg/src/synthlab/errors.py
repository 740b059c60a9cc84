"""Exception types shared across the package.

Every failure a caller is expected to handle derives from SynthLabError;
the HTTP layer maps these classes onto status codes.
"""

from __future__ import annotations


class SynthLabError(Exception):
    """Base class for all domain and service errors."""


# --- lookup failures (HTTP 404) ---------------------------------------------


class UnknownSession(SynthLabError):
    pass


class UnknownAnnotation(SynthLabError):
    pass


class UnknownGroup(SynthLabError):
    pass


class UnknownEntity(SynthLabError):
    pass


class UnknownDocument(SynthLabError):
    pass


# --- validation failures (HTTP 400) ------------------------------------------


class EmptyLabel(SynthLabError):
    pass


class EmptyNote(SynthLabError):
    pass


class NeedTwoGroups(SynthLabError):
    pass


class NotAMember(SynthLabError):
    pass


class MissingSource(SynthLabError):
    pass


class UnknownSource(SynthLabError):
    pass


class DanglingReference(SynthLabError):
    def __init__(self, ref_id: str):
        super().__init__(f"reference token does not resolve: {ref_id!r}")
        self.ref_id = ref_id


class ScopeViolation(SynthLabError):
    pass


# --- state conflicts (HTTP 409) -----------------------------------------------


class GroupArchived(SynthLabError):
    pass


class SameGroup(SynthLabError):
    pass


# --- ingest (HTTP 502 for upstream trouble, 400 for bad fixtures) -------------


class IngestError(SynthLabError):
    pass


class AuthError(IngestError):
    """Upstream rejected the credentials (HTTP 401/403)."""


class TransportError(IngestError):
    """Upstream unreachable after all retries, or a non-retryable HTTP failure."""


class SchemaError(IngestError):
    """An upstream record or fixture entry failed to parse."""


class FileError(IngestError):
    """Fixture file missing or unreadable."""


# --- event log ----------------------------------------------------------------


class MalformedLog(SynthLabError):
    """Event log has a sequence gap or a kind/payload mismatch."""


class CorruptLog(SynthLabError):
    """On-disk log cannot be read back; the session is quarantined."""


# --- service startup ------------------------------------------------------------


class DataDirError(SynthLabError):
    """Data directory cannot be created or written."""


class BindError(SynthLabError):
    """Listen address cannot be bound."""
