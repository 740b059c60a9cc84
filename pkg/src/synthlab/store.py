"""Durable session storage: append-only event logs plus periodic snapshots.

Layout under the data directory, one subdirectory per session:

    <data_dir>/<session_id>/events.jsonl         one event per line
    <data_dir>/<session_id>/snapshot-<seq>.json  canonical state document

Every event line is flushed and fsynced before the write is acknowledged.
Recovery loads the newest readable snapshot and replays the log tail; with
no usable snapshot it replays from scratch. A log that cannot be parsed
back quarantines that session only (CorruptLog) and is never repaired.
"""

from __future__ import annotations

import json
import logging
import os
from pathlib import Path
from typing import IO, Optional

from synthlab.errors import CorruptLog, DataDirError, MalformedLog
from synthlab.events import apply_event, check_payload, event_from_line, event_to_line, replay
from synthlab.model import (
    SESSION_FORMAT,
    Clock,
    EventRecord,
    SynthesisSession,
    next_id,
    serialize_session,
)

log = logging.getLogger(__name__)

EVENTS_FILENAME = "events.jsonl"
SNAPSHOT_PREFIX = "snapshot-"
SESSION_ID_PREFIX = "ses"


class SessionStore:
    """Owns the data directory; one instance per service process."""

    def __init__(self, data_dir: str | Path, *, snapshot_every: int = 100, fsync: bool = True):
        if snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")
        self.data_dir = Path(data_dir)
        self.snapshot_every = snapshot_every
        self.fsync = fsync
        self._handles: dict[str, IO[str]] = {}
        try:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            probe = self.data_dir / ".write-probe"
            probe.write_text("", encoding="utf-8")
            probe.unlink()
        except OSError as exc:
            raise DataDirError(f"data directory {self.data_dir} is not writable: {exc}") from exc

    # -- paths -------------------------------------------------------------

    def session_dir(self, session_id: str) -> Path:
        return self.data_dir / session_id

    def events_path(self, session_id: str) -> Path:
        return self.session_dir(session_id) / EVENTS_FILENAME

    def session_ids(self) -> list[str]:
        return sorted(
            p.name
            for p in self.data_dir.iterdir()
            if p.is_dir() and p.name.startswith(SESSION_ID_PREFIX + "-")
        )

    def next_session_id(self) -> str:
        return next_id(self.session_ids(), SESSION_ID_PREFIX)

    # -- writing -----------------------------------------------------------

    def attach(self, session: SynthesisSession) -> None:
        """Route the session's events into this store from now on."""
        session.on_event = lambda event: self._on_event(session, event)

    def _on_event(self, session: SynthesisSession, event: EventRecord) -> None:
        self.append_event(session.id, event)
        if event.seq % self.snapshot_every == 0:
            self.write_snapshot(session)

    def append_event(self, session_id: str, event: EventRecord) -> None:
        """Durable append: the call returns only after flush + fsync."""
        handle = self._handles.get(session_id)
        if handle is None:
            directory = self.session_dir(session_id)
            directory.mkdir(parents=True, exist_ok=True)
            handle = open(self.events_path(session_id), "a", encoding="utf-8")
            self._handles[session_id] = handle
        handle.write(event_to_line(event) + "\n")
        handle.flush()
        if self.fsync:
            os.fsync(handle.fileno())

    def write_snapshot(self, session: SynthesisSession) -> Path:
        """Atomically publish a state snapshot; keeps only the newest one."""
        directory = self.session_dir(session.id)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{SNAPSHOT_PREFIX}{session.last_seq:09d}.json"
        tmp = directory / f"{SNAPSHOT_PREFIX}{session.last_seq:09d}.json.tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(serialize_session(session))
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
        for old in directory.glob(SNAPSHOT_PREFIX + "*.json"):
            if old != path:
                old.unlink(missing_ok=True)
        return path

    def close(self) -> None:
        for handle in self._handles.values():
            handle.close()
        self._handles.clear()

    # -- loading -----------------------------------------------------------

    def latest_snapshot(self, session_id: str) -> Optional[Path]:
        directory = self.session_dir(session_id)
        if not directory.is_dir():
            return None
        snapshots = sorted(directory.glob(SNAPSHOT_PREFIX + "*.json"))
        return snapshots[-1] if snapshots else None

    def load_session(self, session_id: str, *, clock: Optional[Clock] = None) -> SynthesisSession:
        """Rebuild one session from disk; raises CorruptLog if it cannot be."""
        events = self._read_events(session_id)
        session = self._recover(session_id, events)
        if clock is not None:
            session.clock = clock
        return session

    def load_all(
        self, *, clock: Optional[Clock] = None
    ) -> tuple[dict[str, SynthesisSession], dict[str, str]]:
        """Load every session directory; damaged ones land in the quarantine map."""
        sessions: dict[str, SynthesisSession] = {}
        quarantined: dict[str, str] = {}
        for session_id in self.session_ids():
            try:
                sessions[session_id] = self.load_session(session_id, clock=clock)
            except CorruptLog as exc:
                log.error("quarantining session %s: %s", session_id, exc)
                quarantined[session_id] = str(exc)
        return sessions, quarantined

    def _read_events(self, session_id: str) -> list[EventRecord]:
        path = self.events_path(session_id)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise CorruptLog(f"{session_id}: cannot read event log: {exc}") from exc
        events: list[EventRecord] = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            try:
                if not line.strip():
                    raise ValueError("blank line")
                event = event_from_line(line)
                check_payload(event.kind, event.payload)
            except (ValueError, KeyError, TypeError, MalformedLog) as exc:
                raise CorruptLog(f"{session_id}: bad event at line {lineno}: {exc}") from exc
            if event.seq != lineno:
                raise CorruptLog(
                    f"{session_id}: event log gap at line {lineno} (seq {event.seq})"
                )
            events.append(event)
        if not events:
            raise CorruptLog(f"{session_id}: event log is empty")
        if events[0].kind != "session_created":
            raise CorruptLog(f"{session_id}: log does not start with session_created")
        return events

    def _recover(self, session_id: str, events: list[EventRecord]) -> SynthesisSession:
        snapshot_path = self.latest_snapshot(session_id)
        if snapshot_path is not None:
            base = self._load_snapshot(snapshot_path)
            if base is not None:
                session, snap_seq = base
                if snap_seq > len(events):
                    raise CorruptLog(
                        f"{session_id}: snapshot at seq {snap_seq} is ahead of the "
                        f"event log ({len(events)} events)"
                    )
                session.event_log = list(events)
                for event in events[snap_seq:]:
                    apply_event(session, event)
                return session
        try:
            return replay(events)
        except (MalformedLog, KeyError) as exc:
            raise CorruptLog(f"{session_id}: replay failed: {exc}") from exc

    def _load_snapshot(self, path: Path) -> Optional[tuple[SynthesisSession, int]]:
        """A broken snapshot is recoverable (the log is authoritative): skip it."""
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            if data.get("format") != SESSION_FORMAT:
                raise ValueError(f"unknown snapshot format: {data.get('format')!r}")
            snap_seq = int(data["last_seq"])
            if snap_seq < 1:
                raise ValueError("snapshot last_seq < 1")
            return SynthesisSession.from_dict(data), snap_seq
        except (ValueError, KeyError, TypeError, OSError) as exc:
            log.warning("ignoring unreadable snapshot %s: %s", path, exc)
            return None
